"""Inter-satellite link graphs: nearest-hop (diameter-sphere rule) and cutoff distance."""
from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .constellation import Constellation
from .geometry import EARTH_RADIUS_KM

log = logging.getLogger(__name__)

TROPOSPHERE_KM = 18.0
DEFAULT_CANDIDATES = 16

__all__ = [
    "TROPOSPHERE_KM",
    "DEFAULT_CANDIDATES",
    "TopologyKind",
    "IslGraph",
    "compute_d_max",
    "build_cutoff",
    "sphere_block_test",
    "build_nearest_hop",
    "limit_degree",
]


class TopologyKind(str, enum.Enum):
    NEAREST_HOP = "nearest-hop"
    CUTOFF = "cutoff"


@dataclass(frozen=True, eq=False)
class IslGraph:
    """Undirected weighted ISL graph.

    ``edges`` is an (E, 2) array with ``i < j`` in lexicographic order and
    ``weights`` the matching Euclidean lengths in km.
    """

    node_count: int
    edges: np.ndarray
    weights: np.ndarray
    kind: TopologyKind
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if e.shape[0] != w.shape[0]:
            raise ValueError("edges and weights differ in length")
        if e.size and (np.any(e[:, 0] >= e[:, 1]) or e.min() < 0 or e.max() >= self.node_count):
            raise ValueError("edges must satisfy 0 <= i < j < node_count")
        order = np.lexsort((e[:, 1], e[:, 0]))
        e, w = e[order], w[order]
        if e.shape[0] > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
            raise ValueError("duplicate edge")
        if np.any(w <= 0):
            raise ValueError("edge weights must be positive")
        e.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "kind", TopologyKind(self.kind))
        object.__setattr__(self, "params", dict(self.params))

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.edges}

    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.node_count)

    @cached_property
    def csr(self):
        """(indptr, indices, weights, edge_index) of the symmetric adjacency.

        Neighbours within a row are sorted by node id.
        """
        n = self.node_count
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        eid = np.concatenate([np.arange(self.edge_count)] * 2)
        order = np.lexsort((dst, src))
        src, dst, eid = src[order], dst[order], eid[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return indptr, dst.astype(np.int64), self.weights[eid], eid.astype(np.int64)

    def edge_index(self, i: int, j: int) -> int:
        indptr, indices, _, eid = self.csr
        lo, hi = indptr[i], indptr[i + 1]
        k = lo + int(np.searchsorted(indices[lo:hi], j))
        if k >= hi or indices[k] != j:
            raise KeyError((i, j))
        return int(eid[k])

    def weight(self, i: int, j: int) -> float:
        return float(self.weights[self.edge_index(i, j)])

    def summary(self) -> dict:
        w = self.weights
        return {
            "kind": self.kind.value,
            "nodes": self.node_count,
            "edges": self.edge_count,
            "mean_edge_km": float(w.mean()) if w.size else 0.0,
            "max_edge_km": float(w.max()) if w.size else 0.0,
            **{k: v for k, v in self.params.items()},
        }

    # -- edge-list export ------------------------------------------------

    def to_csv(self, path) -> None:
        """Write ``i,j,weight_km`` rows; a leading ``#`` line carries metadata."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            meta = " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
            fh.write(f"# islnet-edges nodes={self.node_count} kind={self.kind.value} {meta}".rstrip() + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "j", "weight_km"])
            for (i, j), d in zip(self.edges, self.weights):
                w.writerow([int(i), int(j), repr(float(d))])

    @classmethod
    def from_csv(cls, path) -> "IslGraph":
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
            if not first.startswith("# islnet-edges"):
                raise ValueError(f"{path}: not an islnet edge list")
            meta = dict(tok.split("=", 1) for tok in first.split()[2:])
            rows = list(csv.DictReader(fh))
        n = int(meta.pop("nodes"))
        kind = meta.pop("kind")
        params = {k: _parse_scalar(v) for k, v in meta.items()}
        edges = np.array([[int(r["i"]), int(r["j"])] for r in rows], dtype=np.int64).reshape(-1, 2)
        weights = np.array([float(r["weight_km"]) for r in rows], dtype=float)
        return cls(n, edges, weights, kind, params)


def _parse_scalar(v: str):
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    return v


def compute_d_max(h_s_km: float, h_t_km: float = TROPOSPHERE_KM) -> float:
    """Longest ISL whose line of sight clears a shell of altitude ``h_t_km``."""
    if not (h_s_km > h_t_km >= 0):
        raise ValueError("need satellite altitude > grazing altitude >= 0")
    rs = EARTH_RADIUS_KM + h_s_km
    rt = EARTH_RADIUS_KM + h_t_km
    return 2.0 * math.sqrt(rs * rs - rt * rt)


def build_cutoff(c: Constellation, d_max_km: float) -> IslGraph:
    """Link every satellite pair no farther apart than ``d_max_km``."""
    if d_max_km <= 0:
        raise ValueError("d_max must be positive")
    ii, jj, ww = kernels.cutoff_pairs(c.positions, float(d_max_km))
    # coincident satellites have no usable link
    keep = ww > 0
    edges = np.column_stack([ii[keep], jj[keep]])
    return IslGraph(c.n, edges, ww[keep], TopologyKind.CUTOFF, {"d_max_km": float(d_max_km)})


def sphere_block_test(a, b, candidate_set) -> bool:
    """True when some candidate lies in the closed ball with diameter ``ab``.

    Points equal to ``a`` or ``b`` are not considered blockers.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dab = a - b
    dab2 = float(dab @ dab)
    for x in candidate_set:
        x = np.asarray(x, dtype=float)
        if np.array_equal(x, a) or np.array_equal(x, b):
            continue
        dax, dxb = a - x, x - b
        if float(dax @ dax) + float(dxb @ dxb) <= dab2:
            return True
    return False


def build_nearest_hop(c: Constellation, n_candidates: int = DEFAULT_CANDIDATES, *,
                      max_degree: int | None = None, return_rejections: bool = False):
    """Energy-efficient nearest-hop topology.

    Satellite ``i`` links to candidate ``p`` (one of its ``n_candidates``
    nearest satellites) unless another of its candidates lies in the closed
    sphere spanned by ``i`` and ``p``. An edge exists when either endpoint
    admits it. With ``n_candidates = N - 1`` the result is the Gabriel graph
    of the satellite positions.

    With ``return_rejections`` the (M, 3) array of ``(i, p, blocker)``
    triples is returned alongside the graph.
    """
    n = c.n
    if n < 2:
        raise ValueError("need at least two satellites")
    if n_candidates < 1:
        raise ValueError("n_candidates must be >= 1")
    if n_candidates >= n:
        log.warning("n_candidates=%d clamped to N-1=%d", n_candidates, n - 1)
        n_candidates = n - 1
    pos = c.positions
    adm_i, adm_p, rejected = kernels.nearest_hop_pairs(pos, n_candidates)
    lo = np.minimum(adm_i, adm_p)
    hi = np.maximum(adm_i, adm_p)
    pairs = np.unique(np.column_stack([lo, hi]), axis=0)
    d = pos[pairs[:, 0]] - pos[pairs[:, 1]]
    w = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2])
    keep = w > 0
    g = IslGraph(n, pairs[keep], w[keep], TopologyKind.NEAREST_HOP, {"n_candidates": int(n_candidates)})
    if max_degree is not None:
        g = limit_degree(g, max_degree)
    if return_rejections:
        return g, rejected
    return g


def limit_degree(g: IslGraph, max_degree: int) -> IslGraph:
    """Greedy port limit: admit edges shortest-first while both ends have a free port."""
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    order = np.lexsort((g.edges[:, 1], g.edges[:, 0], g.weights))
    deg = np.zeros(g.node_count, dtype=np.int64)
    keep = np.zeros(g.edge_count, dtype=bool)
    for k in order:
        i, j = g.edges[k]
        if deg[i] < max_degree and deg[j] < max_degree:
            deg[i] += 1
            deg[j] += 1
            keep[k] = True
    return IslGraph(g.node_count, g.edges[keep], g.weights[keep], g.kind,
                    {**g.params, "max_degree": int(max_degree)})
