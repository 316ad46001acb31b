"""Shortest-path routing, delay and energy models, and successive alternate paths."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import kernels
from .constellation import Constellation, nearest_satellite
from .geometry import GeodeticCoord, elevation_angle, geodetic_to_ecef, great_circle_distance
from .topology import IslGraph

log = logging.getLogger(__name__)

C_KM_S = 299792.458
MIN_ELEVATION_RAD = math.radians(25.0)

__all__ = [
    "C_KM_S",
    "NoPathError",
    "DelayModel",
    "RoutePath",
    "AlternatePaths",
    "dijkstra",
    "path_weight",
    "fiber_delay",
    "end_to_end_delay",
    "improvement",
    "fspl",
    "path_energy",
    "route",
    "alternate_paths",
]


class NoPathError(Exception):
    """Raised when the destination is unreachable."""


@dataclass(frozen=True)
class DelayModel:
    c_km_s: float = C_KM_S
    refractive_index: float = 1.468
    tau_process_s: float = 5.6e-6
    clk_hz: float = 533e6
    instructions_per_hop: int = 3000

    @classmethod
    def derived(cls, **kw) -> "DelayModel":
        """Processing delay computed as instructions / clock instead of the rounded table value."""
        m = cls(**kw)
        return replace(m, tau_process_s=m.instructions_per_hop / m.clk_hz)

    def without_processing(self) -> "DelayModel":
        return replace(self, tau_process_s=0.0)


@dataclass(frozen=True)
class RoutePath:
    tx: GeodeticCoord
    rx: GeodeticCoord
    sat_ids: tuple[int, ...]
    hop_distances_km: tuple[float, ...]
    d_up_km: float
    d_down_km: float
    total_delay_s: float = 0.0
    propagation_delay_s: float = 0.0
    processing_delay_s: float = 0.0
    total_energy: float = 0.0
    tx_elevation_rad: float = field(default=float("nan"), compare=False)
    rx_elevation_rad: float = field(default=float("nan"), compare=False)

    @property
    def hop_count(self) -> int:
        """ISL segments traversed."""
        return len(self.sat_ids) - 1

    @property
    def n_sats(self) -> int:
        return len(self.sat_ids)

    @property
    def isl_length_km(self) -> float:
        return float(sum(self.hop_distances_km))

    @property
    def path_length_km(self) -> float:
        return self.isl_length_km + self.d_up_km + self.d_down_km

    def to_dict(self) -> dict:
        return {
            "tx": {"lat_deg": self.tx.lat_deg, "lon_deg": self.tx.lon_deg},
            "rx": {"lat_deg": self.rx.lat_deg, "lon_deg": self.rx.lon_deg},
            "sat_ids": list(self.sat_ids),
            "hop_distances_km": list(self.hop_distances_km),
            "hop_count": self.hop_count,
            "n_sats": self.n_sats,
            "d_up_km": self.d_up_km,
            "d_down_km": self.d_down_km,
            "delay": {
                "total_s": self.total_delay_s,
                "propagation_s": self.propagation_delay_s,
                "processing_s": self.processing_delay_s,
            },
            "energy": {
                "total": self.total_energy,
                "sum_sq_km2": float(sum(d * d for d in self.hop_distances_km)),
            },
            "elevation_deg": {
                "tx": math.degrees(self.tx_elevation_rad),
                "rx": math.degrees(self.rx_elevation_rad),
            },
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


class AlternatePaths(NamedTuple):
    paths: list
    truncated: bool


# --------------------------------------------------------------------------
# shortest paths
# --------------------------------------------------------------------------

def _lexicographic_walk(indptr, indices, w, to_dst, src, dst):
    path = [src]
    u = src
    while u != dst:
        lo, hi = indptr[u], indptr[u + 1]
        nb = indices[lo:hi]
        # neighbours lying on some shortest path; rows are sorted so [0] is the smallest id
        on = nb[to_dst[nb] + w[lo:hi] == to_dst[u]]
        u = int(on[0])
        path.append(u)
    return path


def _shortest(g: IslGraph, src: int, dst: int, arc_weights=None, hop_cost: float = 0.0):
    indptr, indices, w, _ = g.csr
    if arc_weights is not None:
        w = arc_weights
    if hop_cost:
        w = w + hop_cost
    w = np.ascontiguousarray(w, dtype=float)
    to_dst = kernels.sssp(indptr, indices, w, dst)
    if not np.isfinite(to_dst[src]):
        raise NoPathError(f"no path from {src} to {dst}")
    return _lexicographic_walk(indptr, indices, w, to_dst, src, dst)


def dijkstra(g: IslGraph, src: int, dst: int, *, hop_cost: float = 0.0) -> list[int]:
    """Minimum-weight path from ``src`` to ``dst`` as a node list.

    Among equal-weight paths the lexicographically smallest node sequence is
    returned. ``hop_cost`` (km) is added to every edge weight, which turns the
    objective into distance plus a per-hop penalty. Raises
    :class:`NoPathError` when ``dst`` is unreachable.
    """
    n = g.node_count
    if not (0 <= src < n and 0 <= dst < n):
        raise IndexError("node id out of range")
    if src == dst:
        return [src]
    return _shortest(g, src, dst, hop_cost=hop_cost)


def path_weight(g: IslGraph, path) -> float:
    total = 0.0
    for u, v in zip(path[:-1], path[1:]):
        total += g.weight(min(u, v), max(u, v))
    return total


# --------------------------------------------------------------------------
# delay / energy
# --------------------------------------------------------------------------

def fiber_delay(d_gc_km: float, model: DelayModel = DelayModel()) -> float:
    """One-way delay over a great-circle fibre of length ``d_gc_km``."""
    if d_gc_km < 0:
        raise ValueError("distance must be >= 0")
    return d_gc_km / (model.c_km_s / model.refractive_index)


def end_to_end_delay(p: RoutePath, model: DelayModel = DelayModel()) -> float:
    """Vacuum propagation over all legs plus processing once per satellite."""
    return p.path_length_km / model.c_km_s + p.n_sats * model.tau_process_s


def improvement(fiber_delay_s: float, sat_delay_s: float) -> float:
    """Relative speed-up of the satellite route over fibre; 0 means equal."""
    return fiber_delay_s / sat_delay_s - 1.0


def fspl(d_km: float, lambda_m: float) -> float:
    """Linear free-space path loss ``(4 pi d / lambda)^2``."""
    if d_km <= 0 or lambda_m <= 0:
        raise ValueError("distance and wavelength must be positive")
    return (4.0 * math.pi * d_km * 1000.0 / lambda_m) ** 2


def path_energy(p: RoutePath, alpha: float = 1.0, e_processing: float = 0.0) -> float:
    """``alpha * sum(d_i^2) + e_processing * K`` over the K ISL hops.

    The ground up/down legs are not counted.
    """
    return alpha * sum(d * d for d in p.hop_distances_km) + e_processing * p.hop_count


# --------------------------------------------------------------------------
# end-to-end routes
# --------------------------------------------------------------------------

def _assemble(c, g, tx, rx, sat_ids, model, alpha, e_processing, min_elevation_rad):
    pos = c.positions
    hops = tuple(g.weight(min(u, v), max(u, v)) for u, v in zip(sat_ids[:-1], sat_ids[1:]))
    up = float(np.linalg.norm(pos[sat_ids[0]] - geodetic_to_ecef(GeodeticCoord(tx.lat_rad, tx.lon_rad))))
    down = float(np.linalg.norm(pos[sat_ids[-1]] - geodetic_to_ecef(GeodeticCoord(rx.lat_rad, rx.lon_rad))))
    el_tx = elevation_angle(tx, pos[sat_ids[0]])
    el_rx = elevation_angle(rx, pos[sat_ids[-1]])
    for name, el in (("tx", el_tx), ("rx", el_rx)):
        if min_elevation_rad is not None and el < min_elevation_rad:
            log.warning("%s attaches at elevation %.1f deg, below %.1f deg",
                        name, math.degrees(el), math.degrees(min_elevation_rad))
    p = RoutePath(tx, rx, tuple(int(s) for s in sat_ids), hops, up, down,
                  tx_elevation_rad=el_tx, rx_elevation_rad=el_rx)
    prop = p.path_length_km / model.c_km_s
    proc = p.n_sats * model.tau_process_s
    return replace(
        p,
        total_delay_s=end_to_end_delay(p, model),
        propagation_delay_s=prop,
        processing_delay_s=proc,
        total_energy=path_energy(p, alpha, e_processing),
    )


def route(c: Constellation, g: IslGraph, tx: GeodeticCoord, rx: GeodeticCoord,
          model: DelayModel = DelayModel(), *, alpha: float = 1.0, e_processing: float = 0.0,
          min_elevation_rad: float = MIN_ELEVATION_RAD, _arc_weights=None) -> RoutePath:
    """Lowest-delay route between two ground points.

    Each endpoint attaches to its nearest satellite; attachments below
    ``min_elevation_rad`` are logged (pass ``None`` to silence). Edges are weighted by
    length plus ``c * tau_process`` so the search minimises the same
    quantity that :func:`end_to_end_delay` reports. Raises
    :class:`NoPathError` when the attach satellites are disconnected.
    """
    if g.node_count != c.n:
        raise ValueError("graph and constellation sizes differ")
    s = nearest_satellite(c, tx)
    t = nearest_satellite(c, rx)
    if s == t:
        sat_ids = [s]
    else:
        sat_ids = _shortest(g, s, t, _arc_weights, hop_cost=model.c_km_s * model.tau_process_s)
    return _assemble(c, g, tx, rx, sat_ids, model, alpha, e_processing, min_elevation_rad)


def alternate_paths(c: Constellation, g: IslGraph, tx: GeodeticCoord, rx: GeodeticCoord,
                    model: DelayModel = DelayModel(), k: int = 10, **route_kw) -> AlternatePaths:
    """Successive best routes, deleting each route's ISLs before the next search.

    Stops early (``truncated=True``) when the endpoints disconnect, or when
    the best route uses a single satellite and so has no link to remove.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _, _, base_w, arc_edge = g.csr
    arc_w = base_w.copy()
    paths = []
    while len(paths) < k:
        try:
            p = route(c, g, tx, rx, model, _arc_weights=arc_w, **route_kw)
        except NoPathError:
            break
        paths.append(p)
        if p.hop_count == 0:
            break
        used = [g.edge_index(min(u, v), max(u, v)) for u, v in zip(p.sat_ids[:-1], p.sat_ids[1:])]
        arc_w[np.isin(arc_edge, used)] = np.inf
    return AlternatePaths(paths, len(paths) < k)


def great_circle_fiber(tx: GeodeticCoord, rx: GeodeticCoord, model: DelayModel = DelayModel()):
    """(d_gc_km, fiber_delay_s) for a terrestrial baseline between two points."""
    d = great_circle_distance(tx, rx)
    return d, fiber_delay(d, model)
