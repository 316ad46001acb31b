"""Batch experiments: delay-improvement sweeps, constellation contrasts and city-pair alternate paths.

Every random draw comes from ``master_seed``: the random constellation uses
it directly and trial ``t`` samples its endpoints from
``SeedSequence([master_seed, t])``, so trials are order-independent.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources

import numpy as np

from . import __version__
from ._accel import USE_NUMBA
from .constellation import (
    Constellation,
    ConstellationKind,
    generate_random,
    generate_walker_delta,
    generate_walker_star,
    propagate,
)
from .geometry import GeodeticCoord, great_circle_distance
from .routing import DelayModel, NoPathError, alternate_paths, fiber_delay, improvement, route
from .topology import (
    DEFAULT_CANDIDATES,
    TROPOSPHERE_KM,
    IslGraph,
    TopologyKind,
    build_cutoff,
    build_nearest_hop,
    compute_d_max,
)

log = logging.getLogger(__name__)

__all__ = [
    "ConstellationSpec",
    "TopologySpec",
    "DelaySpec",
    "EndpointSpec",
    "ExperimentConfig",
    "RecordSet",
    "SWEEP_FIELDS",
    "CITY_FIELDS",
    "load_cities",
    "sample_endpoints",
    "sweep_improvement",
    "compare_constellations",
    "city_pair_study",
    "bucket_improvement",
    "summarize",
    "round_to_planes",
]

def round_to_planes(n: int, p: int) -> int:
    """Nearest multiple of ``p`` to ``n`` (halves round up), at least ``p``."""
    return p * max(1, math.floor(n / p + 0.5))


_DEFAULT_INCLINATION_DEG = {
    ConstellationKind.WALKER_STAR: 90.0,
    ConstellationKind.WALKER_DELTA: 53.0,
}


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

def _strict(cls, data: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {', '.join(sorted(unknown))}")
    return cls(**data)


@dataclass(frozen=True)
class ConstellationSpec:
    kind: str = "random"
    n: int = 1000
    p: int = 12
    altitude_km: float = 550.0
    inclination_deg: float | None = None
    phasing: int = 0
    seed: int | None = None
    # Walker shells need P | N; round N to the nearest multiple of P instead of failing
    round_to_planes: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", ConstellationKind(self.kind).value)

    def effective_n(self, n: int | None = None) -> int:
        n = self.n if n is None else n
        if self.kind == ConstellationKind.RANDOM.value or not self.round_to_planes:
            return n
        return round_to_planes(n, self.p)

    def build(self, n: int | None = None, master_seed: int = 0) -> Constellation:
        kind = ConstellationKind(self.kind)
        n = self.effective_n(n)
        if kind is ConstellationKind.RANDOM:
            return generate_random(n, self.altitude_km, master_seed if self.seed is None else self.seed)
        inc = self.inclination_deg if self.inclination_deg is not None else _DEFAULT_INCLINATION_DEG[kind]
        if kind is ConstellationKind.WALKER_STAR:
            return generate_walker_star(n, self.p, self.altitude_km, math.radians(inc))
        return generate_walker_delta(n, self.p, self.altitude_km, math.radians(inc), self.phasing)


@dataclass(frozen=True)
class TopologySpec:
    kind: str = "cutoff"
    n_candidates: int = DEFAULT_CANDIDATES
    d_max_km: float | str = "auto"
    troposphere_km: float = TROPOSPHERE_KM
    max_degree: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", TopologyKind(self.kind).value)
        if isinstance(self.d_max_km, str) and self.d_max_km != "auto":
            object.__setattr__(self, "d_max_km", float(self.d_max_km))

    def resolve_d_max(self, altitude_km: float) -> float:
        if self.d_max_km == "auto":
            return compute_d_max(altitude_km, self.troposphere_km)
        return float(self.d_max_km)

    def build(self, c: Constellation, kind: str | None = None) -> IslGraph:
        kind = TopologyKind(kind or self.kind)
        if kind is TopologyKind.CUTOFF:
            return build_cutoff(c, self.resolve_d_max(c.altitude_km))
        return build_nearest_hop(c, min(self.n_candidates, c.n - 1), max_degree=self.max_degree)


@dataclass(frozen=True)
class DelaySpec:
    refractive_index: float = 1.468
    tau_process_s: float = 5.6e-6
    derived_processing: bool = False
    clk_hz: float = 533e6
    instructions_per_hop: int = 3000
    alpha: float = 1.0
    e_processing: float = 0.0

    def model(self) -> DelayModel:
        kw = dict(refractive_index=self.refractive_index, tau_process_s=self.tau_process_s,
                  clk_hz=self.clk_hz, instructions_per_hop=self.instructions_per_hop)
        return DelayModel.derived(**kw) if self.derived_processing else DelayModel(**kw)


@dataclass(frozen=True)
class EndpointSpec:
    sampler: str = "uniform"
    pairs: tuple = ()

    def __post_init__(self):
        if self.sampler not in ("uniform", "cities"):
            raise ValueError(f"unknown endpoint sampler {self.sampler!r}")
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))


@dataclass(frozen=True)
class ExperimentConfig:
    constellation: ConstellationSpec = field(default_factory=ConstellationSpec)
    topology: TopologySpec = field(default_factory=TopologySpec)
    delay: DelaySpec = field(default_factory=DelaySpec)
    endpoints: EndpointSpec = field(default_factory=EndpointSpec)
    trial_count: int = 100
    master_seed: int = 0
    n_values: tuple = ()
    kinds: tuple = ()
    topologies: tuple = ()
    processing_arms: tuple = (True,)
    epochs_s: tuple = (0.0,)
    bin_km: float = 500.0
    k_paths: int = 10

    def __post_init__(self):
        for name in ("n_values", "kinds", "topologies", "processing_arms", "epochs_s"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.trial_count < 0:
            raise ValueError("trial_count must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        sections = {
            "constellation": ConstellationSpec,
            "topology": TopologySpec,
            "delay": DelaySpec,
            "endpoints": EndpointSpec,
        }
        kw = {name: _strict(sub, data.pop(name, {})) for name, sub in sections.items()}
        top = data.pop("experiment", {})
        overlap = set(top) & set(data)
        if overlap:
            raise ValueError(f"keys given twice: {sorted(overlap)}")
        top.update(data)
        kw.update(top)
        return _strict(cls, kw)

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        with open(path, "rb") as fh:
            return cls.from_dict(tomllib.load(fh))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), default=list)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


# --------------------------------------------------------------------------
# records
# --------------------------------------------------------------------------

SWEEP_FIELDS = (
    "trial", "constellation", "topology", "N", "processing", "epoch_s",
    "tx_lat_deg", "tx_lon_deg", "rx_lat_deg", "rx_lon_deg",
    "d_gc_km", "sat_delay_s", "propagation_delay_s", "processing_delay_s",
    "fiber_delay_s", "improvement", "hop_count", "n_sats", "energy", "min_elevation_deg", "failed",
)

CITY_FIELDS = (
    "pair", "tx", "rx", "constellation", "topology", "N", "epoch_s", "rank",
    "d_gc_km", "sat_delay_s", "fiber_delay_s", "improvement", "hop_count", "n_sats",
    "energy", "truncated",
)


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class RecordSet:
    fields: tuple
    rows: list
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.rows)

    def column(self, name) -> np.ndarray:
        return np.array([r[name] for r in self.rows])

    def where(self, **match) -> "RecordSet":
        rows = [r for r in self.rows if all(r[k] == v for k, v in match.items())]
        return RecordSet(self.fields, rows, self.metadata)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.fields)
        for r in self.rows:
            w.writerow([_fmt(r[f]) for f in self.fields])
        return buf.getvalue()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.csv_text())

    def to_json(self, path=None) -> str:
        doc = {"metadata": self.metadata, "fields": list(self.fields), "rows": self.rows}
        text = json.dumps(doc, indent=1, allow_nan=True)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        return text


def _metadata(cfg: ExperimentConfig, experiment: str) -> dict:
    return {
        "experiment": experiment,
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "versions": {
            "islnet": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "numba_kernels": USE_NUMBA,
        },
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


# --------------------------------------------------------------------------
# endpoints
# --------------------------------------------------------------------------

def load_cities() -> dict:
    """Bundled city table: ``{"cities": {name: (lat_deg, lon_deg)}, "pairs": [...]}``."""
    text = resources.files("islnet").joinpath("data/cities.json").read_text(encoding="utf-8")
    doc = json.loads(text)
    doc["cities"] = {k: tuple(v) for k, v in doc["cities"].items()}
    doc["pairs"] = [tuple(p) for p in doc["pairs"]]
    return doc


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(trial)]))


def sample_endpoints(master_seed: int, trial: int) -> tuple[GeodeticCoord, GeodeticCoord]:
    """Two independent points uniform on the sphere for one trial."""
    rng = trial_rng(master_seed, trial)
    sin_lat = rng.uniform(-1.0, 1.0, 2)
    lon = rng.uniform(-math.pi, math.pi, 2)
    lat = np.arcsin(sin_lat)
    return GeodeticCoord(float(lat[0]), float(lon[0])), GeodeticCoord(float(lat[1]), float(lon[1]))


def _resolve_pairs(pairs) -> list[tuple[str, GeodeticCoord, str, GeodeticCoord]]:
    cities = load_cities()["cities"]
    out = []

    def one(x):
        if isinstance(x, GeodeticCoord):
            return f"{x.lat_deg:.4f},{x.lon_deg:.4f}", x
        if x not in cities:
            raise KeyError(f"unknown city {x!r}; known: {', '.join(cities)}")
        return x, GeodeticCoord.from_degrees(*cities[x])

    for a, b in pairs:
        out.append((*one(a), *one(b)))
    return out


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def _snapshots(cfg: ExperimentConfig, spec: ConstellationSpec, n: int):
    base = spec.build(n, cfg.master_seed)
    for t in cfg.epochs_s:
        yield float(t), propagate(base, float(t))


def _sweep_rows(cfg, spec, topo_kinds, n, endpoints):
    model = cfg.delay.model()
    if not any(cfg.processing_arms):
        model = model.without_processing()
    rows = []
    for epoch, c in _snapshots(cfg, spec, n):
        for topo in topo_kinds:
            g = cfg.topology.build(c, topo)
            for trial, (tx, rx) in enumerate(endpoints):
                d_gc = great_circle_distance(tx, rx)
                fib = fiber_delay(d_gc, model)
                try:
                    p = route(c, g, tx, rx, model, alpha=cfg.delay.alpha, e_processing=cfg.delay.e_processing,
                              min_elevation_rad=None)
                except NoPathError:
                    p = None
                # processing arms are two accountings of the same route
                for processing in cfg.processing_arms:
                    row = {
                        "trial": trial, "constellation": spec.kind, "topology": topo, "N": c.n,
                        "processing": bool(processing), "epoch_s": epoch,
                        "tx_lat_deg": tx.lat_deg, "tx_lon_deg": tx.lon_deg,
                        "rx_lat_deg": rx.lat_deg, "rx_lon_deg": rx.lon_deg,
                        "d_gc_km": d_gc, "fiber_delay_s": fib,
                    }
                    if p is None:
                        nan = float("nan")
                        row.update(sat_delay_s=nan, propagation_delay_s=nan, processing_delay_s=nan,
                                   improvement=nan, hop_count=-1, n_sats=0, energy=nan, min_elevation_deg=nan,
                                   failed=True)
                    else:
                        proc = p.processing_delay_s if processing else 0.0
                        sat = p.propagation_delay_s + proc
                        row.update(sat_delay_s=sat, propagation_delay_s=p.propagation_delay_s,
                                   processing_delay_s=proc, improvement=improvement(fib, sat),
                                   hop_count=p.hop_count, n_sats=p.n_sats, energy=p.total_energy,
                                   min_elevation_deg=math.degrees(min(p.tx_elevation_rad, p.rx_elevation_rad)),
                                   failed=False)
                    rows.append(row)
    return rows


def _uniform_endpoints(cfg: ExperimentConfig):
    return [sample_endpoints(cfg.master_seed, t) for t in range(cfg.trial_count)]


def sweep_improvement(cfg: ExperimentConfig) -> RecordSet:
    """Satellite-vs-fibre delay for random endpoint pairs, for each N in ``cfg.n_values``.

    Failed routes are kept as rows with ``failed=1``.
    """
    endpoints = _uniform_endpoints(cfg)
    rows = []
    topo_kinds = cfg.topologies or (cfg.topology.kind,)
    for n in cfg.n_values or (cfg.constellation.n,):
        rows += _sweep_rows(cfg, cfg.constellation, topo_kinds, n, endpoints)
    return RecordSet(SWEEP_FIELDS, rows, _metadata(cfg, "sweep"))


def compare_constellations(cfg: ExperimentConfig) -> RecordSet:
    """Paired sweep: identical endpoint samples across constellation kinds and topologies."""
    endpoints = _uniform_endpoints(cfg)
    kinds = cfg.kinds or tuple(k.value for k in ConstellationKind)
    topo_kinds = cfg.topologies or tuple(t.value for t in TopologyKind)
    rows = []
    for n in cfg.n_values or (cfg.constellation.n,):
        for kind in kinds:
            spec = dataclasses.replace(cfg.constellation, kind=kind)
            rows += _sweep_rows(cfg, spec, topo_kinds, n, endpoints)
    return RecordSet(SWEEP_FIELDS, rows, _metadata(cfg, "compare"))


def city_pair_study(pairs, cfg: ExperimentConfig) -> RecordSet:
    """Successive alternate paths between named (or explicit) endpoint pairs.

    ``pairs`` holds ``(a, b)`` tuples of city names from the bundled table or
    :class:`GeodeticCoord` values. Every (constellation, topology) arm records
    up to ``cfg.k_paths`` delays; ``truncated`` marks arms that ran out of paths.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one endpoint pair")
    resolved = _resolve_pairs(pairs)
    model = cfg.delay.model()
    kinds = cfg.kinds or tuple(k.value for k in ConstellationKind)
    topo_kinds = cfg.topologies or tuple(t.value for t in TopologyKind)
    rows = []
    for n in cfg.n_values or (cfg.constellation.n,):
        for kind in kinds:
            spec = dataclasses.replace(cfg.constellation, kind=kind)
            for epoch, c in _snapshots(cfg, spec, n):
                for topo in topo_kinds:
                    g = cfg.topology.build(c, topo)
                    for name_a, ga, name_b, gb in resolved:
                        d_gc = great_circle_distance(ga, gb)
                        fib = fiber_delay(d_gc, model)
                        alt = alternate_paths(c, g, ga, gb, model, k=cfg.k_paths,
                                              alpha=cfg.delay.alpha, e_processing=cfg.delay.e_processing,
                                              min_elevation_rad=None)
                        for rank, p in enumerate(alt.paths):
                            rows.append({
                                "pair": f"{name_a}-{name_b}", "tx": name_a, "rx": name_b,
                                "constellation": kind, "topology": topo, "N": c.n, "epoch_s": epoch,
                                "rank": rank, "d_gc_km": d_gc, "sat_delay_s": p.total_delay_s,
                                "fiber_delay_s": fib, "improvement": improvement(fib, p.total_delay_s),
                                "hop_count": p.hop_count, "n_sats": p.n_sats, "energy": p.total_energy,
                                "truncated": alt.truncated,
                            })
                        if not alt.paths:
                            log.warning("%s-%s: no route on %s/%s", name_a, name_b, kind, topo)
    return RecordSet(CITY_FIELDS, rows, _metadata(cfg, "cities"))


def bucket_improvement(records: RecordSet, bin_km: float = 500.0) -> list[dict]:
    """Mean improvement per great-circle distance bin, failed rows skipped."""
    ok = [r for r in records.rows if not r.get("failed", False)]
    if not ok:
        return []
    d = np.array([r["d_gc_km"] for r in ok])
    imp = np.array([r["improvement"] for r in ok])
    idx = np.floor(d / bin_km).astype(int)
    out = []
    for b in np.unique(idx):
        sel = idx == b
        out.append({"lo_km": float(b * bin_km), "hi_km": float((b + 1) * bin_km),
                    "count": int(sel.sum()), "mean_improvement": float(imp[sel].mean())})
    return out


def summarize(records: RecordSet) -> list[dict]:
    """Per-arm means of delay and improvement (sweep/compare record sets)."""
    groups: dict = {}
    for r in records.rows:
        if r.get("failed"):
            continue
        key = (r["constellation"], r["topology"], r["N"], r.get("processing", True))
        groups.setdefault(key, []).append(r)
    out = []
    for (kind, topo, n, proc), rows in sorted(groups.items(), key=lambda kv: tuple(map(str, kv[0]))):
        out.append({
            "constellation": kind, "topology": topo, "N": n, "processing": proc, "count": len(rows),
            "mean_sat_delay_s": float(np.mean([r["sat_delay_s"] for r in rows])),
            "mean_improvement": float(np.mean([r["improvement"] for r in rows])),
            "mean_hops": float(np.mean([r["hop_count"] for r in rows])),
        })
    return out
