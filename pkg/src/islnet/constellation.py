"""Constellation generators (random, Walker-Star, Walker-Delta) and circular-orbit propagation."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .geometry import EARTH_RADIUS_KM, GeodeticCoord, geodetic_to_ecef

MU_EARTH = 398600.4418  # km^3 / s^2
TWO_PI = 2.0 * math.pi

__all__ = [
    "MU_EARTH",
    "ConstellationKind",
    "Satellite",
    "Constellation",
    "orbit_positions",
    "mean_motion",
    "orbital_period",
    "generate_random",
    "generate_walker_star",
    "generate_walker_delta",
    "propagate",
    "nearest_satellite",
]


class ConstellationKind(str, enum.Enum):
    RANDOM = "random"
    WALKER_STAR = "walker-star"
    WALKER_DELTA = "walker-delta"


def _wrap(angle):
    out = np.mod(angle, TWO_PI)
    return np.where(out >= TWO_PI, 0.0, out)


def orbit_positions(raan, inclination, anomaly, altitude_km) -> np.ndarray:
    """Positions (N, 3) on circular orbits, argument of perigee zero."""
    raan = np.asarray(raan, dtype=float)
    inc = np.asarray(inclination, dtype=float)
    u = np.asarray(anomaly, dtype=float)
    r = EARTH_RADIUS_KM + np.asarray(altitude_km, dtype=float)
    co, so = np.cos(raan), np.sin(raan)
    cu, su = np.cos(u), np.sin(u)
    ci, si = np.cos(inc), np.sin(inc)
    x = co * cu - so * su * ci
    y = so * cu + co * su * ci
    z = su * si
    return np.stack([x, y, z], axis=-1) * np.asarray(r)[..., None]


def mean_motion(altitude_km: float) -> float:
    """Angular rate in rad/s of a circular orbit at the given altitude."""
    return math.sqrt(MU_EARTH / (EARTH_RADIUS_KM + altitude_km) ** 3)


def orbital_period(altitude_km: float) -> float:
    return TWO_PI / mean_motion(altitude_km)


@dataclass(frozen=True)
class Satellite:
    id: int
    plane_id: int
    raan_rad: float
    inclination_rad: float
    true_anomaly_rad: float
    altitude_km: float
    position: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Immutable satellite population stored as per-element arrays.

    ``satellites`` materialises :class:`Satellite` records on demand;
    ``positions`` is the (N, 3) ECEF snapshot used everywhere else.
    """

    kind: ConstellationKind
    altitude_km: float
    plane_id: np.ndarray
    raan: np.ndarray
    inclination: np.ndarray
    anomaly: np.ndarray
    p: int = 0
    seed: int | None = None
    phasing: int = 0
    epoch_s: float = 0.0

    def __post_init__(self):
        for name in ("plane_id", "raan", "inclination", "anomaly"):
            arr = np.array(getattr(self, name), dtype=np.int64 if name == "plane_id" else float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "kind", ConstellationKind(self.kind))

    @property
    def n(self) -> int:
        return int(self.anomaly.shape[0])

    def __len__(self) -> int:
        return self.n

    @cached_property
    def positions(self) -> np.ndarray:
        pos = orbit_positions(self.raan, self.inclination, self.anomaly, self.altitude_km)
        pos.setflags(write=False)
        return pos

    @property
    def satellites(self) -> list[Satellite]:
        pos = self.positions
        return [
            Satellite(i, int(self.plane_id[i]), float(self.raan[i]), float(self.inclination[i]),
                      float(self.anomaly[i]), self.altitude_km, pos[i])
            for i in range(self.n)
        ]

    def same_as(self, other: "Constellation") -> bool:
        return (
            self.kind == other.kind
            and self.altitude_km == other.altitude_km
            and self.p == other.p
            and self.seed == other.seed
            and self.phasing == other.phasing
            and all(np.array_equal(getattr(self, a), getattr(other, a))
                    for a in ("plane_id", "raan", "inclination", "anomaly"))
        )

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": "islnet-constellation/1",
            "kind": self.kind.value,
            "n": self.n,
            "p": self.p,
            "altitude_km": self.altitude_km,
            "seed": self.seed,
            "phasing": self.phasing,
            "epoch_s": self.epoch_s,
            "satellites": [
                {
                    "id": i,
                    "plane_id": int(self.plane_id[i]),
                    "raan_rad": float(self.raan[i]),
                    "inclination_rad": float(self.inclination[i]),
                    "true_anomaly_rad": float(self.anomaly[i]),
                }
                for i in range(self.n)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Constellation":
        sats = sorted(doc["satellites"], key=lambda s: s["id"])
        if not sats:
            raise ValueError("constellation has no satellites")
        if [s["id"] for s in sats] != list(range(len(sats))):
            raise ValueError("satellite ids must be 0..N-1")
        return cls(
            kind=ConstellationKind(doc["kind"]),
            altitude_km=float(doc["altitude_km"]),
            plane_id=[s["plane_id"] for s in sats],
            raan=[s["raan_rad"] for s in sats],
            inclination=[s["inclination_rad"] for s in sats],
            anomaly=[s["true_anomaly_rad"] for s in sats],
            p=int(doc.get("p", 0)),
            seed=doc.get("seed"),
            phasing=int(doc.get("phasing", 0)),
            epoch_s=float(doc.get("epoch_s", 0.0)),
        )

    def to_json(self, path=None, indent: int | None = 1) -> str:
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_json(cls, path) -> "Constellation":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def generate_random(n: int, h_km: float, seed: int) -> Constellation:
    """Uniform-on-sphere snapshot, each satellite on its own random circular orbit.

    Positions take lon ~ U[0, 2pi) and sin(lat) ~ U[-1, 1]; the direction of
    motion is uniform in the local tangent plane. The orbital elements are
    then solved so that the orbit passes through the sampled position.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if h_km <= 0:
        raise ValueError("altitude must be positive")
    rng = np.random.default_rng(seed)
    lon = rng.uniform(0.0, TWO_PI, n)
    sin_lat = rng.uniform(-1.0, 1.0, n)
    heading = rng.uniform(0.0, TWO_PI, n)

    cos_lat = np.sqrt(1.0 - sin_lat * sin_lat)
    rhat = np.stack([cos_lat * np.cos(lon), cos_lat * np.sin(lon), sin_lat], axis=-1)
    east = np.stack([-np.sin(lon), np.cos(lon), np.zeros(n)], axis=-1)
    north = np.cross(rhat, east)
    vhat = np.cos(heading)[:, None] * north + np.sin(heading)[:, None] * east
    hvec = np.cross(rhat, vhat)

    inc = np.arccos(np.clip(hvec[:, 2], -1.0, 1.0))
    raan = np.arctan2(hvec[:, 0], -hvec[:, 1])
    # equatorial orbits have no node line; measure anomaly from +x
    equatorial = np.hypot(hvec[:, 0], hvec[:, 1]) < 1e-12
    raan = np.where(equatorial, 0.0, raan)
    node = np.stack([np.cos(raan), np.sin(raan), np.zeros(n)], axis=-1)
    in_plane = np.cross(hvec, node)
    anomaly = np.arctan2(np.einsum("ij,ij->i", rhat, in_plane), np.einsum("ij,ij->i", rhat, node))

    return Constellation(
        kind=ConstellationKind.RANDOM,
        altitude_km=float(h_km),
        plane_id=np.full(n, -1),
        raan=_wrap(raan),
        inclination=inc,
        anomaly=_wrap(anomaly),
        p=0,
        seed=int(seed),
    )


def _walker(kind, n, p, h_km, inclination_rad, raan_span, phasing):
    if n <= 0 or p <= 0:
        raise ValueError("n and p must be positive")
    if n % p:
        raise ValueError(f"{p} planes do not divide {n} satellites")
    if not (0 <= phasing < p):
        raise ValueError(f"phasing factor must lie in [0, {p})")
    if h_km <= 0:
        raise ValueError("altitude must be positive")
    s = n // p
    plane = np.repeat(np.arange(p), s)
    slot = np.tile(np.arange(s), p)
    raan = plane * (raan_span / p)
    anomaly = TWO_PI * slot / s + TWO_PI * plane * phasing / n
    return Constellation(
        kind=kind,
        altitude_km=float(h_km),
        plane_id=plane,
        raan=_wrap(raan),
        inclination=np.full(n, float(inclination_rad)),
        anomaly=_wrap(anomaly),
        p=int(p),
        phasing=int(phasing),
    )


def generate_walker_star(n: int, p: int, h_km: float, inclination_rad: float = math.pi / 2) -> Constellation:
    """Near-polar Walker constellation, plane RAANs spread over [0, pi)."""
    return _walker(ConstellationKind.WALKER_STAR, n, p, h_km, inclination_rad, math.pi, 0)


def generate_walker_delta(n: int, p: int, h_km: float, inclination_rad: float = math.radians(53.0),
                          phasing_f: int = 0) -> Constellation:
    """Walker-Delta i:N/P/F, plane RAANs spread over [0, 2pi)."""
    return _walker(ConstellationKind.WALKER_DELTA, n, p, h_km, inclination_rad, TWO_PI, phasing_f)


def propagate(c: Constellation, t_seconds: float) -> Constellation:
    """Advance every satellite along its circular orbit by ``t_seconds``.

    Two-body motion only: RAAN and inclination stay fixed.
    """
    if t_seconds < 0:
        raise ValueError("propagation time must be >= 0")
    if t_seconds == 0:
        return c
    anomaly = _wrap(c.anomaly + mean_motion(c.altitude_km) * t_seconds)
    return replace(c, anomaly=anomaly, epoch_s=c.epoch_s + t_seconds)


def nearest_satellite(c: Constellation, g: GeodeticCoord) -> int:
    """Index of the satellite closest (straight line) to ``g``; lowest id on ties."""
    if c.n == 0:
        raise ValueError("empty constellation")
    pos = c.positions
    q = geodetic_to_ecef(g)
    d = pos - q
    d2 = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2]
    return int(np.argmin(d2))
