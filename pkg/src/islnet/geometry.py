"""Spherical-Earth coordinates, great-circle distance and satellite footprints.

All angles are radians. Distances are kilometres. The Earth is a sphere of
radius :data:`EARTH_RADIUS_KM`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_KM = 6371.0

__all__ = [
    "EARTH_RADIUS_KM",
    "GeodeticCoord",
    "FootprintSpec",
    "normalize_lon",
    "geodetic_to_ecef",
    "ecef_to_geodetic",
    "latlon_to_unit",
    "great_circle_distance",
    "central_angle",
    "elevation_angle",
    "footprint_spec",
    "footprint_boundary",
]


def normalize_lon(lon: float) -> float:
    """Wrap a longitude into [-pi, pi)."""
    out = (lon + math.pi) % (2.0 * math.pi) - math.pi
    # float modulo can land exactly on +pi
    return -math.pi if out >= math.pi else out


@dataclass(frozen=True)
class GeodeticCoord:
    lat_rad: float
    lon_rad: float
    alt_km: float = 0.0

    def __post_init__(self):
        lat = float(self.lat_rad)
        if not (-math.pi / 2 <= lat <= math.pi / 2):
            raise ValueError(f"latitude {lat!r} rad outside [-pi/2, pi/2]")
        if not math.isfinite(self.lon_rad):
            raise ValueError("longitude must be finite")
        if self.alt_km < 0:
            raise ValueError("altitude must be >= 0 km")
        object.__setattr__(self, "lat_rad", lat)
        object.__setattr__(self, "lon_rad", normalize_lon(float(self.lon_rad)))
        object.__setattr__(self, "alt_km", float(self.alt_km))

    @classmethod
    def from_degrees(cls, lat_deg: float, lon_deg: float, alt_km: float = 0.0) -> "GeodeticCoord":
        return cls(math.radians(lat_deg), math.radians(lon_deg), alt_km)

    @property
    def lat_deg(self) -> float:
        return math.degrees(self.lat_rad)

    @property
    def lon_deg(self) -> float:
        return math.degrees(self.lon_rad)


@dataclass(frozen=True)
class FootprintSpec:
    """Coverage cone of one satellite at a minimum elevation angle.

    ``a_km`` is the longest slant range, ``psi_rad`` the full beamwidth seen
    from the satellite, ``phi_rad`` the Earth-central half-angle of the
    covered spherical cap and ``area_km2`` that cap's area.
    """

    h_km: float
    theta_min_rad: float
    a_km: float
    psi_rad: float
    phi_rad: float
    area_km2: float


def geodetic_to_ecef(g: GeodeticCoord) -> np.ndarray:
    r = EARTH_RADIUS_KM + g.alt_km
    cl = math.cos(g.lat_rad)
    return np.array([r * cl * math.cos(g.lon_rad), r * cl * math.sin(g.lon_rad), r * math.sin(g.lat_rad)])


def ecef_to_geodetic(v) -> GeodeticCoord:
    x, y, z = (float(c) for c in v)
    r = math.sqrt(x * x + y * y + z * z)
    if r == 0.0:
        raise ValueError("the Earth's centre has no geodetic coordinates")
    lat = math.atan2(z, math.hypot(x, y))
    lon = math.atan2(y, x)
    return GeodeticCoord(lat, lon, max(r - EARTH_RADIUS_KM, 0.0))


def latlon_to_unit(lat, lon) -> np.ndarray:
    """Vectorized unit vectors for arrays of latitude/longitude, shape (..., 3)."""
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    cl = np.cos(lat)
    return np.stack([cl * np.cos(lon), cl * np.sin(lon), np.sin(lat)], axis=-1)


def central_angle(g1: GeodeticCoord, g2: GeodeticCoord) -> float:
    """Earth-central angle between two coordinates, haversine form."""
    dlat = g2.lat_rad - g1.lat_rad
    dlon = g2.lon_rad - g1.lon_rad
    hav = math.sin(dlat / 2) ** 2 + math.cos(g1.lat_rad) * math.cos(g2.lat_rad) * math.sin(dlon / 2) ** 2
    return 2.0 * math.asin(math.sqrt(min(1.0, max(0.0, hav))))


def great_circle_distance(g1: GeodeticCoord, g2: GeodeticCoord) -> float:
    """Surface distance in km between two coordinates; altitudes are ignored."""
    return EARTH_RADIUS_KM * central_angle(g1, g2)


def elevation_angle(ground: GeodeticCoord, sat) -> float:
    """Elevation of the satellite above the local horizon at ``ground``.

    ``ground`` is projected to the surface. Raises ``ValueError`` for a
    satellite position at or below the surface.
    """
    s = np.asarray(sat, dtype=float)
    if np.linalg.norm(s) <= EARTH_RADIUS_KM:
        raise ValueError("satellite position is not above the Earth's surface")
    up = latlon_to_unit(ground.lat_rad, ground.lon_rad)
    los = s - EARTH_RADIUS_KM * up
    sin_el = float(np.dot(los, up)) / float(np.linalg.norm(los))
    return math.asin(min(1.0, max(-1.0, sin_el)))


def footprint_spec(h_km: float, theta_min_rad: float) -> FootprintSpec:
    if h_km <= 0:
        raise ValueError("altitude must be positive")
    if not (0.0 <= theta_min_rad < math.pi / 2):
        raise ValueError("minimum elevation must lie in [0, pi/2)")
    re = EARTH_RADIUS_KM
    r = re + h_km
    s, c = math.sin(theta_min_rad), math.cos(theta_min_rad)
    slant = re * (math.sqrt((r / re) ** 2 - c * c) - s)
    eta = math.asin(re / r * c)  # half beamwidth at the satellite (nadir angle)
    phi = math.pi / 2 - theta_min_rad - eta
    area = 2.0 * math.pi * re * re * (1.0 - math.cos(phi))
    return FootprintSpec(h_km, theta_min_rad, slant, 2.0 * eta, phi, area)


def footprint_boundary(sat: GeodeticCoord, phi_rad: float, n_points: int = 360) -> list[GeodeticCoord]:
    """Surface points at central angle ``phi_rad`` around the sub-satellite point.

    Bearings are ``2*pi*k/n_points`` clockwise from north, so the ring does
    not repeat its first point; close it yourself for polygon output.
    """
    if not (0.0 < phi_rad < math.pi / 2):
        raise ValueError("phi must lie in (0, pi/2)")
    if n_points < 3:
        raise ValueError("need at least 3 boundary points")
    bearing = np.linspace(0.0, 2.0 * math.pi, n_points, endpoint=False)
    lat0, lon0 = sat.lat_rad, sat.lon_rad
    sin_lat = np.sin(lat0) * np.cos(phi_rad) + np.cos(lat0) * np.sin(phi_rad) * np.cos(bearing)
    lat = np.arcsin(np.clip(sin_lat, -1.0, 1.0))
    lon = lon0 + np.arctan2(
        np.sin(bearing) * np.sin(phi_rad) * np.cos(lat0),
        np.cos(phi_rad) - np.sin(lat0) * np.sin(lat),
    )
    return [GeodeticCoord(float(a), float(b)) for a, b in zip(lat, lon)]
