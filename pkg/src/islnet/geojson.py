"""GeoJSON features for routes and satellite footprints ([lon, lat] degrees)."""
from __future__ import annotations

import json
import math

from .constellation import Constellation
from .geometry import ecef_to_geodetic, footprint_boundary
from .routing import RoutePath


def _lonlat(g):
    return [round(g.lon_deg, 9), round(g.lat_deg, 9)]


def route_feature(c: Constellation, p: RoutePath, **props) -> dict:
    """LineString tx -> sub-satellite points of the route -> rx."""
    pts = [_lonlat(p.tx)]
    pts += [_lonlat(ecef_to_geodetic(c.positions[s])) for s in p.sat_ids]
    pts.append(_lonlat(p.rx))
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": pts},
        "properties": {
            "sat_ids": list(p.sat_ids),
            "delay_s": p.total_delay_s,
            "hop_count": p.hop_count,
            **props,
        },
    }


def footprint_feature(c: Constellation, sat_id: int, phi_rad: float, n_points: int = 360) -> dict:
    """Closed Polygon ring of one satellite's coverage cap."""
    sub = ecef_to_geodetic(c.positions[sat_id])
    ring = [_lonlat(g) for g in footprint_boundary(sub, phi_rad, n_points)]
    ring.append(ring[0])
    return {
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [ring]},
        "properties": {"sat_id": int(sat_id), "phi_deg": math.degrees(phi_rad)},
    }


def feature_collection(features) -> dict:
    return {"type": "FeatureCollection", "features": list(features)}


def dump(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")
