import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from islnet.geometry import (
    EARTH_RADIUS_KM,
    GeodeticCoord,
    central_angle,
    ecef_to_geodetic,
    elevation_angle,
    footprint_boundary,
    footprint_spec,
    geodetic_to_ecef,
    great_circle_distance,
)

# Frozen from an independent mpmath script (vector cross/dot-product central
# angles, law-of-cosines triangle solution) run before the package existed.
PERTH_BREST_KM = 14774.66123957389
NY_LONDON_KM = 5570.222179737958
FP_SLANT_KM = 1123.2770015779055
FP_PSI_DEG = 113.08293430177628
FP_PHI_DEG = 8.458532849111858
FP_AREA_KM2 = 2774092.8295043966
BOUNDARY_30_45_EAST = (29.64154714396967, 54.73384248454616)  # phi = 8.45 deg, bearing 90 deg
ELEV_AT_845_DEG = 25.029005070737032

lat_st = st.floats(-math.pi / 2, math.pi / 2)
lon_st = st.floats(-math.pi, math.pi, exclude_max=True)


def surface(lat_deg, lon_deg):
    return GeodeticCoord.from_degrees(lat_deg, lon_deg)


class TestGeodetic:
    def test_axis_and_pole(self):
        np.testing.assert_allclose(geodetic_to_ecef(GeodeticCoord(0, 0, 0)), [6371, 0, 0], atol=1e-12)
        np.testing.assert_allclose(geodetic_to_ecef(GeodeticCoord(math.pi / 2, 2.0, 0)), [0, 0, 6371], atol=1e-9)

    def test_spherical_coordinates_oracle(self):
        r = 6371 + 550
        expect = [r * math.cos(0.5) * math.cos(1.0), r * math.cos(0.5) * math.sin(1.0), r * math.sin(0.5)]
        np.testing.assert_allclose(geodetic_to_ecef(GeodeticCoord(0.5, 1.0, 550)), expect, rtol=1e-15)

    def test_longitude_normalized(self):
        assert GeodeticCoord(0, math.pi).lon_rad == -math.pi
        assert GeodeticCoord(0, 3 * math.pi / 2).lon_rad == pytest.approx(-math.pi / 2)

    def test_rejects_bad_latitude(self):
        with pytest.raises(ValueError):
            GeodeticCoord(2.0, 0)
        with pytest.raises(ValueError):
            GeodeticCoord(0, 0, -1)

    def test_round_trip_many(self, rng):
        lat = np.arcsin(rng.uniform(-0.999, 0.999, 10_000))
        lon = rng.uniform(-math.pi, math.pi, 10_000)
        alt = rng.uniform(0, 2000, 10_000)
        for a, b, h in zip(lat, lon, alt):
            g = GeodeticCoord(a, b, h)
            back = ecef_to_geodetic(geodetic_to_ecef(g))
            assert abs(back.lat_rad - g.lat_rad) < 1e-9
            assert abs(math.remainder(back.lon_rad - g.lon_rad, 2 * math.pi)) < 1e-9
            assert abs(back.alt_km - h) < 1e-6

    @given(lat_st, lon_st, st.floats(0, 5000))
    def test_norm(self, lat, lon, alt):
        v = geodetic_to_ecef(GeodeticCoord(lat, lon, alt))
        assert abs(np.linalg.norm(v) - (EARTH_RADIUS_KM + alt)) < 1e-6


class TestGreatCircle:
    def test_identity_and_antipode(self):
        g = surface(12.0, 34.0)
        assert great_circle_distance(g, g) == 0.0
        assert great_circle_distance(surface(0, 0), surface(0, 180)) == pytest.approx(math.pi * 6371, abs=1e-6)
        assert math.pi * 6371 == pytest.approx(20015.09, abs=0.01)

    def test_city_pairs_against_vector_oracle(self):
        pb = great_circle_distance(surface(-31.9523, 115.8613), surface(48.3904, -4.4861))
        nl = great_circle_distance(surface(40.7128, -74.0060), surface(51.5074, -0.1278))
        assert pb == pytest.approx(PERTH_BREST_KM, abs=1e-6)
        assert nl == pytest.approx(NY_LONDON_KM, abs=1e-6)

    def test_altitude_ignored(self):
        a, b = surface(10, 20), surface(-5, 60)
        up = GeodeticCoord(a.lat_rad, a.lon_rad, 550)
        assert great_circle_distance(up, b) == great_circle_distance(a, b)

    @given(lat_st, lon_st, lat_st, lon_st, lat_st, lon_st)
    @settings(max_examples=300)
    def test_metric_properties(self, la1, lo1, la2, lo2, la3, lo3):
        a, b, c = GeodeticCoord(la1, lo1), GeodeticCoord(la2, lo2), GeodeticCoord(la3, lo3)
        ab = great_circle_distance(a, b)
        assert ab == pytest.approx(great_circle_distance(b, a), abs=1e-9)
        assert 0 <= ab <= math.pi * EARTH_RADIUS_KM + 1e-9
        assert great_circle_distance(a, c) <= ab + great_circle_distance(b, c) + 1e-6

    @given(lat_st, lon_st, lat_st, lon_st)
    def test_arc_vs_chord(self, la1, lo1, la2, lo2):
        a, b = GeodeticCoord(la1, lo1), GeodeticCoord(la2, lo2)
        arc = great_circle_distance(a, b)
        chord = float(np.linalg.norm(geodetic_to_ecef(a) - geodetic_to_ecef(b)))
        assert chord - 1e-6 <= arc <= chord * math.pi / 2 + 1e-6


class TestElevation:
    def test_zenith_and_horizon(self):
        g = surface(20, 30)
        up = geodetic_to_ecef(GeodeticCoord(g.lat_rad, g.lon_rad, 550))
        assert elevation_angle(g, up) == pytest.approx(math.pi / 2, abs=1e-7)
        # point on the tangent plane at (0, 0): +y direction from the ground point
        assert elevation_angle(surface(0, 0), [6371.0, 800.0, 0.0]) == pytest.approx(0.0, abs=1e-12)

    def test_spherical_triangle_oracle(self):
        sat = geodetic_to_ecef(GeodeticCoord(0, math.radians(8.45), 550))
        assert math.degrees(elevation_angle(surface(0, 0), sat)) == pytest.approx(ELEV_AT_845_DEG, abs=1e-9)

    def test_below_surface_rejected(self):
        with pytest.raises(ValueError):
            elevation_angle(surface(0, 0), [6000.0, 0, 0])


class TestFootprint:
    def test_reference_values(self):
        fp = footprint_spec(550, math.radians(25))
        assert fp.a_km == pytest.approx(FP_SLANT_KM, rel=1e-12)
        assert math.degrees(fp.psi_rad) == pytest.approx(FP_PSI_DEG, rel=1e-12)
        assert math.degrees(fp.phi_rad) == pytest.approx(FP_PHI_DEG, rel=1e-12)
        assert fp.area_km2 == pytest.approx(FP_AREA_KM2, rel=1e-12)
        # rounded values quoted for this shell
        assert fp.a_km == pytest.approx(1123.5, rel=1e-3)
        assert math.degrees(fp.psi_rad) == pytest.approx(113.1, rel=1e-3)
        assert math.degrees(fp.phi_rad) == pytest.approx(8.45, rel=2e-3)
        assert fp.area_km2 == pytest.approx(2.77e6, rel=2e-3)

    def test_law_of_sines_form_agrees(self):
        fp = footprint_spec(550, math.radians(25))
        alpha = 6371 / 6921
        phi = math.asin(math.sin(fp.psi_rad / 2) / alpha) - fp.psi_rad / 2
        assert phi == pytest.approx(fp.phi_rad, abs=1e-12)

    def test_degenerate_inputs(self):
        with pytest.raises(ValueError):
            footprint_spec(550, math.pi / 2)
        with pytest.raises(ValueError):
            footprint_spec(0, 0.1)
        tiny = footprint_spec(1e-6, math.radians(25))
        assert tiny.a_km < 1e-5 and tiny.phi_rad < 1e-6

    @given(st.floats(100, 3000), st.floats(0, math.radians(80)))
    def test_properties(self, h, theta):
        fp = footprint_spec(h, theta)
        assert 0 < fp.phi_rad <= math.acos(6371 / (6371 + h)) + 1e-12
        assert fp.area_km2 == 2 * math.pi * 6371 ** 2 * (1 - math.cos(fp.phi_rad))
        # a ground point at central angle phi sees the satellite at exactly theta_min
        sat = geodetic_to_ecef(GeodeticCoord(0, fp.phi_rad, h))
        assert elevation_angle(GeodeticCoord(0, 0), sat) == pytest.approx(theta, abs=1e-9)

    def test_boundary_due_north(self):
        pts = footprint_boundary(surface(0, 0), math.radians(8.45))
        assert len(pts) == 360
        assert pts[0].lat_deg == pytest.approx(8.45, abs=1e-12)
        assert pts[0].lon_deg == pytest.approx(0.0, abs=1e-12)

    def test_boundary_at_pole(self):
        phi = math.radians(8.45)
        for p in footprint_boundary(GeodeticCoord(math.pi / 2, 0), phi, 36):
            assert p.lat_rad == pytest.approx(math.pi / 2 - phi, abs=1e-12)

    def test_boundary_bearing_east_oracle(self):
        pts = footprint_boundary(surface(30, 45), math.radians(8.45), 4)
        assert pts[1].lat_deg == pytest.approx(BOUNDARY_30_45_EAST[0], abs=1e-9)
        assert pts[1].lon_deg == pytest.approx(BOUNDARY_30_45_EAST[1], abs=1e-9)

    @given(lat_st, lon_st, st.floats(0.001, 1.5), st.integers(3, 50))
    def test_boundary_on_circle(self, lat, lon, phi, n):
        centre = GeodeticCoord(lat, lon)
        for p in footprint_boundary(centre, phi, n):
            assert abs(great_circle_distance(centre, p) - EARTH_RADIUS_KM * phi) < 1e-6

    def test_central_angle_symmetry(self):
        a, b = surface(1, 2), surface(3, 4)
        assert central_angle(a, b) == central_angle(b, a)
