import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from agroweather.errors import EmptyRegistry, FormatError
from agroweather.geo import GeoPoint, Station, StationRegistry, haversine, nearest_station

UTTARA = GeoPoint(23.8759, 90.3795)
DHAKA = GeoPoint(23.8111, 90.3965)
MYMENSINGH = GeoPoint(24.7471, 90.4203)

points = st.builds(GeoPoint, st.floats(-90, 90), st.floats(-180, 180))


def _chord_distance(a, b, r=6371.0):
    # independent oracle: straight-line chord between unit vectors -> arc length
    def xyz(p):
        la, lo = math.radians(p.latitude), math.radians(p.longitude)
        return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))
    d = math.dist(xyz(a), xyz(b))
    return 2 * r * math.asin(min(1.0, d / 2))


def test_known_distances():
    assert haversine(UTTARA, DHAKA) == pytest.approx(7.6, abs=0.3)
    assert haversine(UTTARA, MYMENSINGH) == pytest.approx(96.96, abs=1.0)
    assert haversine(UTTARA, UTTARA) == 0.0
    assert haversine(GeoPoint(0, 0), GeoPoint(0, 180)) == pytest.approx(math.pi * 6371.0)


@given(points, points)
def test_haversine_properties(a, b):
    d = haversine(a, b)
    assert 0 <= d <= math.pi * 6371.0 + 1e-6
    assert d == pytest.approx(haversine(b, a), abs=1e-9)
    assert d == pytest.approx(_chord_distance(a, b), abs=1e-6)


@given(points, points, points)
def test_triangle_inequality(a, b, c):
    assert haversine(a, c) <= haversine(a, b) + haversine(b, c) + 1e-6


def test_point_bounds():
    with pytest.raises(ValueError):
        GeoPoint(91, 0)
    with pytest.raises(ValueError):
        GeoPoint(0, -180.5)


def test_nearest_station_uttara():
    reg = StationRegistry([Station("Mymensingh", MYMENSINGH), Station("Dhaka", DHAKA)])
    station, km = nearest_station(UTTARA, reg)
    assert station.station == "Dhaka" and km == pytest.approx(7.6, abs=0.3)
    assert nearest_station(DHAKA, reg) == (reg.get("Dhaka"), 0.0)


def test_shipped_registry():
    reg = StationRegistry.from_csv()
    assert len(reg) == 35
    assert nearest_station(UTTARA, reg)[0].station == "Dhaka"


@given(st.lists(points, min_size=3, max_size=3), points)
def test_nearest_matches_brute_force(pts, query):
    reg = StationRegistry([Station(f"s{k}", p) for k, p in enumerate(pts)])
    station, km = nearest_station(query, reg)
    brute = min(_chord_distance(query, p) for p in pts)
    assert km == pytest.approx(brute, abs=1e-6)
    assert km <= min(haversine(query, p) for p in pts)


def test_registry_errors():
    with pytest.raises(EmptyRegistry):
        nearest_station(UTTARA, StationRegistry([]))
    with pytest.raises(FormatError):
        StationRegistry([Station("a", DHAKA), Station("a", UTTARA)])
    with pytest.raises(FormatError):
        StationRegistry.from_csv("station,latitude,longitude\nx,abc,1\n")
    reg = StationRegistry.from_csv("station,latitude,longitude\nx,1,2\ny,3,4\n")
    assert reg.get("y").district == "y"
