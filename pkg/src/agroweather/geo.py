"""Great-circle distances and nearest weather station lookup."""

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import EmptyRegistry, FormatError

EARTH_RADIUS_KM = 6371.0


@dataclass(frozen=True)
class GeoPoint:
    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")


@dataclass(frozen=True)
class Station:
    station: str
    point: GeoPoint
    district: str = ""


def haversine(a, b, radius=EARTH_RADIUS_KM):
    """Distance in km between two :class:`GeoPoint` on a sphere."""
    phi1, phi2 = math.radians(a.latitude), math.radians(b.latitude)
    dphi = phi2 - phi1
    dlmb = math.radians(b.longitude - a.longitude)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    # rounding can push h a hair above 1 for antipodes
    return 2.0 * radius * math.asin(math.sqrt(min(1.0, h)))


class StationRegistry:
    """Ordered station list; ids must be unique."""

    def __init__(self, stations):
        self.stations = list(stations)
        ids = [s.station for s in self.stations]
        if len(set(ids)) != len(ids):
            raise FormatError("duplicate station ids in registry")

    def __len__(self):
        return len(self.stations)

    def __iter__(self):
        return iter(self.stations)

    def get(self, station):
        for s in self.stations:
            if s.station == station:
                return s
        raise KeyError(station)

    @classmethod
    def from_csv(cls, source=None):
        """Read ``station,latitude,longitude[,district]`` (path, text, or the shipped table)."""
        if source is None:
            text = resources.files("agroweather.data").joinpath("stations.csv").read_text()
        elif isinstance(source, Path) or "\n" not in str(source):
            text = Path(source).read_text()
        else:
            text = source
        out = []
        for row in csv.DictReader(io.StringIO(text)):
            try:
                point = GeoPoint(float(row["latitude"]), float(row["longitude"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"bad registry row {row}: {exc}") from None
            name = row["station"].strip()
            out.append(Station(name, point, (row.get("district") or name).strip()))
        return cls(out)


def nearest_station(point, registry):
    """``(station, distance_km)`` of the closest station; ties go to the smaller id."""
    stations = list(registry)
    if not stations:
        raise EmptyRegistry("station registry is empty")
    best = min(stations, key=lambda s: (haversine(point, s.point), s.station))
    return best, haversine(point, best.point)
