"""Raw station-month matrices to a daily long-format table.

Raw files hold one row per station-month::

    station, year, month, d1, d2, ..., d31, avg

A cell is a number, blank, or ``*``; blank and ``*`` both mean missing. The
average column is ignored. Wind comes as two matrices, ``wind_speed`` (km/h)
and ``wind_direction`` (compass point or degrees); they are merged into the
``wx``/``wy`` vector components.
"""

import calendar
import csv
import io
import re
from dataclasses import dataclass
from datetime import date
from importlib import resources
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import CalendarViolation, DuplicateRow, FormatError, StationMismatch
from .preprocess import direction_to_degrees, wind_to_vector

FEATURES = ("rainfall", "sunshine", "humidity", "temperature", "wx", "wy")
RAW_VARIABLES = ("rainfall", "sunshine", "humidity", "temperature", "wind_speed", "wind_direction")
CSV_HEADER = ("station", "date") + FEATURES
MISSING_MARKERS = ("", "*")


@dataclass(frozen=True)
class RawMonthRow:
    station: str
    year: int
    month: int
    day_values: tuple  # 31 raw cell strings
    monthly_avg: str = ""

    def __post_init__(self):
        if len(self.day_values) != 31:
            raise FormatError(f"{self.station} {self.year}-{self.month}: expected 31 day cells")
        if self.year < 1948:
            raise FormatError(f"year {self.year} out of range")
        if not 1 <= self.month <= 12:
            raise FormatError(f"month {self.month} out of range")


class DailyRecord(NamedTuple):
    """One station-day; NaN marks a missing value."""

    station: str
    date: date
    rainfall: float
    sunshine: float
    humidity: float
    temperature: float
    wx: float
    wy: float


@dataclass
class DailySeries:
    """Contiguous daily table for one station.

    ``values`` has one row per day from ``start`` and one column per name in
    ``feature_names``; NaN marks a missing value.
    """

    station: str
    start: date
    values: np.ndarray
    feature_names: tuple = FEATURES

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.feature_names):
            raise ValueError("values must be (days, len(feature_names))")
        self.feature_names = tuple(self.feature_names)

    def __len__(self):
        return self.values.shape[0]

    @property
    def dates(self):
        return np.datetime64(self.start, "D") + np.arange(len(self))

    @property
    def end(self):
        return self.dates[-1].astype(date)

    def column(self, name):
        return self.values[:, self.feature_names.index(name)]

    def select(self, names):
        idx = [self.feature_names.index(n) for n in names]
        return DailySeries(self.station, self.start, self.values[:, idx], tuple(names))

    def replace(self, values):
        return DailySeries(self.station, self.start, values, self.feature_names)

    def records(self):
        full = np.full((len(self), len(FEATURES)), np.nan)
        for j, name in enumerate(self.feature_names):
            full[:, FEATURES.index(name)] = self.values[:, j]
        for d, row in zip(self.dates.astype(date), full):
            yield DailyRecord(self.station, d, *row.tolist())

    def missing_count(self):
        return int(np.isnan(self.values).sum())


# -- station names --------------------------------------------------------

def station_key(name):
    """Trim, collapse inner whitespace and case-fold."""
    return re.sub(r"\s+", " ", name.strip()).casefold()


def load_aliases(path=None):
    """Alias table ``variant -> canonical`` keyed by :func:`station_key`."""
    if path is None:
        text = resources.files("agroweather.data").joinpath("station_aliases.csv").read_text()
    else:
        text = Path(path).read_text()
    aliases = {}
    for row in csv.DictReader(io.StringIO(text)):
        aliases[station_key(row["alias"])] = station_key(row["station"])
    return aliases


def canonical_station(name, aliases=None):
    key = station_key(name)
    if aliases:
        key = aliases.get(key, key)
    return key


# -- raw matrix parsing -----------------------------------------------------

def _parse_int(text, what):
    try:
        f = float(text)
    except ValueError:
        raise FormatError(f"non-numeric {what}: {text!r}") from None
    if f != int(f):
        raise FormatError(f"non-integral {what}: {text!r}")
    return int(f)


def read_raw_rows(source, delimiter=","):
    """Read a raw monthly-matrix file (path or text) into :class:`RawMonthRow` objects.

    Lines starting with ``#`` and a header line whose year column is not
    numeric are skipped.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                     and Path(source).exists()):
        source = Path(source).read_text()
    rows = []
    for lineno, cells in enumerate(csv.reader(io.StringIO(source), delimiter=delimiter), 1):
        if not cells or not "".join(cells).strip() or cells[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in cells]
        if lineno == 1 and not re.match(r"^\d", cells[1] if len(cells) > 1 else ""):
            continue
        if len(cells) == 34:
            cells.append("")
        if len(cells) != 35:
            raise FormatError(f"line {lineno}: expected 35 cells, got {len(cells)}")
        rows.append(RawMonthRow(
            station=cells[0],
            year=_parse_int(cells[1], "year"),
            month=_parse_int(cells[2], "month"),
            day_values=tuple(cells[3:34]),
            monthly_avg=cells[34],
        ))
    return rows


def _parse_cell(cell, variable):
    if cell in MISSING_MARKERS:
        return None
    if variable == "wind_direction":
        try:
            return direction_to_degrees(cell)
        except Exception:
            raise FormatError(f"bad wind direction cell {cell!r}") from None
    try:
        value = float(cell)
    except ValueError:
        raise FormatError(f"non-numeric cell {cell!r} for {variable}") from None
    if not np.isfinite(value):
        raise FormatError(f"non-finite cell {cell!r} for {variable}")
    return value


def parse_monthly_matrix(rows, variable):
    """Expand monthly rows to ``(station, date, value-or-None)`` triples.

    One triple per calendar day of each month. Blank and ``*`` cells become
    ``None``. A non-empty cell past the end of the month raises
    :class:`CalendarViolation`.
    """
    out = []
    for row in rows:
        ndays = calendar.monthrange(row.year, row.month)[1]
        for day, cell in enumerate(row.day_values, 1):
            cell = cell.strip()
            if day > ndays:
                if cell:
                    raise CalendarViolation(
                        f"{row.station} {row.year}-{row.month:02d}: value {cell!r} on day {day}"
                    )
                continue
            out.append((row.station, date(row.year, row.month, day), _parse_cell(cell, variable)))
    return out


# -- merge ------------------------------------------------------------------

def _index_table(entries, variable, aliases):
    table = {}
    seen_months = set()
    for station, d, value in entries:
        key = canonical_station(station, aliases)
        month = (key, d.year, d.month)
        if d.day == 1:
            if month in seen_months:
                raise DuplicateRow(f"duplicate {variable} row for {key} {d.year}-{d.month:02d}")
            seen_months.add(month)
        table.setdefault(key, {})[d] = value
    return table


def merge_variable_files(tables, aliases=None):
    """Merge per-variable daily triples into one :class:`DailySeries` per station.

    ``tables`` maps a raw variable name (see ``RAW_VARIABLES``) to the output
    of :func:`parse_monthly_matrix`. Station names are normalized with
    ``aliases``; every table must then cover the same stations, otherwise
    :class:`StationMismatch` is raised. The merged series spans the union of
    dates contiguously; absent values are NaN.
    """
    unknown = set(tables) - set(RAW_VARIABLES)
    if unknown:
        raise FormatError(f"unknown variables: {sorted(unknown)}")
    indexed = {var: _index_table(entries, var, aliases) for var, entries in tables.items()}
    station_sets = {var: set(t) for var, t in indexed.items()}
    all_stations = set().union(*station_sets.values()) if station_sets else set()
    for var, names in station_sets.items():
        if names != all_stations:
            missing = sorted(all_stations - names)
            raise StationMismatch(f"{var} file lacks stations {missing} (add an alias?)")

    series = {}
    for station in sorted(all_stations):
        days = set()
        for t in indexed.values():
            days.update(t[station])
        first, last = min(days), max(days)
        n = (last - first).days + 1
        values = np.full((n, len(FEATURES)), np.nan)
        offsets = {}
        for var, t in indexed.items():
            col = np.full(n, np.nan)
            for d, v in t[station].items():
                if v is not None:
                    col[(d - first).days] = v
            offsets[var] = col
        for j, name in enumerate(FEATURES[:4]):
            if name in offsets:
                values[:, j] = offsets[name]
        if "wind_speed" in offsets and "wind_direction" in offsets:
            wx, wy = wind_to_vector(offsets["wind_speed"], offsets["wind_direction"])
            values[:, 4] = wx
            values[:, 5] = wy
        series[station] = DailySeries(station, first, values)
    return series


def ingest_files(paths, aliases=None, delimiter=","):
    """Parse and merge raw files given as ``{variable: path}``."""
    tables = {
        var: parse_monthly_matrix(read_raw_rows(Path(p), delimiter), var)
        for var, p in paths.items()
    }
    return merge_variable_files(tables, aliases)


# -- canonical CSV ----------------------------------------------------------

def _fmt(v):
    if np.isnan(v):
        return ""
    r = repr(float(v))
    return r[:-2] if r.endswith(".0") else r


def write_series_csv(series, path=None):
    """Write one or more series as canonical CSV; returns the text when ``path`` is None."""
    if isinstance(series, DailySeries):
        series = [series]
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for s in series:
        full = np.full((len(s), len(FEATURES)), np.nan)
        for j, name in enumerate(s.feature_names):
            full[:, FEATURES.index(name)] = s.values[:, j]
        for d, row in zip(s.dates.astype(str), full):
            buf.write(",".join([s.station, d] + [_fmt(v) for v in row]) + "\n")
    text = buf.getvalue()
    if path is None:
        return text
    Path(path).write_text(text)
    return text


def read_series_csv(source):
    """Read canonical CSV (path or text) into ``{station: DailySeries}``."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        source = Path(source).read_text()
    reader = csv.reader(io.StringIO(source))
    header = tuple(next(reader))
    if header != CSV_HEADER:
        raise FormatError(f"unexpected header {header}")
    rows = {}
    for cells in reader:
        if not cells:
            continue
        rows.setdefault(cells[0], []).append(cells)
    out = {}
    for station, lines in rows.items():
        dates = [date.fromisoformat(c[1]) for c in lines]
        start = dates[0]
        for k, d in enumerate(dates):
            if (d - start).days != k:
                raise FormatError(f"{station}: dates not contiguous at {d}")
        values = np.array(
            [[float(c) if c else np.nan for c in line[2:]] for line in lines], dtype=np.float64
        )
        out[station] = DailySeries(station, start, values)
    return out
