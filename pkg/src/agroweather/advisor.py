"""Forecast summaries and rule-based crop advice.

Knowledge base (editable files, shipped defaults in ``agroweather/data``):

* ``thresholds.csv``  month,max_temp_c,rainfall_mm
* ``hazards.csv``     district,drought_severity,flood_prone
* ``crops.json``      {season: {"drought": [...], "flood": [...]}}

Rules, all of which accumulate:

1. drought-prone district -> drought-tolerant crops for the season
2. flood-prone district -> water-logging tolerant crops for the season
3. at least ``min_run`` consecutive complete forecast months that are hot
   (mean temperature above threshold + ``temp_margin``) or dry (rainfall
   below ``rain_low`` x threshold) -> drought warning and drought crops
4. at least ``min_run`` consecutive complete months with rainfall above
   ``rain_high`` x threshold -> heavy-rain warning and flood crops
"""

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from datetime import date, timedelta
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import EmptyForecast, FormatError, InsufficientForecast
from .ingest import station_key

SEASONS = ("Rabi", "Kharif1", "Kharif2")
GRANULARITIES = ("daily", "weekly", "monthly", "seasonal", "yearly")
SEVERITIES = ("None", "Moderate", "Severe", "VerySevere")
SUMMED = ("rainfall",)


def current_season(d):
    """Rabi Nov 16 - Mar 15, Kharif1 Mar 16 - Jul 15, Kharif2 Jul 16 - Nov 15."""
    key = (d.month, d.day)
    if (3, 16) <= key <= (7, 15):
        return "Kharif1"
    if (7, 16) <= key <= (11, 15):
        return "Kharif2"
    return "Rabi"


def _season_bounds(d):
    """First and last date of the season occurrence containing ``d``."""
    season = current_season(d)
    y = d.year
    if season == "Kharif1":
        return date(y, 3, 16), date(y, 7, 15)
    if season == "Kharif2":
        return date(y, 7, 16), date(y, 11, 15)
    if d.month >= 11:
        return date(y, 11, 16), date(y + 1, 3, 15)
    return date(y - 1, 11, 16), date(y, 3, 15)


# -- knowledge base --------------------------------------------------------------

@dataclass(frozen=True)
class HazardZone:
    district: str
    drought_severity: str = "None"
    flood_prone: bool = False
    known: bool = True

    @property
    def drought_prone(self):
        return self.drought_severity != "None"


@dataclass(frozen=True)
class ClimateThreshold:
    month: int
    max_temp_c: float
    rainfall_mm: float


def _read_text(path, default_name):
    if path is None:
        return resources.files("agroweather.data").joinpath(default_name).read_text()
    return Path(path).read_text()


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0", ""):
        return False
    raise FormatError(f"not a boolean: {text!r}")


@dataclass
class KnowledgeBase:
    thresholds: dict  # month -> ClimateThreshold
    hazards: dict  # station_key(district) -> HazardZone
    crops: dict  # season -> {"drought": [...], "flood": [...]}

    @classmethod
    def load(cls, thresholds=None, hazards=None, crops=None):
        """Load the three tables; any ``None`` path falls back to the shipped file."""
        th = {}
        for row in csv.DictReader(io.StringIO(_read_text(thresholds, "thresholds.csv"))):
            t = ClimateThreshold(int(row["month"]), float(row["max_temp_c"]), float(row["rainfall_mm"]))
            if t.max_temp_c <= 0 or t.rainfall_mm <= 0:
                raise FormatError(f"threshold values must be positive (month {t.month})")
            th[t.month] = t
        if sorted(th) != list(range(1, 13)):
            raise FormatError("thresholds must have exactly one row per month")

        hz = {}
        for row in csv.DictReader(io.StringIO(_read_text(hazards, "hazards.csv"))):
            sev = row["drought_severity"].strip() or "None"
            if sev not in SEVERITIES:
                raise FormatError(f"unknown drought severity {sev!r}")
            key = station_key(row["district"])
            if key in hz:
                raise FormatError(f"duplicate district {row['district']!r}")
            hz[key] = HazardZone(row["district"].strip(), sev, _parse_bool(row["flood_prone"]))

        cr = json.loads(_read_text(crops, "crops.json"))
        for s in SEASONS:
            if s not in cr or not {"drought", "flood"} <= set(cr[s]):
                raise FormatError(f"crop table lacks drought/flood lists for {s}")
        return cls(th, hz, cr)


def hazard_lookup(district, kb):
    """Registry row for ``district``, or an all-clear zone with ``known=False``."""
    zone = kb.hazards.get(station_key(district))
    if zone is None:
        return HazardZone(district, "None", False, known=False)
    return zone


# -- aggregation ------------------------------------------------------------------

@dataclass(frozen=True)
class SummaryRow:
    period: str
    start: date
    end: date
    days: int
    complete: bool
    values: dict

    def to_dict(self):
        d = asdict(self)
        d["start"] = self.start.isoformat()
        d["end"] = self.end.isoformat()
        return d


def _period_key(d, granularity, start):
    if granularity == "daily":
        return d.isoformat()
    if granularity == "weekly":
        return (d - start).days // 7
    if granularity == "yearly":
        return (d - start).days // 365
    if granularity == "monthly":
        return (d.year, d.month)
    lo, _ = _season_bounds(d)
    return (current_season(d), lo)


def _period_span(key, granularity, start, first):
    """Full calendar span and label of a period."""
    if granularity == "daily":
        return first, first, key
    if granularity in ("weekly", "yearly"):
        width = 7 if granularity == "weekly" else 365
        lo = start + timedelta(days=key * width)
        return lo, lo + timedelta(days=width - 1), f"{granularity[0]}{key + 1}"
    if granularity == "monthly":
        y, m = key
        lo = date(y, m, 1)
        hi = (date(y + (m == 12), m % 12 + 1, 1)) - timedelta(days=1)
        return lo, hi, f"{y}-{m:02d}"
    season, lo = key
    _, hi = _season_bounds(lo)
    label = f"{season} {lo.year}" if season != "Rabi" else f"Rabi {lo.year}/{lo.year + 1}"
    return lo, hi, label


def aggregate_forecast(start, values, feature_names, granularity="monthly"):
    """Summarize daily forecasts starting at ``start``.

    ``values`` is (days, features) in physical units. Rainfall is summed and
    every other feature averaged. Weekly and yearly periods are 7- and
    365-day blocks counted from ``start``; monthly and seasonal periods follow
    the calendar. A period the forecast only partly covers has
    ``complete=False``.
    """
    if granularity not in GRANULARITIES:
        raise ValueError(f"unknown granularity {granularity!r}")
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] == 0:
        raise EmptyForecast("forecast has no days")
    names = list(feature_names)
    groups = {}
    for i in range(values.shape[0]):
        d = start + timedelta(days=i)
        groups.setdefault(_period_key(d, granularity, start), []).append(i)
    rows = []
    for key, idx in groups.items():
        first = start + timedelta(days=idx[0])
        lo, hi, label = _period_span(key, granularity, start, first)
        block = values[idx]
        agg = {n: float(block[:, j].sum() if n in SUMMED else block[:, j].mean())
               for j, n in enumerate(names)}
        rows.append(SummaryRow(label, first, first + timedelta(days=len(idx) - 1), len(idx),
                               len(idx) == (hi - lo).days + 1, agg))
    return rows


# -- recommendation ---------------------------------------------------------------

@dataclass(frozen=True)
class RuleConfig:
    temp_margin: float = 2.0
    rain_low: float = 0.5
    rain_high: float = 1.5
    min_run: int = 2


@dataclass
class Advisory:
    location: str
    season: str
    hazard: dict
    warnings: list = field(default_factory=list)
    crops: list = field(default_factory=list)
    forecast: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=str)

    def to_text(self):
        lines = [f"Location: {self.location}", f"Season:   {self.season}"]
        h = self.hazard
        flags = []
        if h["drought_severity"] != "None":
            flags.append(f"drought-prone ({h['drought_severity']})")
        if h["flood_prone"]:
            flags.append("flood-prone")
        if not h["known"]:
            flags.append("district not in hazard registry")
        lines.append("Hazards:  " + (", ".join(flags) if flags else "none"))
        if self.warnings:
            lines.append("Warnings:")
            lines += [f"  - {w}" for w in self.warnings]
        else:
            lines.append("Warnings: none")
        if self.crops:
            lines.append("Suggested crops: " + ", ".join(self.crops))
        return "\n".join(lines)


def _runs(flags, months, min_run):
    """Month labels of every run of >= min_run consecutive flagged calendar months."""
    out, run = [], []
    for flag, (y, m) in zip(flags, months):
        if flag and run and (y * 12 + m) - (run[-1][0] * 12 + run[-1][1]) == 1:
            run.append((y, m))
            continue
        if len(run) >= min_run:
            out.append(run)
        run = [(y, m)] if flag else []
    if len(run) >= min_run:
        out.append(run)
    return out


def _fmt_run(run):
    return f"{run[0][0]}-{run[0][1]:02d} to {run[-1][0]}-{run[-1][1]:02d}"


def _add(crops, new):
    for c in new:
        if c not in crops:
            crops.append(c)


def recommend(district, summary, on_date, kb=None, rules=RuleConfig(), location=None):
    """Apply the four advisory rules.

    ``summary`` holds monthly :class:`SummaryRow` items (see
    :func:`aggregate_forecast`); only complete months count toward the
    threshold rules, and at least one is required.
    """
    kb = kb or KnowledgeBase.load()
    months = [r for r in summary if r.complete and len(r.period) == 7 and r.period[4] == "-"]
    if not months:
        raise InsufficientForecast("forecast covers no complete calendar month")
    season = current_season(on_date)
    zone = hazard_lookup(district, kb)
    warnings, crops = [], []

    if zone.drought_prone:
        _add(crops, kb.crops[season]["drought"])
    if zone.flood_prone:
        _add(crops, kb.crops[season]["flood"])

    keys = [(r.start.year, r.start.month) for r in months]
    th = [kb.thresholds[m] for _, m in keys]
    rain = [r.values.get("rainfall", np.nan) for r in months]
    temp = [r.values.get("temperature", np.nan) for r in months]
    hot = [t > c.max_temp_c + rules.temp_margin for t, c in zip(temp, th)]
    dry = [x < rules.rain_low * c.rainfall_mm for x, c in zip(rain, th)]
    wet = [x > rules.rain_high * c.rainfall_mm for x, c in zip(rain, th)]

    for run in _runs([h or d for h, d in zip(hot, dry)], keys, rules.min_run):
        warnings.append(f"drought risk: high temperature or low rainfall {_fmt_run(run)}")
        _add(crops, kb.crops[season]["drought"])
    for run in _runs(wet, keys, rules.min_run):
        warnings.append(f"heavy rain risk: rainfall well above normal {_fmt_run(run)}")
        _add(crops, kb.crops[season]["flood"])

    return Advisory(
        location=location or district,
        season=season,
        hazard={"district": zone.district, "drought_severity": zone.drought_severity,
                "flood_prone": zone.flood_prone, "known": zone.known},
        warnings=warnings,
        crops=crops,
        forecast=[r.to_dict() for r in summary],
    )
