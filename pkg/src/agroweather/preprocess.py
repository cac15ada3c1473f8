"""Imputation, wind vectors, normalization, station one-hot encoding and splits."""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AllMissing, DegenerateFeature, FormatError, TooShort, UnknownDirection, UnknownStation

IMPUTATION_METHODS = ("mean", "ffill_bfill", "linear", "seasonal")
SEASONAL_PERIOD = 365

COMPASS_POINTS = (
    "N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE",
    "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW",
)
COMPASS_DEGREES = {name: 22.5 * k for k, name in enumerate(COMPASS_POINTS)}


# -- imputation ---------------------------------------------------------------

def _linear_fill(col):
    missing = np.isnan(col)
    if not missing.any():
        return col.copy()
    idx = np.arange(col.size)
    # np.interp holds the end values constant outside the observed range,
    # which is the nearest-observation rule for boundary gaps
    out = col.copy()
    out[missing] = np.interp(idx[missing], idx[~missing], col[~missing])
    return out


def _ffill_bfill(col):
    out = col.copy()
    missing = np.isnan(out)
    idx = np.where(~missing, np.arange(out.size), 0)
    np.maximum.accumulate(idx, out=idx)
    out = out[idx]
    # leading gap: back-fill from the first observation
    first = np.flatnonzero(~missing)[0]
    out[:first] = col[first]
    return out


def _seasonal_fill(col, period=SEASONAL_PERIOD):
    out = col.copy()
    missing = np.isnan(col)
    n = col.size
    for i in np.flatnonzero(missing):
        before = col[i - period] if i - period >= 0 else np.nan
        after = col[i + period] if i + period < n else np.nan
        if not (np.isnan(before) or np.isnan(after)):
            out[i] = 0.5 * (before + after)
    return _linear_fill(out)


def impute_array(values, method="linear"):
    """Fill NaNs column by column; observed values are never touched."""
    values = np.asarray(values, dtype=np.float64)
    if method not in IMPUTATION_METHODS:
        raise ValueError(f"unknown imputation method {method!r}")
    squeeze = values.ndim == 1
    cols = values[:, None] if squeeze else values
    out = np.empty_like(cols)
    for j in range(cols.shape[1]):
        col = cols[:, j]
        if np.isnan(col).all():
            raise AllMissing(f"column {j} has no observations")
        if method == "mean":
            out[:, j] = np.where(np.isnan(col), np.nanmean(col), col)
        elif method == "ffill_bfill":
            out[:, j] = _ffill_bfill(col)
        elif method == "linear":
            out[:, j] = _linear_fill(col)
        else:
            out[:, j] = _seasonal_fill(col)
    return out[:, 0] if squeeze else out


def impute(series, method="linear"):
    """Return a copy of ``series`` with every missing value filled.

    ``linear`` joins the neighbouring observations with a straight line and
    extends the nearest observation over leading/trailing gaps. ``seasonal``
    averages the values one period (365 days) before and after when both are
    observed and falls back to ``linear`` otherwise.
    """
    try:
        return series.replace(impute_array(series.values, method))
    except AllMissing as exc:
        j = int(str(exc).split()[1])
        raise AllMissing(f"{series.station}: feature {series.feature_names[j]!r} has no observations") from None


# -- wind -------------------------------------------------------------------

def direction_to_degrees(direction):
    """Compass point (16-point rose) or numeric string/number to degrees in [0, 360)."""
    if isinstance(direction, (int, float, np.floating, np.integer)):
        deg = float(direction)
    else:
        text = str(direction).strip().upper()
        if text in COMPASS_DEGREES:
            return COMPASS_DEGREES[text]
        try:
            deg = float(text)
        except ValueError:
            raise UnknownDirection(f"unknown wind direction {direction!r}") from None
    if not 0.0 <= deg < 360.0:
        raise UnknownDirection(f"direction {deg} outside [0, 360)")
    return deg


def wind_to_vector(speed, direction):
    """Speed (km/h) and direction to ``(wx, wy)``.

    Direction is measured clockwise from north (N = 0, E = 90); ``wx`` is the
    east component, ``wy`` the north component. Accepts scalars (compass
    strings allowed) or arrays of degrees; NaN propagates.
    """
    if np.ndim(speed) == 0 and np.ndim(direction) == 0:
        if speed < 0:
            raise ValueError("wind speed must be non-negative")
        theta = math.radians(direction_to_degrees(direction))
        return speed * math.sin(theta), speed * math.cos(theta)
    speed = np.asarray(speed, dtype=np.float64)
    theta = np.radians(np.asarray(direction, dtype=np.float64))
    if np.any(speed < 0):
        raise ValueError("wind speed must be non-negative")
    return speed * np.sin(theta), speed * np.cos(theta)


# -- normalization -----------------------------------------------------------

@dataclass(frozen=True)
class NormalizationStats:
    feature_names: tuple
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))
        object.__setattr__(self, "std", np.asarray(self.std, dtype=np.float64))
        if np.any(~(self.std > 0)):
            bad = [n for n, s in zip(self.feature_names, self.std) if not s > 0]
            raise DegenerateFeature(f"zero variance: {bad}")

    def subset(self, names):
        idx = [self.feature_names.index(n) for n in names]
        return NormalizationStats(tuple(names), self.mean[idx], self.std[idx])

    def __eq__(self, other):
        return (
            isinstance(other, NormalizationStats)
            and self.feature_names == other.feature_names
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.std, other.std)
        )


STATS_FORMAT_VERSION = 1


def fit_normalizer(train, feature_names=None):
    """Per-feature mean and population standard deviation of the training rows."""
    names = feature_names or getattr(train, "feature_names", None)
    values = np.asarray(getattr(train, "values", train), dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] == 0:
        raise TooShort("empty training split")
    if names is None:
        names = tuple(f"f{j}" for j in range(values.shape[1]))
    std = values.std(axis=0)
    if np.any(std == 0):
        bad = [n for n, s in zip(names, std) if s == 0]
        raise DegenerateFeature(f"zero variance: {bad}")
    return NormalizationStats(tuple(names), values.mean(axis=0), std)


def normalize(values, stats):
    """(x - mean) / std; accepts arrays or a DailySeries."""
    if hasattr(values, "values"):
        return values.replace(normalize(values.values, stats))
    return (np.asarray(values, dtype=np.float64) - stats.mean) / stats.std


def denormalize(values, stats):
    if hasattr(values, "values"):
        return values.replace(denormalize(values.values, stats))
    return np.asarray(values, dtype=np.float64) * stats.std + stats.mean


def save_stats(stats, path):
    lines = [f"format_version={STATS_FORMAT_VERSION}"]
    for name, m, s in zip(stats.feature_names, stats.mean, stats.std):
        lines.append(f"{name}={float(m)!r},{float(s)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_stats(path):
    names, means, stds = [], [], []
    version = None
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        if key == "format_version":
            version = int(value)
            continue
        m, _, s = value.partition(",")
        names.append(key)
        means.append(float(m))
        stds.append(float(s))
    if version != STATS_FORMAT_VERSION:
        raise FormatError(f"unsupported stats file version {version}")
    return NormalizationStats(tuple(names), np.array(means), np.array(stds))


# -- one-hot ----------------------------------------------------------------

@dataclass
class CombinedTable:
    """Per-station blocks sharing one column layout: features then station indicators."""

    column_names: tuple
    stations: tuple
    blocks: dict

    @property
    def n_columns(self):
        return len(self.column_names)


def encode_station_onehot(series_by_station, stations, feature_names=None):
    """Append one indicator column per station to each station's feature matrix.

    ``series_by_station`` maps station -> DailySeries (or 2-D array); the
    indicator order follows ``stations``.
    """
    stations = tuple(stations)
    blocks = {}
    names = None
    for station, s in series_by_station.items():
        if station not in stations:
            raise UnknownStation(f"station {station!r} not in the encoding list")
        values = np.asarray(getattr(s, "values", s), dtype=np.float64)
        feats = feature_names or getattr(s, "feature_names", None) or tuple(
            f"f{j}" for j in range(values.shape[1])
        )
        if names is None:
            names = tuple(feats)
        elif tuple(feats) != names:
            raise ValueError("feature order differs between stations")
        onehot = np.zeros((values.shape[0], len(stations)))
        onehot[:, stations.index(station)] = 1.0
        blocks[station] = np.hstack([values, onehot])
    columns = tuple(names or ()) + tuple(f"station={s}" for s in stations)
    return CombinedTable(columns, stations, blocks)


# -- chronological split ------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    val_fraction: float = 0.20
    test_fraction: float = 0.10

    def __post_init__(self):
        total = self.train_fraction + self.val_fraction + self.test_fraction
        if abs(total - 1.0) > 1e-9 or min(self.train_fraction, self.val_fraction, self.test_fraction) < 0:
            raise ValueError("split fractions must be non-negative and sum to 1")

    def sizes(self, n):
        # tiny epsilon keeps e.g. 0.7 * 10 from flooring to 6
        n_train = int(math.floor(self.train_fraction * n + 1e-9))
        n_val = int(math.floor(self.val_fraction * n + 1e-9))
        return n_train, n_val, n - n_train - n_val


def split(series, spec=SplitSpec()):
    """Chronological train/validation/test segments, never shuffled."""
    n = len(series)
    if n < 10:
        raise TooShort(f"need at least 10 rows to split, got {n}")
    n_train, n_val, _ = spec.sizes(n)
    a, b = n_train, n_train + n_val
    if hasattr(series, "values") and hasattr(series, "start"):
        from datetime import timedelta

        def part(lo, hi):
            return type(series)(series.station, series.start + timedelta(days=lo),
                                series.values[lo:hi], series.feature_names)

        return part(0, a), part(a, b), part(b, n)
    return series[:a], series[a:b], series[b:]
