"""Glue between the ETL steps and training: series -> normalized window splits."""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch, TooShort
from .ingest import merge_variable_files, parse_monthly_matrix, read_raw_rows
from .nn.model import forward
from .preprocess import denormalize, encode_station_onehot, fit_normalizer, impute, normalize, split
from .synth import DEFAULT_SEED, DEFAULT_STATIONS, DEFAULT_YEARS, generate_raw
from .windowing import WindowSpec, make_windows

WEATHER_FEATURES = ("rainfall", "sunshine", "humidity", "temperature")


@dataclass
class PreparedStation:
    station: str
    stats: object
    train: object
    val: object
    test: object
    feature_names: tuple
    target_names: tuple

    def as_dataset(self):
        return {"train": self.train, "val": self.val, "test": self.test,
                "stats": self.stats, "target_names": list(self.target_names)}


def prepare_station(series, spec=WindowSpec(), method="linear", features=WEATHER_FEATURES):
    """Impute, select ``features``, split 70/20/10, fit stats on train, window each split."""
    s = impute(series.select(features), method)
    train_s, val_s, test_s = split(s)
    stats = fit_normalizer(train_s)
    parts = [make_windows(normalize(p, stats).values, spec) for p in (train_s, val_s, test_s)]
    return PreparedStation(series.station, stats, *parts, tuple(features), tuple(features))


def prepare_combined(series_by_station, spec=WindowSpec(), method="linear",
                     features=WEATHER_FEATURES):
    """Combined-model windows: one normalizer over all stations' train rows,
    inputs carry the station one-hot columns, labels only the weather features.

    Returns ``{station: dataset dict}`` using the ``combined_*`` keys expected
    by :func:`agroweather.training.compare_architectures`.
    """
    stations = sorted(series_by_station)
    splits = {}
    for st in stations:
        s = impute(series_by_station[st].select(features), method)
        splits[st] = split(s)
    stats = fit_normalizer(np.concatenate([splits[st][0].values for st in stations]), features)
    out = {}
    for st in stations:
        sets = []
        for part in splits[st]:
            normed = {st: normalize(part.values, stats)}
            table = encode_station_onehot(normed, stations, features)
            sets.append(make_windows(table.blocks[st], spec, target_columns=range(len(features))))
        out[st] = {"combined_train": sets[0], "combined_val": sets[1],
                   "combined_test": sets[2], "combined_stats": stats}
    return out


def synthetic_series(seed=DEFAULT_SEED, stations=DEFAULT_STATIONS, years=DEFAULT_YEARS):
    """The shipped synthetic dataset, run through the same ingest path as real files."""
    raw = generate_raw(seed=seed, stations=stations, years=years)
    tables = {v: parse_monthly_matrix(read_raw_rows(text), v) for v, text in raw.items()}
    return merge_variable_files(tables)


def rollout(model, history, spec, horizon):
    """Forecast ``horizon`` days after the end of ``history`` (normalized rows).

    Each pass feeds the latest ``input_width`` days and keeps the final
    ``shift`` predicted steps, which lie beyond the input; those are appended
    and the window slides forward. Horizons past one label window are refused.
    """
    if not 1 <= horizon <= spec.label_width:
        raise ValueError(f"horizon must lie in [1, {spec.label_width}]")
    if list(model.target_names) != list(model.feature_names):
        raise ShapeMismatch("rollout needs a model whose targets equal its inputs")
    history = np.asarray(history, dtype=np.float64)
    if history.shape[0] < spec.input_width:
        raise TooShort(f"need {spec.input_width} days of history, got {history.shape[0]}")
    buf = history[-spec.input_width:].copy()
    out = []
    while len(out) < horizon:
        y = forward(model, buf)
        new = y[-spec.shift:]
        out.extend(new)
        buf = np.vstack([buf[spec.shift:], new])
    return np.asarray(out[:horizon])


def forecast_physical(model, series, spec, horizon, method="linear"):
    """Rollout on a physical-unit :class:`DailySeries`; returns physical predictions."""
    feats = list(model.feature_names)
    s = impute(series.select(feats), method)
    pred = rollout(model, normalize(s.values, model.stats), spec, horizon)
    return denormalize(pred, model.stats)


__all__ = [
    "WEATHER_FEATURES", "PreparedStation", "prepare_station", "prepare_combined",
    "synthetic_series", "rollout", "forecast_physical",
]
