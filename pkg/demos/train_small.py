"""Train a scaled-down Bi-LSTM on one synthetic station and forecast a month.

The default model takes about a minute per epoch on one core; this uses
60-day windows and 8 units so the whole script finishes in well under a minute.

    python demos/train_small.py
"""

from datetime import timedelta

import numpy as np

from agroweather.advisor import aggregate_forecast
from agroweather.nn import BiLstmModel, ModelConfig
from agroweather.pipeline import prepare_station, rollout, synthetic_series
from agroweather.preprocess import denormalize, impute, normalize
from agroweather.training import TrainConfig, evaluate, train
from agroweather.windowing import WindowSpec

spec = WindowSpec(60, 60, 1)
series = synthetic_series()["dhaka"]
data = prepare_station(series, spec)
print("windows train/val/test:", len(data.train), len(data.val), len(data.test))

cfg = ModelConfig(n_features=4, n_targets=4, units=8, n_layers=2, td_units=(8,))
model = BiLstmModel(cfg, feature_names=list(data.feature_names),
                    target_names=list(data.target_names), stats=data.stats)
print("parameters:", model.param_count())

# every 4th window keeps the demo quick
model, hist = train(model, data.train[::4], data.val[::4],
                    TrainConfig(learning_rate=3e-3, epochs=8, patience=3, batch_size=64), verbose=True)
print(f"best epoch {hist.best_epoch}, {hist.seconds:.0f}s")

report = evaluate(model, data.test, data.stats)
for k, v in report.to_dict().items():
    print(f"  {k:6s} {v:.4f}")

# 31-day forecast past the end of the record, in physical units
history = normalize(impute(series.select(data.feature_names)).values, data.stats)
pred = denormalize(rollout(model, history, spec, 31), data.stats)
start = series.end + timedelta(days=1)
for row in aggregate_forecast(start, pred, data.feature_names, "weekly"):
    vals = ", ".join(f"{k} {v:.1f}" for k, v in row.values.items())
    print(f"  {row.period} {row.start} ({row.days}d): {vals}")
print("mean abs forecast step:", float(np.abs(np.diff(pred, axis=0)).mean()))
