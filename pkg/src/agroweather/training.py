"""Adam training loop with early stopping, plus the regression metric suite."""

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import DivergenceDetected, EmptyTestSet, NonFiniteGradient, NonFiniteUpdate
from .nn.model import BiLstmModel, ModelConfig, forward, gradients
from .windowing import WindowSet, batches

# physical-scale targets that can go negative are left out of MSLE
MSLE_EXCLUDED = ("temperature", "wx", "wy")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 100
    patience: int = 10
    batch_size: int = 64
    l1: float = 1e-5
    l2: float = 1e-5
    loss: str = "mae"
    seed: int = 0
    shuffle: bool = False
    min_delta: float = 1e-7

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if not 0 <= self.patience <= self.epochs:
            raise ValueError("patience must lie in [0, epochs]")
        if self.loss not in ("mae", "mse"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.l1 < 0 or self.l2 < 0:
            raise ValueError("regularization strengths must be non-negative")

    def to_dict(self):
        return asdict(self)


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = 0  # 1-based
    stopped_epoch: int = 0
    seconds: float = 0.0

    def to_dict(self):
        return asdict(self)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "train_loss", "val_loss"])
            for k, (a, b) in enumerate(zip(self.train_loss, self.val_loss), 1):
                w.writerow([k, repr(float(a)), repr(float(b))])


# -- optimizer ---------------------------------------------------------------

@dataclass
class AdamState:
    m: dict
    v: dict
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params):
        return cls({k: np.zeros_like(p) for k, p in params.items()},
                   {k: np.zeros_like(p) for k, p in params.items()})


def adam_step(params, grads, state, lr=1e-3):
    """One bias-corrected Adam update, in place on ``params`` and ``state``."""
    state.step += 1
    b1, b2, eps = state.beta1, state.beta2, state.eps
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    updates = {}
    for name, g in grads.items():
        m, v = state.m[name], state.v[name]
        if m.shape != g.shape:
            raise ValueError(f"state shape mismatch for {name}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        step = lr * (m / c1) / (np.sqrt(v / c2) + eps)
        if not np.all(np.isfinite(step)):
            raise NonFiniteUpdate(f"non-finite update for {name}")
        updates[name] = step
    for name, step in updates.items():
        params[name] -= step
    return params, state


class EarlyStopping:
    """Tracks the best validation loss; ``update`` returns True when training should stop."""

    def __init__(self, patience=10, min_delta=1e-7):
        self.patience = patience
        self.min_delta = min_delta
        self.best = np.inf
        self.best_epoch = 0
        self.best_params = None
        self.wait = 0

    def update(self, epoch, val_loss, params):
        if val_loss < self.best - self.min_delta:
            self.best = val_loss
            self.best_epoch = epoch
            self.best_params = {k: v.copy() for k, v in params.items()}
            self.wait = 0
        else:
            self.wait += 1
        return self.wait >= self.patience


# -- loop ---------------------------------------------------------------------

def data_loss(model, windows, loss="mae", batch_size=256):
    """Mean loss over all windows, without regularization."""
    total, count = 0.0, 0
    lw = windows.labels.shape[1]
    for lo in range(0, len(windows), batch_size):
        x = windows.inputs[lo:lo + batch_size]
        y = windows.labels[lo:lo + batch_size]
        r = forward(model, x, lw) - y
        total += float(np.abs(r).sum() if loss == "mae" else np.square(r).sum())
        count += r.size
    return total / count


def train(model, train_windows, val_windows, config=TrainConfig(), log_path=None, verbose=False,
          callback=None):
    """Fit ``model`` in place and return ``(model, history)``.

    The returned model carries the parameters of the epoch with the lowest
    validation loss. ``callback(epoch, model, history)`` runs after every
    epoch; a truthy return value ends training there.
    """
    if len(train_windows) == 0 or len(val_windows) == 0:
        raise ValueError("train and validation windows must be non-empty")
    t0 = time.perf_counter()
    state = AdamState.zeros_like(model.params)
    stopper = EarlyStopping(config.patience, config.min_delta)
    history = TrainHistory()
    for epoch in range(1, config.epochs + 1):
        seed = None if not config.shuffle else config.seed + epoch
        total, count = 0.0, 0
        for batch in batches(train_windows, config.batch_size, config.shuffle, seed):
            try:
                value, grads = gradients(model, batch.inputs, batch.labels,
                                         config.loss, config.l1, config.l2)
                adam_step(model.params, grads, state, config.learning_rate)
            except (NonFiniteGradient, NonFiniteUpdate) as exc:
                raise DivergenceDetected(f"epoch {epoch}: {exc}") from exc
            total += value * len(batch)
            count += len(batch)
        train_loss = total / count
        val_loss = data_loss(model, val_windows, config.loss)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise DivergenceDetected(f"epoch {epoch}: non-finite loss")
        history.train_loss.append(train_loss)
        history.val_loss.append(val_loss)
        stop = stopper.update(epoch, val_loss, model.params)
        if verbose:
            print(f"epoch {epoch:3d}  train {train_loss:.6f}  val {val_loss:.6f}"
                  f"  ({time.perf_counter() - t0:.0f}s)", flush=True)
        if log_path is not None:
            history.write_csv(log_path)
        if callback is not None and callback(epoch, model, history):
            stop = True
        if stop:
            break
    history.stopped_epoch = epoch
    history.best_epoch = stopper.best_epoch
    if stopper.best_params is not None:
        model.params = stopper.best_params
    history.seconds = time.perf_counter() - t0
    return model, history


# -- metrics -------------------------------------------------------------------

@dataclass(frozen=True)
class MetricsReport:
    mae: float
    mse: float
    msle: float
    r2: float
    smape: float

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def mae(y, yhat):
    return float(np.mean(np.abs(yhat - y)))


def mse(y, yhat):
    return float(np.mean(np.square(yhat - y)))


def msle(y, yhat):
    if np.any(y <= -1) or np.any(yhat <= -1):
        raise ValueError("MSLE needs values > -1")
    return float(np.mean(np.square(np.log1p(y) - np.log1p(yhat))))


def r2_score(y, yhat):
    ss_res = float(np.sum(np.square(y - yhat)))
    ss_tot = float(np.sum(np.square(y - np.mean(y))))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def smape(y, yhat):
    """Percent, in [0, 200]; pairs with y = yhat = 0 contribute 0."""
    denom = np.abs(y) + np.abs(yhat)
    num = 2.0 * np.abs(yhat - y)
    terms = np.divide(num, denom, out=np.zeros_like(num), where=denom > 0)
    return float(100.0 * np.mean(terms))


def regression_metrics(y, yhat, msle_y=None, msle_yhat=None):
    """All five metrics over the flattened arrays.

    MSLE uses ``msle_y``/``msle_yhat`` when given (e.g. the physical-scale
    values of the non-negative targets), otherwise ``y``/``yhat``.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    if y.size == 0:
        raise EmptyTestSet("no values to score")
    if y.shape != yhat.shape:
        raise ValueError("shape mismatch between targets and predictions")
    if msle_y is None:
        m = msle(y, yhat)
    else:
        a = np.asarray(msle_y, dtype=np.float64).ravel()
        b = np.asarray(msle_yhat, dtype=np.float64).ravel()
        m = msle(a, b) if a.size else float("nan")
    return MetricsReport(mae(y, yhat), mse(y, yhat), m, r2_score(y, yhat), smape(y, yhat))


def predict_windows(model, windows, batch_size=256):
    lw = windows.labels.shape[1]
    out = [forward(model, windows.inputs[lo:lo + batch_size], lw)
           for lo in range(0, len(windows), batch_size)]
    return np.concatenate(out, axis=0)


def evaluate(model, test_windows, stats=None):
    """Score ``model`` on normalized test windows.

    MAE, MSE, R2 and SMAPE use the normalized scale. MSLE uses the
    denormalized values of the non-negative targets (temperature and wind
    components excluded), with values clipped at zero. Without ``stats`` MSLE
    is computed on the given arrays, clipped at zero the same way.
    """
    if len(test_windows) == 0:
        raise EmptyTestSet("test set has no windows")
    yhat = predict_windows(model, test_windows)
    y = np.asarray(test_windows.labels)
    if stats is None:
        return regression_metrics(y, yhat, np.clip(y, 0.0, None), np.clip(yhat, 0.0, None))
    names = list(model.target_names) or list(stats.feature_names[: y.shape[-1]])
    tstats = stats.subset(names)
    keep = [j for j, n in enumerate(names) if n not in MSLE_EXCLUDED]
    y_phys = y * tstats.std + tstats.mean
    yhat_phys = yhat * tstats.std + tstats.mean
    return regression_metrics(
        y, yhat,
        np.clip(y_phys[..., keep], 0.0, None),
        np.clip(yhat_phys[..., keep], 0.0, None),
    )


# -- architecture comparison -----------------------------------------------------

@dataclass(frozen=True)
class Variant:
    """One entry of an architecture comparison.

    ``mode`` is ``per_station`` or ``combined`` (one model over every station
    with one-hot station columns).
    """

    name: str
    n_layers: int = 3
    bidirectional: bool = True
    units: int = 32
    td_units: tuple = (16,)
    mode: str = "per_station"
    features: tuple = None

    def model_config(self, n_features, n_targets, seed):
        return ModelConfig(n_features, n_targets, self.units, self.n_layers,
                           self.bidirectional, tuple(self.td_units), seed)


@dataclass
class VariantResult:
    variant: Variant
    per_station: dict
    average_r2: float
    histories: dict

    def to_dict(self):
        return {
            "variant": self.variant.name,
            "average_r2": self.average_r2,
            "stations": {s: m.to_dict() for s, m in self.per_station.items()},
        }


def compare_architectures(datasets, variants, train_config=TrainConfig(), verbose=False):
    """Train and score every variant; results sorted by average R2, best first.

    ``datasets`` maps station -> dict with ``train``, ``val``, ``test``
    :class:`WindowSet` entries (normalized per station) and ``stats``. For
    combined variants each station's dataset must also carry ``combined_*``
    WindowSets whose inputs include the one-hot columns.
    """
    results = []
    stations = sorted(datasets)
    for variant in variants:
        per_station, histories = {}, {}
        if variant.mode == "per_station":
            for s in stations:
                d = datasets[s]
                tr, va, te = d["train"], d["val"], d["test"]
                cfg = variant.model_config(tr.inputs.shape[-1], tr.labels.shape[-1], train_config.seed)
                model = BiLstmModel(cfg, target_names=list(d.get("target_names", [])))
                model, hist = train(model, tr, va, train_config, verbose=verbose)
                per_station[s] = evaluate(model, te, d.get("stats"))
                histories[s] = hist
        elif variant.mode == "combined":
            tr = _concat([datasets[s]["combined_train"] for s in stations])
            va = _concat([datasets[s]["combined_val"] for s in stations])
            cfg = variant.model_config(tr.inputs.shape[-1], tr.labels.shape[-1], train_config.seed)
            model = BiLstmModel(cfg, target_names=list(datasets[stations[0]].get("target_names", [])))
            model, hist = train(model, tr, va, train_config, verbose=verbose)
            histories["combined"] = hist
            for s in stations:
                d = datasets[s]
                per_station[s] = evaluate(model, d["combined_test"], d.get("combined_stats"))
        else:
            raise ValueError(f"unknown mode {variant.mode!r}")
        avg = float(np.mean([m.r2 for m in per_station.values()]))
        results.append(VariantResult(variant, per_station, avg, histories))
    results.sort(key=lambda r: -r.average_r2)
    return results


def _concat(sets):
    return WindowSet(np.concatenate([w.inputs for w in sets]),
                     np.concatenate([w.labels for w in sets]))


def write_report(results, path):
    Path(path).write_text(json.dumps([r.to_dict() for r in results], indent=2, sort_keys=True) + "\n")
