"""Stacked (Bi-)LSTM forecaster with a time-distributed dense head.

Topology, in order::

    input (B, T, n_features)
    -> n_layers x [recurrent layer (D directions, `units` each) -> swish]
    -> time-distributed dense layers (`td_units`, swish)
    -> output dense (n_targets, linear)
    -> last `label_width` steps

Every parameter lives in ``model.params`` under a stable name, which is what
the optimizer, the gradient routine and the weight file all key on.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteGradient, ShapeMismatch
from .functional import swish, swish_grad
from .layers import dense_backward, dense_forward, recurrent_backward, recurrent_forward


@dataclass(frozen=True)
class ModelConfig:
    n_features: int = 4
    n_targets: int = 4
    units: int = 32
    n_layers: int = 3
    bidirectional: bool = True
    td_units: tuple = (16,)
    seed: int = 0

    @property
    def directions(self):
        return 2 if self.bidirectional else 1

    def to_dict(self):
        return {
            "n_features": self.n_features,
            "n_targets": self.n_targets,
            "units": self.units,
            "n_layers": self.n_layers,
            "bidirectional": self.bidirectional,
            "td_units": list(self.td_units),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["td_units"] = tuple(d.get("td_units", (16,)))
        return cls(**d)


def _glorot_uniform(rng, fan_in, fan_out, shape):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _orthogonal(rng, rows, cols):
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    return q if rows >= cols else q.T


def init_params(config):
    """Glorot-uniform kernels, orthogonal recurrent matrices, forget bias 1."""
    rng = np.random.default_rng(config.seed)
    D, u = config.directions, config.units
    params = {}
    n_in = config.n_features
    for k in range(config.n_layers):
        kernel = np.stack([_glorot_uniform(rng, n_in, 4 * u, (n_in, 4 * u)) for _ in range(D)])
        recurrent = np.stack([_orthogonal(rng, u, 4 * u) for _ in range(D)])
        bias = np.zeros((D, 4 * u))
        bias[:, u:2 * u] = 1.0
        params[f"rnn{k}.kernel"] = kernel
        params[f"rnn{k}.recurrent"] = recurrent
        params[f"rnn{k}.bias"] = bias
        n_in = D * u
    for k, width in enumerate(config.td_units):
        params[f"td{k}.kernel"] = _glorot_uniform(rng, n_in, width, (n_in, width))
        params[f"td{k}.bias"] = np.zeros(width)
        n_in = width
    params["out.kernel"] = _glorot_uniform(rng, n_in, config.n_targets, (n_in, config.n_targets))
    params["out.bias"] = np.zeros(config.n_targets)
    return params


def is_weight(name):
    """Regularized tensors: kernels and recurrent matrices, never biases."""
    return not name.endswith(".bias")


@dataclass
class BiLstmModel:
    config: ModelConfig
    params: dict = None
    feature_names: list = field(default_factory=list)
    target_names: list = field(default_factory=list)
    stats: object = None

    def __post_init__(self):
        if self.params is None:
            self.params = init_params(self.config)
        # per-layer scratch buffers; not part of the model's state
        self._work = {}

    def copy(self):
        return BiLstmModel(
            self.config,
            {k: v.copy() for k, v in self.params.items()},
            list(self.feature_names),
            list(self.target_names),
            self.stats,
        )

    def param_count(self):
        return param_count(self)

    def predict(self, inputs, label_width=None):
        return forward(self, inputs, label_width)


def param_count(model):
    """Trainable parameter count, 4*u*(u + f + 1) per LSTM direction plus dense layers."""
    c = model.config if isinstance(model, BiLstmModel) else model
    total = 0
    n_in = c.n_features
    for _ in range(c.n_layers):
        total += c.directions * 4 * c.units * (c.units + n_in + 1)
        n_in = c.directions * c.units
    for width in c.td_units:
        total += (n_in + 1) * width
        n_in = width
    total += (n_in + 1) * c.n_targets
    return total


def _check_inputs(model, x):
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[None]
    if x.ndim != 3 or x.shape[-1] != model.config.n_features or x.shape[1] < 1:
        raise ShapeMismatch(
            f"expected (batch, steps, {model.config.n_features}) inputs, got {x.shape}"
        )
    return x, squeeze


def _run(model, x, keep_cache):
    # x: (B, T, F) -> time-major for the layers; output back to (B, T, targets)
    p = model.params
    caches = []
    h = np.ascontiguousarray(x.transpose(1, 0, 2))
    for k in range(model.config.n_layers):
        z, cache = recurrent_forward(
            h, p[f"rnn{k}.kernel"], p[f"rnn{k}.recurrent"], p[f"rnn{k}.bias"],
            model._work.setdefault(k, {}),
        )
        h = swish(z)
        if keep_cache:
            caches.append((cache, z))
    for k in range(len(model.config.td_units)):
        z, cache = dense_forward(h, p[f"td{k}.kernel"], p[f"td{k}.bias"])
        h = swish(z)
        if keep_cache:
            caches.append((cache, z))
    y, cache = dense_forward(h, p["out.kernel"], p["out.bias"])
    if keep_cache:
        caches.append((cache, None))
    return y.transpose(1, 0, 2), caches


def forward(model, inputs, label_width=None):
    """Predict targets for ``inputs`` of shape (steps, features) or (batch, steps, features).

    The output keeps the last ``label_width`` steps (all steps by default).
    """
    x, squeeze = _check_inputs(model, inputs)
    y, _ = _run(model, x, keep_cache=False)
    if label_width is not None:
        if label_width > y.shape[1]:
            raise ShapeMismatch("label_width exceeds input length")
        y = y[:, y.shape[1] - label_width:]
    return y[0] if squeeze else y


def regularization(params, l1=0.0, l2=0.0):
    total = 0.0
    for name, w in params.items():
        if is_weight(name):
            if l1:
                total += l1 * np.abs(w).sum()
            if l2:
                total += l2 * np.square(w).sum()
    return total


def gradients(model, inputs, labels, loss="mae", l1=0.0, l2=0.0):
    """Loss and exact gradients w.r.t. every parameter.

    ``loss`` is ``"mae"`` (subgradient 0 at zero residual) or ``"mse"``;
    ``l1``/``l2`` penalize weights as ``l1*sum|w| + l2*sum w**2``.

    Returns ``(loss_value, grads)`` with grads keyed like ``model.params``.
    """
    x, _ = _check_inputs(model, inputs)
    labels = np.asarray(labels, dtype=np.float64)
    if labels.ndim == 2:
        labels = labels[None]
    y, caches = _run(model, x, keep_cache=True)
    lw = labels.shape[1]
    if labels.shape[0] != y.shape[0] or labels.shape[2] != y.shape[2] or lw > y.shape[1]:
        raise ShapeMismatch(f"labels {labels.shape} incompatible with outputs {y.shape}")

    resid = y[:, y.shape[1] - lw:] - labels
    n = resid.size
    if loss == "mae":
        value = np.abs(resid).sum() / n
        dres = np.sign(resid) / n
    elif loss == "mse":
        value = np.square(resid).sum() / n
        dres = 2.0 * resid / n
    else:
        raise ValueError(f"unknown loss {loss!r}")
    dy = np.zeros_like(y)
    dy[:, y.shape[1] - lw:] = dres

    p = model.params
    value += regularization(p, l1, l2)
    grads = {}
    cfg = model.config
    n_td = len(cfg.td_units)

    cache, _ = caches.pop()
    dh, g = dense_backward(np.ascontiguousarray(dy.transpose(1, 0, 2)), cache)
    grads["out.kernel"], grads["out.bias"] = g["kernel"], g["bias"]
    for k in reversed(range(n_td)):
        cache, z = caches.pop()
        dh, g = dense_backward(dh * swish_grad(z), cache)
        grads[f"td{k}.kernel"], grads[f"td{k}.bias"] = g["kernel"], g["bias"]
    for k in reversed(range(cfg.n_layers)):
        cache, z = caches.pop()
        dh, g = recurrent_backward(dh * swish_grad(z), cache)
        for part in ("kernel", "recurrent", "bias"):
            grads[f"rnn{k}.{part}"] = g[part]

    for name, w in p.items():
        if is_weight(name):
            if l1:
                grads[name] = grads[name] + l1 * np.sign(w)
            if l2:
                grads[name] = grads[name] + 2.0 * l2 * w
        if not np.all(np.isfinite(grads[name])):
            raise NonFiniteGradient(f"non-finite gradient in {name}")
    return float(value), grads
