"""Central finite-difference check used by the nn and acceptance tests."""

import numpy as np

from agroweather.nn import BiLstmModel, ModelConfig, gradients


def toy_problem(bidirectional=True, seed=0, steps=3):
    cfg = ModelConfig(n_features=2, n_targets=2, units=2, n_layers=3,
                      bidirectional=bidirectional, td_units=(3,), seed=seed)
    model = BiLstmModel(cfg)
    rng = np.random.default_rng(seed + 100)
    # perturb every tensor so biases and gates sit away from their init values
    for p in model.params.values():
        p += 0.3 * rng.standard_normal(p.shape)
    x = rng.standard_normal((4, steps, 2))
    y = rng.standard_normal((4, steps, 2))
    return model, x, y


def max_relative_error(model, x, y, loss="mae", l1=0.0, l2=0.0, eps=1e-4):
    """max over all parameters of |analytic - numeric| / (|analytic| + 1e-8)."""
    _, grads = gradients(model, x, y, loss, l1, l2)
    worst = 0.0
    for name, p in model.params.items():
        g = grads[name]
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = p[i]
            p[i] = old + eps
            up, _ = gradients(model, x, y, loss, l1, l2)
            p[i] = old - eps
            down, _ = gradients(model, x, y, loss, l1, l2)
            p[i] = old
            num = (up - down) / (2 * eps)
            worst = max(worst, abs(g[i] - num) / (abs(g[i]) + 1e-8))
    return worst
