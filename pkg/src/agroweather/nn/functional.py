"""Elementwise activations and a single-step LSTM cell.

Gate layout used throughout the package is ``[input, forget, output, candidate]``
along the last axis of every kernel, recurrent matrix and bias, so that the
three sigmoid gates form one contiguous block.
"""

import numpy as np
from scipy.special import expit

from ..errors import ShapeMismatch

sigmoid = expit


def _fast_sigmoid(x):
    # tanh form; noticeably faster than expit on large float64 arrays
    s = np.tanh(0.5 * x)
    s *= 0.5
    s += 0.5
    return s


def swish(x):
    """x * sigmoid(x)."""
    return x * _fast_sigmoid(x)


def swish_grad(x):
    s = _fast_sigmoid(x)
    return s * (1.0 + x * (1.0 - s))


def lstm_cell(x_t, h_prev, c_prev, params):
    """Advance one LSTM step.

    Parameters
    ----------
    x_t : array, shape (..., n_in)
    h_prev, c_prev : array, shape (..., units)
    params : mapping with ``kernel`` (n_in, 4*units), ``recurrent``
        (units, 4*units) and ``bias`` (4*units,)

    Returns
    -------
    h_t, c_t
    """
    kernel = np.asarray(params["kernel"], dtype=np.float64)
    recurrent = np.asarray(params["recurrent"], dtype=np.float64)
    bias = np.asarray(params["bias"], dtype=np.float64)
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)

    units = recurrent.shape[0]
    if (
        recurrent.shape != (units, 4 * units)
        or kernel.ndim != 2
        or kernel.shape[1] != 4 * units
        or bias.shape != (4 * units,)
    ):
        raise ShapeMismatch("inconsistent LSTM parameter shapes")
    if x_t.shape[-1] != kernel.shape[0]:
        raise ShapeMismatch(f"input width {x_t.shape[-1]} != kernel rows {kernel.shape[0]}")
    if h_prev.shape[-1] != units or c_prev.shape != h_prev.shape:
        raise ShapeMismatch("state shape does not match unit count")

    z = x_t @ kernel + h_prev @ recurrent + bias
    i = expit(z[..., :units])
    f = expit(z[..., units:2 * units])
    o = expit(z[..., 2 * units:3 * units])
    g = np.tanh(z[..., 3 * units:])
    c_t = f * c_prev + i * g
    h_t = o * np.tanh(c_t)
    return h_t, c_t
