"""Batched recurrent and dense layers with hand-written backward passes.

All sequence tensors are time-major, ``(T, B, F)``.

A recurrent layer holds ``D`` directions (1 = plain LSTM, 2 = bidirectional).
Both directions are advanced together with batched matmuls: the backward
direction sees the time-reversed input and its states are reversed again
before concatenation, so ``out[t]`` is aligned with ``x[t]``.

Parameter shapes for a layer with ``F`` inputs and ``u`` units, gates ordered
``[input, forget, output, candidate]`` along the last axis:

    kernel     (D, F, 4u)
    recurrent  (D, u, 4u)
    bias       (D, 4u)

Internally the gates are split out to a leading axis (``(4, D, ...)``) so every
per-gate slice touched inside the time loop is a contiguous block.
"""

import numpy as np

from ..errors import ShapeMismatch

# sigmoid(z) = 0.5 * tanh(z / 2) + 0.5; one tanh call then covers all four gates
_GATE_SCALE = np.array([0.5, 0.5, 0.5, 1.0])


def _split_gates(w, D, u):
    # (D, n, 4u) -> (4, D, n, u)
    return np.ascontiguousarray(w.reshape(D, -1, 4, u).transpose(2, 0, 1, 3))


def _buffer(work, name, shape):
    # reusing large buffers avoids re-faulting tens of MB of fresh pages per batch
    if work is None:
        return np.empty(shape)
    buf = work.get(name)
    if buf is None or buf.shape != shape:
        buf = work[name] = np.empty(shape)
    return buf


def recurrent_forward(x, kernel, recurrent, bias, work=None):
    """Run every direction of one recurrent layer over ``x`` of shape (T, B, F).

    Returns ``(out, cache)`` with ``out`` of shape (T, B, D*u). ``work`` is an
    optional dict of scratch buffers reused across calls; the cache then
    points into it and is only valid until the next call with the same dict.
    """
    T, B, F = x.shape
    D, Fk, G = kernel.shape
    u = G // 4
    if Fk != F:
        raise ShapeMismatch(f"layer expects {Fk} input features, got {F}")
    if recurrent.shape != (D, u, G) or bias.shape != (D, G):
        raise ShapeMismatch("inconsistent recurrent layer parameters")

    xs = x[None] if D == 1 else np.stack([x, x[::-1]])  # (D, T, B, F)
    scale = _GATE_SCALE[:, None, None, None]
    kg = _split_gates(kernel, D, u) * scale
    rec = _split_gates(recurrent, D, u) * scale
    bg = bias.reshape(D, 4, u).transpose(1, 0, 2)[:, :, None, :] * scale
    # input projections for every step at once, laid out (T, 4, D, B, u);
    # the buffer then holds the gate activations in place
    acts = _buffer(work, "acts", (T, 4, D, B, u))
    np.matmul(xs.transpose(1, 0, 2, 3)[:, None], kg[None], out=acts)
    acts += bg

    hs = _buffer(work, "hs", (T + 1, D, B, u))
    cs = _buffer(work, "cs", (T + 1, D, B, u))
    hs[0] = 0.0
    cs[0] = 0.0
    tcs = _buffer(work, "tcs", (T, D, B, u))
    ig = np.empty((D, B, u))
    hr = np.empty((4, D, B, u))
    for t in range(T):
        a = acts[t]
        np.matmul(hs[t][None], rec, out=hr)
        a += hr
        np.tanh(a, out=a)
        sg = a[:3]
        sg *= 0.5
        sg += 0.5
        c = cs[t + 1]
        np.multiply(a[1], cs[t], out=c)
        np.multiply(a[0], a[3], out=ig)
        c += ig
        np.tanh(c, out=tcs[t])
        np.multiply(a[2], tcs[t], out=hs[t + 1])

    if D == 1:
        out = hs[1:, 0].copy()
    else:
        out = np.concatenate([hs[1:, 0], hs[:0:-1, 1]], axis=-1)
    cache = {"xs": xs, "acts": acts, "hs": hs, "cs": cs, "tcs": tcs,
             "kernel": kernel, "recurrent": recurrent, "work": work}
    return out, cache


def recurrent_backward(dout, cache):
    """Backpropagate through time.

    Returns ``(dx, grads)`` with ``dx`` of shape (T, B, F) and grads keyed
    ``kernel``, ``recurrent``, ``bias`` in parameter layout.
    """
    xs, acts, hs, cs, tcs = (cache[k] for k in ("xs", "acts", "hs", "cs", "tcs"))
    kernel, recurrent = cache["kernel"], cache["recurrent"]
    T, _, D, B, u = acts.shape
    F = xs.shape[-1]

    work = cache.get("work")
    dH = _buffer(work, "dH", (T, D, B, u))
    dH[:, 0] = dout[..., :u]
    if D == 2:
        dH[:, 1] = dout[::-1, :, u:]

    dZ = _buffer(work, "dZ", acts.shape)
    rec_t = _split_gates(recurrent, D, u).transpose(0, 1, 3, 2).copy()
    back = np.empty((4, D, B, u))
    dh = np.zeros((D, B, u))
    dc = np.zeros((D, B, u))
    tmp = np.empty((D, B, u))
    for t in range(T - 1, -1, -1):
        a = acts[t]
        dz = dZ[t]
        # local gate derivatives: s(1 - s) for the sigmoids, 1 - g^2 for the candidate
        np.subtract(1.0, a[:3], out=dz[:3])
        dz[:3] *= a[:3]
        np.square(a[3], out=dz[3])
        np.subtract(1.0, dz[3], out=dz[3])

        dh += dH[t]
        np.multiply(dh, a[2], out=tmp)
        np.square(tcs[t], out=back[0])
        np.subtract(1.0, back[0], out=back[0])
        tmp *= back[0]
        dc += tmp
        dz[2] *= dh
        dz[2] *= tcs[t]
        dz[0] *= dc
        dz[0] *= a[3]
        dz[1] *= dc
        dz[1] *= cs[t]
        dz[3] *= dc
        dz[3] *= a[0]
        dc *= a[1]
        np.matmul(dz, rec_t, out=back)
        np.add(back[0], back[1], out=dh)
        dh += back[2]
        dh += back[3]

    # (T, 4, D, B, u) -> (D, T*B, 4u), the gate-interleaved parameter layout
    dZd = _buffer(work, "dZd", (D, T, B, 4, u))
    dZd[...] = dZ.transpose(2, 0, 3, 1, 4)
    dZd = dZd.reshape(D, T * B, 4 * u)
    hprev = np.ascontiguousarray(hs[:-1].transpose(1, 0, 2, 3)).reshape(D, T * B, u)
    xsd = xs.reshape(D, T * B, F)
    grads = {
        "kernel": np.matmul(xsd.transpose(0, 2, 1), dZd),
        "recurrent": np.matmul(hprev.transpose(0, 2, 1), dZd),
        "bias": dZd.sum(axis=1),
    }
    dxs = np.matmul(dZd, kernel.transpose(0, 2, 1)).reshape(D, T, B, F)
    dx = dxs[0]
    if D == 2:
        dx += dxs[1, ::-1]
    return dx, grads


def dense_forward(x, kernel, bias):
    """Time-distributed dense: the same weights applied at every step."""
    if x.shape[-1] != kernel.shape[0]:
        raise ShapeMismatch(f"dense expects {kernel.shape[0]} inputs, got {x.shape[-1]}")
    return x @ kernel + bias, {"x": x, "kernel": kernel}


def dense_backward(dout, cache):
    x, kernel = cache["x"], cache["kernel"]
    flat_x = x.reshape(-1, x.shape[-1])
    flat_d = dout.reshape(-1, dout.shape[-1])
    grads = {"kernel": flat_x.T @ flat_d, "bias": flat_d.sum(axis=0)}
    return dout @ kernel.T, grads
