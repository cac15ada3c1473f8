import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agroweather.errors import TooShort
from agroweather.windowing import WindowSet, WindowSpec, batches, make_windows


def brute_force(values, spec):
    out = []
    n = len(values)
    total = spec.input_width + spec.shift
    for start in range(n):
        if start + total > n:
            break
        inputs = [values[start + i] for i in range(spec.input_width)]
        labels = [values[start + i] for i in range(total - spec.label_width, total)]
        out.append((np.array(inputs), np.array(labels)))
    return out


def test_one_window_for_366_days():
    w = make_windows(np.zeros((366, 4)), WindowSpec(365, 365, 1))
    assert len(w) == 1
    assert w.inputs.shape == (1, 365, 4) and w.labels.shape == (1, 365, 4)
    with pytest.raises(TooShort):
        make_windows(np.zeros((365, 4)), WindowSpec())


def test_small_example():
    v = np.arange(10.0)[:, None]
    w = make_windows(v, WindowSpec(3, 3, 1))
    assert len(w) == 7
    np.testing.assert_array_equal(w.inputs[0, :, 0], [0, 1, 2])
    np.testing.assert_array_equal(w.labels[0, :, 0], [1, 2, 3])


specs = st.builds(lambda i, s, l: WindowSpec(i, min(l, i + s), s),
                  st.integers(1, 12), st.integers(1, 5), st.integers(1, 15))


@settings(max_examples=50, deadline=None)
@given(specs, st.integers(1, 40), st.integers(1, 3))
def test_matches_brute_force(spec, n, f):
    values = np.arange(n * f, dtype=float).reshape(n, f)
    expected = brute_force(values, spec)
    if not expected:
        with pytest.raises(TooShort):
            make_windows(values, spec)
        return
    w = make_windows(values, spec)
    assert len(w) == len(expected) == n - spec.total_width + 1
    for k, (i, l) in enumerate(expected):
        np.testing.assert_array_equal(w.inputs[k], i)
        np.testing.assert_array_equal(w.labels[k], l)


@settings(max_examples=30, deadline=None)
@given(specs, st.integers(20, 60))
def test_reconstruction_and_label_alignment(spec, n):
    values = np.random.default_rng(n).standard_normal((n, 2))
    if n < spec.total_width:
        return
    w = make_windows(values, spec)
    rebuilt = np.concatenate([w.inputs[:, 0], w.inputs[-1, 1:]])
    np.testing.assert_array_equal(rebuilt, values[:len(w) + spec.input_width - 1])
    # label step j sits `shift` steps after input step (j + label_start - shift)
    for k in range(len(w)):
        for j in range(spec.label_width):
            src = j + spec.label_start - spec.shift
            if 0 <= src < spec.input_width and k + spec.shift < len(w) + spec.input_width:
                idx = k + src + spec.shift
                np.testing.assert_array_equal(w.labels[k, j], values[idx])


def test_target_columns():
    w = make_windows(np.arange(30.0).reshape(10, 3), WindowSpec(3, 2, 1), target_columns=[0, 2])
    assert w.labels.shape == (7, 2, 2)


def test_spec_validation():
    with pytest.raises(ValueError):
        WindowSpec(0, 1, 1)
    with pytest.raises(ValueError):
        WindowSpec(3, 5, 1)


@pytest.mark.parametrize("n,size,expected", [(130, 64, [64, 64, 2]), (1, 64, [1]), (64, 64, [64])])
def test_batch_sizes(n, size, expected):
    w = make_windows(np.zeros((n + 2, 1)), WindowSpec(2, 1, 1))
    assert [len(b) for b in batches(w, size)] == expected


def test_batches_preserve_order_and_shuffle_is_seeded():
    w = make_windows(np.arange(50.0)[:, None], WindowSpec(2, 1, 1))
    flat = np.concatenate([b.inputs[:, 0, 0] for b in batches(w, 7)])
    np.testing.assert_array_equal(flat, np.arange(len(w)))
    a = np.concatenate([b.inputs[:, 0, 0] for b in batches(w, 7, shuffle=True, seed=3)])
    b = np.concatenate([b.inputs[:, 0, 0] for b in batches(w, 7, shuffle=True, seed=3)])
    np.testing.assert_array_equal(a, b)
    assert sorted(a) == list(range(len(w))) and not np.array_equal(a, flat)
    assert [len(x) for x in batches(list(range(5)), 2)] == [2, 2, 1]
    with pytest.raises(ValueError):
        batches(w, 0)
