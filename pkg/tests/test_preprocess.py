import math
from datetime import date

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from agroweather.errors import AllMissing, DegenerateFeature, TooShort, UnknownDirection, UnknownStation
from agroweather.ingest import DailySeries
from agroweather.preprocess import (COMPASS_DEGREES, NormalizationStats, SplitSpec, denormalize,
                                    direction_to_degrees, encode_station_onehot, fit_normalizer,
                                    impute, impute_array, load_stats, normalize, save_stats, split,
                                    wind_to_vector)

NaN = np.nan


# -- imputation ---------------------------------------------------------------

def test_linear_examples():
    np.testing.assert_allclose(impute_array([2, NaN, 4]), [2, 3, 4])
    np.testing.assert_allclose(impute_array([1, NaN, NaN, 7]), [1, 3, 5, 7])
    np.testing.assert_allclose(impute_array([NaN, 5, 6]), [5, 5, 6])
    np.testing.assert_allclose(impute_array([5, 6, NaN, NaN]), [5, 6, 6, 6])


def test_other_methods():
    np.testing.assert_allclose(impute_array([1, NaN, 3], "mean"), [1, 2, 3])
    np.testing.assert_allclose(impute_array([NaN, 1, NaN, NaN, 4, NaN], "ffill_bfill"), [1, 1, 1, 1, 4, 4])
    col = np.arange(365 * 3, dtype=float)
    col[400] = NaN
    col[10] = NaN  # no value one period earlier -> linear
    out = impute_array(col, "seasonal")
    assert out[400] == pytest.approx((35 + 765) / 2)
    assert out[10] == pytest.approx(10)


def test_all_missing_raises():
    with pytest.raises(AllMissing):
        impute_array([NaN, NaN])
    s = DailySeries("x", date(2000, 1, 1), np.full((3, 6), NaN))
    with pytest.raises(AllMissing):
        impute(s)


with_gaps = arrays(np.float64, st.integers(2, 60),
                   elements=st.one_of(st.just(NaN), st.floats(-100, 100)))


@settings(max_examples=80, deadline=None)
@given(with_gaps, st.sampled_from(["mean", "ffill_bfill", "linear", "seasonal"]))
def test_imputation_properties(values, method):
    assume(not np.isnan(values).all())
    out = impute_array(values, method)
    observed = ~np.isnan(values)
    assert not np.isnan(out).any()
    np.testing.assert_array_equal(out[observed], values[observed])
    np.testing.assert_array_equal(impute_array(out, method), out)


@settings(max_examples=80, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50), st.integers(1, 8))
def test_linear_gap_monotone(a, b, gap):
    filled = impute_array(np.array([a] + [NaN] * gap + [b]))
    d = np.diff(filled)
    assert np.all(d >= -1e-12) or np.all(d <= 1e-12)


# -- wind -----------------------------------------------------------------------

def test_wind_examples():
    wx, wy = wind_to_vector(10, "E")
    assert wx == pytest.approx(10) and wy == pytest.approx(0, abs=1e-12)
    assert wind_to_vector(0, "NW") == (0.0, 0.0)
    wx, wy = wind_to_vector(11.25, 168.75)
    assert (wx, wy) == (pytest.approx(2.19, abs=0.01), pytest.approx(-11.03, abs=0.01))
    with pytest.raises(UnknownDirection):
        wind_to_vector(3, "NORTHISH")
    with pytest.raises(UnknownDirection):
        direction_to_degrees(360)


def test_compass_rose_is_complete():
    assert len(COMPASS_DEGREES) == 16
    assert direction_to_degrees("sse") == 157.5
    assert direction_to_degrees(" 45 ") == 45.0


@given(st.floats(0, 200), st.floats(0, 359.999))
def test_wind_magnitude_preserved(speed, deg):
    wx, wy = wind_to_vector(speed, deg)
    assert math.hypot(wx, wy) == pytest.approx(speed, rel=1e-9, abs=1e-12)


def test_wind_vectorized_with_nan():
    wx, wy = wind_to_vector(np.array([10.0, NaN]), np.array([90.0, 0.0]))
    assert wx[0] == pytest.approx(10) and np.isnan(wx[1]) and np.isnan(wy[1])


# -- normalization ------------------------------------------------------------

def test_fit_normalizer_examples():
    st_ = fit_normalizer(np.array([1.0, 2.0, 3.0]))
    assert st_.mean[0] == pytest.approx(2.0)
    assert st_.std[0] == pytest.approx(math.sqrt(2 / 3))
    assert st_.std[0] == pytest.approx(0.8165, abs=1e-4)
    with pytest.raises(DegenerateFeature):
        fit_normalizer(np.array([5.0, 5.0, 5.0]))
    assert fit_normalizer(np.array([-3.0, 3.0])).mean[0] == 0.0


def test_normalize_examples():
    stats = NormalizationStats(("a",), [2.0], [0.5])
    assert normalize(np.array([2.0]), stats)[0] == 0.0
    assert normalize(np.array([2.5]), stats)[0] == 1.0


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 40), st.integers(1, 5)),
              elements=st.floats(-1e4, 1e4)))
def test_normalization_properties(x):
    assume(np.all(x.std(axis=0) > 1e-3 * (1 + np.abs(x).max())))
    stats = fit_normalizer(x)
    z = normalize(x, stats)
    assert np.all(np.abs(z.mean(axis=0)) < 1e-9)
    np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-9)
    np.testing.assert_allclose(denormalize(z, stats), x, rtol=1e-12, atol=1e-12 * np.abs(x).max())


def test_stats_file_round_trip(tmp_path):
    stats = NormalizationStats(("rainfall", "humidity"), [1 / 3, 78.25], [math.pi, 0.1])
    save_stats(stats, tmp_path / "s.stats")
    assert load_stats(tmp_path / "s.stats") == stats
    assert (tmp_path / "s.stats").read_text().startswith("format_version=1\n")


# -- one-hot --------------------------------------------------------------------

def test_onehot_columns():
    rng = np.random.default_rng(0)
    stations = [f"s{k}" for k in range(35)]
    data = {s: rng.standard_normal((5, 4)) for s in stations[:3]}
    t = encode_station_onehot(data, stations, ("a", "b", "c", "d"))
    assert t.n_columns == 39
    for s, block in t.blocks.items():
        assert block.shape == (5, 39)
        np.testing.assert_array_equal(block[:, 4:].sum(axis=1), 1.0)
        assert block[0, 4 + stations.index(s)] == 1.0
    t2 = encode_station_onehot({"x": np.zeros((2, 4)), "y": np.ones((2, 4))}, ["x", "y"])
    assert t2.n_columns == 6
    with pytest.raises(UnknownStation):
        encode_station_onehot({"z": np.zeros((2, 4))}, ["x", "y"])


# -- split --------------------------------------------------------------------------

@pytest.mark.parametrize("n,sizes", [(100, (70, 20, 10)), (10, (7, 2, 1)), (23, (16, 4, 3))])
def test_split_sizes(n, sizes):
    parts = split(np.arange(n))
    assert tuple(len(p) for p in parts) == sizes


def test_split_too_short():
    with pytest.raises(TooShort):
        split(np.arange(9))


@given(st.integers(10, 5000))
def test_split_concatenation(n):
    parts = split(np.arange(n))
    np.testing.assert_array_equal(np.concatenate(parts), np.arange(n))
    assert len(parts[0]) == math.floor(0.7 * n + 1e-9)


def test_split_series_keeps_dates():
    s = DailySeries("x", date(2000, 1, 1), np.arange(60.0).reshape(10, 6))
    tr, va, te = split(s)
    assert va.start == date(2000, 1, 8) and te.start == date(2000, 1, 10)
    with pytest.raises(ValueError):
        SplitSpec(0.5, 0.2, 0.2)
