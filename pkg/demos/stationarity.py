"""Run the ADF unit-root test on every weather feature of the synthetic stations.

    python demos/stationarity.py
"""

import numpy as np

from agroweather.pipeline import WEATHER_FEATURES, synthetic_series
from agroweather.preprocess import impute
from agroweather.stats import adf_test


def main():
    series = synthetic_series()
    for station, s in series.items():
        s = impute(s.select(WEATHER_FEATURES))
        print(station)
        for name in WEATHER_FEATURES:
            r = adf_test(s.column(name))
            print(f"  {name:12s} stat {r.test_statistic:8.3f}  p {r.p_value_flag or f'{r.p_value:.3f}':>8s}"
                  f"  lags {r.lags_used:2d}  {r.decision}")

    # a random walk for contrast
    walk = np.cumsum(np.random.default_rng(0).standard_normal(2000))
    r = adf_test(walk)
    print(f"random walk   stat {r.test_statistic:8.3f}  {r.decision}")


if __name__ == "__main__":
    main()
