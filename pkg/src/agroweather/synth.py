"""Deterministic synthetic station data in the raw monthly-matrix format.

Each feature is an annual sinusoid plus AR(1) Gaussian noise (weather
persists from day to day), with a per-station phase and amplitude. Rainfall is exponentiated (right skew) and rectified at
zero. A small share of cells is blanked or starred so the missing-value path
is exercised.
"""

import calendar
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .preprocess import COMPASS_POINTS

DEFAULT_SEED = 7
DEFAULT_YEARS = 20
DEFAULT_START_YEAR = 2000
DEFAULT_STATIONS = ("Dhaka", "Mymensingh", "Rajshahi")
RAW_HEADER = ["station", "year", "month"] + [f"d{k}" for k in range(1, 32)] + ["avg"]

# (mean, seasonal amplitude, noise sd) for the physical features of station 0;
# later stations get scaled amplitudes and shifted phases
_BASE = {
    "temperature": (26.0, 5.0, 0.8),
    "humidity": (78.0, 9.0, 3.0),
    "sunshine": (6.5, -2.0, 0.7),  # fewer bright hours in the monsoon
}
NOISE_RHO = 0.8


def _station_profile(k, rng):
    return {
        "phase": 20.0 * k + rng.uniform(-5, 5),
        "amp": (1.0, 0.45, 1.8)[k % 3] * (1.0 + 0.1 * (k // 3)),
        "offset": rng.uniform(-1.5, 1.5),
    }


def ar1_noise(n, sd, rng, rho=NOISE_RHO):
    """Stationary AR(1) Gaussian noise with marginal standard deviation ``sd``."""
    e = rng.standard_normal(n)
    out = np.empty(n)
    out[0] = e[0]
    scale = np.sqrt(1 - rho * rho)
    for t in range(1, n):
        out[t] = rho * out[t - 1] + scale * e[t]
    return sd * out


def station_daily(k, n_days, start, rng):
    """Daily physical values for station index ``k``: dict of feature -> array."""
    p = _station_profile(k, rng)
    doy = np.array([(start + timedelta(days=i)).timetuple().tm_yday for i in range(n_days)])
    angle = 2 * np.pi * (doy - 105 - p["phase"]) / 365.25
    season = np.sin(angle)
    out = {}
    for name, (mean, amp, sd) in _BASE.items():
        out[name] = mean + p["offset"] + amp * p["amp"] * season + ar1_noise(n_days, sd, rng)
    out["temperature"] += 1.5 * p["amp"] * np.sin(2 * angle)
    out["humidity"] = np.clip(out["humidity"], 5, 100)
    out["sunshine"] = np.clip(out["sunshine"], 0, 13)
    rain = 6.0 * p["amp"] * np.exp(1.4 * season + ar1_noise(n_days, 0.6, rng)) - 4.0
    out["rainfall"] = np.maximum(rain, 0.0)
    out["wind_speed"] = np.abs(6 + 3 * season * p["amp"] + 2 * rng.standard_normal(n_days))
    out["wind_direction"] = rng.integers(0, len(COMPASS_POINTS), n_days)
    return out


def generate_raw(seed=DEFAULT_SEED, stations=DEFAULT_STATIONS, years=DEFAULT_YEARS,
                 start_year=DEFAULT_START_YEAR, missing_rate=0.004):
    """Return ``{variable: csv text}`` for the six raw variables."""
    rng = np.random.default_rng(seed)
    start = date(start_year, 1, 1)
    end = date(start_year + years, 1, 1)
    n_days = (end - start).days
    lines = {v: [",".join(RAW_HEADER)] for v in
             ("rainfall", "sunshine", "humidity", "temperature", "wind_speed", "wind_direction")}
    for k, station in enumerate(stations):
        daily = station_daily(k, n_days, start, rng)
        gaps = rng.random((len(lines), n_days)) < missing_rate
        star = rng.random((len(lines), n_days)) < 0.5
        for v_idx, (variable, rows) in enumerate(lines.items()):
            series = daily[variable]
            i = 0
            for year in range(start_year, start_year + years):
                for month in range(1, 13):
                    ndays = calendar.monthrange(year, month)[1]
                    cells = []
                    for d in range(ndays):
                        if gaps[v_idx, i + d]:
                            cells.append("*" if star[v_idx, i + d] else "")
                        elif variable == "wind_direction":
                            cells.append(COMPASS_POINTS[series[i + d]])
                        else:
                            cells.append(f"{series[i + d]:.1f}")
                    numeric = [float(c) for c in cells if c not in ("", "*")] if variable != "wind_direction" else []
                    avg = f"{np.mean(numeric):.1f}" if numeric else ""
                    cells += [""] * (31 - ndays)
                    rows.append(",".join([station, str(year), str(month)] + cells + [avg]))
                    i += ndays
    return {v: "\n".join(rows) + "\n" for v, rows in lines.items()}


def write_raw(directory, **kwargs):
    """Write ``<variable>.csv`` files into ``directory``; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    for variable, text in generate_raw(**kwargs).items():
        path = directory / f"{variable}.csv"
        path.write_text(text)
        paths[variable] = path
    return paths
