"""Nearest station lookup plus crop advice for a hand-made monthly forecast.

    python demos/advice.py
"""

from datetime import date, timedelta

import numpy as np

from agroweather.advisor import KnowledgeBase, aggregate_forecast, recommend
from agroweather.geo import GeoPoint, StationRegistry, haversine, nearest_station

registry = StationRegistry.from_csv()
uttara = GeoPoint(23.8759, 90.3795)
station, km = nearest_station(uttara, registry)
print(f"nearest station to Uttara: {station.station} ({km:.2f} km)")
print(f"Mymensingh is {haversine(uttara, registry.get('Mymensingh').point):.2f} km away")

kb = KnowledgeBase.load()
start = date(2024, 7, 1)
days = 62
# a dry monsoon: about 100 mm in each of July and August
rain = np.full(days, 100 / 31)
temp = np.full(days, 31.0)
summary = aggregate_forecast(start, np.column_stack([rain, temp]), ["rainfall", "temperature"])

for district in ("Dhaka", "Rajshahi"):
    adv = recommend(district, summary, start, kb)
    print()
    print(adv.to_text())

# normal rainfall, drought-prone district, winter season
start = date(2025, 1, 1)
normal = [kb.thresholds[(start + timedelta(days=i)).month].rainfall_mm / 31 for i in range(59)]
summary = aggregate_forecast(start, np.column_stack([normal, np.full(59, 24.0)]),
                             ["rainfall", "temperature"])
print()
print(recommend("Rajshahi", summary, start, kb).to_text())
