"""Regenerate the bundled sample CSVs under fixtures/.

The price files are seeded random walks in the exact Yahoo OHLCV export
format, anchored so the crude oil series ends on the genuine 2020-04-07
close of 23.63; the case file is a small JHU-style wide cumulative table.
Run from the repository root: python tools/make_fixtures.py
"""

from __future__ import annotations

import datetime as dt
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

HOLIDAYS = {dt.date(2020, 1, 20), dt.date(2020, 2, 17)}  # MLK, Presidents Day
START = dt.date(2020, 1, 2)
END = dt.date(2020, 4, 7)


def trading_days() -> list[dt.date]:
    days = []
    day = START
    while day <= END:
        if day.weekday() < 5 and day not in HOLIDAYS:
            days.append(day)
        day += dt.timedelta(days=1)
    return days


def ohlcv_csv(name: str, seed: int, start_price: float, drift: float,
              vol: float, end_anchor: float | None, null_row: int | None) -> str:
    rng = np.random.default_rng(seed)
    days = trading_days()
    n = len(days)
    steps = rng.standard_normal(n) * vol + drift
    closes = start_price * np.exp(np.cumsum(steps))
    if end_anchor is not None:
        # rescale the log path so the last close hits the genuine anchor value
        closes *= (end_anchor / closes[-1]) ** (np.arange(1, n + 1) / n)
    lines = ["Date,Open,High,Low,Close,Adj Close,Volume"]
    prev_close = closes[0] / (1.0 + drift)
    for i, day in enumerate(days):
        if null_row is not None and i == null_row:
            lines.append(f"{day.isoformat()},null,null,null,null,null,null")
            prev_close = closes[i]
            continue
        close = closes[i]
        open_ = prev_close * (1.0 + rng.normal(0.0, vol / 4))
        high = max(open_, close) * (1.0 + abs(rng.normal(0.0, vol / 3)))
        low = min(open_, close) * (1.0 - abs(rng.normal(0.0, vol / 3)))
        volume = int(rng.integers(5, 60) * 1e5)
        lines.append(
            f"{day.isoformat()},{open_:.2f},{high:.2f},{low:.2f},"
            f"{close:.2f},{close:.2f},{volume}"
        )
        prev_close = close
    return "\n".join(lines) + "\n"


def jhu_csv(seed: int) -> str:
    rng = np.random.default_rng(seed)
    first = dt.date(2020, 1, 22)
    dates = [first + dt.timedelta(days=i) for i in range((END - first).days + 1)]
    header = "Province/State,Country/Region,Lat,Long," + ",".join(
        f"{d.month}/{d.day}/{d.year % 100}" for d in dates)
    regions = [
        ("Hubei", "China", 30.97, 112.27, 400, 0.9),
        ("", "Italy", 41.87, 12.57, 0, 1.12),
        ("", '"Korea, South"', 35.9, 127.77, 1, 1.08),
    ]
    lines = [header]
    for prov, country, lat, lon, start, growth in regions:
        total = float(start)
        counts = []
        for i in range(len(dates)):
            if i > 10 or start > 0:
                total += max(0.0, total * (growth - 1.0) * rng.uniform(0.5, 1.5)) + rng.integers(0, 4)
            total = min(total, 2.5e6)
            counts.append(str(int(total)))
        lines.append(f"{prov},{country},{lat},{lon}," + ",".join(counts))
    return "\n".join(lines) + "\n"


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    specs = {
        "crude_oil": (11, 61.0, -0.012, 0.028, 23.63, None),
        "dji": (12, 28800.0, -0.006, 0.020, None, 30),
        "sp500": (13, 3250.0, -0.006, 0.019, None, None),
        "nasdaq": (14, 9100.0, -0.004, 0.022, None, None),
    }
    for name, (seed, price, drift, vol, anchor, null_row) in specs.items():
        path = FIXTURES / f"{name}.csv"
        path.write_text(ohlcv_csv(name, seed, price, drift, vol, anchor, null_row))
        print(f"wrote {path}")
    (FIXTURES / "jhu_cases.csv").write_text(jhu_csv(21))
    print(f"wrote {FIXTURES / 'jhu_cases.csv'}")


if __name__ == "__main__":
    main()
