#!/usr/bin/env python3
"""Regenerate the bundled sample datasets (deterministic).

Both CSVs under src/rnnbench/data/ are synthetic and committed; this
script documents exactly how they were produced and reproduces them
byte-for-byte:

* synthetic_sine.csv — 500 trading days of a sine wave riding a linear
  trend; small, fast, and learnable, used by the end-to-end tests and
  the golden-file benchmark.
* sample_daily.csv — a decade-scale (2665 trading days) geometric
  random walk with drift, shaped like a large-cap tech stock's
  2014-2024 daily closes (~18 to ~230).  Stands in for the unpublished
  market snapshot the mirrored comparison used; no real market data is
  bundled or fetched.

Run from the repository root:  python3 scripts/make_sample_data.py
"""

from __future__ import annotations

import sys
from datetime import date, timedelta
from math import cos, exp, log, pi, sin, sqrt
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rnnbench.linalg import Rng  # noqa: E402

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "rnnbench" / "data"
HEADER = "Date,Open,High,Low,Close,Adj Close,Volume"


def trading_days(start: date, count: int):
    day = start
    out = []
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day)
        day += timedelta(days=1)
    return out


def gauss(rng: Rng) -> float:
    u1 = 1.0 - rng.next_float()  # (0, 1], keeps log finite
    u2 = rng.next_float()
    return sqrt(-2.0 * log(u1)) * cos(2.0 * pi * u2)


def rows_for(dates, closes, rng: Rng):
    rows = []
    prev = closes[0] * 0.995
    for t, (day, close) in enumerate(zip(dates, closes)):
        open_ = prev
        high = max(open_, close) * 1.004
        low = min(open_, close) * 0.996
        volume = int(4.0e7 * (1.25 + 0.5 * sin(t / 17.0)) + 1.0e6 * rng.uniform(0.0, 1.0))
        adj = close * 0.95  # constant historical-adjustment factor
        rows.append(f"{day.isoformat()},{open_:.6f},{high:.6f},{low:.6f},"
                    f"{close:.6f},{adj:.6f},{volume}")
        prev = close
    return rows


def make_sine() -> str:
    n = 500
    dates = trading_days(date(2018, 1, 2), n)
    closes = [100.0 + 0.05 * t + 10.0 * sin(2.0 * pi * t / 40.0)
              for t in range(n)]
    rng = Rng(2018)
    return "\n".join([HEADER] + rows_for(dates, closes, rng)) + "\n"


def make_daily() -> str:
    n = 2665
    dates = trading_days(date(2014, 1, 2), n)
    rng = Rng(20140102)
    start, end = 18.0, 225.0
    drift = (log(end) - log(start)) / (n - 1)
    sigma = 0.017
    log_price = log(start)
    closes = []
    for t in range(n):
        closes.append(exp(log_price))
        # mild mean reversion toward the drift line keeps the path
        # inside a plausible envelope without hiding the noise
        anchor = log(start) + drift * t
        log_price += drift + sigma * gauss(rng) + 0.004 * (anchor - log_price)
    return "\n".join([HEADER] + rows_for(dates, closes, Rng(77))) + "\n"


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    targets = {
        "synthetic_sine.csv": make_sine(),
        "sample_daily.csv": make_daily(),
    }
    for name, text in targets.items():
        path = OUT_DIR / name
        path.write_text(text, encoding="ascii")
        lines = text.count("\n") - 1
        print(f"wrote {path} ({lines} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
