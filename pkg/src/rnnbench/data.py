"""Daily price-series ingestion and preprocessing.

Pipeline: parse CSV -> repair missing values -> chronological split ->
Min-Max scale -> sliding windows.  The split happens on the raw series
*before* scaling and windowing, so no test-partition value can influence
the scaler and no window straddles a partition boundary.

Scaling is x_norm = (x - min) / (max - min), fitted on the training
partition by default ("train-only"); "full-series" mode fits on the
whole series instead for strict comparability with setups that
normalized everything at once (this leaks test extrema — use knowingly).
"""

from __future__ import annotations

import csv as _csv
import io
from dataclasses import dataclass
from datetime import date as _date
from math import floor, isfinite
from pathlib import Path

from . import jsonio

PARTITIONS = ("train", "val", "test")
SCALER_MODES = ("train-only", "full-series")

# Split sizes of the daily-close comparison protocol this harness
# mirrors, printed by `prepare` next to our own counts for reference.
REFERENCE_SPLIT = (1862, 402, 401)


@dataclass
class PriceSeries:
    """Dates (ISO strings, strictly increasing) and closing prices.

    Fresh from parse_csv the close list may contain None for cells that
    were empty or unparseable; repair_missing returns a gap-free series
    with every price finite and positive.
    """

    dates: list
    close: list

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def missing_count(self) -> int:
        return sum(1 for v in self.close if v is None)


def parse_csv(text: str, price_column: str = "Close") -> PriceSeries:
    """Parse Yahoo-Finance-format CSV text (Date,...,Close,...).

    Rows are sorted by date; duplicate dates are an error; an empty or
    unparseable price cell becomes a missing value for repair_missing.
    """
    reader = _csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("CSV is empty (no header row)") from None
    header = [h.strip() for h in header]
    for required in ("Date", price_column):
        if required not in header:
            raise ValueError(
                f"CSV is missing required column {required!r} "
                f"(columns: {', '.join(header)})"
            )
    date_idx = header.index("Date")
    price_idx = header.index(price_column)

    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) <= max(date_idx, price_idx):
            raise ValueError(f"CSV line {line_no}: expected "
                             f"{len(header)} columns, got {len(row)}")
        raw_date = row[date_idx].strip()
        try:
            day = _date.fromisoformat(raw_date)
        except ValueError:
            raise ValueError(
                f"CSV line {line_no}: invalid date {raw_date!r} "
                "(expected YYYY-MM-DD)"
            ) from None
        cell = row[price_idx].strip()
        value: float | None
        try:
            value = float(cell)
        except ValueError:
            value = None
        if value is not None and not isfinite(value):
            value = None
        rows.append((day.isoformat(), value))

    if not rows:
        raise ValueError("CSV contains a header but zero data rows")
    rows.sort(key=lambda r: r[0])
    for prev, cur in zip(rows, rows[1:]):
        if prev[0] == cur[0]:
            raise ValueError(f"duplicate date {cur[0]} in CSV")
    return PriceSeries(dates=[r[0] for r in rows], close=[r[1] for r in rows])


def read_csv(path, price_column: str = "Close") -> PriceSeries:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read {p}: {exc}") from None
    try:
        return parse_csv(text, price_column=price_column)
    except ValueError as exc:
        raise ValueError(f"{p}: {exc}") from None


def repair_missing(series: PriceSeries) -> PriceSeries:
    """Fill interior gaps by linear interpolation between present neighbors.

    Present values are carried over exactly.  The first and last values
    must be present (nothing to anchor an edge gap), and every price
    must come out positive.
    """
    values = list(series.close)
    present = [i for i, v in enumerate(values) if v is not None]
    if len(present) < 2:
        raise ValueError(
            f"need at least 2 present prices to repair, have {len(present)}"
        )
    if values[0] is None or values[-1] is None:
        raise ValueError(
            "cannot repair a series whose first or last price is missing"
        )
    for lo, hi in zip(present, present[1:]):
        if hi - lo > 1:
            v_lo = values[lo]
            v_hi = values[hi]
            span = hi - lo
            for k in range(lo + 1, hi):
                values[k] = v_lo + (v_hi - v_lo) * ((k - lo) / span)
    for i, v in enumerate(values):
        if not (v > 0.0):
            raise ValueError(
                f"non-positive price {v!r} at {series.dates[i]} after repair"
            )
    return PriceSeries(dates=list(series.dates), close=values)


@dataclass(frozen=True)
class ScalerParams:
    """Min-Max scaler: x_norm = (x - min_x) / (max_x - min_x)."""

    min_x: float
    max_x: float

    @property
    def range(self) -> float:
        return self.max_x - self.min_x

    def transform_one(self, x: float) -> float:
        return (x - self.min_x) / (self.max_x - self.min_x)

    def inverse_one(self, x_norm: float) -> float:
        return x_norm * (self.max_x - self.min_x) + self.min_x

    def transform(self, values) -> list:
        return [self.transform_one(x) for x in values]

    def inverse_transform(self, values) -> list:
        return [self.inverse_one(x) for x in values]


def fit_scaler(values) -> ScalerParams:
    """Extrema of the given values; rejects a degenerate (constant) range."""
    if len(values) < 2:
        raise ValueError(f"fit_scaler needs >= 2 values, got {len(values)}")
    lo = min(values)
    hi = max(values)
    if not hi > lo:
        raise ValueError(
            f"cannot fit scaler: all {len(values)} values equal {lo!r} "
            "(degenerate range)"
        )
    return ScalerParams(min_x=lo, max_x=hi)


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train/val/test fractions; must sum to 1."""

    train_frac: float = 0.70
    val_frac: float = 0.15
    test_frac: float = 0.15

    def __post_init__(self):
        for name, frac in (("train_frac", self.train_frac),
                           ("val_frac", self.val_frac),
                           ("test_frac", self.test_frac)):
            if not frac > 0.0:
                raise ValueError(f"{name} must be > 0, got {frac}")
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {total!r}")

    @classmethod
    def parse(cls, text: str) -> "SplitSpec":
        """Parse "0.7,0.15,0.15" (train,val,test)."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(
                f"split must be three comma-separated fractions, got {text!r}"
            )
        train, val, test = (float(p) for p in parts)
        return cls(train_frac=train, val_frac=val, test_frac=test)


def split_counts(n: int, spec: SplitSpec) -> tuple:
    """Partition sizes: floor(frac*N) for val and test, remainder to train."""
    n_val = floor(spec.val_frac * n)
    n_test = floor(spec.test_frac * n)
    n_train = n - n_val - n_test
    return n_train, n_val, n_test


def chronological_split(values, spec: SplitSpec, min_len: int = 1) -> tuple:
    """Contiguous (train, val, test) slices, earliest first.

    min_len is the smallest usable partition (lookback+1 when windows
    will be cut from each partition).
    """
    n_train, n_val, n_test = split_counts(len(values), spec)
    sizes = dict(zip(PARTITIONS, (n_train, n_val, n_test)))
    for name, size in sizes.items():
        if size < min_len:
            raise ValueError(
                f"{name} partition has {size} points, fewer than the "
                f"required minimum {min_len} (lookback + 1); "
                f"series length {len(values)} with fractions "
                f"{spec.train_frac}/{spec.val_frac}/{spec.test_frac}"
            )
    train = values[:n_train]
    val = values[n_train:n_train + n_val]
    test = values[n_train + n_val:]
    return train, val, test


@dataclass
class WindowedDataset:
    """Supervised samples: (window of L normalized values, next value)."""

    lookback: int
    samples: list  # [(list of L floats, float target)]

    def __len__(self) -> int:
        return len(self.samples)


def make_windows(values, lookback: int) -> WindowedDataset:
    """Every length-L slice paired with the value that follows it."""
    if lookback < 1:
        raise ValueError(f"lookback must be >= 1, got {lookback}")
    n = len(values)
    if n <= lookback:
        raise ValueError(
            f"series of length {n} is too short for lookback {lookback} "
            "(needs at least lookback+1 points)"
        )
    samples = [(list(values[k:k + lookback]), values[k + lookback])
               for k in range(n - lookback)]
    return WindowedDataset(lookback=lookback, samples=samples)


@dataclass
class PreparedData:
    """A split, scaled, window-ready dataset with its provenance knobs."""

    lookback: int
    scaler_mode: str
    split: SplitSpec
    scaler: ScalerParams
    dates: dict    # partition -> list of ISO dates
    raw: dict      # partition -> list of raw prices
    scaled: dict   # partition -> list of normalized prices

    def windows(self, partition: str) -> WindowedDataset:
        if partition not in PARTITIONS:
            raise ValueError(f"unknown partition {partition!r}; "
                             f"choose from {PARTITIONS}")
        return make_windows(self.scaled[partition], self.lookback)

    def window_counts(self) -> dict:
        return {p: len(self.raw[p]) - self.lookback for p in PARTITIONS}

    def partition_sizes(self) -> dict:
        return {p: len(self.raw[p]) for p in PARTITIONS}

    def save(self, path) -> None:
        doc = {
            "format": "rnnbench-prepared",
            "version": 1,
            "lookback": self.lookback,
            "scaler_mode": self.scaler_mode,
            "split": {
                "train_frac": self.split.train_frac,
                "val_frac": self.split.val_frac,
                "test_frac": self.split.test_frac,
            },
            "scaler": {"min_x": self.scaler.min_x, "max_x": self.scaler.max_x},
            "partitions": {
                p: {"dates": self.dates[p], "close": self.raw[p]}
                for p in PARTITIONS
            },
        }
        Path(path).write_text(jsonio.dumps(doc), encoding="ascii")

    @classmethod
    def load(cls, path) -> "PreparedData":
        try:
            doc = jsonio.loads(Path(path).read_text(encoding="ascii"))
        except Exception as exc:
            raise ValueError(f"cannot load prepared dataset {path}: {exc}") \
                from None
        if not isinstance(doc, dict) or doc.get("format") != "rnnbench-prepared":
            raise ValueError(f"{path}: not a rnnbench-prepared file")
        if doc.get("version") != 1:
            raise ValueError(f"{path}: unsupported version {doc.get('version')!r}")
        split = SplitSpec(**doc["split"])
        scaler = ScalerParams(**doc["scaler"])
        dates = {p: list(doc["partitions"][p]["dates"]) for p in PARTITIONS}
        raw = {p: [float(v) for v in doc["partitions"][p]["close"]]
               for p in PARTITIONS}
        mode = doc["scaler_mode"]
        if mode not in SCALER_MODES:
            raise ValueError(f"{path}: unknown scaler_mode {mode!r}")
        scaled = {p: scaler.transform(raw[p]) for p in PARTITIONS}
        return cls(lookback=int(doc["lookback"]), scaler_mode=mode,
                   split=split, scaler=scaler, dates=dates, raw=raw,
                   scaled=scaled)


def prepare(series: PriceSeries, lookback: int = 60,
            split: SplitSpec | None = None,
            scaler_mode: str = "train-only") -> PreparedData:
    """Split the repaired series, fit the scaler, scale each partition.

    The scaler is fitted on the training partition only unless
    scaler_mode is "full-series".  Each partition is windowed
    independently, so samples never straddle a boundary.
    """
    if scaler_mode not in SCALER_MODES:
        raise ValueError(f"unknown scaler mode {scaler_mode!r}; "
                         f"choose from {SCALER_MODES}")
    if series.missing_count:
        raise ValueError(
            f"series still has {series.missing_count} missing values; "
            "run repair_missing first"
        )
    split = split if split is not None else SplitSpec()
    parts_close = chronological_split(series.close, split, min_len=lookback + 1)
    parts_dates = chronological_split(series.dates, split, min_len=lookback + 1)
    raw = dict(zip(PARTITIONS, (list(p) for p in parts_close)))
    dates = dict(zip(PARTITIONS, (list(p) for p in parts_dates)))
    fit_on = raw["train"] if scaler_mode == "train-only" else series.close
    scaler = fit_scaler(fit_on)
    scaled = {p: scaler.transform(raw[p]) for p in PARTITIONS}
    return PreparedData(lookback=lookback, scaler_mode=scaler_mode,
                        split=split, scaler=scaler, dates=dates, raw=raw,
                        scaled=scaled)
