"""Price/return ingestion and aggregation for the CLI.

Prices arrive as a two-column CSV (``timestamp,price``, RFC3339 timestamps,
strictly increasing); returns are 100 * ln(P_t / P_{t-1}).  Aggregation sums
fixed-size blocks of returns; per-day counts are recovered from the calendar
dates of the timestamps so that irregular intraday patterns (6/7 returns per
day and the like) survive aggregation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .errors import InvalidParameterError


@dataclass
class Dataset:
    timestamps: list
    values: np.ndarray
    kind: str  # "prices" or "returns"
    frequency: str = ""
    day_counts: list = field(default_factory=list)
    rejected_rows: list = field(default_factory=list)


class ParseError(ValueError):
    """Malformed input row; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _parse_rfc3339(text: str, line: int) -> datetime:
    try:
        return datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ParseError(line, f"bad timestamp {text!r}") from exc


def _day_counts(timestamps) -> list:
    counts = []
    last = None
    for ts in timestamps:
        day = ts.date()
        if day != last:
            counts.append(0)
            last = day
        counts[-1] += 1
    return counts


def ingest_prices(path, frequency: str = "") -> Dataset:
    """Read a price CSV and emit log-returns scaled by 100.

    Rows with nonpositive prices are rejected (recorded with their line
    numbers) and excluded before differencing; malformed rows raise
    ParseError with the offending line number.
    """
    timestamps, prices, rejected = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["timestamp", "price"]:
            raise ParseError(1, "expected header 'timestamp,price'")
        for line, row in enumerate(reader, start=2):
            if len(row) < 2:
                raise ParseError(line, "expected two columns")
            ts = _parse_rfc3339(row[0].strip(), line)
            try:
                price = float(row[1])
            except ValueError as exc:
                raise ParseError(line, f"bad price {row[1]!r}") from exc
            if not math.isfinite(price):
                raise ParseError(line, f"non-finite price {row[1]!r}")
            if price <= 0.0:
                rejected.append(line)
                continue
            if timestamps and ts <= timestamps[-1]:
                raise ParseError(line, "timestamps must be strictly increasing")
            timestamps.append(ts)
            prices.append(price)
    if len(prices) < 2:
        raise InvalidParameterError("need at least two valid prices")
    logp = np.log(np.asarray(prices))
    returns = 100.0 * np.diff(logp)
    ret_ts = timestamps[1:]  # a return is stamped by its endpoint
    return Dataset(
        timestamps=ret_ts,
        values=returns,
        kind="returns",
        frequency=frequency,
        day_counts=_day_counts(ret_ts),
        rejected_rows=rejected,
    )


def aggregate_returns(ds: Dataset, block: int, keep_partial: bool = False) -> Dataset:
    """Sum consecutive blocks of returns; the leftover partial block is
    dropped by default (set keep_partial to emit it)."""
    if ds.kind != "returns":
        raise InvalidParameterError("aggregation expects a returns dataset")
    if block < 1:
        raise InvalidParameterError("block size must be >= 1")
    vals = np.asarray(ds.values, dtype=float)
    n_full = vals.size // block
    agg = vals[: n_full * block].reshape(n_full, block).sum(axis=1)
    ts = [ds.timestamps[(i + 1) * block - 1] for i in range(n_full)] if ds.timestamps else []
    if keep_partial and vals.size > n_full * block:
        agg = np.append(agg, vals[n_full * block :].sum())
        if ds.timestamps:
            ts.append(ds.timestamps[-1])
    return Dataset(
        timestamps=ts,
        values=agg,
        kind="returns",
        frequency=f"{ds.frequency}x{block}" if ds.frequency else f"x{block}",
        day_counts=_day_counts(ts) if ts else [],
        rejected_rows=list(ds.rejected_rows),
    )


@dataclass(frozen=True)
class DescriptiveStats:
    n: int
    mean: float
    sd: float
    kurtosis: float  # raw (non-excess)
    skewness: float


def descriptive_stats(values) -> DescriptiveStats:
    """Sample mean, standard deviation, raw kurtosis and skewness.

    A constant series reports sd = 0 with undefined (NaN) shape measures.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 4:
        raise InvalidParameterError("need at least 4 observations")
    mean = float(np.mean(x))
    dev = x - mean
    m2 = float(np.mean(dev**2))
    if m2 == 0.0:
        return DescriptiveStats(n=n, mean=mean, sd=0.0, kurtosis=math.nan, skewness=math.nan)
    sd = math.sqrt(m2 * n / (n - 1))
    kurt = float(np.mean(dev**4)) / m2**2
    skew = float(np.mean(dev**3)) / m2**1.5
    return DescriptiveStats(n=n, mean=mean, sd=sd, kurtosis=kurt, skewness=skew)
