"""CSV ingestion, alignment, scaling, windowing and descriptive statistics.

Builds the multivariate frame (closing prices plus cumulative case counts)
that the rest of the pipeline consumes. Everything here is a pure function
over immutable inputs.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlignmentError,
    DataError,
    FormatError,
    ScalerError,
    SplitError,
    StateError,
    WindowError,
)

OHLCV_HEADER = ["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"]
PRICE_FIELDS = ["Open", "High", "Low", "Close", "Adj Close"]

FRAME_COLUMNS = ["crude_oil", "dji", "sp500", "nasdaq", "covid_cases"]
CASES_COLUMN = "covid_cases"


@dataclass(frozen=True)
class RawOhlcvRecord:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    adj_close: float
    volume: int


@dataclass
class OhlcvParseResult:
    records: list[RawOhlcvRecord]
    dropped: int  # rows discarded because a price field was the literal `null`

    def closes(self) -> tuple[list[dt.date], np.ndarray]:
        dates = [r.date for r in self.records]
        values = np.array([r.close for r in self.records], dtype=float)
        return dates, values


@dataclass
class CaseSeries:
    dates: list[dt.date]
    confirmed: np.ndarray  # cumulative counts, same length as dates


@dataclass
class TimeSeriesFrame:
    """Date-aligned multivariate matrix; rows are dates, columns named series."""

    dates: list[dt.date]
    columns: list[str]
    values: np.ndarray  # [n_rows, n_columns] float64

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise DataError("frame values must be a 2-D matrix")
        if self.values.shape != (len(self.dates), len(self.columns)):
            raise DataError(
                f"frame shape {self.values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.columns)} columns"
            )

    @property
    def n_rows(self) -> int:
        return len(self.dates)

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.columns.index(name)
        except ValueError:
            raise DataError(f"frame has no column named {name!r}") from None
        return self.values[:, j]

    def take_rows(self, start: int, stop: int) -> "TimeSeriesFrame":
        return TimeSeriesFrame(self.dates[start:stop], list(self.columns),
                               self.values[start:stop].copy())

    def with_values(self, values: np.ndarray) -> "TimeSeriesFrame":
        return TimeSeriesFrame(list(self.dates), list(self.columns), values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["date"] + self.columns)
        for i, d in enumerate(self.dates):
            writer.writerow([d.isoformat()] + [repr(float(v)) for v in self.values[i]])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "TimeSeriesFrame":
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("frame CSV is empty") from None
        if not header or header[0] != "date":
            raise FormatError("frame CSV must start with a 'date' column")
        columns = header[1:]
        dates, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(f"line {lineno}: expected {len(header)} fields")
            try:
                dates.append(dt.date.fromisoformat(row[0]))
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from None
        return TimeSeriesFrame(dates, columns, np.array(rows, dtype=float).reshape(len(dates), len(columns)))


def _parse_iso_date(text: str, lineno: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise FormatError(f"line {lineno}: unparseable date {text!r}") from None


def parse_ohlcv(csv_text: str) -> OhlcvParseResult:
    """Parse a Yahoo-format OHLCV CSV into records sorted by date.

    Rows whose price fields contain the literal ``null`` are dropped and
    counted; any other unparseable field is a hard error naming the line.
    """
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty file: missing OHLCV header") from None
    if header != OHLCV_HEADER:
        missing = [c for c in OHLCV_HEADER if c not in header]
        if missing:
            raise FormatError(f"OHLCV header is missing column(s): {', '.join(missing)}")
        raise FormatError(f"OHLCV header out of order: got {header}")

    records: list[RawOhlcvRecord] = []
    dropped = 0
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(OHLCV_HEADER):
            raise FormatError(f"line {lineno}: expected {len(OHLCV_HEADER)} fields, got {len(row)}")
        date = _parse_iso_date(row[0], lineno)
        if any(row[j] == "null" for j in range(1, 6)):
            dropped += 1
            continue
        try:
            prices = [float(row[j]) for j in range(1, 6)]
            volume = int(float(row[6]))
        except ValueError:
            raise FormatError(f"line {lineno}: unparseable number") from None
        if volume < 0:
            raise DataError(f"line {lineno}: negative volume")
        o, h, low, c, adj = prices
        if not (low <= min(o, c) and max(o, c) <= h):
            raise DataError(f"line {lineno}: OHLC ordering violated (low <= open/close <= high)")
        records.append(RawOhlcvRecord(date, o, h, low, c, adj, volume))

    records.sort(key=lambda r: r.date)
    for a, b in zip(records, records[1:]):
        if a.date == b.date:
            raise DataError(f"duplicate date {a.date.isoformat()} in OHLCV file")
    return OhlcvParseResult(records, dropped)


def parse_jhu_cases(csv_text: str) -> CaseSeries:
    """Sum a JHU CSSE wide-format global time series into one cumulative series.

    The header carries `M/D/YY` dates from the fifth column onward; the value
    returned for each date is the sum over all region rows.
    """
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty file: missing JHU header") from None
    fixed = ["Province/State", "Country/Region", "Lat", "Long"]
    if header[: len(fixed)] != fixed:
        raise FormatError(f"JHU header must start with {','.join(fixed)}")
    if len(header) <= len(fixed):
        raise FormatError("JHU header has no date columns")

    dates = []
    for col in header[len(fixed):]:
        try:
            dates.append(dt.datetime.strptime(col.strip(), "%m/%d/%y").date())
        except ValueError:
            raise FormatError(f"unparseable JHU header date {col!r}") from None
    for a, b in zip(dates, dates[1:]):
        if (b - a).days != 1:
            raise FormatError(
                f"JHU header dates must be contiguous daily and increasing; "
                f"{a.isoformat()} is followed by {b.isoformat()}"
            )

    totals = np.zeros(len(dates), dtype=float)
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise FormatError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            counts = np.array([float(v) for v in row[len(fixed):]], dtype=float)
        except ValueError:
            raise FormatError(f"line {lineno}: unparseable count") from None
        if np.any(counts < 0):
            raise DataError(f"line {lineno}: negative case count")
        totals += counts

    if np.any(np.diff(totals) < 0):
        raise DataError("global cumulative case totals decrease; series is not cumulative")
    return CaseSeries(dates, totals)


def align(price_series: dict[str, tuple[list[dt.date], np.ndarray]],
          cases: CaseSeries | None) -> TimeSeriesFrame:
    """Join named close-price series on their common trading dates and append
    the cumulative case column (0 before the case series starts, forward-filled
    onto trading dates otherwise)."""
    if not price_series:
        raise AlignmentError("no price series supplied")
    for name, (dates, values) in price_series.items():
        if len(dates) == 0:
            raise AlignmentError(f"price series {name!r} is empty")
        if len(dates) != len(values):
            raise AlignmentError(f"price series {name!r}: dates/values length mismatch")

    common = None
    for dates, _ in price_series.values():
        ds = set(dates)
        common = ds if common is None else (common & ds)
    if not common:
        raise AlignmentError("price series share no common trading dates")
    trading_dates = sorted(common)

    columns = list(price_series.keys())
    matrix = np.empty((len(trading_dates), len(columns) + 1), dtype=float)
    for j, name in enumerate(columns):
        dates, values = price_series[name]
        lookup = {d: v for d, v in zip(dates, values)}
        matrix[:, j] = [lookup[d] for d in trading_dates]

    if cases is None or len(cases.dates) == 0:
        matrix[:, -1] = 0.0
    else:
        start = cases.dates[0]
        lookup = {d: v for d, v in zip(cases.dates, cases.confirmed)}
        last = cases.dates[-1]
        col = []
        for d in trading_dates:
            if d < start:
                col.append(0.0)
            elif d in lookup:
                col.append(lookup[d])
            else:
                # trading date past the daily series (or a gap): carry the most
                # recent prior value
                probe = min(d, last)
                while probe not in lookup and probe > start:
                    probe -= dt.timedelta(days=1)
                col.append(lookup.get(probe, 0.0))
        matrix[:, -1] = col

    return TimeSeriesFrame(trading_dates, columns + [CASES_COLUMN], matrix)


def descriptive_stats(x: np.ndarray | list[float]) -> dict[str, float]:
    """Mean, extrema, sample std dev, Pearson kurtosis and skewness of a vector.

    Skewness and kurtosis use central moments with the 1/n divisor
    (kurtosis is m4/m2^2, i.e. ~3 for a normal sample); std_dev uses n-1.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise DataError(f"need at least 2 observations, got {n}")
    mean = float(np.mean(x))
    centered = x - mean
    m2 = float(np.mean(centered ** 2))
    if m2 == 0.0:
        raise DataError("zero variance: skewness and kurtosis are undefined")
    m3 = float(np.mean(centered ** 3))
    m4 = float(np.mean(centered ** 4))
    return {
        "mean": mean,
        "max": float(np.max(x)),
        "min": float(np.min(x)),
        "std_dev": float(math.sqrt(np.sum(centered ** 2) / (n - 1))),
        "kurtosis": m4 / m2 ** 2,
        "skewness": m3 / m2 ** 1.5,
        "n": n,
    }


def frame_stats(frame: TimeSeriesFrame) -> dict[str, dict[str, float]]:
    """Descriptive statistics for every frame column, keyed by column name."""
    return {name: descriptive_stats(frame.column(name)) for name in frame.columns}


def stats_to_json(stats: dict[str, dict[str, float]]) -> str:
    return json.dumps(stats, indent=2, sort_keys=True)


@dataclass
class ScalerParams:
    """Per-column min/max fitted on the training partition only."""

    minimums: dict[str, float] = field(default_factory=dict)
    maximums: dict[str, float] = field(default_factory=dict)

    def columns(self) -> list[str]:
        return list(self.minimums.keys())


def fit_scaler(frame: TimeSeriesFrame, columns: list[str] | None = None) -> ScalerParams:
    columns = list(frame.columns) if columns is None else list(columns)
    params = ScalerParams()
    for name in columns:
        col = frame.column(name)
        lo, hi = float(np.min(col)), float(np.max(col))
        if hi <= lo:
            raise ScalerError(f"column {name!r} is constant; min-max scaling undefined")
        params.minimums[name] = lo
        params.maximums[name] = hi
    return params


def _check_fitted(params: ScalerParams, column: str) -> tuple[float, float]:
    if column not in params.minimums:
        raise StateError(f"scaler has not been fitted for column {column!r}")
    return params.minimums[column], params.maximums[column]


def apply_scaler(frame: TimeSeriesFrame, params: ScalerParams) -> TimeSeriesFrame:
    """Scale every fitted column to (x - min) / (max - min); other columns pass through."""
    values = frame.values.copy()
    for j, name in enumerate(frame.columns):
        if name in params.minimums:
            lo, hi = params.minimums[name], params.maximums[name]
            values[:, j] = (values[:, j] - lo) / (hi - lo)
    return frame.with_values(values)


def scale_values(values: np.ndarray, params: ScalerParams, column: str) -> np.ndarray:
    lo, hi = _check_fitted(params, column)
    return (np.asarray(values, dtype=float) - lo) / (hi - lo)


def invert_scaler(values: np.ndarray, params: ScalerParams, column: str) -> np.ndarray:
    lo, hi = _check_fitted(params, column)
    return np.asarray(values, dtype=float) * (hi - lo) + lo


def chronological_split(frame: TimeSeriesFrame, train_fraction: float,
                        min_rows: int = 0) -> tuple[TimeSeriesFrame, TimeSeriesFrame]:
    """Split rows chronologically; the training partition gets floor(n * fraction)."""
    if not 0.0 < train_fraction < 1.0:
        raise SplitError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = frame.n_rows
    n_train = int(math.floor(n * train_fraction))
    n_test = n - n_train
    if n_train < min_rows or n_test < min_rows:
        raise SplitError(
            f"split {n_train}/{n_test} leaves a partition smaller than the "
            f"required {min_rows} rows"
        )
    return frame.take_rows(0, n_train), frame.take_rows(n_train, n)


@dataclass
class WindowedDataset:
    inputs: np.ndarray   # [num_samples, lookback, num_features]
    targets: np.ndarray  # [num_samples, horizon]
    lookback: int
    horizon: int
    target_column: str

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]


def make_windows(features: np.ndarray, target_values: np.ndarray, lookback: int,
                 horizon: int, target_column: str = "") -> WindowedDataset:
    """Slide contiguous (lookback -> horizon) windows over row-aligned features
    and target values. Sample i reads feature rows [i, i+lookback) and target
    rows [i+lookback, i+lookback+horizon)."""
    features = np.asarray(features, dtype=float)
    target_values = np.asarray(target_values, dtype=float)
    if features.ndim == 1:
        features = features[:, None]
    n = features.shape[0]
    if target_values.shape[0] != n:
        raise WindowError("features and target values must have the same number of rows")
    if lookback < 1 or horizon < 1:
        raise WindowError("lookback and horizon must be positive")
    num = n - lookback - horizon + 1
    if num < 1:
        raise WindowError(
            f"{n} rows cannot fit a single window of lookback {lookback} + horizon {horizon}"
        )
    inputs = np.empty((num, lookback, features.shape[1]), dtype=float)
    targets = np.empty((num, horizon), dtype=float)
    for i in range(num):
        inputs[i] = features[i:i + lookback]
        targets[i] = target_values[i + lookback:i + lookback + horizon]
    return WindowedDataset(inputs, targets, lookback, horizon, target_column)


def window_frame(frame: TimeSeriesFrame, lookback: int, horizon: int,
                 target_column: str) -> WindowedDataset:
    return make_windows(frame.values, frame.column(target_column), lookback,
                        horizon, target_column)
