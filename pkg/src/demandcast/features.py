"""The 8-feature representation of daily demand: five lags plus calendar flags.

Column order is fixed (FEATURE_NAMES) and models address features by position.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .data import CovidSchedule, DailySeries, HolidayCalendar, format_count
from .errors import DataError, InsufficientHistory, MissingLag

FEATURE_NAMES = ("lag7d", "lag14d", "lag1", "lag2", "lag3", "public_holiday", "week", "covid_level")
LAG_OFFSETS = (7, 14, 364, 728, 1092)
MAX_LAG = max(LAG_OFFSETS)
N_FEATURES = len(FEATURE_NAMES)


def week_number(d: date) -> int:
    """ISO-8601 week number, 1..53."""
    return d.isocalendar()[1]


class LagLookup:
    """Resolve lagged demand values from observed history plus injected predictions.

    During recursive forecasting the observed series is truncated at the
    training boundary and horizon-day predictions are injected here, so a
    lookup can never silently read a post-boundary actual.
    """

    def __init__(self, observed: DailySeries, injected: dict[date, float] | None = None):
        self.observed = observed
        self.injected = injected if injected is not None else {}

    def lag(self, d: date, offset: int) -> float:
        target = d - timedelta(days=offset)
        if target in self.injected:
            return self.injected[target]
        value = self.observed.get(target)
        if value is None:
            raise MissingLag(offset)
        return value


@dataclass
class FeatureRow:
    """One day's feature vector in FEATURE_NAMES order, plus optional target."""

    date: date
    values: np.ndarray
    target: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (N_FEATURES,):
            raise DataError(f"feature row needs {N_FEATURES} values, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DataError(f"non-finite feature value on {self.date.isoformat()}")
        if self.public_holiday not in (0.0, 1.0):
            raise DataError(f"public_holiday must be 0/1, got {self.public_holiday}")
        if not 1 <= self.week <= 53:
            raise DataError(f"week must be in 1..53, got {self.week}")
        if self.covid_level not in (1.0, 2.0, 3.0, 4.0):
            raise DataError(f"covid_level must be in 1..4, got {self.covid_level}")

    def __getattr__(self, name: str):
        try:
            idx = FEATURE_NAMES.index(name)
        except ValueError:
            raise AttributeError(name) from None
        return float(self.values[idx])


class FeatureMatrix:
    """Date-sorted feature rows with targets, as contiguous numpy arrays."""

    def __init__(self, dates: list[date], X: np.ndarray, y: np.ndarray):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.shape != (len(dates), N_FEATURES) or y.shape != (len(dates),):
            raise DataError("feature matrix shape mismatch")
        for a, b in zip(dates, dates[1:]):
            if a >= b:
                raise DataError("feature matrix dates must be strictly increasing")
        self.dates = list(dates)
        self.X = X
        self.y = y

    def __len__(self) -> int:
        return len(self.dates)

    def row(self, i: int) -> FeatureRow:
        return FeatureRow(self.dates[i], self.X[i].copy(), float(self.y[i]))

    def column(self, name: str) -> np.ndarray:
        return self.X[:, FEATURE_NAMES.index(name)]

    def slice_window(self, start: date, end: date) -> "FeatureMatrix":
        """Rows with start <= date <= end."""
        keep = [i for i, d in enumerate(self.dates) if start <= d <= end]
        return FeatureMatrix([self.dates[i] for i in keep], self.X[keep], self.y[keep])

    def head(self, n: int) -> "FeatureMatrix":
        return FeatureMatrix(self.dates[:n], self.X[:n], self.y[:n])

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            fh.write("date," + ",".join(FEATURE_NAMES) + ",target\n")
            for d, xs, t in zip(self.dates, self.X, self.y):
                cells = ",".join(format_count(v) for v in xs)
                fh.write(f"{d.isoformat()},{cells},{format_count(t)}\n")


def build_row(
    history: LagLookup,
    cal: HolidayCalendar,
    covid: CovidSchedule,
    d: date,
    target: float | None = None,
) -> FeatureRow:
    """Assemble one feature row for day d from history and the calendars."""
    values = np.empty(N_FEATURES)
    for i, offset in enumerate(LAG_OFFSETS):
        values[i] = history.lag(d, offset)
    values[5] = cal.is_holiday(d)
    values[6] = week_number(d)
    values[7] = covid.level_at(d)
    return FeatureRow(d, values, target)


def build_training_matrix(
    series: DailySeries,
    cal: HolidayCalendar,
    covid: CovidSchedule,
    window: tuple[date, date],
) -> FeatureMatrix:
    """One row per day of window, lags read from the full series history.

    The window start must sit at least MAX_LAG days after the series start so
    every lag resolves to an observed value.
    """
    start, end = window
    if start > end:
        raise DataError(f"window start {start} after end {end}")
    if (start - series.start).days < MAX_LAG:
        raise InsufficientHistory(
            f"window starting {start.isoformat()} needs history back to "
            f"{(start - timedelta(days=MAX_LAG)).isoformat()}, series starts {series.start.isoformat()}"
        )
    if end > series.end:
        raise InsufficientHistory(f"window end {end.isoformat()} beyond series end {series.end.isoformat()}")

    n = (end - start).days + 1
    base = series.index_of(start)
    idx = base + np.arange(n)
    X = np.empty((n, N_FEATURES))
    for i, offset in enumerate(LAG_OFFSETS):
        X[:, i] = series.values[idx - offset]
    dates = [start + timedelta(days=k) for k in range(n)]
    X[:, 5] = [cal.is_holiday(d) for d in dates]
    X[:, 6] = [week_number(d) for d in dates]
    X[:, 7] = [covid.level_at(d) for d in dates]
    return FeatureMatrix(dates, X, series.values[idx])
