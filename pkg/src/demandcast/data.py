"""Calendar-aware daily demand series, holiday/COVID calendars, and CSV ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import (
    DataError,
    DuplicateDate,
    GapInSeries,
    MissingColumn,
    NegativeCount,
    UnparseableDate,
)

ONE_DAY = timedelta(days=1)


def parse_date(text: str) -> date:
    """Parse an ISO-8601 (YYYY-MM-DD) date, raising UnparseableDate on failure."""
    try:
        return date.fromisoformat(text.strip())
    except ValueError as exc:
        raise UnparseableDate(f"not an ISO-8601 date: {text!r}") from exc


def format_count(value: float) -> str:
    """Render a count for CSV output: integral values print without a decimal point."""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


@dataclass(frozen=True)
class DailyObservation:
    """One day of observed (or predicted) patient demand."""

    date: date
    count: float

    def __post_init__(self):
        if not np.isfinite(self.count) or self.count < 0:
            raise NegativeCount(f"count must be finite and >= 0, got {self.count!r}")


class DailySeries:
    """Contiguous, gap-free daily demand values indexed by calendar date.

    Stored as a start date plus a float vector; position ``i`` holds the count
    for ``start + i`` days. Immutable after construction.
    """

    def __init__(self, start: date, values: Iterable[float]):
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise DataError("a DailySeries needs at least one value")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise NegativeCount("all counts must be finite and >= 0")
        self._start = start
        self._values = arr
        self._values.setflags(write=False)

    @classmethod
    def from_observations(cls, observations: Iterable[DailyObservation]) -> "DailySeries":
        obs = list(observations)
        if not obs:
            raise DataError("a DailySeries needs at least one observation")
        for prev, cur in zip(obs, obs[1:]):
            delta = (cur.date - prev.date).days
            if delta == 0:
                raise DuplicateDate(f"duplicate date {cur.date.isoformat()}")
            if delta != 1:
                raise GapInSeries(
                    f"gap of {delta - 1} day(s) between {prev.date.isoformat()} and {cur.date.isoformat()}"
                )
        return cls(obs[0].date, [o.count for o in obs])

    @property
    def start(self) -> date:
        return self._start

    @property
    def end(self) -> date:
        return self._start + timedelta(days=len(self._values) - 1)

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, d: date) -> bool:
        return self._start <= d <= self.end

    def index_of(self, d: date) -> int:
        if d not in self:
            raise KeyError(f"{d.isoformat()} outside series {self._start.isoformat()}..{self.end.isoformat()}")
        return (d - self._start).days

    def value_on(self, d: date) -> float:
        return float(self._values[self.index_of(d)])

    def get(self, d: date) -> float | None:
        """Value on d, or None when d falls outside the series."""
        if d not in self:
            return None
        return float(self._values[(d - self._start).days])

    def dates(self) -> Iterator[date]:
        for i in range(len(self._values)):
            yield self._start + timedelta(days=i)

    def through(self, d: date) -> "DailySeries":
        """Prefix of the series ending on d (inclusive)."""
        return DailySeries(self._start, self._values[: self.index_of(d) + 1])

    def observations(self) -> list[DailyObservation]:
        return [DailyObservation(d, float(v)) for d, v in zip(self.dates(), self._values)]

    def __repr__(self) -> str:
        return f"DailySeries({self._start.isoformat()}..{self.end.isoformat()}, n={len(self)})"


class HolidayCalendar:
    """Map from calendar date to public holiday name."""

    def __init__(self, entries: Mapping[date, str] | None = None):
        self._entries = dict(entries or {})

    def is_holiday(self, d: date) -> int:
        """1 iff d is a public holiday, else 0."""
        return 1 if d in self._entries else 0

    def name_of(self, d: date) -> str | None:
        return self._entries.get(d)

    def names(self) -> list[str]:
        return sorted(set(self._entries.values()))

    def dates_of(self, name: str) -> list[date]:
        return sorted(d for d, n in self._entries.items() if n == name)

    def items(self) -> list[tuple[date, str]]:
        return sorted(self._entries.items())

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(frozen=True)
class CovidInterval:
    start: date
    end: date
    level: int

    def __post_init__(self):
        if self.start > self.end:
            raise DataError(f"COVID interval start {self.start} after end {self.end}")
        if self.level not in (1, 2, 3, 4):
            raise DataError(f"COVID alert level must be 1..4, got {self.level}")


class CovidSchedule:
    """Non-overlapping dated intervals of COVID alert levels; level 1 elsewhere."""

    def __init__(self, intervals: Iterable[CovidInterval] = ()):
        ivs = sorted(intervals, key=lambda iv: iv.start)
        for a, b in zip(ivs, ivs[1:]):
            if b.start <= a.end:
                raise DataError(f"overlapping COVID intervals: {a} and {b}")
        self._intervals = ivs

    @property
    def intervals(self) -> list[CovidInterval]:
        return list(self._intervals)

    def level_at(self, d: date) -> int:
        """Alert level of the interval containing d; 1 outside all intervals."""
        for iv in self._intervals:
            if iv.start <= d <= iv.end:
                return iv.level
        return 1

    def __len__(self) -> int:
        return len(self._intervals)


def covid_level_at(schedule: CovidSchedule, d: date) -> int:
    return schedule.level_at(d)


def is_public_holiday(cal: HolidayCalendar, d: date) -> int:
    return cal.is_holiday(d)


@dataclass(frozen=True)
class ExclusionRanges:
    """Inclusive date ranges removed from evaluation (not from history)."""

    ranges: tuple[tuple[date, date], ...] = ()

    def __post_init__(self):
        for start, end in self.ranges:
            if start > end:
                raise DataError(f"exclusion range start {start} after end {end}")

    def contains(self, d: date) -> bool:
        return any(start <= d <= end for start, end in self.ranges)


# --- CSV ingestion ---------------------------------------------------------

DEMAND_SCHEMA = {"date": "date", "count": "count"}


def _read_rows(path: str | Path, required: list[str]) -> tuple[list[str], list[dict[str, str]]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise MissingColumn(f"{path.name} is missing column(s): {', '.join(missing)}")
        return list(header), list(reader)


def ingest_csv(
    path: str | Path,
    schema: Mapping[str, str] | None = None,
    gap_policy: str = "reject",
) -> DailySeries:
    """Read a demand CSV into a gap-free DailySeries sorted by date.

    schema maps logical names ('date', 'count') to CSV column names.
    gap_policy is 'reject' (default) or 'interpolate-linear'.
    """
    if gap_policy not in ("reject", "interpolate-linear"):
        raise DataError(f"unknown gap policy {gap_policy!r}")
    cols = dict(DEMAND_SCHEMA)
    cols.update(schema or {})
    _, rows = _read_rows(path, [cols["date"], cols["count"]])
    if not rows:
        raise DataError(f"{path}: no data rows")

    parsed: list[tuple[date, float]] = []
    for row in rows:
        d = parse_date(row[cols["date"]])
        raw = row[cols["count"]].strip()
        try:
            count = float(raw)
        except ValueError as exc:
            raise DataError(f"count on {d.isoformat()} is not a number: {raw!r}") from exc
        if not np.isfinite(count) or count < 0:
            raise NegativeCount(f"count on {d.isoformat()} must be >= 0, got {raw}")
        parsed.append((d, count))

    parsed.sort(key=lambda dc: dc[0])
    for (d1, _), (d2, _) in zip(parsed, parsed[1:]):
        if d1 == d2:
            raise DuplicateDate(f"duplicate date {d1.isoformat()}")

    if gap_policy == "reject":
        for (d1, _), (d2, _) in zip(parsed, parsed[1:]):
            if (d2 - d1).days != 1:
                raise GapInSeries(
                    f"missing {(d2 - d1).days - 1} day(s) between {d1.isoformat()} and {d2.isoformat()}"
                )
        return DailySeries(parsed[0][0], [c for _, c in parsed])

    # interpolate-linear: fill interior gaps between known neighbours
    start = parsed[0][0]
    n = (parsed[-1][0] - start).days + 1
    values = np.full(n, np.nan)
    for d, c in parsed:
        values[(d - start).days] = c
    known = np.flatnonzero(~np.isnan(values))
    values = np.interp(np.arange(n), known, values[known])
    return DailySeries(start, values)


def ingest_holiday_csv(path: str | Path) -> HolidayCalendar:
    """Read a holiday CSV with header date,name."""
    _, rows = _read_rows(path, ["date", "name"])
    entries: dict[date, str] = {}
    for row in rows:
        d = parse_date(row["date"])
        if d in entries:
            raise DuplicateDate(f"holiday listed twice for {d.isoformat()}")
        entries[d] = row["name"].strip()
    return HolidayCalendar(entries)


def ingest_covid_csv(path: str | Path) -> CovidSchedule:
    """Read a COVID schedule CSV with header start,end,level."""
    _, rows = _read_rows(path, ["start", "end", "level"])
    intervals = []
    for row in rows:
        try:
            level = int(row["level"].strip())
        except ValueError as exc:
            raise DataError(f"COVID level is not an integer: {row['level']!r}") from exc
        intervals.append(CovidInterval(parse_date(row["start"]), parse_date(row["end"]), level))
    return CovidSchedule(intervals)


def write_demand_csv(series: DailySeries, path: str | Path) -> None:
    """Serialize a series in the canonical demand format (header date,count)."""
    with Path(path).open("w", newline="") as fh:
        fh.write("date,count\n")
        for d, v in zip(series.dates(), series.values):
            fh.write(f"{d.isoformat()},{format_count(v)}\n")


def write_holiday_csv(cal: HolidayCalendar, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write("date,name\n")
        for d, name in cal.items():
            fh.write(f"{d.isoformat()},{name}\n")


def write_covid_csv(schedule: CovidSchedule, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write("start,end,level\n")
        for iv in schedule.intervals:
            fh.write(f"{iv.start.isoformat()},{iv.end.isoformat()},{iv.level}\n")
