"""Per-day solar power series on a uniform sampling grid.

Data model, CSV ingestion/export, chronological train/tune/test splitting,
and context-vector extraction. All types are immutable after construction;
sample arrays are stored read-only.

CSV schema (shared by every CLI-facing file): header ``timestamp,power_w``,
one row per sample, ISO-8601 local timestamps aligned to the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date as Date, datetime, timedelta
from typing import IO, Iterable

import numpy as np

from .errors import (
    GridMisalignment,
    IncompleteDay,
    InsufficientHistory,
    MalformedRow,
    NegativePower,
    TooFewDays,
)

SECONDS_PER_DAY = 86400
CSV_HEADER = "timestamp,power_w"

# Readings in [-1 W, 0) are sensor noise and clamp to zero; below that the
# row is rejected as physically impossible.
NEGATIVE_POWER_TOLERANCE_W = 1.0


def _freeze(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform intra-day sampling: interval T_s, derived samples per day."""

    sample_interval_seconds: int = 900
    samples_per_day: int = field(init=False)

    def __post_init__(self):
        step = self.sample_interval_seconds
        if not isinstance(step, int) or step <= 0:
            raise ValueError("sample_interval_seconds must be a positive integer")
        if SECONDS_PER_DAY % step != 0:
            raise ValueError(
                f"sample interval {step} s does not divide 86400 s evenly"
            )
        object.__setattr__(self, "samples_per_day", SECONDS_PER_DAY // step)

    def sample_times(self, day: Date) -> list[datetime]:
        """Wall-clock timestamps of every slot of `day`, in order."""
        base = datetime(day.year, day.month, day.day)
        step = timedelta(seconds=self.sample_interval_seconds)
        return [base + i * step for i in range(self.samples_per_day)]


@dataclass(frozen=True, eq=False)
class DayProfile:
    """One day's measured power, watts, one value per grid slot."""

    day_index: int
    date: Date
    samples: np.ndarray

    def __post_init__(self):
        if self.day_index < 0:
            raise ValueError("day_index must be non-negative")
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite sample in day {self.date.isoformat()}")
        if np.any(arr < 0):
            raise ValueError(f"negative sample in day {self.date.isoformat()}")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)


@dataclass(frozen=True, eq=False)
class SolarSeries:
    """Chronologically consecutive day profiles sharing one grid."""

    grid: SamplingGrid
    days: tuple[DayProfile, ...]

    def __post_init__(self):
        days = tuple(self.days)
        object.__setattr__(self, "days", days)
        m = self.grid.samples_per_day
        for day in days:
            if day.samples.size != m:
                raise ValueError(
                    f"day {day.date.isoformat()} has {day.samples.size} samples, "
                    f"grid expects {m}"
                )
        for prev, cur in zip(days, days[1:]):
            if (cur.date - prev.date).days != 1:
                raise ValueError(
                    f"days must be consecutive: gap between {prev.date} and {cur.date}"
                )
            if cur.day_index != prev.day_index + 1:
                raise ValueError("day indices must increase by 1 per day")

    @property
    def num_days(self) -> int:
        return len(self.days)

    @property
    def first_index(self) -> int:
        return self.days[0].day_index

    @property
    def last_index(self) -> int:
        return self.days[-1].day_index

    def day_by_index(self, day_index: int) -> DayProfile:
        pos = day_index - self.first_index
        if not self.days or pos < 0 or pos >= len(self.days):
            raise KeyError(f"day index {day_index} not in series")
        return self.days[pos]

    def day_by_date(self, date: Date) -> DayProfile:
        pos = (date - self.days[0].date).days if self.days else -1
        if pos < 0 or pos >= len(self.days):
            raise KeyError(f"date {date.isoformat()} not in series")
        return self.days[pos]

    def power_matrix(self) -> np.ndarray:
        """(num_days, samples_per_day) array of measured power."""
        return np.stack([d.samples for d in self.days])

    def max_power(self) -> float:
        return float(max(float(d.samples.max()) for d in self.days))

    def subseries(self, start: int, stop: int) -> "SolarSeries":
        """Days at positions [start, stop) with original day indices kept."""
        return SolarSeries(self.grid, self.days[start:stop])


@dataclass(frozen=True, eq=False)
class DatasetSplit:
    """Chronological train/tune/test partition of one series."""

    train: SolarSeries
    tune: SolarSeries
    test: SolarSeries
    ratios: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        if self.train.days and self.tune.days:
            if self.train.days[-1].date >= self.tune.days[0].date:
                raise ValueError("train days must all precede tune days")
        if self.tune.days and self.test.days:
            if self.tune.days[-1].date >= self.test.days[0].date:
                raise ValueError("tune days must all precede test days")

    def full_series(self) -> SolarSeries:
        """Original series reassembled from the three partitions."""
        return SolarSeries(
            self.train.grid, self.train.days + self.tune.days + self.test.days
        )


def _parse_timestamp(text: str, line_no: int) -> datetime:
    try:
        stamp = datetime.fromisoformat(text.strip())
    except ValueError:
        raise MalformedRow(f"line {line_no}: bad timestamp {text!r}") from None
    if stamp.tzinfo is not None:
        # Local wall-clock only; offsets would smuggle in timezone handling.
        raise MalformedRow(f"line {line_no}: timestamp must be naive local time")
    return stamp


def ingest_csv(source: IO, grid: SamplingGrid) -> SolarSeries:
    """Read the standard CSV schema into a validated SolarSeries.

    `source` is a text or binary stream. Only complete days are accepted:
    a day inside the covered date span with any slot missing (or never
    present at all) raises IncompleteDay naming that date. Readings in
    [-1 W, 0) clamp to zero; anything below -1 W raises NegativePower.
    """
    data = source if isinstance(source, (bytes, str)) else source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    text_lines = data.splitlines()

    step = grid.sample_interval_seconds
    per_day: dict[Date, dict[int, float]] = {}

    header_seen = False
    line_no = 0
    for raw in text_lines:
        line_no += 1
        line = raw.strip().lstrip("﻿")
        if not line:
            continue
        if not header_seen:
            if line != CSV_HEADER:
                raise MalformedRow(
                    f"line {line_no}: expected header {CSV_HEADER!r}, got {line!r}"
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedRow(f"line {line_no}: expected 2 fields, got {len(parts)}")
        stamp = _parse_timestamp(parts[0], line_no)
        try:
            power = float(parts[1])
        except ValueError:
            raise MalformedRow(
                f"line {line_no}: non-numeric power {parts[1]!r}"
            ) from None
        if not math.isfinite(power):
            raise MalformedRow(f"line {line_no}: non-finite power {parts[1]!r}")

        second_of_day = stamp.hour * 3600 + stamp.minute * 60 + stamp.second
        if stamp.microsecond != 0 or second_of_day % step != 0:
            raise GridMisalignment(
                f"line {line_no}: {parts[0]} is not on a multiple of {step} s"
            )
        if power < -NEGATIVE_POWER_TOLERANCE_W:
            raise NegativePower(
                f"line {line_no}: power {power} W below -{NEGATIVE_POWER_TOLERANCE_W} W tolerance"
            )
        power = max(power, 0.0)

        slot = second_of_day // step
        slots = per_day.setdefault(stamp.date(), {})
        if slot in slots:
            raise MalformedRow(f"line {line_no}: duplicate timestamp {parts[0]}")
        slots[slot] = power

    if not header_seen:
        raise MalformedRow("empty input: missing header row")
    if not per_day:
        return SolarSeries(grid, ())

    dates = sorted(per_day)
    span_days = (dates[-1] - dates[0]).days + 1
    profiles = []
    for offset in range(span_days):
        day = dates[0] + timedelta(days=offset)
        slots = per_day.get(day)
        if slots is None or len(slots) != grid.samples_per_day:
            raise IncompleteDay(day)
        profiles.append(
            DayProfile(
                day_index=offset,
                date=day,
                samples=[slots[i] for i in range(grid.samples_per_day)],
            )
        )
    return SolarSeries(grid, tuple(profiles))


def export_csv(series: SolarSeries, sink: IO) -> None:
    """Write the mirror of `ingest_csv`: power values round-trip bit-exactly
    (shortest decimal representation that reparses to the same double)."""
    sink.write(CSV_HEADER + "\n")
    for day in series.days:
        for stamp, value in zip(series.grid.sample_times(day.date), day.samples):
            sink.write(f"{stamp.isoformat()},{float(value)!r}\n")


def split_chronological(
    series: SolarSeries, ratios: tuple[float, float, float]
) -> DatasetSplit:
    """Partition a series into train/tune/test in time order.

    Train and tune sizes are floor(N * ratio); test takes the remainder.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3:
        raise ValueError("need exactly three split ratios")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {sum(ratios)}")
    n = series.num_days
    if n < 5:
        raise TooFewDays(f"need at least 5 days to split, have {n}")

    # +1e-9 implements the mathematical floor despite binary ratios like
    # 0.6 landing a hair under the exact product.
    n_train = int(math.floor(n * ratios[0] + 1e-9))
    n_tune = int(math.floor(n * ratios[1] + 1e-9))
    n_test = n - n_train - n_tune
    if n_train < 1 or n_tune < 1 or n_test < 1:
        raise TooFewDays(
            f"split {ratios} of {n} days leaves an empty partition "
            f"({n_train}/{n_tune}/{n_test})"
        )
    return DatasetSplit(
        train=series.subseries(0, n_train),
        tune=series.subseries(n_train, n_train + n_tune),
        test=series.subseries(n_train + n_tune, n),
        ratios=ratios,
    )


def day_context(
    series: SolarSeries, target_day: int, depth_days: int
) -> np.ndarray:
    """Concatenate the `depth_days` full days before `target_day`, oldest
    first. Length is depth_days * samples_per_day.

    `target_day` may be one past the last stored day (forecasting the next
    unseen day from the freshest history).
    """
    if depth_days < 1:
        raise ValueError("depth_days must be >= 1")
    first_needed = target_day - depth_days
    if first_needed < series.first_index or target_day - 1 > series.last_index:
        raise InsufficientHistory(
            f"day {target_day} needs days {first_needed}..{target_day - 1}; "
            f"series covers {series.first_index}..{series.last_index}"
        )
    chunks = [
        series.day_by_index(i).samples for i in range(first_needed, target_day)
    ]
    return np.concatenate(chunks)
