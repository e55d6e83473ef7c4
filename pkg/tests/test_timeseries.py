"""Data model, CSV round-trip, splitting, and context extraction."""

import io
from datetime import date as Date

import numpy as np
import pytest

from conftest import make_series
from twotier.errors import (
    GridMisalignment,
    IncompleteDay,
    InsufficientHistory,
    MalformedRow,
    NegativePower,
    TooFewDays,
)
from twotier.timeseries import (
    DayProfile,
    SamplingGrid,
    SolarSeries,
    day_context,
    export_csv,
    ingest_csv,
    split_chronological,
)


def csv_for(rows_per_day, start=Date(2015, 2, 15), interval=900):
    """Render a CSV body the long way, independent of export_csv."""
    grid = SamplingGrid(sample_interval_seconds=interval)
    lines = ["timestamp,power_w"]
    for d, row in enumerate(rows_per_day):
        day = Date.fromordinal(start.toordinal() + d)
        for ts, v in zip(grid.sample_times(day), row):
            lines.append(f"{ts.isoformat()},{v}")
    return "\n".join(lines) + "\n"


class TestSamplingGrid:
    def test_default_is_15_minutes_96_samples(self):
        grid = SamplingGrid()
        assert grid.sample_interval_seconds == 900
        assert grid.samples_per_day == 96

    def test_interval_must_divide_day(self):
        with pytest.raises(ValueError):
            SamplingGrid(sample_interval_seconds=7000)

    def test_product_recovers_day_length(self):
        for step in (900, 3600, 21600):
            grid = SamplingGrid(sample_interval_seconds=step)
            assert grid.samples_per_day * step == 86400


class TestDayProfile:
    def test_rejects_negative_sample(self):
        with pytest.raises(ValueError):
            DayProfile(0, Date(2015, 2, 15), [1.0, -3.0])

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            DayProfile(0, Date(2015, 2, 15), [1.0, float("nan")])

    def test_samples_are_read_only(self):
        day = DayProfile(0, Date(2015, 2, 15), [1.0, 2.0])
        with pytest.raises(ValueError):
            day.samples[0] = 5.0


class TestSolarSeries:
    def test_rejects_date_gap(self):
        a = DayProfile(0, Date(2015, 2, 15), [0.0] * 4)
        b = DayProfile(1, Date(2015, 2, 17), [0.0] * 4)
        with pytest.raises(ValueError):
            SolarSeries(SamplingGrid(sample_interval_seconds=21600), (a, b))

    def test_day_lookup_by_index_and_date(self):
        series = make_series([[1, 2, 3, 4], [5, 6, 7, 8]], interval_seconds=21600)
        assert series.day_by_index(1).samples[0] == 5
        assert series.day_by_date(Date(2015, 2, 16)).samples[3] == 8
        with pytest.raises(KeyError):
            series.day_by_index(7)
        with pytest.raises(KeyError):
            series.day_by_date(Date(2020, 1, 1))


class TestIngest:
    def test_two_complete_days(self):
        text = csv_for([range(96), range(96)])
        series = ingest_csv(io.StringIO(text), SamplingGrid())
        assert series.num_days == 2
        assert all(day.samples.size == 96 for day in series.days)

    def test_missing_0715_names_the_date(self):
        # drop the 07:15 sample (slot 29) of the first day
        text = csv_for([range(96)])
        lines = text.splitlines()
        del lines[1 + 29]
        with pytest.raises(IncompleteDay) as err:
            ingest_csv(io.StringIO("\n".join(lines)), SamplingGrid())
        assert "2015-02-15" in str(err.value)

    def test_non_numeric_power(self):
        text = "timestamp,power_w\n2015-02-15T00:00:00,abc\n"
        with pytest.raises(MalformedRow):
            ingest_csv(io.StringIO(text), SamplingGrid())

    def test_bad_timestamp(self):
        text = "timestamp,power_w\nnot-a-time,5.0\n"
        with pytest.raises(MalformedRow):
            ingest_csv(io.StringIO(text), SamplingGrid())

    def test_off_grid_timestamp(self):
        text = "timestamp,power_w\n2015-02-15T00:07:00,5.0\n"
        with pytest.raises(GridMisalignment):
            ingest_csv(io.StringIO(text), SamplingGrid())

    def test_duplicate_timestamp(self):
        text = (
            "timestamp,power_w\n"
            "2015-02-15T00:00:00,5.0\n"
            "2015-02-15T00:00:00,6.0\n"
        )
        with pytest.raises(MalformedRow):
            ingest_csv(io.StringIO(text), SamplingGrid())

    def test_small_negative_clamps_to_zero(self):
        rows = [[-0.5] + [0.0] * 95]
        text = csv_for(rows)
        series = ingest_csv(io.StringIO(text), SamplingGrid())
        assert series.days[0].samples[0] == 0.0

    def test_large_negative_rejected(self):
        rows = [[-3.0] + [0.0] * 95]
        with pytest.raises(NegativePower):
            ingest_csv(io.StringIO(csv_for(rows)), SamplingGrid())

    def test_accepts_bytes(self):
        text = csv_for([range(96)])
        series = ingest_csv(io.BytesIO(text.encode()), SamplingGrid())
        assert series.num_days == 1


def test_export_ingest_identity():
    # exact decimal round-trip, including non-representable decimals
    rng = np.random.default_rng(7)
    rows = rng.uniform(0, 35000, size=(3, 96))
    series = make_series(rows)
    buf = io.StringIO()
    export_csv(series, buf)
    back = ingest_csv(io.StringIO(buf.getvalue()), series.grid)
    for a, b in zip(series.days, back.days):
        assert np.array_equal(a.samples, b.samples)


class TestSplit:
    def test_50_days_splits_30_10_10(self):
        series = make_series(np.zeros((50, 96)))
        split = split_chronological(series, (0.6, 0.2, 0.2))
        assert (split.train.num_days, split.tune.num_days, split.test.num_days) == (30, 10, 10)

    def test_5_days_splits_3_1_1(self):
        series = make_series(np.zeros((5, 96)))
        split = split_chronological(series, (0.6, 0.2, 0.2))
        assert (split.train.num_days, split.tune.num_days, split.test.num_days) == (3, 1, 1)

    def test_7_days_splits_4_1_2(self):
        series = make_series(np.zeros((7, 96)))
        split = split_chronological(series, (0.6, 0.2, 0.2))
        assert (split.train.num_days, split.tune.num_days, split.test.num_days) == (4, 1, 2)

    def test_chronological_ordering(self):
        series = make_series(np.zeros((10, 96)))
        split = split_chronological(series, (0.6, 0.2, 0.2))
        assert split.train.days[-1].date < split.tune.days[0].date
        assert split.tune.days[-1].date < split.test.days[0].date

    def test_too_few_days(self):
        series = make_series(np.zeros((10, 96)))
        with pytest.raises(TooFewDays):
            split_chronological(series.subseries(0, 4), (0.6, 0.2, 0.2))

    def test_ratios_must_sum_to_one(self):
        series = make_series(np.zeros((10, 96)))
        with pytest.raises(ValueError):
            split_chronological(series, (0.5, 0.2, 0.2))

    def test_full_series_reassembles(self):
        series = make_series(np.arange(10 * 96).reshape(10, 96))
        split = split_chronological(series, (0.6, 0.2, 0.2))
        full = split.full_series()
        assert np.array_equal(full.power_matrix(), series.power_matrix())


class TestDayContext:
    def test_depth_1_is_previous_day(self):
        series = make_series(np.arange(6 * 4).reshape(6, 4), interval_seconds=21600)
        ctx = day_context(series, 5, 1)
        assert np.array_equal(ctx, series.day_by_index(4).samples)

    def test_depth_5_length_480(self):
        series = make_series(np.zeros((6, 96)))
        assert day_context(series, 5, 5).size == 480

    def test_depth_2_elementwise(self):
        # independent oracle: index the day rows directly, oldest first
        rows = np.arange(5 * 4, dtype=float).reshape(5, 4)
        series = make_series(rows, interval_seconds=21600)
        ctx = day_context(series, 3, 2)
        expected = np.concatenate([rows[1], rows[2]])
        assert np.array_equal(ctx, expected)

    def test_insufficient_history(self):
        series = make_series(np.zeros((4, 4)), interval_seconds=21600)
        with pytest.raises(InsufficientHistory):
            day_context(series, 2, 3)

    def test_next_unseen_day_allowed(self):
        series = make_series(np.zeros((4, 4)), interval_seconds=21600)
        assert day_context(series, 4, 2).size == 8

    def test_length_property_across_depths(self):
        series = make_series(np.zeros((9, 96)))
        for depth in range(1, 6):
            assert day_context(series, 8, depth).size == depth * 96
