"""Shared helpers for the test suite."""

from datetime import date as Date, timedelta

import numpy as np

from twotier.timeseries import DayProfile, SamplingGrid, SolarSeries


def make_series(rows, start=Date(2015, 2, 15), interval_seconds=900, first_index=0):
    """Build a SolarSeries from a 2-D array-like of per-day samples.

    Row length must match 86400 / interval_seconds. Values must be >= 0
    (DayProfile enforces physical non-negativity).
    """
    grid = SamplingGrid(sample_interval_seconds=interval_seconds)
    days = tuple(
        DayProfile(
            day_index=first_index + i,
            date=start + timedelta(days=first_index + i),
            samples=np.asarray(row, dtype=float),
        )
        for i, row in enumerate(rows)
    )
    return SolarSeries(grid, days)
