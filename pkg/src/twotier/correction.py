"""Local real-time correction of the day-ahead forecast.

As measurements arrive during the day, the gap between the global
forecast and reality (the residual) is fitted over a short rolling
window with a truncated discrete Fourier series. Extrapolating that fit
a few slots ahead and subtracting it from the global forecast gives the
corrected prediction. A positive fitted residual means the global tier
has been over-predicting, so the correction lowers the forecast.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyInput,
    IndexOutOfDay,
    LengthMismatch,
    NumericalFailure,
    Underdetermined,
)

DEFAULT_WINDOW = 8
DEFAULT_HARMONICS = 2


@dataclass(frozen=True)
class ResidualWindow:
    """The last n residuals before "now", oldest first.

    last_sample_index is the position within the day of the newest
    residual in the window.
    """

    values: tuple[float, ...]
    last_sample_index: int

    def __post_init__(self):
        if len(self.values) == 0:
            raise EmptyInput("residual window is empty")
        if self.last_sample_index < len(self.values) - 1:
            raise IndexOutOfDay(
                f"window of {len(self.values)} cannot end at sample "
                f"{self.last_sample_index}"
            )
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass(frozen=True)
class DfsFit:
    """Coefficients [a0, a1, b1, ..., aL, bL] over a window of length n."""

    coefficients: tuple[float, ...]
    window_length: int
    harmonics: int

    def __post_init__(self):
        if len(self.coefficients) != 2 * self.harmonics + 1:
            raise LengthMismatch(
                f"{self.harmonics} harmonics need "
                f"{2 * self.harmonics + 1} coefficients, got {len(self.coefficients)}"
            )
        object.__setattr__(
            self, "coefficients", tuple(float(c) for c in self.coefficients)
        )


@dataclass(frozen=True)
class CorrectedForecast:
    sample_indices: tuple[int, ...]
    values: tuple[float, ...]
    fit: DfsFit


def residual(global_forecast, measured) -> np.ndarray:
    """Global-tier forecast minus measured power, elementwise."""
    g = np.asarray(global_forecast, dtype=float)
    m = np.asarray(measured, dtype=float)
    if g.shape != m.shape:
        raise LengthMismatch(f"shape mismatch: {g.shape} vs {m.shape}")
    if g.size == 0:
        raise EmptyInput("no samples to difference")
    return g - m


def design_matrix(window_length: int, harmonics: int) -> np.ndarray:
    """Rows are window positions v = 1..n; columns are the DFS basis
    [1, cos(2*pi*v/n), sin(2*pi*v/n), ..., cos(2*pi*L*v/n), sin(2*pi*L*v/n)].
    """
    if window_length < 1:
        raise ValueError("window_length must be >= 1")
    if harmonics < 1:
        raise ValueError("harmonics must be >= 1")
    cols = 2 * harmonics + 1
    if cols > window_length:
        raise Underdetermined(
            f"{cols} coefficients cannot be fit from {window_length} samples"
        )
    v = np.arange(1, window_length + 1)
    matrix = np.ones((window_length, cols))
    for i in range(1, harmonics + 1):
        angle = 2.0 * math.pi * i * v / window_length
        matrix[:, 2 * i - 1] = np.cos(angle)
        matrix[:, 2 * i] = np.sin(angle)
    return matrix


def fit_dfs(window: ResidualWindow, harmonics: int = DEFAULT_HARMONICS) -> DfsFit:
    """Least-squares DFS fit of the residual window."""
    n = len(window.values)
    matrix = design_matrix(n, harmonics)
    target = np.asarray(window.values)
    try:
        coef = np.linalg.lstsq(matrix, target, rcond=None)[0]
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"least squares failed: {exc}") from exc
    if not np.all(np.isfinite(coef)):
        raise NumericalFailure("least squares produced non-finite coefficients")
    return DfsFit(
        coefficients=tuple(coef), window_length=n, harmonics=harmonics
    )


def eval_dfs(fit: DfsFit, position: float) -> float:
    """Evaluate the fitted series at a window position (1..n inside the
    window, larger values extrapolate). The basis is n-periodic, so the
    position is reduced modulo n first; eval at k and k + n agree exactly.
    """
    n = fit.window_length
    reduced = position % n
    total = fit.coefficients[0]
    for i in range(1, fit.harmonics + 1):
        angle = 2.0 * math.pi * i * reduced / n
        total += fit.coefficients[2 * i - 1] * math.cos(angle)
        total += fit.coefficients[2 * i] * math.sin(angle)
    return total


def correct_remaining(
    global_day,
    fit: DfsFit,
    current_sample: int,
    horizon: int | None = None,
) -> CorrectedForecast:
    """Corrected forecast for the slots after current_sample.

    Slot l gets global(l) - eval(n + (l - current_sample)), clamped at
    zero; the window's newest residual sits at position n, so the first
    future slot is evaluated at n + 1.
    """
    day = np.asarray(global_day, dtype=float)
    if day.ndim != 1 or day.size == 0:
        raise EmptyInput("global_day must be a non-empty vector")
    if not 0 <= current_sample < day.size - 1:
        raise IndexOutOfDay(
            f"sample {current_sample} leaves no later slot to correct "
            f"in a day of {day.size}"
        )
    last = day.size - 1
    if horizon is not None:
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        last = min(last, current_sample + horizon)
    indices = tuple(range(current_sample + 1, last + 1))
    n = fit.window_length
    values = tuple(
        max(0.0, float(day[l]) - eval_dfs(fit, n + (l - current_sample)))
        for l in indices
    )
    return CorrectedForecast(sample_indices=indices, values=values, fit=fit)


@dataclass(frozen=True)
class StepRecord:
    sample_index: int
    global_w: float
    measured_w: float
    corrected_w: float
    fit: DfsFit | None


@dataclass(frozen=True)
class DaySimulation:
    records: tuple[StepRecord, ...]
    window_length: int
    harmonics: int

    def corrected_series(self) -> np.ndarray:
        return np.array([r.corrected_w for r in self.records])

    def global_series(self) -> np.ndarray:
        return np.array([r.global_w for r in self.records])

    def measured_series(self) -> np.ndarray:
        return np.array([r.measured_w for r in self.records])


def simulate_day(
    global_day,
    measured_day,
    window_length: int = DEFAULT_WINDOW,
    harmonics: int = DEFAULT_HARMONICS,
) -> DaySimulation:
    """Replay a day one slot at a time.

    At each slot m with at least window_length residuals available the
    window ending at m is refitted and the next slot's corrected value is
    the one-step-ahead correction. Slots before the first full window
    keep the global forecast unchanged.
    """
    g = np.asarray(global_day, dtype=float)
    y = np.asarray(measured_day, dtype=float)
    if g.shape != y.shape:
        raise LengthMismatch(f"shape mismatch: {g.shape} vs {y.shape}")
    if g.ndim != 1 or g.size == 0:
        raise EmptyInput("day must be a non-empty vector")
    res = g - y
    corrected = g.copy()
    fits: list[DfsFit | None] = [None] * g.size
    for m in range(window_length - 1, g.size - 1):
        window = ResidualWindow(
            values=tuple(res[m - window_length + 1 : m + 1]),
            last_sample_index=m,
        )
        fit = fit_dfs(window, harmonics)
        fits[m + 1] = fit
        step = correct_remaining(g, fit, m, horizon=1)
        corrected[m + 1] = step.values[0]
    records = tuple(
        StepRecord(
            sample_index=i,
            global_w=float(g[i]),
            measured_w=float(y[i]),
            corrected_w=float(corrected[i]),
            fit=fits[i],
        )
        for i in range(g.size)
    )
    return DaySimulation(
        records=records, window_length=window_length, harmonics=harmonics
    )


def write_trace_csv(sim: DaySimulation, sink) -> None:
    """Dump a simulation as CSV. Coefficient columns are empty on slots
    predicted before the window filled."""
    coef_names = ["a0"]
    for i in range(1, sim.harmonics + 1):
        coef_names += [f"a{i}", f"b{i}"]
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(
        ["sample_index", "global_w", "measured_w", "corrected_w", *coef_names]
    )
    for rec in sim.records:
        coeffs = (
            [repr(c) for c in rec.fit.coefficients]
            if rec.fit is not None
            else [""] * len(coef_names)
        )
        writer.writerow(
            [
                rec.sample_index,
                repr(rec.global_w),
                repr(rec.measured_w),
                repr(rec.corrected_w),
                *coeffs,
            ]
        )
