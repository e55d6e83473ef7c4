"""Fourier residual fitting and the rolling one-step correction.

Oracle: coefficients from the normal equations, C = (F'F)^-1 F'S, with F
built by direct trig loops. The library solves the same problem through a
factorization, so the two answers come from genuinely different routes.
"""

import io
import math

import numpy as np
import pytest

from twotier.correction import (
    DfsFit,
    ResidualWindow,
    correct_remaining,
    design_matrix,
    eval_dfs,
    fit_dfs,
    residual,
    simulate_day,
    write_trace_csv,
)
from twotier.errors import (
    EmptyInput,
    GridMismatch,
    IndexOutOfDay,
    LengthMismatch,
    Underdetermined,
)


def oracle_design(n, L):
    rows = []
    for v in range(1, n + 1):
        row = [1.0]
        for i in range(1, L + 1):
            row.append(math.cos(2 * math.pi * i * v / n))
            row.append(math.sin(2 * math.pi * i * v / n))
        rows.append(row)
    return np.array(rows)


def oracle_fit(values, n, L):
    F = oracle_design(n, L)
    return np.linalg.inv(F.T @ F) @ F.T @ np.asarray(values, dtype=float)


def window(values, last_index=None):
    vals = tuple(values)
    if last_index is None:
        last_index = len(vals) - 1
    return ResidualWindow(values=vals, last_sample_index=last_index)


class TestResidual:
    def test_identical(self):
        assert residual(np.array([100.0]), np.array([100.0]))[0] == 0.0

    def test_over_prediction_positive(self):
        assert residual(np.array([120.0]), np.array([100.0]))[0] == 20.0

    def test_under_prediction_negative(self):
        assert residual(np.array([0.0]), np.array([50.0]))[0] == -50.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            residual(np.zeros(3), np.zeros(4))


class TestDesignMatrix:
    def test_shape_and_ones_column(self):
        F = design_matrix(8, 2)
        assert F.shape == (8, 5)
        assert np.all(F[:, 0] == 1.0)

    def test_columns_orthogonal_over_full_period(self):
        F = design_matrix(8, 2)
        gram = F.T @ F
        off_diag = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off_diag)) < 1e-12

    def test_underdetermined(self):
        with pytest.raises(Underdetermined):
            design_matrix(4, 2)

    def test_matches_oracle_matrix(self):
        for n, L in ((8, 2), (8, 3), (12, 2), (5, 1)):
            assert np.allclose(design_matrix(n, L), oracle_design(n, L), atol=1e-14)


class TestFitDfs:
    def test_constant_window(self):
        fit = fit_dfs(window([4.5] * 8), harmonics=2)
        assert fit.coefficients[0] == pytest.approx(4.5, abs=1e-12)
        assert np.max(np.abs(fit.coefficients[1:])) < 1e-12

    def test_exact_recovery_in_span(self):
        n = 8
        values = [
            3 + 2 * math.cos(2 * math.pi * v / n) - math.cos(4 * math.pi * v / n)
            for v in range(1, n + 1)
        ]
        fit = fit_dfs(window(values), harmonics=2)
        assert np.allclose(fit.coefficients, [3.0, 2.0, 0.0, -1.0, 0.0], atol=1e-9)

    def test_oracle_equivalence_random_windows(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            vals = rng.uniform(-5000, 5000, 8)
            fit = fit_dfs(window(vals), harmonics=2)
            assert np.max(np.abs(fit.coefficients - oracle_fit(vals, 8, 2))) < 1e-8

    def test_residual_norm_non_increasing_in_harmonics(self):
        rng = np.random.default_rng(32)
        vals = rng.uniform(-100, 100, 12)
        norms = []
        for L in (1, 2, 3, 4, 5):
            fit = fit_dfs(window(vals), harmonics=L)
            F = oracle_design(12, L)
            norms.append(np.linalg.norm(F @ fit.coefficients - vals))
        assert all(b <= a + 1e-9 for a, b in zip(norms, norms[1:]))

    def test_underdetermined_window(self):
        with pytest.raises(Underdetermined):
            fit_dfs(window([1.0, 2.0, 3.0, 4.0]), harmonics=2)

    def test_empty_window_rejected(self):
        with pytest.raises(EmptyInput):
            ResidualWindow(values=(), last_sample_index=0)


class TestEvalDfs:
    def test_constant_model(self):
        fit = DfsFit(coefficients=(5.0, 0.0, 0.0, 0.0, 0.0), window_length=8, harmonics=2)
        for k in (-3, 0, 1, 7, 12, 100):
            assert eval_dfs(fit, k) == pytest.approx(5.0, abs=1e-12)

    def test_periodicity(self):
        rng = np.random.default_rng(33)
        fit = fit_dfs(window(rng.uniform(-10, 10, 8)), harmonics=2)
        for k in range(-8, 17):
            assert eval_dfs(fit, k) == pytest.approx(eval_dfs(fit, k + 8), abs=1e-12)

    def test_reproduces_projection(self):
        rng = np.random.default_rng(34)
        vals = rng.uniform(-10, 10, 8)
        fit = fit_dfs(window(vals), harmonics=2)
        projection = oracle_design(8, 2) @ oracle_fit(vals, 8, 2)
        fitted = [eval_dfs(fit, v) for v in range(1, 9)]
        assert np.allclose(fitted, projection, atol=1e-9)


class TestCorrectRemaining:
    def test_zero_fit_is_identity(self):
        day = np.linspace(0, 100, 10)
        fit = DfsFit(coefficients=(0.0,) * 5, window_length=8, harmonics=2)
        out = correct_remaining(day, fit, current_sample=7)
        assert np.array_equal(out.values, day[8:])
        assert list(out.sample_indices) == [8, 9]

    def test_constant_residual_subtracted(self):
        # global over-predicts by 200 W; every remaining slot drops by 200
        day = np.full(12, 1000.0)
        fit = fit_dfs(window([200.0] * 8), harmonics=2)
        out = correct_remaining(day, fit, current_sample=7)
        assert np.allclose(out.values, 800.0, atol=1e-9)

    def test_clamped_at_zero(self):
        day = np.full(12, 50.0)
        fit = fit_dfs(window([200.0] * 8), harmonics=2)
        out = correct_remaining(day, fit, current_sample=7)
        assert all(v == 0.0 for v in out.values)

    def test_beyond_day_end_rejected(self):
        day = np.full(9, 10.0)
        fit = fit_dfs(window([0.0] * 8), harmonics=2)
        with pytest.raises(IndexOutOfDay):
            correct_remaining(day, fit, current_sample=8)


class TestSimulateDay:
    def test_perfect_forecast_identity(self):
        day = np.concatenate([np.zeros(3), np.linspace(0, 500, 10), np.zeros(3)])
        sim = simulate_day(day, day)
        assert np.array_equal(sim.corrected_series(), day)

    def test_constant_bias_removed_one_step(self):
        measured = np.linspace(100, 900, 24)
        global_f = measured + 100.0
        sim = simulate_day(global_f, measured)
        # from the first slot after a full window onward, the one-step
        # corrected value should match the measurement almost exactly
        for rec in sim.records:
            if rec.sample_index >= 8:
                assert abs(rec.corrected_w - rec.measured_w) < 1e-9

    def test_positive_residual_history_lowers_forecast(self):
        # the sign convention pin: persistent over-prediction must pull
        # corrected values BELOW the global forecast
        measured = np.full(20, 400.0)
        global_f = np.full(20, 650.0)
        sim = simulate_day(global_f, measured)
        for rec in sim.records:
            if rec.sample_index >= 8:
                assert rec.corrected_w < rec.global_w

    def test_early_slots_pass_through(self):
        rng = np.random.default_rng(41)
        measured = rng.uniform(0, 100, 16)
        global_f = rng.uniform(0, 100, 16)
        sim = simulate_day(global_f, measured, window_length=8)
        for rec in sim.records[:8]:
            assert rec.corrected_w == rec.global_w

    def test_no_negative_corrected_values(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            measured = rng.uniform(0, 300, 24)
            global_f = rng.uniform(0, 300, 24)
            sim = simulate_day(global_f, measured)
            assert np.all(sim.corrected_series() >= 0.0)

    def test_grid_mismatch(self):
        with pytest.raises((GridMismatch, LengthMismatch)):
            simulate_day(np.zeros(10), np.zeros(12))

    def test_record_count_equals_day_length(self):
        sim = simulate_day(np.zeros(96), np.zeros(96))
        assert len(sim.records) == 96


def test_trace_csv_layout():
    rng = np.random.default_rng(50)
    measured = rng.uniform(0, 100, 12)
    global_f = rng.uniform(0, 100, 12)
    sim = simulate_day(global_f, measured)
    buf = io.StringIO()
    write_trace_csv(sim, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "sample_index,global_w,measured_w,corrected_w,a0,a1,b1,a2,b2"
    assert len(lines) == 1 + 12
    # before the window fills there are no coefficients to report
    assert lines[1].endswith(",,,,")
    last = lines[-1].split(",")
    assert len(last) == 9
    assert all(field for field in last)
