"""Three-layer feed-forward network trained by Levenberg-Marquardt.

The network maps the power at one time slot of the previous two days to
the same slot of the forecast day: two inputs, H tanh hidden neurons,
one linear output. Inputs and targets are normalized by the training-set
maximum power; predictions are denormalized and clamped at zero.

Training is damped Gauss-Newton on the sum of squared errors with an
analytic Jacobian, restarted from several random initializations; the
restart with the lowest training RMSE wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, InsufficientTrainingDays, SingularStep
from .rng import SplitMix64, derive_seed
from .timeseries import DayProfile, SolarSeries

INPUT_WIDTH = 2
DAMPING_CAP = 1e10


@dataclass(frozen=True)
class NnConfig:
    hidden_neurons: int = 6
    restarts: int = 10
    lm_initial_damping: float = 1e-3
    lm_damping_factor: float = 10.0
    max_iterations: int = 200
    loss_tolerance: float = 1e-9
    rng_seed: int = 1

    def __post_init__(self):
        if not 1 <= self.hidden_neurons <= 64:
            raise ValueError("hidden_neurons must be in [1, 64]")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.lm_initial_damping <= 0:
            raise ValueError("lm_initial_damping must be positive")
        if self.lm_damping_factor <= 1:
            raise ValueError("lm_damping_factor must be > 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.loss_tolerance <= 0:
            raise ValueError("loss_tolerance must be positive")


@dataclass(frozen=True, eq=False)
class NnModel:
    hidden_weights: np.ndarray   # (H, 2)
    hidden_biases: np.ndarray    # (H,)
    output_weights: np.ndarray   # (H,)
    output_bias: float
    scale_max: float             # training-set max power, watts
    samples_per_day: int
    config: NnConfig

    def __post_init__(self):
        w1 = np.array(self.hidden_weights, dtype=float)
        b1 = np.array(self.hidden_biases, dtype=float)
        w2 = np.array(self.output_weights, dtype=float)
        h = self.config.hidden_neurons
        if w1.shape != (h, INPUT_WIDTH) or b1.shape != (h,) or w2.shape != (h,):
            raise ValueError(
                f"weight shapes inconsistent with {h} hidden neurons: "
                f"{w1.shape}, {b1.shape}, {w2.shape}"
            )
        finite = (
            np.all(np.isfinite(w1))
            and np.all(np.isfinite(b1))
            and np.all(np.isfinite(w2))
            and math.isfinite(self.output_bias)
        )
        if not finite:
            raise ValueError("all weights must be finite")
        if not (math.isfinite(self.scale_max) and self.scale_max > 0):
            raise ValueError("scale_max must be positive and finite")
        if self.samples_per_day < 1:
            raise ValueError("samples_per_day must be >= 1")
        for name, arr in (("hidden_weights", w1), ("hidden_biases", b1),
                          ("output_weights", w2)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "output_bias", float(self.output_bias))

    @property
    def parameter_count(self) -> int:
        # H*2 input weights + H hidden biases + H output weights + 1 bias
        return 4 * self.config.hidden_neurons + 1


@dataclass(frozen=True)
class TrainTrace:
    """One entry per proposed LM step, in proposal order."""

    initial_loss: float
    losses: tuple[float, ...]
    accepted: tuple[bool, ...]
    final_damping: float

    def accepted_losses(self) -> tuple[float, ...]:
        return tuple(l for l, ok in zip(self.losses, self.accepted) if ok)


def build(
    config: NnConfig,
    seed: int,
    samples_per_day: int = 96,
    scale_max: float = 1.0,
) -> NnModel:
    """Fresh model with weights i.i.d. uniform in [-0.5, 0.5].

    Draw order is fixed (input weights row-major, hidden biases, output
    weights, output bias) so a seed fully determines the weight set.
    """
    rng = SplitMix64(seed)
    h = config.hidden_neurons
    w1 = np.array(
        [[rng.uniform(-0.5, 0.5) for _ in range(INPUT_WIDTH)] for _ in range(h)]
    )
    b1 = np.array([rng.uniform(-0.5, 0.5) for _ in range(h)])
    w2 = np.array([rng.uniform(-0.5, 0.5) for _ in range(h)])
    b2 = rng.uniform(-0.5, 0.5)
    return NnModel(
        hidden_weights=w1,
        hidden_biases=b1,
        output_weights=w2,
        output_bias=b2,
        scale_max=scale_max,
        samples_per_day=samples_per_day,
        config=config,
    )


def _pack(model: NnModel) -> np.ndarray:
    return np.concatenate(
        [
            model.hidden_weights.ravel(),
            model.hidden_biases,
            model.output_weights,
            [model.output_bias],
        ]
    )


def _unpack(theta: np.ndarray, base: NnModel) -> NnModel:
    h = base.config.hidden_neurons
    return NnModel(
        hidden_weights=theta[: 2 * h].reshape(h, INPUT_WIDTH),
        hidden_biases=theta[2 * h : 3 * h],
        output_weights=theta[3 * h : 4 * h],
        output_bias=float(theta[4 * h]),
        scale_max=base.scale_max,
        samples_per_day=base.samples_per_day,
        config=base.config,
    )


def _forward_batch(theta: np.ndarray, h: int, inputs: np.ndarray) -> np.ndarray:
    w1 = theta[: 2 * h].reshape(h, INPUT_WIDTH)
    b1 = theta[2 * h : 3 * h]
    w2 = theta[3 * h : 4 * h]
    b2 = theta[4 * h]
    hidden = np.tanh(inputs @ w1.T + b1)
    return hidden @ w2 + b2


def forward(model: NnModel, inputs) -> float:
    """Evaluate the network on one normalized input pair."""
    x = np.asarray(inputs, dtype=float)
    if x.shape != (INPUT_WIDTH,):
        raise ValueError(f"expected an input pair, got shape {x.shape}")
    return float(_forward_batch(_pack(model), model.config.hidden_neurons, x[None, :])[0])


def _jacobian_batch(theta: np.ndarray, h: int, inputs: np.ndarray) -> np.ndarray:
    w1 = theta[: 2 * h].reshape(h, INPUT_WIDTH)
    b1 = theta[2 * h : 3 * h]
    w2 = theta[3 * h : 4 * h]
    hidden = np.tanh(inputs @ w1.T + b1)          # (n, H)
    gate = w2 * (1.0 - hidden**2)                 # (n, H): d out / d preactivation
    n = inputs.shape[0]
    jac = np.empty((n, 4 * h + 1))
    jac[:, : 2 * h] = (gate[:, :, None] * inputs[:, None, :]).reshape(n, 2 * h)
    jac[:, 2 * h : 3 * h] = gate
    jac[:, 3 * h : 4 * h] = hidden
    jac[:, 4 * h] = 1.0
    return jac


def jacobian(model: NnModel, batch) -> np.ndarray:
    """Analytic derivative of the output w.r.t. every parameter.

    Row r, column c is d forward(batch[r]) / d theta_c with parameters
    packed as [input weights row-major, hidden biases, output weights,
    output bias].
    """
    inputs = np.atleast_2d(np.asarray(batch, dtype=float))
    if inputs.size == 0:
        raise ValueError("batch must be non-empty")
    if inputs.shape[1] != INPUT_WIDTH:
        raise ValueError(f"inputs must be pairs, got shape {inputs.shape}")
    return _jacobian_batch(_pack(model), model.config.hidden_neurons, inputs)


def train_lm(model: NnModel, samples, config: NnConfig) -> tuple[NnModel, TrainTrace]:
    """Levenberg-Marquardt on sum-squared error.

    Each iteration solves (J'J + lambda I) delta = -J'e and accepts the
    step only if the error decreases (lambda shrinks by the damping
    factor); otherwise lambda grows and the step is retried. Training
    stops at the iteration budget, when an accepted step improves by less
    than loss_tolerance, or when lambda exceeds the 1e10 cap.
    """
    if len(samples) < 1:
        raise ValueError("need at least one training sample")
    if config.hidden_neurons != model.config.hidden_neurons:
        raise ValueError("config hidden_neurons disagrees with the model")
    inputs = np.array([list(x) for x, _ in samples], dtype=float)
    targets = np.array([t for _, t in samples], dtype=float)
    theta, trace = _train_lm_arrays(_pack(model), model.config.hidden_neurons,
                                    inputs, targets, config)
    return _unpack(theta, model), trace


def _train_lm_arrays(
    theta: np.ndarray,
    h: int,
    inputs: np.ndarray,
    targets: np.ndarray,
    config: NnConfig,
) -> tuple[np.ndarray, TrainTrace]:
    def sse(t: np.ndarray) -> float:
        err = _forward_batch(t, h, inputs) - targets
        return float(err @ err)

    initial_loss = sse(theta)
    loss = initial_loss
    damping = config.lm_initial_damping
    identity = np.eye(theta.size)
    losses: list[float] = []
    accepted: list[bool] = []

    for _ in range(config.max_iterations):
        jac = _jacobian_batch(theta, h, inputs)
        err = _forward_batch(theta, h, inputs) - targets
        gradient = jac.T @ err
        gauss_newton = jac.T @ jac

        improvement = None
        while True:
            try:
                delta = np.linalg.solve(gauss_newton + damping * identity, -gradient)
            except np.linalg.LinAlgError:
                delta = None
            if delta is not None and np.all(np.isfinite(delta)):
                candidate = theta + delta
                candidate_loss = sse(candidate)
            else:
                candidate = None
                candidate_loss = math.inf

            if candidate is not None and candidate_loss < loss:
                losses.append(candidate_loss)
                accepted.append(True)
                improvement = loss - candidate_loss
                theta = candidate
                loss = candidate_loss
                damping = damping / config.lm_damping_factor
                break

            losses.append(candidate_loss)
            accepted.append(False)
            if delta is None and damping >= DAMPING_CAP:
                raise SingularStep(
                    f"normal equations unsolvable at damping {damping:g}"
                )
            damping = damping * config.lm_damping_factor
            if damping > DAMPING_CAP:
                improvement = None
                break

        if improvement is None:
            break  # damping cap: no acceptable step exists
        if improvement < config.loss_tolerance:
            break

    trace = TrainTrace(
        initial_loss=initial_loss,
        losses=tuple(losses),
        accepted=tuple(accepted),
        final_damping=damping,
    )
    return theta, trace


def day_ahead_samples(train: SolarSeries, scale_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Normalized training set over all eligible (day, slot) pairs:
    inputs [P(d-1, m), P(d-2, m)] / scale_max, target P(d, m) / scale_max."""
    power = train.power_matrix()
    inputs = np.stack(
        [power[1:-1].ravel(), power[:-2].ravel()], axis=1
    ) / scale_max
    targets = power[2:].ravel() / scale_max
    return inputs, targets


def _training_setup(train: SolarSeries):
    if train.num_days < 3:
        raise InsufficientTrainingDays(
            f"day-ahead NN needs >= 3 training days, have {train.num_days}"
        )
    scale_max = train.max_power()
    if scale_max <= 0:
        scale_max = 1.0  # all-dark series: normalization is the identity
    inputs, targets = day_ahead_samples(train, scale_max)
    return scale_max, inputs, targets


def _run_restart(train, config, restart, scale_max, inputs, targets):
    seed = derive_seed(config.rng_seed, restart)
    start = build(
        config, seed, samples_per_day=train.grid.samples_per_day,
        scale_max=scale_max,
    )
    theta, _ = _train_lm_arrays(
        _pack(start), config.hidden_neurons, inputs, targets, config
    )
    err = _forward_batch(theta, config.hidden_neurons, inputs) - targets
    rmse = math.sqrt(float(err @ err) / err.size)
    return _unpack(theta, start), rmse


def fit_restart(train: SolarSeries, config: NnConfig, restart: int) -> NnModel:
    """Train once from restart's derived seed (no best-of selection)."""
    scale_max, inputs, targets = _training_setup(train)
    model, _ = _run_restart(train, config, restart, scale_max, inputs, targets)
    return model


def fit_day_ahead(train: SolarSeries, config: NnConfig) -> NnModel:
    """Train with multiple restarts; keep the lowest-training-RMSE model.

    Restart seeds derive deterministically from config.rng_seed, and ties
    on RMSE keep the earliest restart, so the result does not depend on
    evaluation order.
    """
    scale_max, inputs, targets = _training_setup(train)
    best_model = None
    best_rmse = math.inf
    for restart in range(config.restarts):
        model, rmse = _run_restart(
            train, config, restart, scale_max, inputs, targets
        )
        if rmse < best_rmse:
            best_rmse = rmse
            best_model = model
    return best_model


def predict_day(
    model: NnModel, prev_day: DayProfile, prev_prev_day: DayProfile
) -> np.ndarray:
    """Forecast a full day from the two preceding days' measurements.

    Inputs and output are scaled by the model's training maximum; the
    denormalized forecast is clamped at zero.
    """
    if (
        prev_day.samples.size != model.samples_per_day
        or prev_prev_day.samples.size != model.samples_per_day
    ):
        raise GridMismatch(
            f"model expects {model.samples_per_day} samples per day, got "
            f"{prev_day.samples.size} and {prev_prev_day.samples.size}"
        )
    inputs = np.stack([prev_day.samples, prev_prev_day.samples], axis=1) / model.scale_max
    outputs = _forward_batch(_pack(model), model.config.hidden_neurons, inputs)
    return np.maximum(outputs * model.scale_max, 0.0)
