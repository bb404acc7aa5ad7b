"""
Stratonovich calculus on sampled driving paths.

Integrands live on grid nodes; integrals use the midpoint (Fisk-Stratonovich)
rule, and time stepping uses the stochastic Heun predictor-corrector, which
is consistent with Stratonovich systems.
"""

import logging
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .constants import (
    DEFAULT_CORRECTOR_ITERATIONS,
    GRID_NODE_TOLERANCE,
    LEMMA_REDUCTION_FACTOR,
)
from .models import DrivingPath, Integrand, TimeGrid
from .paths import refine
from .validators import ValidationError

logger = logging.getLogger(__name__)

Coefficients = tuple[np.ndarray, Sequence[np.ndarray]]
Evaluator = Callable[[np.ndarray], Coefficients]


class NonFiniteStateError(ArithmeticError):
    """A stepper produced NaN or infinite values."""

    def __init__(self, message: str, step: Optional[int] = None, stage: str = ""):
        super().__init__(message)
        self.step = step
        self.stage = stage

    def at_step(self, step: int) -> "NonFiniteStateError":
        """Copy of this error tagged with the step index."""
        return type(self)(f"{self.args[0]} at step {step}", step=step, stage=self.stage)


def _ensure_finite(state: np.ndarray, stage: str) -> None:
    if not np.all(np.isfinite(state)):
        raise NonFiniteStateError(f"Non-finite state in {stage} stage", stage=stage)


def heun_step_split(
    state: np.ndarray,
    evaluate: Evaluator,
    dS: np.ndarray,
    evaluate_end: Optional[Evaluator] = None,
    n_corrector: int = DEFAULT_CORRECTOR_ITERATIONS,
) -> np.ndarray:
    """
    Stochastic Heun step with a joint coefficient evaluator.

    Args:
        state: Current state x
        evaluate: Maps a state to (drift a, [diffusion b_1 .. b_K])
        dS: Increments (dt, dW_1 .. dW_K)
        evaluate_end: Evaluator used at the predicted state (defaults to evaluate),
            for coefficients that depend explicitly on the end-of-step time
        n_corrector: Number of corrector iterations

    Returns:
        New state

    Raises:
        ValidationError: If the number of diffusions does not match dS
        NonFiniteStateError: If the predictor or corrector is not finite
    """
    dS = np.asarray(dS, dtype=float)
    dt = dS[0]
    dW = dS[1:]
    a0, b0 = evaluate(state)
    if len(b0) != len(dW):
        raise ValidationError(f"Expected {len(b0)} noise increments, got {len(dW)}")

    result = state + a0 * dt
    for k in range(len(dW)):
        result = result + b0[k] * dW[k]
    _ensure_finite(result, "predictor")

    end = evaluate if evaluate_end is None else evaluate_end
    for _ in range(n_corrector):
        a1, b1 = end(result)
        result = state + 0.5 * (a0 + a1) * dt
        for k in range(len(dW)):
            result = result + 0.5 * (b0[k] + b1[k]) * dW[k]
        _ensure_finite(result, "corrector")
    return result


def heun_step(
    state: np.ndarray,
    drift: Callable[[np.ndarray], np.ndarray],
    diffusions: Sequence[Callable[[np.ndarray], np.ndarray]],
    dS: np.ndarray,
    n_corrector: int = DEFAULT_CORRECTOR_ITERATIONS,
) -> np.ndarray:
    """
    One stochastic Heun step for dX = a(X) dt + sum_k b_k(X) o dW_k.

    Predictor x~ = x + a(x) dt + sum b_k(x) dW_k; corrector
    x' = x + (a(x) + a(x~)) dt / 2 + sum (b_k(x) + b_k(x~)) dW_k / 2.
    With no diffusions this is the classical second-order Heun method.
    """

    def evaluate(x: np.ndarray) -> Coefficients:
        return drift(x), [b(x) for b in diffusions]

    return heun_step_split(np.asarray(state, dtype=float), evaluate, dS, n_corrector=n_corrector)


def integrate_sde(
    x0: np.ndarray,
    drift: Callable[[np.ndarray], np.ndarray],
    diffusions: Sequence[Callable[[np.ndarray], np.ndarray]],
    path: DrivingPath,
) -> np.ndarray:
    """
    Heun trajectory over the whole path.

    Returns:
        Array of shape (n_steps + 1, *x0.shape)

    Raises:
        NonFiniteStateError: Tagged with the failing step index
    """
    x = np.asarray(x0, dtype=float)
    trajectory = np.empty((path.grid.n_steps + 1,) + x.shape)
    trajectory[0] = x
    for n in range(path.grid.n_steps):
        try:
            x = heun_step(x, drift, diffusions, path.increment(n))
        except NonFiniteStateError as e:
            logger.error("SDE integration aborted at step %d", n)
            raise e.at_step(n) from e
        trajectory[n + 1] = x
    return trajectory


def node_index(grid: TimeGrid, t: float) -> int:
    """
    Index of the grid node at time t.

    Raises:
        ValidationError: If t is not a node of the grid
    """
    position = (t - grid.t0) / grid.dt
    n = int(round(position))
    if abs(position - n) > GRID_NODE_TOLERANCE or not 0 <= n <= grid.n_steps:
        raise ValidationError(f"Time {t} is not a node of the grid")
    return n


def _node_range(grid: TimeGrid, a: float, b: float) -> tuple[int, int]:
    if b < a:
        raise ValidationError("Integration limits are reversed")
    return node_index(grid, a), node_index(grid, b)


def _component_increments(path: DrivingPath, j: int, n0: int, n1: int) -> np.ndarray:
    if not 0 <= j < path.n_components:
        raise ValidationError(f"Component {j} is not in the path")
    return np.diff(path.values[j, n0 : n1 + 1])


def strat_integral(f: Integrand, path: DrivingPath, j: int, a: float, b: float) -> np.ndarray:
    """
    Midpoint-rule Stratonovich integral of f against component j over [a, b].

    Args:
        f: Integrand sampled on grid nodes (scalar or field valued)
        path: Driving path
        j: Component index (0 is time)
        a: Lower limit, a grid node
        b: Upper limit, a grid node

    Returns:
        sum_n (f_n + f_{n+1}) / 2 * (S^j_{n+1} - S^j_n), a float for scalar integrands

    Raises:
        ValidationError: If a or b is off-grid or b < a
    """
    n0, n1 = _node_range(path.grid, a, b)
    increments = _component_increments(path, j, n0, n1)
    values = f.series(j, n0, n1)
    midpoints = 0.5 * (values[:-1] + values[1:])
    return np.tensordot(increments, midpoints, axes=(0, 0))


def ito_sum(f: Integrand, path: DrivingPath, j: int, a: float, b: float) -> np.ndarray:
    """Left-point (Ito) sum of f against component j over [a, b]."""
    n0, n1 = _node_range(path.grid, a, b)
    increments = _component_increments(path, j, n0, n1)
    values = f.series(j, n0, n1)
    return np.tensordot(increments, values[:-1], axes=(0, 0))


def covariation(f: np.ndarray, g: np.ndarray, grid: TimeGrid, a: float, b: float) -> float:
    """
    Discrete covariation sum of two node series over [a, b].

    Args:
        f: Series of length n_steps + 1
        g: Series of length n_steps + 1
        grid: Common time grid
        a: Lower limit, a grid node
        b: Upper limit, a grid node

    Returns:
        sum_n (f_{n+1} - f_n)(g_{n+1} - g_n)

    Raises:
        ValidationError: If the series lengths differ from the grid
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if len(f) != len(g) or len(f) != grid.n_steps + 1:
        raise ValidationError("Series lengths do not match the time grid")
    n0, n1 = _node_range(grid, a, b)
    return float(np.sum(np.diff(f[n0 : n1 + 1]) * np.diff(g[n0 : n1 + 1])))


def smooth_ramp(times: np.ndarray, a: float, b: float, width: float) -> np.ndarray:
    """
    Piecewise-cubic mollified indicator of [a, b].

    Rises from 0 at a to 1 at a + width, falls from 1 at b - width to 0 at b,
    using s(x) = x^2 (3 - 2x); bounded by 1 and C^1.
    """
    if width <= 0 or 2.0 * width > (b - a) * (1.0 + 1e-12):
        raise ValidationError("Ramp width must be positive and at most half of b - a")
    rise = np.clip((np.asarray(times) - a) / width, 0.0, 1.0)
    fall = np.clip((b - np.asarray(times)) / width, 0.0, 1.0)
    return rise**2 * (3.0 - 2.0 * rise) * fall**2 * (3.0 - 2.0 * fall)


def fundamental_lemma_check(
    F: np.ndarray,
    path: DrivingPath,
    j: int,
    a: float,
    b: float,
    n_smooth: int,
) -> np.ndarray:
    """
    Errors of smooth-ramp approximations to an indicator-weighted integral.

    For m = 1..n_smooth the ramp phi_m has transition width 2^-m (b - a) and
    e_m = |int F phi_m o dS^j - int_a^b F o dS^j|.

    Args:
        F: Node series of length n_steps + 1
        path: Driving path
        j: Component index
        a: Interval start, a node strictly after t0
        b: Interval end, a node strictly before t1
        n_smooth: Number of ramps

    Returns:
        Array of n_smooth errors

    Raises:
        ValidationError: If [a, b] is degenerate or not strictly inside the path interval
    """
    grid = path.grid
    if not b > a:
        raise ValidationError("Lemma interval [a, b] is degenerate")
    if not (grid.t0 < a and b < grid.t1):
        raise ValidationError("Lemma interval must lie strictly inside the path interval")
    if n_smooth < 1:
        raise ValidationError("n_smooth must be at least 1")
    F = np.asarray(F, dtype=float)
    if len(F) != grid.n_steps + 1:
        raise ValidationError("Series length does not match the time grid")

    exact = strat_integral(Integrand.from_series(F), path, j, a, b)
    nodes = grid.nodes()
    errors = np.empty(n_smooth)
    for m in range(1, n_smooth + 1):
        phi = smooth_ramp(nodes, a, b, (b - a) * 2.0**-m)
        smoothed = strat_integral(Integrand.from_series(F * phi), path, j, grid.t0, grid.t1)
        errors[m - 1] = abs(smoothed - exact)
    return errors


def lemma_success_fraction(error_sequences: Sequence[np.ndarray]) -> float:
    """Fraction of sequences whose last error is below the first divided by the reduction factor."""
    if not error_sequences:
        raise ValidationError("No error sequences given")
    hits = sum(1 for e in error_sequences if e[-1] < e[0] / LEMMA_REDUCTION_FACTOR)
    return hits / len(error_sequences)


def geometric_sde_errors(
    path: DrivingPath,
    drift: float,
    volatility: float,
    x0: float,
    levels: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Strong errors of Heun on dX = drift X dt + volatility X o dS^1 under halving of dt.

    The exact solution X_T = x0 exp(drift T + volatility S^1_T) holds for any
    continuous driver, so Brownian and OU paths both have an oracle. Level
    l + 1 refines level l by a factor 2 with a Brownian bridge, so every level
    sees the same terminal value S^1_T.

    Args:
        path: Coarsest path, with at least one martingale component
        drift: Coefficient of the dt term
        volatility: Coefficient of the dS^1 term (0 gives the ODE case)
        x0: Initial value
        levels: Number of step sizes
        seed: Seed of the bridge draws

    Returns:
        (step sizes, absolute terminal errors), one entry per level

    Raises:
        ValidationError: If the path has no martingale component or levels < 1
    """
    if path.n_noise < 1:
        raise ValidationError("The geometric SDE needs one martingale component")
    if levels < 1:
        raise ValidationError("levels must be at least 1")
    steps = np.empty(levels)
    errors = np.empty(levels)
    for level in range(levels):
        if level:
            path = refine(path, 2, seed + level)
        single = DrivingPath(
            grid=path.grid, values=path.values[:2], seed=path.seed, kinds=path.kinds[:2]
        )
        horizon = path.grid.t1 - path.grid.t0
        exact = x0 * np.exp(drift * horizon + volatility * path.values[1, -1])
        trajectory = integrate_sde(
            np.array([x0], dtype=float),
            lambda x: drift * x,
            [lambda x: volatility * x],
            single,
        )
        steps[level] = path.grid.dt
        errors[level] = abs(trajectory[-1, 0] - exact)
    return steps, errors


def fit_order(steps: Sequence[float], errors: Sequence[float]) -> float:
    """
    Least-squares slope of log2(error) against log2(step).

    Raises:
        ValidationError: If fewer than two points are given
    """
    if len(steps) < 2 or len(steps) != len(errors):
        raise ValidationError("Order fits need at least two (step, error) pairs")
    floor = np.finfo(float).tiny
    fit = stats.linregress(np.log2(steps), np.log2(np.maximum(errors, floor)))
    return float(fit.slope)


def log2_ratios(errors: Sequence[float]) -> np.ndarray:
    """log2(e_l / e_{l+1}) for consecutive levels."""
    values = np.maximum(np.asarray(errors, dtype=float), np.finfo(float).tiny)
    return np.log2(values[:-1] / values[1:])
