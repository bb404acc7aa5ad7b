"""
Driving semimartingale paths S_t = (t, W^1, ..., W^K).

Component 0 is the time grid itself (the single finite-variation
component); components 1..K are martingale drivers. Every martingale
component draws from its own generator keyed by (seed, stream, component),
so adding components never changes the existing ones.
"""

import logging
from typing import Optional

import numpy as np

from .constants import (
    DEFAULT_OU_SIGMA,
    DEFAULT_OU_THETA,
    STREAM_BRIDGE,
    STREAM_BROWNIAN,
    STREAM_OU,
    ComponentKind,
    DriverKind,
)
from .models import DrivingPath, TimeGrid
from .validators import ParameterValidator, TimeGridValidator, ValidationError

logger = logging.getLogger(__name__)


def component_rng(seed: int, stream: int, component: int) -> np.random.Generator:
    """Independent generator for one (seed, stream, component) key."""
    return np.random.default_rng(np.random.SeedSequence([seed, stream, component]))


def _component_kinds(K: int) -> tuple[ComponentKind, ...]:
    return (ComponentKind.FINITE_VARIATION,) + (ComponentKind.MARTINGALE,) * K


def _check_request(grid: TimeGrid, K: int, seed: int) -> None:
    TimeGridValidator.validate(grid.t0, grid.t1, grid.n_steps)
    if K < 0:
        raise ValidationError("Number of noise components K must be non-negative")
    if seed < 0:
        raise ValidationError("Seed must be non-negative")


def sample_brownian(grid: TimeGrid, K: int, seed: int) -> DrivingPath:
    """
    Sample K independent standard Brownian motions on a time grid.

    Args:
        grid: Uniform time grid
        K: Number of martingale components
        seed: Non-negative integer seed

    Returns:
        DrivingPath with values of shape (K + 1, n_steps + 1)

    Raises:
        ValidationError: If K < 0, the seed is negative or the grid is empty
    """
    _check_request(grid, K, seed)
    values = np.zeros((K + 1, grid.n_steps + 1))
    values[0] = grid.nodes()
    scale = np.sqrt(grid.dt)
    for j in range(1, K + 1):
        draws = component_rng(seed, STREAM_BROWNIAN, j).standard_normal(grid.n_steps)
        values[j, 1:] = np.cumsum(scale * draws)
    logger.debug("Sampled Brownian path: K=%d, n_steps=%d, seed=%d", K, grid.n_steps, seed)
    return DrivingPath(grid=grid, values=values, seed=seed, kinds=_component_kinds(K))


def sample_ou(
    grid: TimeGrid,
    K: int,
    theta: float = DEFAULT_OU_THETA,
    sigma: float = DEFAULT_OU_SIGMA,
    seed: int = 0,
) -> DrivingPath:
    """
    Sample K independent Ornstein-Uhlenbeck drivers dX = -theta X dt + sigma dW.

    The exact discretization X_{n+1} = X_n exp(-theta dt) + s N(0, 1) with
    s^2 = sigma^2 (1 - exp(-2 theta dt)) / (2 theta) is used; theta = 0 gives
    s = sigma sqrt(dt). Every component starts at 0.

    Args:
        grid: Uniform time grid
        K: Number of martingale components
        theta: Mean-reversion rate, >= 0
        sigma: Noise amplitude, >= 0
        seed: Non-negative integer seed

    Returns:
        DrivingPath with OU components

    Raises:
        ValidationError: If theta or sigma is negative, or the request is invalid
    """
    _check_request(grid, K, seed)
    ParameterValidator.non_negative(theta, "theta")
    ParameterValidator.non_negative(sigma, "sigma")

    dt = grid.dt
    if theta > 0:
        decay = np.exp(-theta * dt)
        scale = sigma * np.sqrt(-np.expm1(-2.0 * theta * dt) / (2.0 * theta))
    else:
        decay = 1.0
        scale = sigma * np.sqrt(dt)

    values = np.zeros((K + 1, grid.n_steps + 1))
    values[0] = grid.nodes()
    for j in range(1, K + 1):
        draws = component_rng(seed, STREAM_OU, j).standard_normal(grid.n_steps)
        x = 0.0
        for n in range(grid.n_steps):
            x = x * decay + scale * draws[n]
            values[j, n + 1] = x
    logger.debug("Sampled OU path: K=%d, theta=%g, sigma=%g, seed=%d", K, theta, sigma, seed)
    return DrivingPath(grid=grid, values=values, seed=seed, kinds=_component_kinds(K))


def deterministic_path(grid: TimeGrid) -> DrivingPath:
    """The degenerate driver S_t = t (no martingale components)."""
    return sample_brownian(grid, 0, 0)


def sample_path(
    grid: TimeGrid,
    K: int,
    driver: DriverKind,
    seed: int,
    theta: Optional[float] = None,
    sigma: Optional[float] = None,
) -> DrivingPath:
    """Sample a driving path of the configured kind."""
    if driver is DriverKind.OU:
        return sample_ou(
            grid,
            K,
            DEFAULT_OU_THETA if theta is None else theta,
            DEFAULT_OU_SIGMA if sigma is None else sigma,
            seed,
        )
    return sample_brownian(grid, K, seed)


def refine(path: DrivingPath, factor: int, seed: int) -> DrivingPath:
    """
    Refine a path by Brownian-bridge interpolation between coarse nodes.

    Coarse node values are copied exactly; interior nodes of each coarse
    interval are drawn sequentially from the bridge conditioned on the
    previous fine node and the next coarse node.

    Args:
        path: Path to refine
        factor: Number of fine steps per coarse step, >= 2
        seed: Seed of the bridge draws

    Returns:
        DrivingPath on the grid with n_steps * factor steps

    Raises:
        ValidationError: If factor < 2 or the seed is negative
    """
    if factor < 2:
        raise ValidationError("Refinement factor must be at least 2")
    if seed < 0:
        raise ValidationError("Seed must be non-negative")

    coarse = path.values
    n_coarse = path.grid.n_steps
    fine_grid = path.grid.refined(factor)
    h = fine_grid.dt

    values = np.zeros((path.n_components, fine_grid.n_steps + 1))
    values[0] = fine_grid.nodes()
    for j in range(1, path.n_components):
        rng = component_rng(seed, STREAM_BRIDGE, j)
        fine = values[j]
        fine[::factor] = coarse[j]
        end = coarse[j, 1:]
        for m in range(1, factor):
            previous = fine[m - 1 :: factor][:n_coarse]
            remaining = (factor - m + 1) * h
            mean = previous + (end - previous) * (h / remaining)
            std = np.sqrt(h * (remaining - h) / remaining)
            fine[m::factor] = mean + std * rng.standard_normal(n_coarse)
    logger.debug("Refined path by factor %d to %d steps", factor, fine_grid.n_steps)
    return DrivingPath(grid=fine_grid, values=values, seed=path.seed, kinds=path.kinds)


def check_path(path: DrivingPath) -> None:
    """
    Verify the structural invariants of a path.

    Raises:
        ValidationError: If component 0 differs from the grid nodes, a
            martingale component does not start at 0, or kinds are inconsistent
    """
    grid = path.grid
    if path.values.shape != (len(path.kinds), grid.n_steps + 1):
        raise ValidationError("Path values do not match its grid and component count")
    if not np.array_equal(path.values[0], grid.nodes()):
        raise ValidationError("Component 0 must equal the time grid exactly")
    if path.n_noise and np.any(path.values[1:, 0] != 0.0):
        raise ValidationError("Martingale components must start at 0")
    if path.kinds != _component_kinds(path.n_noise):
        raise ValidationError("Only component 0 may be of finite variation")
    if not np.all(np.isfinite(path.values)):
        raise ValidationError("Path values must be finite")
