"""
Stochastic characteristics and grid transport of scalars and densities.

Particles follow dx_t = u(t, x_t) dt + sum_k xi_k(x_t) o dW_k; advected
scalars obey da + dx_t . grad a = 0 and densities dD + div(D dx_t) = 0.
Particles and grid fields are stepped with the same Heun scheme and the same
path increments, with u taken at node n for the predictor and at node n + 1
for the corrector.
"""

import logging
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .constants import DOMAIN_LENGTH, MAX_PARTICLES
from .fields import dealias_array, divergence_array, gradient_array, interpolate_array
from .models import DrivingPath, Grid2D, NoiseBasis, ParticleSet, ScalarField, VectorField2D
from .stratonovich import Coefficients, NonFiniteStateError, heun_step_split
from .validators import GridValidator, ValidationError

logger = logging.getLogger(__name__)

VelocitySeries = Union[VectorField2D, Sequence[VectorField2D]]


def _velocity_lookup(
    u_series: VelocitySeries, n0: int, n1: int, grid: Grid2D
) -> Callable[[int], np.ndarray]:
    """Map an absolute node index to the velocity array at that node."""
    if isinstance(u_series, VectorField2D):
        GridValidator.same_grid(u_series.grid, grid)
        steady = u_series.stack()
        return lambda n: steady
    if len(u_series) != n1 - n0 + 1:
        raise ValidationError(
            f"Velocity series has {len(u_series)} entries, expected {n1 - n0 + 1}"
        )
    arrays = [u.stack() for u in u_series]
    return lambda n: arrays[n - n0]


def _check_span(path: DrivingPath, basis: NoiseBasis, n0: int, n1: int) -> None:
    if path.n_noise != basis.K:
        raise ValidationError(f"Path has {path.n_noise} noise components, basis has {basis.K}")
    if not 0 <= n0 <= n1 <= path.grid.n_steps:
        raise ValidationError(f"Node range [{n0}, {n1}] is outside the path")


def _particle_step(
    positions: np.ndarray,
    u_now: np.ndarray,
    u_next: np.ndarray,
    basis: NoiseBasis,
    dS: np.ndarray,
) -> np.ndarray:
    grid = basis.grid

    def evaluator(u: np.ndarray) -> Callable[[np.ndarray], Coefficients]:
        stacked = np.concatenate([u[None], basis.xi])

        def evaluate(x: np.ndarray) -> Coefficients:
            values = np.swapaxes(interpolate_array(stacked, grid, x), -1, -2)
            return values[0], list(values[1:])

        return evaluate

    moved = heun_step_split(positions, evaluator(u_now), dS, evaluate_end=evaluator(u_next))
    return np.mod(moved, DOMAIN_LENGTH)


def advance_particles(
    particles: ParticleSet,
    u_series: VelocitySeries,
    basis: NoiseBasis,
    path: DrivingPath,
    n0: int,
    n1: int,
) -> ParticleSet:
    """
    Move particles along stochastic characteristics from node n0 to node n1.

    Args:
        particles: Starting particles
        u_series: Steady velocity, or velocities at nodes n0..n1
        basis: Noise basis
        path: Driving path
        n0: First node
        n1: Last node

    Returns:
        ParticleSet at node n1, positions folded into [0, 2*pi)^2

    Raises:
        ValidationError: If the series or node range does not match the path
        NonFiniteStateError: If positions become non-finite
    """
    return track_particles(particles, u_series, basis, path, n0, n1)[-1]


def track_particles(
    particles: ParticleSet,
    u_series: VelocitySeries,
    basis: NoiseBasis,
    path: DrivingPath,
    n0: int = 0,
    n1: Optional[int] = None,
) -> list[ParticleSet]:
    """Particle sets at every node n0..n1 (inclusive)."""
    n1 = path.grid.n_steps if n1 is None else n1
    _check_span(path, basis, n0, n1)
    if particles.count > MAX_PARTICLES:
        raise ValidationError(f"Particle count must be at most {MAX_PARTICLES}")
    velocity = _velocity_lookup(u_series, n0, n1, basis.grid)
    series = [particles]
    positions = particles.positions
    for n in range(n0, n1):
        try:
            positions = _particle_step(
                positions, velocity(n), velocity(n + 1), basis, path.increment(n)
            )
        except NonFiniteStateError as e:
            logger.error("Particle tracking aborted at step %d", n)
            raise e.at_step(n) from e
        series.append(ParticleSet(positions=positions, initial=particles.initial))
    return series


def _integrate_field(
    field: ScalarField,
    tendency: Callable[[np.ndarray, np.ndarray], np.ndarray],
    u_series: VelocitySeries,
    basis: NoiseBasis,
    path: DrivingPath,
) -> list[ScalarField]:
    grid = field.grid
    GridValidator.same_grid(grid, basis.grid)
    n_steps = path.grid.n_steps
    _check_span(path, basis, 0, n_steps)
    velocity = _velocity_lookup(u_series, 0, n_steps, grid)

    def evaluator(u: np.ndarray) -> Callable[[np.ndarray], Coefficients]:
        def evaluate(a: np.ndarray) -> Coefficients:
            channels = list(tendency(a, basis.xi)) if basis.K else []
            return tendency(a, u), channels

        return evaluate

    series = [field]
    data = field.data
    for n in range(n_steps):
        try:
            data = heun_step_split(
                data,
                evaluator(velocity(n)),
                path.increment(n),
                evaluate_end=evaluator(velocity(n + 1)),
            )
        except NonFiniteStateError as e:
            logger.error("Grid transport aborted at step %d", n)
            raise e.at_step(n) from e
        series.append(ScalarField(grid, data))
    return series


def advect_scalar(
    a: ScalarField, u_series: VelocitySeries, basis: NoiseBasis, path: DrivingPath
) -> list[ScalarField]:
    """
    Transport a scalar: da = -(u dt + sum_k xi_k o dW_k) . grad a.

    Args:
        a: Initial scalar field
        u_series: Steady velocity, or velocities at every path node
        basis: Noise basis
        path: Driving path

    Returns:
        Scalar fields at every path node

    Raises:
        NonFiniteStateError: Tagged with the failing step index
    """
    grid = a.grid

    def tendency(data: np.ndarray, velocity: np.ndarray) -> np.ndarray:
        product = np.einsum("...ixy,ixy->...xy", velocity, gradient_array(data, grid))
        return -dealias_array(product, grid)

    return _integrate_field(a, tendency, u_series, basis, path)


def advect_density(
    D: ScalarField, u_series: VelocitySeries, basis: NoiseBasis, path: DrivingPath
) -> list[ScalarField]:
    """
    Transport a density in flux form: dD = -div(D (u dt + sum_k xi_k o dW_k)).

    The discrete divergence has no zero mode, so int D is conserved to
    rounding.
    """
    grid = D.grid

    def tendency(data: np.ndarray, velocity: np.ndarray) -> np.ndarray:
        return -divergence_array(dealias_array(data * velocity, grid), grid)

    return _integrate_field(D, tendency, u_series, basis, path)


def kiw_residual(
    a_series: Sequence[ScalarField], particles_series: Sequence[ParticleSet]
) -> np.ndarray:
    """
    Invariance residual r_n = max_p |a_n(x_n^p) - a_0(x_0^p)|.

    Args:
        a_series: Advected scalar at every node
        particles_series: Particles at the same nodes

    Returns:
        Array of residuals, one per node

    Raises:
        ValidationError: If the series lengths differ
    """
    if len(a_series) != len(particles_series):
        raise ValidationError("Scalar and particle series must have the same length")
    first = a_series[0]
    reference = interpolate_array(first.data, first.grid, particles_series[0].positions)
    residuals = np.empty(len(a_series))
    for n, (a, particles) in enumerate(zip(a_series, particles_series)):
        values = interpolate_array(a.data, a.grid, particles.positions)
        residuals[n] = float(np.max(np.abs(values - reference)))
    return residuals
