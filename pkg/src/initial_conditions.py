"""
Initial states for the solvers and transport tests.
"""

import numpy as np

from .constants import DOMAIN_LENGTH, STREAM_INITIAL, STREAM_PARTICLES, InitialKind
from .fields import ddx, ddy, spectral_grid, to_physical
from .models import Grid2D, ParticleSet, RswParams, RswState, ScalarField, VectorField2D
from .paths import component_rng
from .validators import ParameterValidator, ValidationError


def taylor_green_vorticity(grid: Grid2D, amplitude: float = 1.0) -> ScalarField:
    """Steady Euler vorticity omega = 2 A sin x sin y."""
    X, Y = grid.mesh()
    return ScalarField(grid, 2.0 * amplitude * np.sin(X) * np.sin(Y))


def taylor_green_velocity(grid: Grid2D, amplitude: float = 1.0) -> VectorField2D:
    """Velocity A (sin x cos y, -cos x sin y), whose curl is taylor_green_vorticity."""
    X, Y = grid.mesh()
    u = amplitude * np.sin(X) * np.cos(Y)
    v = -amplitude * np.cos(X) * np.sin(Y)
    return VectorField2D.from_array(grid, np.stack([u, v]))


def random_smooth_field(
    grid: Grid2D, seed: int, kmax: int = 4, amplitude: float = 1.0, component: int = 0
) -> ScalarField:
    """
    Random zero-mean field band-limited to 0 < |k| <= kmax.

    Fourier coefficients are complex normals damped by 1 / (1 + |k|^2); the
    result is scaled to RMS equal to amplitude.

    Args:
        grid: Spatial grid
        seed: Non-negative seed
        kmax: Wavenumber cutoff, below the grid Nyquist number
        amplitude: Target RMS value
        component: Stream index, so one seed can give several independent fields
    """
    ParameterValidator.at_least(kmax, 1, "kmax")
    if kmax >= min(grid.nx, grid.ny) // 2:
        raise ValidationError("kmax must be below the grid Nyquist wavenumber")
    sg = spectral_grid(grid)
    rng = component_rng(seed, STREAM_INITIAL, component)
    shape = sg.k2.shape
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    band = (sg.k2 > 0) & (sg.k2 <= kmax * kmax)
    data = to_physical(np.where(band, coeffs / (1.0 + sg.k2), 0.0), grid)
    scale = np.sqrt(np.mean(data**2))
    return ScalarField(grid, amplitude * data / scale)


def initial_vorticity(
    grid: Grid2D, kind: InitialKind, amplitude: float = 1.0, kmax: int = 4, seed: int = 0
) -> ScalarField:
    """
    Named initial vorticity.

    Raises:
        ValidationError: If the kind has no incompressible meaning
    """
    if kind is InitialKind.TAYLOR_GREEN:
        return taylor_green_vorticity(grid, amplitude)
    if kind is InitialKind.RANDOM:
        return random_smooth_field(grid, seed, kmax, amplitude)
    if kind in (InitialKind.ZERO, InitialKind.REST):
        return ScalarField(grid, np.zeros((grid.nx, grid.ny)))
    raise ValidationError(f"Initial condition {kind.value} is not available for Euler runs")


def rest_state(grid: Grid2D, depth: float = 1.0) -> RswState:
    """Fluid at rest with uniform total depth."""
    ParameterValidator.positive(depth, "depth")
    velocity = VectorField2D.from_array(grid, np.zeros((2, grid.nx, grid.ny)))
    return RswState(0.0, velocity, ScalarField(grid, np.full((grid.nx, grid.ny), depth)))


def balanced_state(
    params: RswParams,
    depth: float = 1.0,
    amplitude: float = 0.01,
    kmax: int = 3,
    seed: int = 0,
) -> RswState:
    """
    Geostrophically balanced state over the topography.

    The depth perturbation is a random smooth field; the velocity satisfies
    f u_perp = -grad k with k = (eta - b) / (epsilon F), using mean(f).

    Raises:
        ValidationError: If mean(f) is zero or the depth is not positive
    """
    grid = params.f.grid
    f0 = params.f_mean
    if f0 == 0.0:
        raise ValidationError("Balanced states need a non-zero mean Coriolis parameter")
    perturbation = random_smooth_field(grid, seed, kmax, amplitude)
    eta = depth + params.b.data + perturbation.data
    if np.min(eta) <= 0.0:
        raise ValidationError("Balanced state depth must stay positive")
    k = (eta - params.b.data) / (params.epsilon * params.froude)
    u = np.stack([-ddy(k, grid), ddx(k, grid)]) / f0
    return RswState(0.0, VectorField2D.from_array(grid, u), ScalarField(grid, eta))


def initial_rsw_state(
    params: RswParams,
    kind: InitialKind,
    depth: float = 1.0,
    amplitude: float = 0.01,
    kmax: int = 3,
    seed: int = 0,
) -> RswState:
    """Named shallow-water initial state."""
    grid = params.f.grid
    if kind is InitialKind.REST:
        state = rest_state(grid, depth)
        return RswState(0.0, state.u, ScalarField(grid, state.eta.data + params.b.data))
    if kind is InitialKind.BALANCED:
        return balanced_state(params, depth, amplitude, kmax, seed)
    raise ValidationError(
        f"Initial condition {kind.value} is not available for shallow-water runs"
    )


def random_particles(count: int, seed: int) -> ParticleSet:
    """Uniformly distributed particles on the torus."""
    ParameterValidator.at_least(count, 1, "Particle count")
    rng = component_rng(seed, STREAM_PARTICLES, 0)
    positions = rng.uniform(0.0, DOMAIN_LENGTH, size=(count, 2))
    return ParticleSet(positions=positions, initial=positions.copy())
