"""
Built-in invariant suite at desk scale.

Each check runs a small experiment and compares one number against a
threshold. The suite backs the `check` subcommand.
"""

import logging
from typing import Callable

import numpy as np

from .advection import advect_scalar, kiw_residual, track_particles
from .constants import DIVERGENCE_TOLERANCE, InitialKind
from .fields import (
    divergence_array,
    resample_array,
    shift_array,
    velocity_from_vorticity_array,
)
from .initial_conditions import (
    initial_rsw_state,
    initial_vorticity,
    random_particles,
    random_smooth_field,
    taylor_green_velocity,
    taylor_green_vorticity,
)
from .models import (
    CheckResult,
    DrivingPath,
    EulerState,
    Grid2D,
    Integrand,
    NoiseBasis,
    ParticleSet,
    RswParams,
    RswState,
    ScalarField,
    TimeGrid,
    VectorField2D,
)
from .noise_basis import empty_basis, make_constant_basis, make_fourier_basis
from .paths import deterministic_path, refine, sample_brownian
from .salt_euler import (
    channel_tendencies,
    integrate_euler,
    pressure_components,
    step_vorticity,
    step_vorticity_deterministic,
    state_vorticity,
)
from .salt_rsw import integrate_rsw, make_rsw_params, potential_vorticity
from .stratonovich import (
    covariation,
    fit_order,
    fundamental_lemma_check,
    geometric_sde_errors,
    ito_sum,
    strat_integral,
)

logger = logging.getLogger(__name__)

SUITE_GRID = Grid2D(32, 32)
SUITE_SEEDS = 8


def _below(name: str, value: float, threshold: float) -> CheckResult:
    return CheckResult(name, float(value), threshold, bool(value < threshold))


def _above(name: str, value: float, threshold: float) -> CheckResult:
    return CheckResult(name, float(value), threshold, bool(value > threshold))


def check_deterministic_reduction() -> list[CheckResult]:
    """Taylor-Green is steady with K = 0, and both steppers agree bit for bit."""
    grid = SUITE_GRID
    omega0 = taylor_green_vorticity(grid)
    path = deterministic_path(TimeGrid(0.0, 0.1, 100))
    final, _ = integrate_euler(EulerState(0.0, omega=omega0), empty_basis(grid), path)
    drift = np.max(np.abs(state_vorticity(final) - omega0.data))

    state = EulerState(0.0, omega=random_smooth_field(grid, 7, kmax=4))
    stochastic = step_vorticity(state, empty_basis(grid), np.array([1e-3]))
    deterministic = step_vorticity_deterministic(state, 1e-3)
    mismatch = np.max(np.abs(state_vorticity(stochastic) - state_vorticity(deterministic)))
    return [
        _below("taylor_green_steady", drift, 1e-6),
        CheckResult("deterministic_bit_identity", float(mismatch), 0.0, bool(mismatch == 0.0)),
    ]


def check_stratonovich_identities() -> list[CheckResult]:
    """Discrete chain rule and the Ito-Stratonovich bridge hold to rounding."""
    chain = 0.0
    bridge = 0.0
    for seed in range(SUITE_SEEDS):
        path = sample_brownian(TimeGrid(0.0, 1.0, 1000), 1, seed)
        W = path.values[1]
        strat = strat_integral(Integrand.from_series(W), path, 1, 0.0, 1.0)
        ito = ito_sum(Integrand.from_series(W), path, 1, 0.0, 1.0)
        chain = max(chain, abs(float(strat) - 0.5 * W[-1] ** 2))
        half_covariation = 0.5 * covariation(W, W, path.grid, 0.0, 1.0)
        bridge = max(bridge, abs(float(strat) - float(ito) - half_covariation))
    return [
        _below("stratonovich_chain_rule", chain, 1e-10),
        _below("ito_stratonovich_bridge", bridge, 1e-10),
    ]


def check_gbm_order() -> list[CheckResult]:
    """Strong order of Heun on geometric Brownian motion."""
    errors = []
    steps = np.empty(0)
    for seed in range(4 * SUITE_SEEDS):
        path = sample_brownian(TimeGrid(0.0, 1.0, 64), 1, seed)
        steps, level_errors = geometric_sde_errors(path, 1.0, 0.5, 1.0, 5, seed)
        errors.append(level_errors)
    rms = np.sqrt(np.mean(np.square(errors), axis=0))
    return [_above("gbm_strong_order", fit_order(steps, rms), 0.9)]


def check_fundamental_lemma() -> list[CheckResult]:
    """Smooth ramps approach the indicator: the ensemble RMS error shrinks."""
    sequences = []
    for seed in range(SUITE_SEEDS):
        path = sample_brownian(TimeGrid(0.0, 1.0, 10000), 1, seed)
        sequences.append(fundamental_lemma_check(path.values[1], path, 1, 0.25, 0.75, 8))
    rms = np.sqrt(np.mean(np.square(sequences), axis=0))
    return [_above("lemma_rms_reduction", rms[0] / rms[-1], 4.0)]


def check_channel_separation() -> list[CheckResult]:
    """Every projected channel is divergence free; unprojected channels are not."""
    grid = SUITE_GRID
    basis = make_fourier_basis(grid, 4)
    omega = initial_vorticity(grid, InitialKind.RANDOM, seed=3)
    u = velocity_from_vorticity_array(omega.data, grid)
    drift, channels = channel_tendencies(u, basis)
    projected = max(
        np.sqrt(np.mean(divergence_array(c, grid) ** 2)) for c in [drift, *channels]
    )
    _, raw = channel_tendencies(u, basis, stochastic_pressure=False)
    unprojected = max(np.sqrt(np.mean(divergence_array(c, grid) ** 2)) for c in raw)
    return [
        _below("projected_channel_divergence", projected, DIVERGENCE_TOLERANCE),
        _above("unprojected_channel_divergence", unprojected, 1e-3),
    ]


def check_pressure() -> list[CheckResult]:
    """Taylor-Green pressure matches (cos 2x + cos 2y)/4; uniform noise has no pressure."""
    grid = SUITE_GRID
    X, Y = grid.mesh()
    expected = 0.25 * (np.cos(2 * X) + np.cos(2 * Y))
    u = taylor_green_velocity(grid)
    p0, _ = pressure_components(u, empty_basis(grid))
    relative = np.linalg.norm(p0.data - expected) / np.linalg.norm(expected)
    _, pk = pressure_components(u, make_constant_basis(grid, [(0.3, -0.2)]))
    return [
        _below("taylor_green_pressure", relative, 1e-6),
        _below("uniform_noise_pressure", np.max(np.abs(pk[0].data)), 1e-12),
    ]


def check_translation() -> list[CheckResult]:
    """Uniform noise translates the deterministic solution by c W_T."""
    grid = SUITE_GRID
    c = 0.1
    basis = make_constant_basis(grid, [(c, 0.0)])
    omega0 = random_smooth_field(grid, 11, kmax=3)
    time_grid = TimeGrid(0.0, 0.25, 250)
    errors = []
    reference, _ = integrate_euler(
        EulerState(0.0, omega=omega0), empty_basis(grid), deterministic_path(time_grid)
    )
    for seed in range(SUITE_SEEDS):
        path = sample_brownian(time_grid, 1, seed)
        final, _ = integrate_euler(EulerState(0.0, omega=omega0), basis, path)
        shifted = shift_array(state_vorticity(reference), grid, c * path.values[1, -1], 0.0)
        errors.append(np.max(np.abs(state_vorticity(final) - shifted)))
    return [_below("uniform_noise_translation", float(np.median(errors)), 1e-4)]


def check_kiw_invariance() -> list[CheckResult]:
    """Advected scalars stay constant along stochastic characteristics."""
    grid = SUITE_GRID
    velocity = VectorField2D.from_array(
        grid, velocity_from_vorticity_array(taylor_green_vorticity(grid, 0.5).data, grid)
    )
    scalar = random_smooth_field(grid, 5, kmax=3, component=1)
    basis = make_fourier_basis(grid, 2)
    particles = random_particles(50, 5)
    path = sample_brownian(TimeGrid(0.0, 0.1, 100), 2, 0)
    scalars = advect_scalar(scalar, velocity, basis, path)
    tracks = track_particles(particles, velocity, basis, path)
    residual = kiw_residual([scalars[0], scalars[-1]], [tracks[0], tracks[-1]])[-1]
    return [_below("kiw_residual", residual, 1e-3)]


def check_rsw_mass() -> list[CheckResult]:
    """Total depth is conserved by the stochastic shallow-water solver."""
    grid = SUITE_GRID
    params = make_rsw_params(grid, 0.1, 1.0, 1.0, 0.05)
    state = initial_rsw_state(params, InitialKind.BALANCED, amplitude=0.01, seed=2)
    basis = make_fourier_basis(grid, 4, c=0.05)
    path = sample_brownian(TimeGrid(0.0, 0.1, 200), 4, 0)
    _, records, _ = integrate_rsw(state, params, basis, path, diagnostics_every=200)
    first = records[0].metrics["mass"]
    drift = abs(records[-1].metrics["mass"] - first) / first
    return [_below("rsw_mass_drift", drift, 1e-10)]


def _pv_residual(
    params: RswParams, state: RswState, basis: NoiseBasis, path: DrivingPath, particles: ParticleSet
) -> float:
    _, _, states = integrate_rsw(
        state, params, basis, path, diagnostics_every=path.grid.n_steps, keep_states=True
    )
    tracks = track_particles(particles, [s.u for s in states], basis, path)
    pv = [potential_vorticity(states[0], params), potential_vorticity(states[-1], params)]
    return float(kiw_residual(pv, [tracks[0], tracks[-1]])[-1])


def check_rsw_pv() -> list[CheckResult]:
    """
    Potential vorticity is carried by the particles, and the residual shrinks
    when dt is halved and the grid doubled on the bridge-refined path.
    """
    coarse = SUITE_GRID
    fine = coarse.refined()
    particles = random_particles(50, 3)
    seeds = SUITE_SEEDS // 2
    residuals = np.empty((seeds, 2))
    for seed in range(seeds):
        params = make_rsw_params(coarse, 0.1, 1.0, 1.0, 0.05)
        state = initial_rsw_state(params, InitialKind.BALANCED, amplitude=0.01, seed=seed)
        path = sample_brownian(TimeGrid(0.0, 0.1, 100), 4, seed)
        residuals[seed, 0] = _pv_residual(
            params, state, make_fourier_basis(coarse, 4, c=0.05), path, particles
        )
        fine_state = RswState(
            0.0,
            VectorField2D.from_array(fine, resample_array(state.u.stack(), coarse, fine)),
            ScalarField(fine, resample_array(state.eta.data, coarse, fine)),
        )
        residuals[seed, 1] = _pv_residual(
            make_rsw_params(fine, 0.1, 1.0, 1.0, 0.05),
            fine_state,
            make_fourier_basis(fine, 4, c=0.05),
            refine(path, 2, seed + 100),
            particles,
        )
    median = np.median(residuals, axis=0)
    return [
        _below("rsw_pv_residual", median[0], 1e-3),
        _above("rsw_pv_refinement_ratio", median[0] / median[1], 1.5),
    ]


SUITE: tuple[Callable[[], list[CheckResult]], ...] = (
    check_deterministic_reduction,
    check_stratonovich_identities,
    check_gbm_order,
    check_fundamental_lemma,
    check_channel_separation,
    check_pressure,
    check_translation,
    check_kiw_invariance,
    check_rsw_mass,
    check_rsw_pv,
)


def run_invariant_suite() -> list[CheckResult]:
    """Run every check and collect the results."""
    results: list[CheckResult] = []
    for check in SUITE:
        logger.info("Running %s", check.__name__)
        for result in check():
            logger.log(
                logging.INFO if result.passed else logging.WARNING,
                "%s: value %.3e, threshold %.3e",
                result.name,
                result.value,
                result.threshold,
            )
            results.append(result)
    return results
