"""
Stochastic rotating shallow water equations in curl (vector-invariant) form.

    eps du - dx x (eps zeta + f) z + sum_k grad(xi_k . (eps u + R)) o dW_k
        = -grad(eps |u|^2 / 2 + k) dt
    d eta + div(eta dx) = 0

with dx = u dt + sum_k xi_k o dW_k and k = (eta - b) / (eps F). R holds the
periodic part of the rotation potential (curl R = f - mean f); the uniform
rotation enters through eps zeta + f only.
"""

import logging
from typing import Callable, Optional, Union

import numpy as np

from .constants import CURL_R_TOLERANCE
from .fields import (
    curl_array,
    dealias_array,
    divergence_array,
    gradient_array,
    velocity_from_vorticity_array,
)
from .models import (
    DiagnosticsRecord,
    DrivingPath,
    Grid2D,
    NoiseBasis,
    RswParams,
    RswState,
    ScalarField,
    VectorField2D,
)
from .noise_basis import empty_basis
from .stratonovich import Coefficients, NonFiniteStateError, heun_step_split
from .validators import ParameterValidator, ValidationError

logger = logging.getLogger(__name__)

FieldSpec = Union[float, np.ndarray]


class NonPositiveDepthError(NonFiniteStateError):
    """The total depth eta reached zero or became negative."""


def _as_field(grid: Grid2D, spec: FieldSpec, pattern: Optional[np.ndarray] = None) -> np.ndarray:
    if np.ndim(spec) == 0:
        base = np.ones((grid.nx, grid.ny)) if pattern is None else pattern
        return float(spec) * base
    data = np.asarray(spec, dtype=float)
    if data.shape != (grid.nx, grid.ny):
        raise ValidationError(f"Field shape {data.shape} does not match grid {grid.nx}x{grid.ny}")
    return data


def make_rsw_params(
    grid: Grid2D,
    epsilon: float,
    froude: float,
    coriolis: FieldSpec = 1.0,
    topography: FieldSpec = 0.0,
) -> RswParams:
    """
    Build shallow-water parameters.

    Args:
        grid: Spatial grid
        epsilon: Rossby-type parameter, > 0
        froude: Froude-type parameter, > 0
        coriolis: Constant Coriolis parameter or a full (nx, ny) field
        topography: Amplitude A of b = A cos x cos y, or a full (nx, ny) field

    Returns:
        RswParams with the periodic rotation potential R

    Raises:
        ValidationError: If epsilon or froude is not positive
    """
    if epsilon == 0:
        raise ValidationError("epsilon = 0 is a singular limit and is not supported")
    ParameterValidator.positive(epsilon, "epsilon")
    ParameterValidator.positive(froude, "froude")
    X, Y = grid.mesh()
    f = _as_field(grid, coriolis)
    b = _as_field(grid, topography, np.cos(X) * np.cos(Y))
    R = velocity_from_vorticity_array(f, grid)
    return RswParams(
        epsilon=float(epsilon),
        froude=float(froude),
        f=ScalarField(grid, f),
        b=ScalarField(grid, b),
        R=VectorField2D.from_array(grid, R),
    )


def rotation_potential_error(params: RswParams) -> float:
    """RMS of curl R + mean(f) - f."""
    grid = params.f.grid
    residual = curl_array(params.R.stack(), grid) + params.f_mean - params.f.data
    return float(np.sqrt(np.mean(residual**2)))


def check_params(params: RswParams) -> None:
    """
    Raises:
        ValidationError: If curl R does not reproduce f - mean(f)
    """
    error = rotation_potential_error(params)
    if error > CURL_R_TOLERANCE:
        raise ValidationError(f"curl R differs from f - mean(f) by {error:.3e} RMS")


def _check_depth(eta: np.ndarray, stage: str) -> None:
    if np.min(eta) <= 0.0:
        raise NonPositiveDepthError("Total depth must stay positive", stage=stage)


def rsw_coefficients(state: np.ndarray, params: RswParams, basis: NoiseBasis) -> Coefficients:
    """
    Drift and per-channel tendencies of the stacked state (u, v, eta).
    """
    grid = basis.grid
    eps = params.epsilon
    u = state[:2]
    eta = state[2]
    _check_depth(eta, "evaluation")

    q = eps * curl_array(u, grid) + params.f.data
    k = (eta - params.b.data) / (eps * params.froude)
    bernoulli = dealias_array(0.5 * eps * np.sum(u * u, axis=0), grid) + k
    vortex_force = dealias_array(np.stack([u[1] * q, -u[0] * q]), grid)

    drift = np.empty_like(state)
    drift[:2] = (vortex_force - gradient_array(bernoulli, grid)) / eps
    drift[2] = -divergence_array(dealias_array(eta * u, grid), grid)
    if basis.K == 0:
        return drift, []

    xi = basis.xi
    momentum = eps * u + params.R.stack()
    channel_force = dealias_array(np.stack([xi[:, 1] * q, -xi[:, 0] * q], axis=1), grid)
    potential = dealias_array(np.einsum("kixy,ixy->kxy", xi, momentum), grid)
    channels = np.empty((basis.K,) + state.shape)
    channels[:, :2] = (channel_force - gradient_array(potential, grid)) / eps
    channels[:, 2] = -divergence_array(dealias_array(eta * xi, grid), grid)
    return drift, list(channels)


def advective_tendency(state: RswState, params: RswParams) -> np.ndarray:
    """
    Deterministic tendency in advective form, for comparison with the curl form.

    du/dt = -(u . grad) u + f (v, -u) / eps - grad k / eps,
    d eta/dt = -div(eta u).
    """
    grid = state.eta.grid
    eps = params.epsilon
    u = state.u.stack()
    eta = state.eta.data
    u_grad = gradient_array(u, grid)
    advection = dealias_array(np.einsum("jxy,ijxy->ixy", u, u_grad), grid)
    coriolis = dealias_array(np.stack([params.f.data * u[1], -params.f.data * u[0]]), grid)
    k = (eta - params.b.data) / (eps * params.froude)
    tendency = np.empty((3, grid.nx, grid.ny))
    tendency[:2] = -advection + (coriolis - gradient_array(k, grid)) / eps
    tendency[2] = -divergence_array(dealias_array(eta * u, grid), grid)
    return tendency


def _stack(state: RswState) -> np.ndarray:
    return np.concatenate([state.u.stack(), state.eta.data[None]])


def _unstack(grid: Grid2D, time: float, data: np.ndarray) -> RswState:
    return RswState(time, VectorField2D.from_array(grid, data[:2]), ScalarField(grid, data[2]))


def step_rsw(state: RswState, params: RswParams, basis: NoiseBasis, dS: np.ndarray) -> RswState:
    """
    One stochastic Heun step of the shallow-water system.

    Args:
        state: Current state
        params: Physical parameters
        basis: Noise basis with K modes
        dS: Increments (dt, dW_1 .. dW_K)

    Returns:
        New state at time + dt

    Raises:
        ValidationError: If dS does not have K + 1 entries
        NonPositiveDepthError: If eta <= 0 anywhere
        NonFiniteStateError: On NaN or infinite values
    """
    dS = np.asarray(dS, dtype=float)
    if dS.shape != (basis.K + 1,):
        raise ValidationError(f"Expected {basis.K + 1} increments, got {dS.size}")
    grid = state.eta.grid
    data = heun_step_split(_stack(state), lambda x: rsw_coefficients(x, params, basis), dS)
    _check_depth(data[2], "result")
    return _unstack(grid, state.time + dS[0], data)


def step_rsw_deterministic(state: RswState, params: RswParams, dt: float) -> RswState:
    """Heun step of the deterministic rotating shallow-water equations."""
    return step_rsw(state, params, empty_basis(state.eta.grid), np.array([dt]))


def potential_vorticity(state: RswState, params: RswParams) -> ScalarField:
    """
    Potential vorticity q = (eps curl u + f) / eta.

    Raises:
        NonPositiveDepthError: If eta <= 0 anywhere
    """
    grid = state.eta.grid
    _check_depth(state.eta.data, "diagnostics")
    zeta = curl_array(state.u.stack(), grid)
    return ScalarField(grid, (params.epsilon * zeta + params.f.data) / state.eta.data)


def rsw_diagnostics(state: RswState, params: RswParams, step: int = 0) -> DiagnosticsRecord:
    """
    Mass, energy, PV extrema and minimum depth.

    Energy is int (eps/2 eta |u|^2 + (eta - b)^2 / (2 eps F)).
    """
    grid = state.eta.grid
    area = grid.cell_area
    eps = params.epsilon
    eta = state.eta.data
    u = state.u.stack()
    pv = potential_vorticity(state, params).data
    kinetic = 0.5 * eps * eta * np.sum(u * u, axis=0)
    potential = (eta - params.b.data) ** 2 / (2.0 * eps * params.froude)
    metrics = {
        "mass": float(np.sum(eta) * area),
        "energy": float(np.sum(kinetic + potential) * area),
        "pv_min": float(np.min(pv)),
        "pv_max": float(np.max(pv)),
        "eta_min": float(np.min(eta)),
    }
    return DiagnosticsRecord(step=step, time=state.time, metrics=metrics)


def integrate_rsw(
    state: RswState,
    params: RswParams,
    basis: NoiseBasis,
    path: DrivingPath,
    diagnostics_every: int = 1,
    snapshot_every: int = 0,
    on_record: Optional[Callable[[DiagnosticsRecord], None]] = None,
    on_snapshot: Optional[Callable[[int, RswState], None]] = None,
    keep_states: bool = False,
) -> tuple[RswState, list[DiagnosticsRecord], list[RswState]]:
    """
    Run the shallow-water solver over a whole driving path.

    Returns:
        Final state, diagnostics records, and every intermediate state when
        keep_states is set (otherwise an empty list)

    Raises:
        ValidationError: If the path and the basis disagree on K
        NonFiniteStateError: Tagged with the failing step index
    """
    if path.n_noise != basis.K:
        raise ValidationError(f"Path has {path.n_noise} noise components, basis has {basis.K}")
    check_params(params)
    records: list[DiagnosticsRecord] = []
    states: list[RswState] = [state] if keep_states else []

    def emit(n: int, current: RswState) -> None:
        record = rsw_diagnostics(current, params, step=n)
        records.append(record)
        logger.debug("step %d time %.6g mass %.15g", n, current.time, record.metrics["mass"])
        if on_record is not None:
            on_record(record)

    emit(0, state)
    if snapshot_every and on_snapshot is not None:
        on_snapshot(0, state)
    n_steps = path.grid.n_steps
    for n in range(n_steps):
        try:
            state = step_rsw(state, params, basis, path.increment(n))
        except NonFiniteStateError as e:
            logger.error("Shallow-water solver aborted at step %d (last valid step %d)", n + 1, n)
            raise e.at_step(n) from e
        if keep_states:
            states.append(state)
        if (n + 1) % diagnostics_every == 0 or n + 1 == n_steps:
            emit(n + 1, state)
        if snapshot_every and on_snapshot is not None and (n + 1) % snapshot_every == 0:
            on_snapshot(n + 1, state)
    return state, records, states
