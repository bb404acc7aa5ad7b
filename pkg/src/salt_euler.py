"""
Incompressible SALT Euler equations on the periodic domain.

Vorticity form:  d omega + (u dt + sum_k xi_k o dW_k) . grad omega = 0.
Velocity form:   du + (dx . grad) u + sum_j u_j grad (dx)_j + grad dp = 0,
with dx = u dt + sum_k xi_k o dW_k. Incompressibility is enforced by Leray
projection of the dt tendency and of every dW_k tendency separately; the
pressure dp = P0 dt + sum_k Pk o dW_k is recovered diagnostically.
"""

import logging
from typing import Callable, Optional

import numpy as np

from .constants import CFL_LIMIT
from .fields import (
    curl_array,
    dealias_array,
    divergence_array,
    gradient_array,
    inverse_laplacian_array,
    leray_array,
    velocity_from_vorticity_array,
)
from .models import (
    DiagnosticsRecord,
    DrivingPath,
    EulerState,
    Grid2D,
    NoiseBasis,
    ScalarField,
    VectorField2D,
)
from .noise_basis import empty_basis
from .stratonovich import Coefficients, NonFiniteStateError, heun_step_split
from .validators import ValidationError

logger = logging.getLogger(__name__)


def _vorticity_tendency(velocity: np.ndarray, omega_grad: np.ndarray, grid: Grid2D) -> np.ndarray:
    """-(v . grad omega), dealiased, zero mode removed; velocity may be stacked."""
    product = np.einsum("...ixy,ixy->...xy", velocity, omega_grad)
    return -dealias_array(product, grid, keep_mean=False)


def vorticity_coefficients(omega: np.ndarray, basis: NoiseBasis) -> Coefficients:
    """Drift and per-channel tendencies of the vorticity equation."""
    grid = basis.grid
    u = velocity_from_vorticity_array(omega, grid)
    omega_grad = gradient_array(omega, grid)
    drift = _vorticity_tendency(u, omega_grad, grid)
    if basis.K == 0:
        return drift, []
    channels = _vorticity_tendency(basis.xi, omega_grad, grid)
    return drift, list(channels)


def _check_channels(basis: NoiseBasis, dS: np.ndarray) -> np.ndarray:
    dS = np.asarray(dS, dtype=float)
    if dS.shape != (basis.K + 1,):
        raise ValidationError(f"Expected {basis.K + 1} increments, got {dS.size}")
    return dS


def step_vorticity(state: EulerState, basis: NoiseBasis, dS: np.ndarray) -> EulerState:
    """
    One stochastic Heun step of the vorticity form.

    The velocity is recomputed from the vorticity at the predictor and the
    corrector stage.

    Args:
        state: Vorticity-form state
        basis: Noise basis with K modes
        dS: Increments (dt, dW_1 .. dW_K)

    Returns:
        New state at time + dt

    Raises:
        ValidationError: If dS does not have K + 1 entries or the state has no vorticity
        NonFiniteStateError: On NaN or infinite values
    """
    if state.omega is None:
        raise ValidationError("Vorticity step needs a vorticity-form state")
    dS = _check_channels(basis, dS)
    grid = state.omega.grid
    omega = heun_step_split(state.omega.data, lambda w: vorticity_coefficients(w, basis), dS)
    return EulerState(time=state.time + dS[0], omega=ScalarField(grid, omega))


def step_vorticity_deterministic(state: EulerState, dt: float) -> EulerState:
    """Classical Heun step of 2D Euler (driver S_t = t)."""
    if state.omega is None:
        raise ValidationError("Vorticity step needs a vorticity-form state")
    grid = state.omega.grid
    return step_vorticity(state, empty_basis(grid), np.array([dt]))


def channel_tendencies(
    u: np.ndarray, basis: NoiseBasis, stochastic_pressure: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """
    Projected dt-channel and dW_k-channel tendencies of the velocity form.

    A = -P[(u . grad) u] and B_k = -P[(xi_k . grad) u + sum_j u_j grad xi_k^j],
    with P the Leray projector. With stochastic_pressure=False the B_k are
    left unprojected, which corresponds to a pressure with P0 only.

    Args:
        u: Velocity array (2, nx, ny)
        basis: Noise basis
        stochastic_pressure: Whether to project every noise channel

    Returns:
        (A of shape (2, nx, ny), B of shape (K, 2, nx, ny))
    """
    grid = basis.grid
    u_grad = gradient_array(u, grid)
    advection = np.einsum("jxy,ijxy->ixy", u, u_grad)
    drift = leray_array(-dealias_array(advection, grid), grid)
    if basis.K == 0:
        return drift, np.zeros((0, 2, grid.nx, grid.ny))
    transport = np.einsum("kjxy,ijxy->kixy", basis.xi, u_grad)
    stretching = np.einsum("jxy,kjixy->kixy", u, basis.xi_gradients)
    channels = -dealias_array(transport + stretching, grid)
    if stochastic_pressure:
        channels = leray_array(channels, grid)
    return drift, channels


def velocity_coefficients(
    u: np.ndarray, basis: NoiseBasis, stochastic_pressure: bool = True
) -> Coefficients:
    drift, channels = channel_tendencies(u, basis, stochastic_pressure)
    return drift, list(channels)


def pressure_components(
    u: VectorField2D, basis: NoiseBasis
) -> tuple[ScalarField, list[ScalarField]]:
    """
    Pressure fields of dp = P0 dt + sum_k Pk o dW_k for a divergence-free u.

    P0 = inverse_laplacian(-sum_ij du_i/dx_j du_j/dx_i) and
    Pk = inverse_laplacian(-(lap xi_k) . u
                           - sum_ij dxi_k^i/dx_j (du_i/dx_j + du_j/dx_i)),
    both in the zero-mean gauge.

    Args:
        u: Divergence-free velocity
        basis: Noise basis

    Returns:
        (P0, [P1 .. PK])
    """
    grid = u.grid
    velocity = u.stack()
    u_grad = gradient_array(velocity, grid)
    p0_source = -np.einsum("ijxy,jixy->xy", u_grad, u_grad)
    p0 = ScalarField(grid, inverse_laplacian_array(p0_source, grid))
    if basis.K == 0:
        return p0, []
    strain = u_grad + np.swapaxes(u_grad, 0, 1)
    pk_source = -np.einsum("kixy,ixy->kxy", basis.xi_laplacians, velocity) - np.einsum(
        "kijxy,ijxy->kxy", basis.xi_gradients, strain
    )
    pk = inverse_laplacian_array(pk_source, grid)
    return p0, [ScalarField(grid, p) for p in pk]


def step_velocity(
    state: EulerState,
    basis: NoiseBasis,
    dS: np.ndarray,
    stochastic_pressure: bool = True,
) -> EulerState:
    """
    One stochastic Heun step of the velocity form.

    Every channel tendency is projected separately before it is combined,
    and the pressure components of the new velocity are stored in the state.

    Raises:
        ValidationError: If dS does not have K + 1 entries or the state has no velocity
        NonFiniteStateError: On NaN or infinite values
    """
    if state.u is None:
        raise ValidationError("Velocity step needs a velocity-form state")
    dS = _check_channels(basis, dS)
    grid = state.u.grid
    velocity = heun_step_split(
        state.u.stack(),
        lambda v: velocity_coefficients(v, basis, stochastic_pressure),
        dS,
    )
    u = VectorField2D.from_array(grid, velocity)
    p0, pk = pressure_components(u, basis)
    return EulerState(time=state.time + dS[0], u=u, p0=p0, pk=tuple(pk))


def step_velocity_deterministic(state: EulerState, dt: float) -> EulerState:
    """Classical Heun step of the projected velocity equation."""
    if state.u is None:
        raise ValidationError("Velocity step needs a velocity-form state")
    grid = state.u.grid
    return step_velocity(state, empty_basis(grid), np.array([dt]))


def state_grid(state: EulerState) -> Grid2D:
    if state.omega is not None:
        return state.omega.grid
    if state.u is None:
        raise ValidationError("State holds neither vorticity nor velocity")
    return state.u.grid


def state_velocity(state: EulerState) -> np.ndarray:
    if state.omega is not None:
        return velocity_from_vorticity_array(state.omega.data, state.omega.grid)
    if state.u is None:
        raise ValidationError("State holds neither vorticity nor velocity")
    return state.u.stack()


def state_vorticity(state: EulerState) -> np.ndarray:
    """Vorticity of a state in either formulation."""
    if state.omega is not None:
        return state.omega.data
    return curl_array(state_velocity(state), state_grid(state))


def euler_diagnostics(
    state: EulerState, basis: Optional[NoiseBasis] = None, step: int = 0
) -> DiagnosticsRecord:
    """
    Conserved and monitored quantities of an Euler state.

    Energy 1/2 int |u|^2, enstrophy 1/2 int omega^2, Casimir int omega^4,
    max and RMS divergence, and the L2 norms of the pressure components.
    Pressure is computed from the velocity when the state carries none.
    """
    velocity = state_velocity(state)
    grid = state_grid(state)
    omega = state_vorticity(state)
    div = divergence_array(velocity, grid)
    area = grid.cell_area

    p0, pk = state.p0, list(state.pk)
    if p0 is None:
        noise = basis if basis is not None else empty_basis(grid)
        p0, pk = pressure_components(VectorField2D.from_array(grid, velocity), noise)

    def l2(data: np.ndarray) -> float:
        return float(np.sqrt(np.sum(data**2) * area))

    metrics = {
        "energy": float(0.5 * np.sum(velocity**2) * area),
        "enstrophy": float(0.5 * np.sum(omega**2) * area),
        "casimir4": float(np.sum(omega**4) * area),
        "div_max": float(np.max(np.abs(div))),
        "div_rms": float(np.sqrt(np.mean(div**2))),
        "p0_norm": l2(p0.data),
        "pk_norm_total": float(sum(l2(p.data) for p in pk)),
    }
    return DiagnosticsRecord(step=step, time=state.time, metrics=metrics)


def cfl_number(velocity: np.ndarray, basis: NoiseBasis, dt: float, median_dw: float) -> float:
    """(max|u| dt + max_k max|xi_k| median|dW|) / h."""
    h = min(basis.grid.hx, basis.grid.hy)
    u_max = float(np.max(np.hypot(velocity[0], velocity[1])))
    xi_max = float(np.max(np.hypot(basis.xi[:, 0], basis.xi[:, 1]))) if basis.K else 0.0
    return (u_max * dt + xi_max * median_dw) / h


def check_cfl(velocity: np.ndarray, basis: NoiseBasis, path: DrivingPath) -> float:
    """Advisory CFL check; logs a warning above the limit and returns the number."""
    increments = path.increments()
    median_dw = float(np.median(np.abs(increments[1:]))) if path.n_noise else 0.0
    number = cfl_number(velocity, basis, path.grid.dt, median_dw)
    if number > CFL_LIMIT:
        logger.warning("Advisory CFL number %.3f exceeds %.2f", number, CFL_LIMIT)
    return number


def integrate_euler(
    state: EulerState,
    basis: NoiseBasis,
    path: DrivingPath,
    diagnostics_every: int = 1,
    snapshot_every: int = 0,
    on_record: Optional[Callable[[DiagnosticsRecord], None]] = None,
    on_snapshot: Optional[Callable[[int, EulerState], None]] = None,
    stochastic_pressure: bool = True,
) -> tuple[EulerState, list[DiagnosticsRecord]]:
    """
    Run the Euler solver over a whole driving path.

    Args:
        state: Initial state (vorticity or velocity form)
        basis: Noise basis matching the path's K
        path: Driving path
        diagnostics_every: Record cadence in steps
        snapshot_every: Snapshot cadence in steps, 0 for none
        on_record: Called with each diagnostics record as it is produced
        on_snapshot: Called with (step, state) at the snapshot cadence
        stochastic_pressure: Velocity form only, see channel_tendencies

    Returns:
        Final state and the list of diagnostics records

    Raises:
        ValidationError: If the path and the basis disagree on K
        NonFiniteStateError: Tagged with the failing step index
    """
    if path.n_noise != basis.K:
        raise ValidationError(f"Path has {path.n_noise} noise components, basis has {basis.K}")
    check_cfl(state_velocity(state), basis, path)
    records: list[DiagnosticsRecord] = []

    def emit(n: int, current: EulerState) -> None:
        record = euler_diagnostics(current, basis, step=n)
        records.append(record)
        logger.debug("step %d time %.6g energy %.12g", n, current.time, record.metrics["energy"])
        if on_record is not None:
            on_record(record)

    emit(0, state)
    if snapshot_every and on_snapshot is not None:
        on_snapshot(0, state)
    n_steps = path.grid.n_steps
    for n in range(n_steps):
        dS = path.increment(n)
        try:
            if state.omega is not None:
                state = step_vorticity(state, basis, dS)
            else:
                state = step_velocity(state, basis, dS, stochastic_pressure)
        except NonFiniteStateError as e:
            logger.error("Euler solver aborted at step %d (last valid step %d)", n + 1, n)
            raise e.at_step(n) from e
        if (n + 1) % diagnostics_every == 0 or n + 1 == n_steps:
            emit(n + 1, state)
        if snapshot_every and on_snapshot is not None and (n + 1) % snapshot_every == 0:
            on_snapshot(n + 1, state)
    return state, records
