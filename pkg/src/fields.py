"""
Pseudo-spectral operators on the periodic domain [0, 2*pi)^2.

Array-level helpers act on the last two axes, so stacked arrays such as
(2, nx, ny) velocity components or (K, 2, nx, ny) noise fields transform in
one call. Field-level functions wrap them for ScalarField / VectorField2D.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import fft2, irfft2, rfft2

from .constants import DEALIAS_FRACTION
from .models import Grid2D, ScalarField, VectorField2D
from .validators import GridValidator, ValidationError


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """
    Wavenumber tables for the rfft2 layout of one grid.

    kx runs over fftfreq (axis 0), ky over rfftfreq (axis 1). The first
    derivative tables kx_d, ky_d have the Nyquist wavenumber zeroed so that
    odd derivatives of real fields stay real.
    """

    grid: Grid2D
    kx: np.ndarray
    ky: np.ndarray
    kx_d: np.ndarray
    ky_d: np.ndarray
    k2: np.ndarray
    k2_inv: np.ndarray
    kd2_inv: np.ndarray
    dealias_mask: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=None)
def spectral_grid(grid: Grid2D) -> SpectralGrid:
    """Build (once per grid) the wavenumber tables."""
    GridValidator.validate(grid.nx, grid.ny)
    nx, ny = grid.nx, grid.ny
    kx = np.fft.fftfreq(nx, 1.0 / nx)[:, None]
    ky = np.fft.rfftfreq(ny, 1.0 / ny)[None, :]

    kx_d = kx.copy()
    kx_d[nx // 2, 0] = 0.0
    ky_d = ky.copy()
    ky_d[0, ny // 2] = 0.0

    k2 = kx**2 + ky**2
    k2_inv = np.zeros_like(k2)
    np.divide(1.0, k2, out=k2_inv, where=k2 > 0)

    kd2 = kx_d**2 + ky_d**2
    kd2_inv = np.zeros_like(kd2)
    np.divide(1.0, kd2, out=kd2_inv, where=kd2 > 0)

    mask = (np.abs(kx) <= nx * DEALIAS_FRACTION) & (np.abs(ky) <= ny * DEALIAS_FRACTION)

    weights = np.full((1, ny // 2 + 1), 2.0)
    weights[0, 0] = 1.0
    weights[0, ny // 2] = 1.0

    return SpectralGrid(
        grid=grid,
        kx=kx,
        ky=ky,
        kx_d=kx_d,
        ky_d=ky_d,
        k2=k2,
        k2_inv=k2_inv,
        kd2_inv=kd2_inv,
        dealias_mask=mask,
        weights=weights,
    )


def to_spectral(data: np.ndarray) -> np.ndarray:
    return rfft2(data, axes=(-2, -1))


def to_physical(coeffs: np.ndarray, grid: Grid2D) -> np.ndarray:
    return irfft2(coeffs, s=(grid.nx, grid.ny), axes=(-2, -1))


# Array-level operators


def ddx(data: np.ndarray, grid: Grid2D, order: int = 1) -> np.ndarray:
    sg = spectral_grid(grid)
    factor = 1j * sg.kx_d if order == 1 else -(sg.kx**2)
    return to_physical(factor * to_spectral(data), grid)


def ddy(data: np.ndarray, grid: Grid2D, order: int = 1) -> np.ndarray:
    sg = spectral_grid(grid)
    factor = 1j * sg.ky_d if order == 1 else -(sg.ky**2)
    return to_physical(factor * to_spectral(data), grid)


def gradient_array(data: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Gradient of a (..., nx, ny) array as (..., 2, nx, ny)."""
    sg = spectral_grid(grid)
    coeffs = to_spectral(data)
    return np.stack(
        [to_physical(1j * sg.kx_d * coeffs, grid), to_physical(1j * sg.ky_d * coeffs, grid)],
        axis=-3,
    )


def divergence_array(vec: np.ndarray, grid: Grid2D) -> np.ndarray:
    sg = spectral_grid(grid)
    coeffs = to_spectral(vec)
    div_hat = 1j * sg.kx_d * coeffs[..., 0, :, :] + 1j * sg.ky_d * coeffs[..., 1, :, :]
    return to_physical(div_hat, grid)


def curl_array(vec: np.ndarray, grid: Grid2D) -> np.ndarray:
    sg = spectral_grid(grid)
    coeffs = to_spectral(vec)
    curl_hat = 1j * sg.kx_d * coeffs[..., 1, :, :] - 1j * sg.ky_d * coeffs[..., 0, :, :]
    return to_physical(curl_hat, grid)


def laplacian_array(data: np.ndarray, grid: Grid2D) -> np.ndarray:
    sg = spectral_grid(grid)
    return to_physical(-sg.k2 * to_spectral(data), grid)


def inverse_laplacian_array(data: np.ndarray, grid: Grid2D) -> np.ndarray:
    sg = spectral_grid(grid)
    return to_physical(-sg.k2_inv * to_spectral(data), grid)


def leray_array(vec: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Divergence-free part of a (..., 2, nx, ny) array."""
    sg = spectral_grid(grid)
    coeffs = to_spectral(vec)
    u_hat = coeffs[..., 0, :, :]
    v_hat = coeffs[..., 1, :, :]
    k_dot = (sg.kx_d * u_hat + sg.ky_d * v_hat) * sg.kd2_inv
    projected = np.stack([u_hat - sg.kx_d * k_dot, v_hat - sg.ky_d * k_dot], axis=-3)
    return to_physical(projected, grid)


def dealias_array(data: np.ndarray, grid: Grid2D, keep_mean: bool = True) -> np.ndarray:
    """2/3-rule truncation; keep_mean=False also drops the zero mode."""
    sg = spectral_grid(grid)
    coeffs = np.where(sg.dealias_mask, to_spectral(data), 0.0)
    if not keep_mean:
        coeffs[..., 0, 0] = 0.0
    return to_physical(coeffs, grid)


def velocity_from_vorticity_array(omega: np.ndarray, grid: Grid2D) -> np.ndarray:
    """u = (-dpsi/dy, dpsi/dx) with psi = inverse Laplacian of omega."""
    sg = spectral_grid(grid)
    psi_hat = -sg.k2_inv * to_spectral(omega)
    return np.stack(
        [to_physical(-1j * sg.ky_d * psi_hat, grid), to_physical(1j * sg.kx_d * psi_hat, grid)],
        axis=-3,
    )


def interpolate_array(data: np.ndarray, grid: Grid2D, points: np.ndarray) -> np.ndarray:
    """
    Trigonometric interpolation of (..., nx, ny) data at points (P, 2).

    The Nyquist coefficient is split symmetrically between +N/2 and -N/2,
    which makes the interpolant exact at grid nodes.

    Returns:
        Values of shape (..., P)
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValidationError("Points must be an array of shape (P, 2)")
    if not np.all(np.isfinite(points)):
        raise ValidationError("Interpolation points must be finite")
    nx, ny = grid.nx, grid.ny
    folded = np.mod(points, 2.0 * np.pi)
    px = folded[:, 0:1]
    py = folded[:, 1:2]

    kx = np.fft.fftfreq(nx, 1.0 / nx)[None, :]
    ky = np.fft.fftfreq(ny, 1.0 / ny)[None, :]
    ex = np.exp(1j * px * kx)
    ex[:, nx // 2] = np.cos(0.5 * nx * px[:, 0])
    ey = np.exp(1j * py * ky)
    ey[:, ny // 2] = np.cos(0.5 * ny * py[:, 0])

    coeffs = fft2(data, axes=(-2, -1)) / (nx * ny)
    return np.real(np.sum((ex @ coeffs) * ey, axis=-1))


def shift_array(data: np.ndarray, grid: Grid2D, dx: float, dy: float) -> np.ndarray:
    """Translate periodic data: result(x, y) = data(x - dx, y - dy)."""
    sg = spectral_grid(grid)
    phase = np.exp(-1j * (sg.kx_d * dx + sg.ky_d * dy))
    return to_physical(phase * to_spectral(data), grid)


def resample_array(data: np.ndarray, grid: Grid2D, target: Grid2D) -> np.ndarray:
    """
    Evaluate the trigonometric interpolant of (..., nx, ny) data on another grid.

    Exact for data band-limited below the Nyquist wavenumber of both grids,
    which is how refinement studies carry one initial condition across levels.
    """
    X, Y = target.mesh()
    points = np.column_stack([X.ravel(), Y.ravel()])
    values = interpolate_array(data, grid, points)
    return values.reshape(np.shape(data)[:-2] + (target.nx, target.ny))


# Field-level operators


def derivative(f: ScalarField, axis: int, order: int = 1) -> ScalarField:
    """
    Spectral derivative of a scalar field.

    Args:
        f: Field to differentiate
        axis: 0 for x, 1 for y
        order: 1 or 2

    Returns:
        Derivative field, exact for band-limited input

    Raises:
        ValidationError: If axis or order is out of range
    """
    if order not in (1, 2):
        raise ValidationError("Derivative order must be 1 or 2")
    if axis not in (0, 1):
        raise ValidationError("Derivative axis must be 0 (x) or 1 (y)")
    op = ddx if axis == 0 else ddy
    return ScalarField(f.grid, op(f.data, f.grid, order))


def gradient(f: ScalarField) -> VectorField2D:
    return VectorField2D.from_array(f.grid, gradient_array(f.data, f.grid))


def divergence(v: VectorField2D) -> ScalarField:
    return ScalarField(v.grid, divergence_array(v.stack(), v.grid))


def curl2d(v: VectorField2D) -> ScalarField:
    """Scalar curl dv/dx - du/dy."""
    return ScalarField(v.grid, curl_array(v.stack(), v.grid))


def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, laplacian_array(f.data, f.grid))


def inverse_laplacian(f: ScalarField) -> ScalarField:
    """
    Solve Laplacian(g) = f - mean(f) with mean(g) = 0.

    Args:
        f: Right-hand side

    Returns:
        Zero-mean solution g
    """
    return ScalarField(f.grid, inverse_laplacian_array(f.data, f.grid))


def leray_project(v: VectorField2D) -> VectorField2D:
    """
    Project a vector field onto its divergence-free part.

    Computes v - grad(inverse_laplacian(div v)); the result has zero
    discrete divergence and the projection is idempotent.
    """
    return VectorField2D.from_array(v.grid, leray_array(v.stack(), v.grid))


def dealias(f: ScalarField) -> ScalarField:
    """Zero modes with |kx| > nx/3 or |ky| > ny/3."""
    return ScalarField(f.grid, dealias_array(f.data, f.grid))


def interpolate(f: ScalarField, points: np.ndarray) -> np.ndarray:
    """
    Evaluate a field at arbitrary points by trigonometric interpolation.

    Args:
        f: Field to evaluate
        points: Array (P, 2) of coordinates, folded into [0, 2*pi)^2

    Returns:
        Array of P values

    Raises:
        ValidationError: If any coordinate is not finite
    """
    return interpolate_array(f.data, f.grid, points)


def velocity_from_vorticity(omega: ScalarField) -> VectorField2D:
    velocity = velocity_from_vorticity_array(omega.data, omega.grid)
    return VectorField2D.from_array(omega.grid, velocity)


def shift(f: ScalarField, dx: float, dy: float) -> ScalarField:
    return ScalarField(f.grid, shift_array(f.data, f.grid, dx, dy))


def integrate(f: ScalarField) -> float:
    """Domain integral by the (spectrally accurate) rectangle rule."""
    return float(np.sum(f.data) * f.grid.cell_area)


def rms(f: ScalarField) -> float:
    return float(np.sqrt(np.mean(f.data**2)))


def l2_norm(f: ScalarField) -> float:
    return float(np.sqrt(np.sum(f.data**2) * f.grid.cell_area))


def spectral_energy(f: ScalarField) -> float:
    """Sum of squares computed from rfft2 coefficients (Parseval)."""
    sg = spectral_grid(f.grid)
    coeffs = to_spectral(f.data)
    return float(np.sum(sg.weights * np.abs(coeffs) ** 2) / (f.grid.nx * f.grid.ny))


def scalar_field(grid: Grid2D, data: np.ndarray) -> ScalarField:
    """
    Wrap an array as a ScalarField after checking its shape and finiteness.

    Raises:
        ValidationError: If the shape does not match the grid or values are not finite
    """
    data = np.asarray(data, dtype=float)
    if data.shape != (grid.nx, grid.ny):
        raise ValidationError(f"Field shape {data.shape} does not match grid {grid.nx}x{grid.ny}")
    if not np.all(np.isfinite(data)):
        raise ValidationError("Field values must be finite")
    return ScalarField(grid, data)
