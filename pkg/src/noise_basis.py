"""
Divergence-free transport-noise fields xi_k.

Each trigonometric mode is the skew gradient of a Fourier streamfunction,
xi = c |k|^-gamma (-ky, kx) / |k| trig(k . x), so it is divergence-free by
construction. Spatially constant modes are supported for translation tests.
"""

import logging
from typing import Sequence

import numpy as np

from .constants import (
    DEFAULT_NOISE_AMPLITUDE,
    DEFAULT_NOISE_GAMMA,
    DEFAULT_NOISE_KMAX,
    Phase,
)
from .fields import gradient_array, laplacian_array
from .models import Grid2D, NoiseBasis, NoiseMode, VectorField2D
from .validators import GridValidator, NoiseModeValidator, ParameterValidator, ValidationError

logger = logging.getLogger(__name__)


def admissible_wavevectors(kmax: int) -> list[tuple[int, int]]:
    """
    Half-plane wavevectors with 0 < |k| <= kmax.

    Ordered by |k|, then ky, then kx, so (1, 0) comes first. Only one of
    k and -k is listed since the cos/sin pair spans both.
    """
    vectors = [
        (kx, ky)
        for kx in range(-kmax, kmax + 1)
        for ky in range(0, kmax + 1)
        if (ky > 0 or kx > 0) and 0 < kx * kx + ky * ky <= kmax * kmax
    ]
    return sorted(vectors, key=lambda k: (k[0] ** 2 + k[1] ** 2, k[1], k[0]))


def mode_field(grid: Grid2D, mode: NoiseMode) -> np.ndarray:
    """Sample one mode as a (2, nx, ny) array."""
    norm = np.hypot(mode.kx, mode.ky)
    if mode.phase is Phase.CONST:
        direction = np.array([mode.kx, mode.ky]) / norm
        return mode.amplitude * direction[:, None, None] * np.ones((2, grid.nx, grid.ny))
    X, Y = grid.mesh()
    argument = mode.kx * X + mode.ky * Y
    profile = np.cos(argument) if mode.phase is Phase.COS else np.sin(argument)
    scale = mode.amplitude / norm
    return np.stack([-mode.ky * scale * profile, mode.kx * scale * profile])


def make_basis_from_modes(grid: Grid2D, modes: Sequence[NoiseMode]) -> NoiseBasis:
    """
    Build a basis from an explicit mode list.

    Args:
        grid: Spatial grid
        modes: Noise modes (wavevector or direction, phase, amplitude)

    Returns:
        NoiseBasis with cached fields, gradients and Laplacians

    Raises:
        ValidationError: If a mode is invalid or not resolved by the grid
    """
    GridValidator.validate(grid.nx, grid.ny)
    for mode in modes:
        NoiseModeValidator.validate(mode)
        if mode.phase is not Phase.CONST and (
            abs(mode.kx) >= grid.nx // 2 or abs(mode.ky) >= grid.ny // 2
        ):
            raise ValidationError(
                f"Noise wavevector ({mode.kx:g}, {mode.ky:g}) is not resolved by the grid"
            )

    modes = tuple(modes)
    shape = (len(modes), 2, grid.nx, grid.ny)
    if not modes:
        return NoiseBasis(
            grid=grid,
            modes=modes,
            xi=np.zeros(shape),
            xi_gradients=np.zeros((0, 2, 2, grid.nx, grid.ny)),
            xi_laplacians=np.zeros(shape),
        )
    xi = np.stack([mode_field(grid, mode) for mode in modes])
    logger.debug("Built noise basis with %d modes on %dx%d", len(modes), grid.nx, grid.ny)
    return NoiseBasis(
        grid=grid,
        modes=modes,
        xi=xi,
        xi_gradients=gradient_array(xi, grid),
        xi_laplacians=laplacian_array(xi, grid),
    )


def make_fourier_basis(
    grid: Grid2D,
    K: int,
    gamma: float = DEFAULT_NOISE_GAMMA,
    c: float = DEFAULT_NOISE_AMPLITUDE,
    kmax: int = DEFAULT_NOISE_KMAX,
) -> NoiseBasis:
    """
    Build the first K curl-of-Fourier-mode noise fields.

    Wavevectors are enumerated by increasing |k| and each contributes a cos
    mode and then a sin mode, with amplitude c |k|^-gamma.

    Args:
        grid: Spatial grid
        K: Number of modes
        gamma: Amplitude decay exponent
        c: Amplitude scale
        kmax: Wavenumber cutoff

    Returns:
        NoiseBasis with K modes

    Raises:
        ValidationError: If K exceeds the number of admissible modes
    """
    ParameterValidator.non_negative(K, "K")
    ParameterValidator.non_negative(gamma, "gamma")
    ParameterValidator.non_negative(c, "Noise amplitude")
    ParameterValidator.at_least(kmax, 1, "kmax")

    modes: list[NoiseMode] = []
    for kx, ky in admissible_wavevectors(kmax):
        amplitude = c * float(np.hypot(kx, ky)) ** -gamma
        modes.append(NoiseMode(float(kx), float(ky), Phase.COS, amplitude))
        modes.append(NoiseMode(float(kx), float(ky), Phase.SIN, amplitude))
    if K > len(modes):
        raise ValidationError(
            f"K = {K} exceeds the {len(modes)} admissible modes with |k| <= {kmax}"
        )
    return make_basis_from_modes(grid, modes[:K])


def make_constant_basis(grid: Grid2D, vectors: Sequence[tuple[float, float]]) -> NoiseBasis:
    """Basis of spatially uniform fields, one per (cx, cy) vector."""
    modes = [
        NoiseMode(float(cx), float(cy), Phase.CONST, float(np.hypot(cx, cy))) for cx, cy in vectors
    ]
    return make_basis_from_modes(grid, modes)


def transport_increment_array(basis: NoiseBasis, dW: np.ndarray) -> np.ndarray:
    dW = np.asarray(dW, dtype=float)
    if dW.shape != (basis.K,):
        raise ValidationError(f"Expected {basis.K} noise increments, got {dW.size}")
    if basis.K == 0:
        return np.zeros((2, basis.grid.nx, basis.grid.ny))
    return np.tensordot(dW, basis.xi, axes=(0, 0))


def transport_increment(basis: NoiseBasis, dW: np.ndarray) -> VectorField2D:
    """
    Noise part of the transport velocity, sum_k xi_k dW_k.

    Args:
        basis: Noise basis
        dW: The K martingale increments (dS without its dt entry)

    Returns:
        Divergence-free vector field

    Raises:
        ValidationError: If the number of increments differs from K
    """
    return VectorField2D.from_array(basis.grid, transport_increment_array(basis, dW))


def empty_basis(grid: Grid2D) -> NoiseBasis:
    """Basis with no modes (the deterministic driver)."""
    return make_basis_from_modes(grid, ())
