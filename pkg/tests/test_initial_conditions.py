"""
Test suite for the initial_conditions module.
"""

import numpy as np
import pytest

from src.constants import DOMAIN_LENGTH, InitialKind
from src.fields import ddx, ddy, spectral_grid, to_spectral
from src.initial_conditions import (
    balanced_state,
    initial_rsw_state,
    initial_vorticity,
    random_particles,
    random_smooth_field,
    rest_state,
    taylor_green_velocity,
    taylor_green_vorticity,
)
from src.models import Grid2D
from src.salt_rsw import make_rsw_params
from src.validators import ValidationError


@pytest.fixture
def grid():
    return Grid2D(32, 32)


class TestTaylorGreen:
    """Tests for the Taylor-Green fields."""

    def test_vorticity_amplitude(self, grid):
        """Test omega = 2 A sin x sin y."""
        omega = taylor_green_vorticity(grid, amplitude=0.5)
        X, Y = grid.mesh()
        np.testing.assert_allclose(omega.data, np.sin(X) * np.sin(Y))

    def test_velocity_is_divergence_free(self, grid):
        """Test that the analytic velocity has zero divergence."""
        u = taylor_green_velocity(grid).stack()
        divergence = ddx(u[0], grid) + ddy(u[1], grid)
        assert np.max(np.abs(divergence)) < 1e-12


class TestRandomSmoothField:
    """Tests for random_smooth_field."""

    def test_rms_and_mean(self, grid):
        """Test zero mean and the requested RMS."""
        f = random_smooth_field(grid, seed=3, kmax=5, amplitude=2.0)
        assert abs(f.data.mean()) < 1e-12
        assert np.sqrt(np.mean(f.data**2)) == pytest.approx(2.0)

    def test_band_limited(self, grid):
        """Test that no energy sits above kmax."""
        f = random_smooth_field(grid, seed=4, kmax=3)
        coeffs = to_spectral(f.data)
        outside = spectral_grid(grid).k2 > 9
        assert np.max(np.abs(coeffs[outside])) < 1e-10

    def test_reproducible(self, grid):
        """Test that the seed determines the field."""
        a = random_smooth_field(grid, seed=5)
        b = random_smooth_field(grid, seed=5)
        c = random_smooth_field(grid, seed=5, component=1)
        np.testing.assert_array_equal(a.data, b.data)
        assert not np.allclose(a.data, c.data)

    def test_kmax_below_nyquist(self):
        """Test the cutoff check."""
        with pytest.raises(ValidationError, match="Nyquist"):
            random_smooth_field(Grid2D(8, 8), seed=0, kmax=4)


class TestInitialVorticity:
    """Tests for initial_vorticity."""

    def test_named_kinds(self, grid):
        """Test dispatch on the named kinds."""
        tg = initial_vorticity(grid, InitialKind.TAYLOR_GREEN)
        np.testing.assert_array_equal(tg.data, taylor_green_vorticity(grid).data)
        zero = initial_vorticity(grid, InitialKind.ZERO)
        np.testing.assert_array_equal(zero.data, 0.0)
        random = initial_vorticity(grid, InitialKind.RANDOM, seed=2)
        np.testing.assert_array_equal(random.data, random_smooth_field(grid, 2).data)

    def test_balanced_not_available(self, grid):
        """Test that shallow-water kinds are rejected."""
        with pytest.raises(ValidationError, match="not available for Euler"):
            initial_vorticity(grid, InitialKind.BALANCED)


class TestShallowWaterStates:
    """Tests for shallow-water initial states."""

    def test_rest_state(self, grid):
        """Test uniform depth and zero velocity."""
        state = rest_state(grid, depth=2.0)
        np.testing.assert_array_equal(state.eta.data, 2.0)
        np.testing.assert_array_equal(state.u.stack(), 0.0)

    def test_rest_state_over_topography(self, grid):
        """Test eta = depth + b, so the free surface is flat."""
        params = make_rsw_params(grid, 0.1, 1.0, topography=0.05)
        state = initial_rsw_state(params, InitialKind.REST, depth=1.0)
        np.testing.assert_allclose(state.eta.data - params.b.data, 1.0)

    def test_balanced_state_is_geostrophic(self, grid):
        """Test f0 u_perp = -grad k for the balanced velocity."""
        params = make_rsw_params(grid, 0.1, 1.0, coriolis=2.0, topography=0.05)
        state = balanced_state(params, depth=1.0, amplitude=0.01, seed=3)
        k = (state.eta.data - params.b.data) / (params.epsilon * params.froude)
        u = state.u.stack()
        np.testing.assert_allclose(2.0 * u[0], -ddy(k, grid), atol=1e-10)
        np.testing.assert_allclose(2.0 * u[1], ddx(k, grid), atol=1e-10)
        assert np.min(state.eta.data) > 0.0

    def test_balanced_needs_rotation(self, grid):
        """Test that mean(f) = 0 is rejected."""
        params = make_rsw_params(grid, 0.1, 1.0, coriolis=0.0)
        with pytest.raises(ValidationError, match="Coriolis"):
            balanced_state(params)

    def test_euler_kind_rejected(self, grid):
        """Test that Euler-only kinds are rejected."""
        params = make_rsw_params(grid, 0.1, 1.0)
        with pytest.raises(ValidationError, match="shallow-water"):
            initial_rsw_state(params, InitialKind.TAYLOR_GREEN)

    def test_non_positive_depth(self, grid):
        """Test the depth check."""
        with pytest.raises(ValidationError):
            rest_state(grid, depth=0.0)


class TestRandomParticles:
    """Tests for random_particles."""

    def test_positions_on_torus(self):
        """Test count, bounds and the stored initial positions."""
        particles = random_particles(50, seed=1)
        assert particles.count == 50
        assert np.all((particles.positions >= 0.0) & (particles.positions < DOMAIN_LENGTH))
        np.testing.assert_array_equal(particles.initial, particles.positions)
        assert particles.initial is not particles.positions

    def test_needs_one_particle(self):
        """Test the minimum count."""
        with pytest.raises(ValidationError):
            random_particles(0, seed=1)
