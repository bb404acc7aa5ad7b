"""
Test suite for the paths module.
"""

import numpy as np
import pytest

from src.constants import ComponentKind, DriverKind
from src.models import TimeGrid
from src.paths import (
    check_path,
    component_rng,
    deterministic_path,
    refine,
    sample_brownian,
    sample_ou,
    sample_path,
)
from src.validators import ValidationError


class TestSampleBrownian:
    """Tests for Brownian driver sampling."""

    def test_structure(self):
        """Test component 0 is the grid and martingales start at 0."""
        grid = TimeGrid(0.0, 1.0, 100)
        path = sample_brownian(grid, 3, seed=1)
        assert path.values.shape == (4, 101)
        np.testing.assert_array_equal(path.values[0], grid.nodes())
        np.testing.assert_array_equal(path.values[1:, 0], 0.0)
        assert path.kinds[0] is ComponentKind.FINITE_VARIATION
        assert all(kind is ComponentKind.MARTINGALE for kind in path.kinds[1:])
        check_path(path)

    def test_same_seed_same_path(self):
        """Test bit reproducibility."""
        grid = TimeGrid(0.0, 1.0, 50)
        first = sample_brownian(grid, 2, seed=7)
        second = sample_brownian(grid, 2, seed=7)
        np.testing.assert_array_equal(first.values, second.values)

    def test_adding_components_keeps_existing(self):
        """Test that component j does not depend on K."""
        grid = TimeGrid(0.0, 1.0, 50)
        small = sample_brownian(grid, 1, seed=7)
        large = sample_brownian(grid, 4, seed=7)
        np.testing.assert_array_equal(small.values[1], large.values[1])

    def test_terminal_variance(self):
        """Test Var(W_1) = 1 over an ensemble of independent components."""
        path = sample_brownian(TimeGrid(0.0, 1.0, 4), 10000, seed=0)
        assert np.var(path.values[1:, -1]) == pytest.approx(1.0, abs=0.06)

    def test_k_zero(self):
        """Test the degenerate driver."""
        path = deterministic_path(TimeGrid(0.0, 2.0, 8))
        assert path.n_noise == 0
        np.testing.assert_array_equal(path.increment(3), [0.25])

    def test_invalid_requests(self):
        """Test K and seed validation."""
        grid = TimeGrid(0.0, 1.0, 10)
        with pytest.raises(ValidationError, match="K must be non-negative"):
            sample_brownian(grid, -1, seed=0)
        with pytest.raises(ValidationError, match="Seed"):
            sample_brownian(grid, 1, seed=-3)
        with pytest.raises(ValidationError, match="at least one step"):
            sample_brownian(TimeGrid(0.0, 1.0, 0), 1, seed=0)


class TestSampleOU:
    """Tests for Ornstein-Uhlenbeck drivers."""

    def test_starts_at_zero(self):
        """Test the path invariant for OU drivers."""
        path = sample_ou(TimeGrid(0.0, 1.0, 10), 2, seed=3)
        np.testing.assert_array_equal(path.values[1:, 0], 0.0)
        check_path(path)

    def test_variance(self):
        """Test Var(X_t) = sigma^2 (1 - exp(-2 theta t)) / (2 theta)."""
        path = sample_ou(TimeGrid(0.0, 2.0, 20), 10000, theta=1.0, sigma=1.0, seed=2)
        expected = (1 - np.exp(-4.0)) / 2
        assert np.var(path.values[1:, -1]) == pytest.approx(expected, abs=0.03)

    def test_zero_theta_is_scaled_brownian(self):
        """Test that theta = 0 gives variance sigma^2 t."""
        path = sample_ou(TimeGrid(0.0, 1.0, 5), 10000, theta=0.0, sigma=2.0, seed=4)
        assert np.var(path.values[1:, -1]) == pytest.approx(4.0, rel=0.06)

    def test_negative_theta(self):
        """Test parameter validation."""
        with pytest.raises(ValidationError, match="theta"):
            sample_ou(TimeGrid(0.0, 1.0, 10), 1, theta=-1.0)

    def test_dispatch(self):
        """Test sample_path picks the configured driver."""
        grid = TimeGrid(0.0, 1.0, 10)
        ou = sample_path(grid, 1, DriverKind.OU, 5, theta=2.0, sigma=0.5)
        np.testing.assert_array_equal(ou.values, sample_ou(grid, 1, 2.0, 0.5, 5).values)
        bm = sample_path(grid, 1, DriverKind.BROWNIAN, 5)
        np.testing.assert_array_equal(bm.values, sample_brownian(grid, 1, 5).values)


class TestRefine:
    """Tests for Brownian-bridge refinement."""

    def test_coarse_nodes_preserved(self):
        """Test that every coarse node value is copied exactly."""
        coarse = sample_brownian(TimeGrid(0.0, 1.0, 16), 2, seed=1)
        fine = refine(coarse, 4, seed=9)
        assert fine.grid.n_steps == 64
        np.testing.assert_array_equal(fine.values[1:, ::4], coarse.values[1:])
        np.testing.assert_array_equal(fine.values[0], fine.grid.nodes())
        assert fine.seed == coarse.seed
        check_path(fine)

    def test_nested_refinement(self):
        """Test that refining twice keeps the first refinement's nodes."""
        coarse = sample_brownian(TimeGrid(0.0, 1.0, 8), 1, seed=2)
        once = refine(coarse, 2, seed=3)
        twice = refine(once, 2, seed=4)
        np.testing.assert_array_equal(twice.values[1, ::2], once.values[1])
        np.testing.assert_array_equal(twice.values[1, ::4], coarse.values[1])

    def test_bridge_increment_variance(self):
        """Test that refined increments have variance close to the fine step."""
        variances = []
        for seed in range(100):
            coarse = sample_brownian(TimeGrid(0.0, 1.0, 1000), 1, seed=seed)
            fine = refine(coarse, 2, seed=seed + 1000)
            first_half = fine.values[1, 1::2] - fine.values[1, 0:-1:2]
            variances.append(np.mean(first_half**2))
        assert np.mean(variances) == pytest.approx(0.0005, rel=0.02)

    def test_invalid_factor(self):
        """Test factor validation."""
        path = sample_brownian(TimeGrid(0.0, 1.0, 4), 1, seed=0)
        with pytest.raises(ValidationError, match="at least 2"):
            refine(path, 1, seed=0)


class TestComponentRng:
    """Tests for per-component generators."""

    def test_independent_keys(self):
        """Test that different keys give different streams."""
        a = component_rng(1, 0, 1).standard_normal(4)
        b = component_rng(1, 0, 2).standard_normal(4)
        c = component_rng(1, 0, 1).standard_normal(4)
        assert not np.array_equal(a, b)
        np.testing.assert_array_equal(a, c)


class TestCheckPath:
    """Tests for structural validation."""

    def test_rejects_nonzero_start(self):
        """Test that martingales must start at 0."""
        path = sample_brownian(TimeGrid(0.0, 1.0, 4), 1, seed=0)
        path.values[1] += 1.0
        with pytest.raises(ValidationError, match="start at 0"):
            check_path(path)

    def test_rejects_wrong_time_row(self):
        """Test that component 0 must be the grid."""
        path = sample_brownian(TimeGrid(0.0, 1.0, 4), 1, seed=0)
        path.values[0, 2] += 1e-3
        with pytest.raises(ValidationError, match="Component 0"):
            check_path(path)
