"""
Test suite for the constants module.
"""

import math

import pytest

from src.constants import (
    ADVECTION_COLUMNS,
    DEALIAS_FRACTION,
    DOMAIN_LENGTH,
    EULER_COLUMNS,
    GRID_MIN_POINTS,
    PATH_MAGIC,
    RSW_COLUMNS,
    SNAPSHOT_MAGIC,
    STREAM_BRIDGE,
    STREAM_BROWNIAN,
    STREAM_INITIAL,
    STREAM_OU,
    STREAM_PARTICLES,
    TRAJECTORY_COLUMNS,
    ComponentKind,
    DriverKind,
    ExitCode,
    Formulation,
    InitialKind,
    Mode,
    Phase,
)


class TestNumericConstants:
    """Tests for numeric constants."""

    def test_domain_is_two_pi_torus(self):
        """Test the periodic domain length."""
        assert DOMAIN_LENGTH == pytest.approx(2 * math.pi)

    def test_dealias_fraction(self):
        """Test the 2/3-rule fraction."""
        assert DEALIAS_FRACTION == pytest.approx(1 / 3)

    def test_grid_minimum_is_even(self):
        """Test that the minimum grid size is itself a valid size."""
        assert GRID_MIN_POINTS % 2 == 0

    def test_binary_magics(self):
        """Test the four-byte file magics."""
        assert PATH_MAGIC == b"SMDP"
        assert SNAPSHOT_MAGIC == b"SFLD"

    def test_random_streams_are_distinct(self):
        """Test that every sampler has its own stream tag."""
        streams = [STREAM_BROWNIAN, STREAM_OU, STREAM_BRIDGE, STREAM_INITIAL, STREAM_PARTICLES]
        assert len(set(streams)) == len(streams)


class TestEnums:
    """Tests for enumerations."""

    def test_component_kind_codes(self):
        """Test component kind labels and codes."""
        assert ComponentKind.FINITE_VARIATION.code == "FV"
        assert ComponentKind.MARTINGALE.label == "martingale"

    def test_phase_from_label(self):
        """Test phase lookup by label."""
        assert Phase.from_label("cos") is Phase.COS
        assert Phase.from_label("const") is Phase.CONST

    def test_phase_unknown_label(self):
        """Test that an unknown phase label raises KeyError."""
        with pytest.raises(KeyError):
            Phase.from_label("tan")

    def test_mode_labels(self):
        """Test the six run modes."""
        labels = {mode.label for mode in Mode}
        assert labels == {
            "euler-vorticity",
            "euler-velocity",
            "rsw",
            "advection-test",
            "sde-convergence",
            "lemma-check",
        }

    def test_mode_from_label(self):
        """Test mode lookup by label."""
        assert Mode.from_label("rsw") is Mode.RSW
        with pytest.raises(KeyError):
            Mode.from_label("navier-stokes")

    def test_formulation_labels(self):
        """Test formulation labels."""
        assert Formulation.VORTICITY.label == "vorticity"
        assert Formulation.VELOCITY.code == "u"

    def test_driver_and_initial_values(self):
        """Test config-facing enum values."""
        assert DriverKind("ou") is DriverKind.OU
        assert InitialKind("taylor-green") is InitialKind.TAYLOR_GREEN

    def test_exit_codes(self):
        """Test process exit codes."""
        assert int(ExitCode.OK) == 0
        assert int(ExitCode.CONFIG_ERROR) == 2
        assert int(ExitCode.SOLVER_ABORT) == 3
        assert int(ExitCode.CHECK_FAILURE) == 4


class TestColumns:
    """Tests for diagnostics column layouts."""

    @pytest.mark.parametrize(
        "columns", [EULER_COLUMNS, RSW_COLUMNS, TRAJECTORY_COLUMNS, ADVECTION_COLUMNS]
    )
    def test_columns_start_with_step_and_time(self, columns):
        """Test that every family starts with step and time."""
        assert columns[:2] == ("step", "time")
        assert len(set(columns)) == len(columns)
