"""
Test suite for the validators module.
"""

import pytest

from src.constants import DriverKind, InitialKind, Mode, Phase
from src.models import Grid2D, NoiseMode
from src.validators import (
    ConfigError,
    ConfigValidator,
    GridValidator,
    NoiseModeValidator,
    ParameterValidator,
    TimeGridValidator,
    ValidationError,
)

MINIMAL = """
[run]
mode = euler-vorticity
dt = 0.001
t_end = 0.01

[grid]
nx = 16
ny = 16
"""


class TestValidationError:
    """Tests for ValidationError and ConfigError."""

    def test_validation_error_is_value_error(self):
        """Test the exception hierarchy."""
        assert issubclass(ValidationError, ValueError)
        assert issubclass(ConfigError, ValidationError)

    def test_config_error_names_key(self):
        """Test that ConfigError carries the dotted key."""
        error = ConfigError("run.dt", "must be greater than 0")
        assert error.key == "run.dt"
        assert str(error) == "run.dt: must be greater than 0"


class TestGridValidator:
    """Tests for GridValidator class."""

    def test_valid_grid(self):
        """Test a valid grid."""
        assert GridValidator.parse(16, 32) == Grid2D(16, 32)

    def test_too_small(self):
        """Test grids below the minimum size."""
        with pytest.raises(ValidationError, match="nx must be at least"):
            GridValidator.validate(4, 16)

    def test_odd(self):
        """Test odd grid sizes."""
        with pytest.raises(ValidationError, match="ny must be even"):
            GridValidator.validate(16, 17)

    def test_same_grid(self):
        """Test grid mismatch detection."""
        GridValidator.same_grid(Grid2D(8, 8), Grid2D(8, 8))
        with pytest.raises(ValidationError, match="different grids"):
            GridValidator.same_grid(Grid2D(8, 8), Grid2D(16, 8))


class TestTimeGridValidator:
    """Tests for TimeGridValidator class."""

    def test_valid(self):
        """Test a valid time grid."""
        grid = TimeGridValidator.parse(0, 1, 10)
        assert grid.dt == pytest.approx(0.1)

    def test_empty_interval(self):
        """Test a reversed interval."""
        with pytest.raises(ValidationError, match="greater than its start"):
            TimeGridValidator.validate(1.0, 1.0, 10)

    def test_no_steps(self):
        """Test n_steps below one."""
        with pytest.raises(ValidationError, match="at least one step"):
            TimeGridValidator.validate(0.0, 1.0, 0)


class TestParameterValidator:
    """Tests for ParameterValidator class."""

    def test_non_negative(self):
        """Test the non-negative check."""
        ParameterValidator.non_negative(0.0, "gamma")
        with pytest.raises(ValidationError, match="gamma must be non-negative"):
            ParameterValidator.non_negative(-1.0, "gamma")

    def test_positive_rejects_nan(self):
        """Test that NaN is not positive."""
        with pytest.raises(ValidationError):
            ParameterValidator.positive(float("nan"), "epsilon")

    def test_at_least(self):
        """Test the lower bound check."""
        with pytest.raises(ValidationError, match="kmax must be at least 1"):
            ParameterValidator.at_least(0, 1, "kmax")


class TestNoiseModeValidator:
    """Tests for NoiseModeValidator class."""

    def test_parse_list(self):
        """Test parsing several modes."""
        modes = NoiseModeValidator.parse("1 0 cos 0.1; 0 2 SIN 0.05;")
        assert modes == (
            NoiseMode(1.0, 0.0, Phase.COS, 0.1),
            NoiseMode(0.0, 2.0, Phase.SIN, 0.05),
        )

    def test_parse_constant_direction(self):
        """Test that constant modes accept real directions."""
        (mode,) = NoiseModeValidator.parse("0.6 0.8 const 0.2")
        assert mode.phase is Phase.CONST

    def test_wrong_field_count(self):
        """Test malformed entries."""
        with pytest.raises(ValidationError, match="format"):
            NoiseModeValidator.parse("1 0 cos")

    def test_unknown_phase(self):
        """Test unknown phases."""
        with pytest.raises(ValidationError, match="Unknown noise phase"):
            NoiseModeValidator.parse("1 0 tan 0.1")

    def test_zero_wavevector(self):
        """Test that the zero wavevector is rejected."""
        with pytest.raises(ValidationError, match="cannot be zero"):
            NoiseModeValidator.parse("0 0 cos 0.1")

    def test_fractional_wavevector(self):
        """Test that trigonometric modes need integer wavevectors."""
        with pytest.raises(ValidationError, match="integer"):
            NoiseModeValidator.parse("1.5 0 sin 0.1")

    def test_serialize_reparses(self):
        """Test that serialized modes parse back to the same tuple."""
        modes = NoiseModeValidator.parse("1 1 cos 0.1; 0.3 0.4 const 0.123456789")
        assert NoiseModeValidator.parse(NoiseModeValidator.serialize(modes)) == modes


class TestConfigValidator:
    """Tests for ConfigValidator class."""

    def test_minimal_config_defaults(self):
        """Test that omitted keys take their documented defaults."""
        config = ConfigValidator.parse(MINIMAL)
        assert config.mode is Mode.EULER_VORTICITY
        assert config.n_steps == 10
        assert config.seed == 0
        assert config.members == 1
        assert config.noise_k == 0
        assert config.driver is DriverKind.BROWNIAN
        assert config.initial is InitialKind.TAYLOR_GREEN

    def test_negative_dt_names_key(self):
        """Test that a range error names run.dt."""
        with pytest.raises(ConfigError, match="run.dt") as exc_info:
            ConfigValidator.parse(MINIMAL.replace("dt = 0.001", "dt = -1"))
        assert exc_info.value.key == "run.dt"

    def test_unknown_key(self):
        """Test that unknown keys are rejected with their path."""
        with pytest.raises(ConfigError, match="grid.nz: unknown key"):
            ConfigValidator.parse(MINIMAL + "nz = 4\n")

    def test_missing_required_key(self):
        """Test that missing required keys are reported."""
        with pytest.raises(ConfigError, match="run.t_end: missing required key"):
            ConfigValidator.parse(MINIMAL.replace("t_end = 0.01\n", ""))

    def test_type_mismatch(self):
        """Test non-numeric values for numeric keys."""
        with pytest.raises(ConfigError, match="grid.nx: invalid int"):
            ConfigValidator.parse(MINIMAL.replace("nx = 16", "nx = sixteen"))

    def test_unknown_mode(self):
        """Test an unknown run mode."""
        with pytest.raises(ConfigError, match="run.mode"):
            ConfigValidator.parse(MINIMAL.replace("euler-vorticity", "navier-stokes"))

    def test_alias_for_t_end(self):
        """Test that T is accepted for t_end."""
        config = ConfigValidator.parse(MINIMAL.replace("t_end", "T"))
        assert config.t_end == pytest.approx(0.01)

    def test_duplicate_through_alias(self):
        """Test that T and t_end together are rejected."""
        with pytest.raises(ConfigError, match="more than once"):
            ConfigValidator.parse(MINIMAL.replace("t_end = 0.01", "t_end = 0.01\nT = 0.01"))

    def test_fractional_step_count(self):
        """Test that t_end must be a whole number of steps."""
        with pytest.raises(ConfigError, match="run.dt"):
            ConfigValidator.parse(MINIMAL.replace("t_end = 0.01", "t_end = 0.0105"))

    def test_odd_grid(self):
        """Test that odd grid sizes are rejected."""
        with pytest.raises(ConfigError, match="grid.ny: must be even"):
            ConfigValidator.parse(MINIMAL.replace("ny = 16", "ny = 15"))

    def test_workers_clamped_to_members(self):
        """Test that workers never exceed members."""
        text = MINIMAL.replace("t_end = 0.01", "t_end = 0.01\nmembers = 2\nworkers = 8")
        assert ConfigValidator.parse(text).workers == 2

    def test_explicit_modes_set_k(self):
        """Test that an explicit mode list determines K."""
        config = ConfigValidator.parse(MINIMAL + "\n[noise]\nmodes = 1 0 cos 0.1; 0 1 sin 0.1\n")
        assert config.noise_k == 2

    def test_explicit_modes_disagree_with_k(self):
        """Test that a conflicting K is a config error."""
        text = MINIMAL + "\n[noise]\nK = 3\nmodes = 1 0 cos 0.1\n"
        with pytest.raises(ConfigError, match="noise.K"):
            ConfigValidator.parse(text)

    def test_rsw_needs_shallow_water_initial_state(self):
        """Test initial-condition consistency for rsw runs."""
        text = MINIMAL.replace("euler-vorticity", "rsw")
        with pytest.raises(ConfigError, match="initial.kind"):
            ConfigValidator.parse(text)
        config = ConfigValidator.parse(text + "\n[initial]\nkind = rest\n")
        assert config.initial is InitialKind.REST

    def test_lemma_interval(self):
        """Test that lemma.b must exceed lemma.a."""
        with pytest.raises(ConfigError, match="lemma.b"):
            ConfigValidator.parse(MINIMAL + "\n[lemma]\na = 0.5\nb = 0.5\n")

    def test_syntax_error(self):
        """Test malformed INI text."""
        with pytest.raises(ConfigError, match="syntax error"):
            ConfigValidator.parse("mode = rsw\n")

    def test_serialize_round_trip(self):
        """Test that serialized configs parse back to an equal config."""
        text = MINIMAL + (
            "\n[noise]\nmodes = 1 0 cos 0.1; 0.3 0.4 const 0.2\ngamma = 1.5\n"
            "\n[driver]\nkind = ou\ntheta = 0.7\n"
            "\n[physics]\nepsilon = 0.3333333333333333\n"
        )
        config = ConfigValidator.parse(text)
        assert ConfigValidator.parse(ConfigValidator.serialize(config)) == config

    def test_serialize_writes_every_key(self):
        """Test that defaults are written explicitly."""
        rendered = ConfigValidator.serialize(ConfigValidator.parse(MINIMAL))
        assert "[physics]" in rendered
        assert "froude = 1.0" in rendered
        assert "modes" not in rendered
