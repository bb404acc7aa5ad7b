"""
Input validation for the SALT fluid laboratory.
"""

import configparser
import math
from dataclasses import dataclass, fields
from typing import Any, Optional

from .constants import (
    GRID_MIN_POINTS,
    MAX_PARTICLES,
    DriverKind,
    InitialKind,
    Mode,
    Phase,
)
from .models import Grid2D, NoiseMode, RunConfig, TimeGrid


class ValidationError(ValueError):
    """Raised when an argument violates a precondition."""


class ConfigError(ValidationError):
    """Configuration error naming the offending dotted key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class GridValidator:
    """Validator for periodic spatial grids."""

    @staticmethod
    def validate(nx: int, ny: int) -> None:
        """
        Validate grid sizes.

        Args:
            nx: Points along x
            ny: Points along y

        Raises:
            ValidationError: If a size is odd or below the minimum
        """
        for name, size in (("nx", nx), ("ny", ny)):
            if size < GRID_MIN_POINTS:
                raise ValidationError(f"{name} must be at least {GRID_MIN_POINTS}")
            if size % 2 != 0:
                raise ValidationError(f"{name} must be even")

    @staticmethod
    def parse(nx: int, ny: int) -> Grid2D:
        GridValidator.validate(nx, ny)
        return Grid2D(nx, ny)

    @staticmethod
    def same_grid(first: Grid2D, second: Grid2D) -> None:
        if first != second:
            raise ValidationError(
                f"Fields live on different grids: {first.nx}x{first.ny} and {second.nx}x{second.ny}"
            )


class TimeGridValidator:
    """Validator for uniform time grids."""

    @staticmethod
    def validate(t0: float, t1: float, n_steps: int) -> None:
        """
        Validate a time grid.

        Args:
            t0: Start time
            t1: End time
            n_steps: Number of steps

        Raises:
            ValidationError: If the interval is empty or n_steps < 1
        """
        if not (math.isfinite(t0) and math.isfinite(t1)):
            raise ValidationError("Time grid bounds must be finite")
        if t1 <= t0:
            raise ValidationError("Time grid end must be greater than its start")
        if n_steps < 1:
            raise ValidationError("Time grid must have at least one step")

    @staticmethod
    def parse(t0: float, t1: float, n_steps: int) -> TimeGrid:
        TimeGridValidator.validate(t0, t1, n_steps)
        return TimeGrid(float(t0), float(t1), int(n_steps))


class ParameterValidator:
    """Range checks shared by the solvers."""

    @staticmethod
    def non_negative(value: float, name: str) -> None:
        if not value >= 0:
            raise ValidationError(f"{name} must be non-negative")

    @staticmethod
    def positive(value: float, name: str) -> None:
        if not value > 0:
            raise ValidationError(f"{name} must be greater than 0")

    @staticmethod
    def at_least(value: int, minimum: int, name: str) -> None:
        if value < minimum:
            raise ValidationError(f"{name} must be at least {minimum}")


class NoiseModeValidator:
    """Validator for explicit noise-mode lists."""

    @staticmethod
    def validate(mode: NoiseMode) -> None:
        """
        Validate one noise mode.

        Raises:
            ValidationError: If the wavevector is zero or non-integer for a
                trigonometric phase, or the amplitude is negative
        """
        if mode.amplitude < 0:
            raise ValidationError("Noise amplitude must be non-negative")
        if mode.kx == 0 and mode.ky == 0:
            raise ValidationError("Noise wavevector or direction cannot be zero")
        if mode.phase is not Phase.CONST:
            if mode.kx != int(mode.kx) or mode.ky != int(mode.ky):
                raise ValidationError("Trigonometric noise modes need integer wavevectors")

    @staticmethod
    def parse(modes_str: str) -> tuple[NoiseMode, ...]:
        """
        Parse a mode list.

        Args:
            modes_str: Entries "kx ky phase amplitude" separated by ';'

        Returns:
            Tuple of NoiseMode

        Raises:
            ValidationError: If an entry is malformed
        """
        modes: list[NoiseMode] = []
        for entry in modes_str.split(";"):
            if not entry.strip():
                continue
            parts = entry.split()
            if len(parts) != 4:
                raise ValidationError(
                    "Noise modes must be in format 'kx ky phase amplitude; ...'"
                )
            try:
                phase = Phase.from_label(parts[2].lower())
            except KeyError as e:
                raise ValidationError(f"Unknown noise phase: {parts[2]}") from e
            try:
                mode = NoiseMode(float(parts[0]), float(parts[1]), phase, float(parts[3]))
            except ValueError as e:
                raise ValidationError(f"Invalid noise mode format: {e}") from e
            NoiseModeValidator.validate(mode)
            modes.append(mode)
        return tuple(modes)

    @staticmethod
    def serialize(modes: tuple[NoiseMode, ...]) -> str:
        return "; ".join(
            f"{mode.kx!r} {mode.ky!r} {mode.phase.label} {mode.amplitude!r}" for mode in modes
        )


@dataclass(frozen=True)
class ConfigKey:
    """Schema entry of one configuration key."""

    section: str
    name: str
    field: str
    kind: str
    minimum: Optional[float] = None
    strict: bool = False

    @property
    def path(self) -> str:
        return f"{self.section}.{self.name}"


CONFIG_SCHEMA = (
    ConfigKey("run", "mode", "mode", "mode"),
    ConfigKey("run", "dt", "dt", "float", 0.0, strict=True),
    ConfigKey("run", "t_end", "t_end", "float", 0.0, strict=True),
    ConfigKey("run", "seed", "seed", "int", 0),
    ConfigKey("run", "members", "members", "int", 1),
    ConfigKey("run", "workers", "workers", "int", 1),
    ConfigKey("run", "output_dir", "output_dir", "str"),
    ConfigKey("run", "snapshot_every", "snapshot_every", "int", 0),
    ConfigKey("run", "diagnostics_every", "diagnostics_every", "int", 1),
    ConfigKey("grid", "nx", "nx", "int", GRID_MIN_POINTS),
    ConfigKey("grid", "ny", "ny", "int", GRID_MIN_POINTS),
    ConfigKey("noise", "K", "noise_k", "int", 0),
    ConfigKey("noise", "gamma", "noise_gamma", "float", 0.0),
    ConfigKey("noise", "amplitude", "noise_amplitude", "float", 0.0),
    ConfigKey("noise", "kmax", "noise_kmax", "int", 1),
    ConfigKey("noise", "modes", "noise_modes", "modes"),
    ConfigKey("driver", "kind", "driver", "driver"),
    ConfigKey("driver", "theta", "ou_theta", "float", 0.0),
    ConfigKey("driver", "sigma", "ou_sigma", "float", 0.0),
    ConfigKey("physics", "epsilon", "epsilon", "float", 0.0, strict=True),
    ConfigKey("physics", "froude", "froude", "float", 0.0, strict=True),
    ConfigKey("physics", "coriolis", "coriolis", "float"),
    ConfigKey("physics", "topography", "topography", "float"),
    ConfigKey("physics", "depth", "depth", "float", 0.0, strict=True),
    ConfigKey("initial", "kind", "initial", "initial"),
    ConfigKey("initial", "amplitude", "initial_amplitude", "float", 0.0),
    ConfigKey("initial", "kmax", "initial_kmax", "int", 1),
    ConfigKey("initial", "seed", "initial_seed", "int", 0),
    ConfigKey("advection", "particles", "particles", "int", 1),
    ConfigKey("sde", "drift", "sde_drift", "float"),
    ConfigKey("sde", "volatility", "sde_volatility", "float"),
    ConfigKey("sde", "x0", "sde_x0", "float"),
    ConfigKey("lemma", "a", "lemma_a", "float"),
    ConfigKey("lemma", "b", "lemma_b", "float"),
    ConfigKey("lemma", "n_smooth", "lemma_n_smooth", "int", 1),
    ConfigKey("study", "levels", "study_levels", "int", 2),
)

REQUIRED_KEYS = ("run.mode", "run.dt", "run.t_end", "grid.nx", "grid.ny")
KEY_ALIASES = {"run.T": "run.t_end"}


class ConfigValidator:
    """Parser and serializer of the sectioned run configuration."""

    @staticmethod
    def _convert(key: ConfigKey, raw: str) -> Any:
        text = raw.strip()
        try:
            if key.kind == "int":
                value: Any = int(text)
            elif key.kind == "float":
                value = float(text)
                if not math.isfinite(value):
                    raise ConfigError(key.path, "value must be finite")
            elif key.kind == "str":
                if not text:
                    raise ConfigError(key.path, "value cannot be empty")
                value = text
            elif key.kind == "mode":
                value = Mode.from_label(text)
            elif key.kind == "driver":
                value = DriverKind(text)
            elif key.kind == "initial":
                value = InitialKind(text)
            else:
                value = NoiseModeValidator.parse(text)
        except ConfigError:
            raise
        except (KeyError, ValueError) as e:
            raise ConfigError(key.path, f"invalid {key.kind} value {text!r}") from e

        if key.minimum is not None:
            if key.strict and not value > key.minimum:
                raise ConfigError(key.path, f"must be greater than {key.minimum}")
            if not key.strict and value < key.minimum:
                raise ConfigError(key.path, f"must be at least {key.minimum}")
        return value

    @staticmethod
    def _check_consistency(values: dict[str, Any], explicit_k: bool) -> None:
        for name in ("nx", "ny"):
            if values[name] % 2 != 0:
                raise ConfigError(f"grid.{name}", "must be even")
        if values["workers"] > values["members"]:
            values["workers"] = values["members"]
        if values["particles"] > MAX_PARTICLES:
            raise ConfigError("advection.particles", f"must be at most {MAX_PARTICLES}")
        if values["lemma_b"] <= values["lemma_a"]:
            raise ConfigError("lemma.b", "must be greater than lemma.a")
        steps = values["t_end"] / values["dt"]
        if round(steps) < 1 or abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigError("run.dt", "t_end must be a whole number of steps")
        shallow_water = (InitialKind.REST, InitialKind.BALANCED)
        if values["mode"] is Mode.RSW and values["initial"] not in shallow_water:
            raise ConfigError("initial.kind", "rsw runs start from rest or balanced")
        if values["mode"] is not Mode.RSW and values["initial"] is InitialKind.BALANCED:
            raise ConfigError("initial.kind", "balanced states exist for rsw runs only")
        modes = values.get("noise_modes", ())
        if modes:
            if explicit_k and values["noise_k"] != len(modes):
                raise ConfigError("noise.K", "does not match the number of explicit modes")
            values["noise_k"] = len(modes)

    @staticmethod
    def parse(text: str) -> RunConfig:
        """
        Parse configuration text into a RunConfig.

        Args:
            text: INI-style sectioned key = value text

        Returns:
            Validated RunConfig with defaults for omitted keys

        Raises:
            ConfigError: On syntax errors, unknown keys, type mismatches,
                missing required keys or out-of-range values
        """
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str  # type: ignore[assignment,method-assign]
        try:
            parser.read_string(text)
        except configparser.Error as e:
            raise ConfigError("config", f"syntax error: {e}") from e

        by_path = {key.path: key for key in CONFIG_SCHEMA}
        raw: dict[str, str] = {}
        for section in parser.sections():
            for name, value in parser.items(section):
                path = KEY_ALIASES.get(f"{section}.{name}", f"{section}.{name}")
                if path not in by_path:
                    raise ConfigError(f"{section}.{name}", "unknown key")
                if path in raw:
                    raise ConfigError(path, "given more than once")
                raw[path] = value

        for path in REQUIRED_KEYS:
            if path not in raw:
                raise ConfigError(path, "missing required key")

        values = {
            by_path[path].field: ConfigValidator._convert(by_path[path], value)
            for path, value in raw.items()
        }
        defaults = {f.name: f.default for f in fields(RunConfig) if f.name not in values}
        merged = {**defaults, **values}
        ConfigValidator._check_consistency(merged, "noise.K" in raw)
        return RunConfig(**merged)

    @staticmethod
    def serialize(config: RunConfig) -> str:
        """
        Render a RunConfig as configuration text with every key explicit.

        Floats are written with repr so that parsing the text gives back an
        equal config.
        """
        sections: dict[str, list[str]] = {}
        for key in CONFIG_SCHEMA:
            value = getattr(config, key.field)
            if key.kind == "modes":
                if not value:
                    continue
                text = NoiseModeValidator.serialize(value)
            elif key.kind == "mode":
                text = value.label
            elif key.kind in ("driver", "initial"):
                text = value.value
            elif key.kind == "float":
                text = repr(float(value))
            else:
                text = str(value)
            sections.setdefault(key.section, []).append(f"{key.name} = {text}")
        blocks = [f"[{name}]\n" + "\n".join(lines) for name, lines in sections.items()]
        return "\n\n".join(blocks) + "\n"
