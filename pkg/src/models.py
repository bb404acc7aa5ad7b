"""
Data models for the SALT fluid laboratory.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .constants import (
    DEFAULT_CORIOLIS,
    DEFAULT_EPSILON,
    DEFAULT_FROUDE,
    DEFAULT_MEAN_DEPTH,
    DEFAULT_NOISE_AMPLITUDE,
    DEFAULT_NOISE_GAMMA,
    DEFAULT_NOISE_KMAX,
    DEFAULT_OU_SIGMA,
    DEFAULT_OU_THETA,
    DOMAIN_LENGTH,
    ComponentKind,
    DriverKind,
    Formulation,
    InitialKind,
    Mode,
    Phase,
)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid on [t0, t1] with n_steps steps."""

    t0: float
    t1: float
    n_steps: int

    def __post_init__(self) -> None:
        from .validators import TimeGridValidator

        TimeGridValidator.validate(self.t0, self.t1, self.n_steps)

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.n_steps

    def nodes(self) -> np.ndarray:
        """Grid nodes t0 + n*dt, n = 0..n_steps."""
        return self.t0 + np.arange(self.n_steps + 1) * self.dt

    def refined(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.t0, self.t1, self.n_steps * factor)


@dataclass(frozen=True, eq=False)
class DrivingPath:
    """
    Sampled realization of S_t = (t, W^1, ..., W^K).

    values has shape (K + 1, n_steps + 1); row 0 is the time grid itself.
    """

    grid: TimeGrid
    values: np.ndarray
    seed: int
    kinds: tuple[ComponentKind, ...]

    @property
    def n_components(self) -> int:
        return self.values.shape[0]

    @property
    def component_kinds(self) -> tuple[ComponentKind, ...]:
        return self.kinds

    @property
    def n_noise(self) -> int:
        """Number of martingale components K."""
        return self.values.shape[0] - 1

    def increment(self, n: int) -> np.ndarray:
        """
        Increment vector dS over step n (from node n to node n + 1).

        Entry 0 is the grid step dt exactly, so that steppers see dS[0] = dt.
        """
        inc = self.values[:, n + 1] - self.values[:, n]
        inc[0] = self.grid.dt
        return inc

    def increments(self) -> np.ndarray:
        """All step increments, shape (K + 1, n_steps), row 0 equal to dt."""
        inc = np.diff(self.values, axis=1)
        inc[0, :] = self.grid.dt
        return inc


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on [0, 2*pi)^2."""

    nx: int
    ny: int

    def __post_init__(self) -> None:
        from .validators import GridValidator

        GridValidator.validate(self.nx, self.ny)

    @property
    def hx(self) -> float:
        return DOMAIN_LENGTH / self.nx

    @property
    def hy(self) -> float:
        return DOMAIN_LENGTH / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.hx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) * self.hy

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays X, Y of shape (nx, ny), x along axis 0."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def refined(self, factor: int = 2) -> "Grid2D":
        return Grid2D(self.nx * factor, self.ny * factor)


@dataclass(eq=False)
class ScalarField:
    """Real periodic field sampled on a Grid2D."""

    grid: Grid2D
    data: np.ndarray


@dataclass(eq=False)
class VectorField2D:
    """Two-component periodic vector field."""

    grid: Grid2D
    u: ScalarField
    v: ScalarField

    def stack(self) -> np.ndarray:
        """Components as one array of shape (2, nx, ny)."""
        return np.stack([self.u.data, self.v.data])

    @classmethod
    def from_array(cls, grid: Grid2D, array: np.ndarray) -> "VectorField2D":
        return cls(grid, ScalarField(grid, array[0]), ScalarField(grid, array[1]))


@dataclass(frozen=True)
class NoiseMode:
    """
    One transport-noise mode.

    For trigonometric phases (kx, ky) is the integer wavevector. For the
    constant phase, (kx, ky) is the direction of the uniform field.
    """

    kx: float
    ky: float
    phase: Phase
    amplitude: float


@dataclass(eq=False)
class NoiseBasis:
    """Finite family of divergence-free fields xi_k with cached derivatives."""

    grid: Grid2D
    modes: tuple[NoiseMode, ...]
    xi: np.ndarray
    xi_gradients: np.ndarray
    xi_laplacians: np.ndarray

    @property
    def K(self) -> int:
        return len(self.modes)

    def field(self, k: int) -> VectorField2D:
        return VectorField2D.from_array(self.grid, self.xi[k])


class Integrand:
    """
    Stochastic derivative G^j of a compatible process, sampled on grid nodes.

    eval(n, j) returns the integrand value at node n for component j.
    """

    def __init__(
        self,
        func: Optional[Callable[[int, int], Any]] = None,
        table: Optional[np.ndarray] = None,
        shared: bool = False,
    ):
        if func is None and table is None:
            raise ValueError("Integrand needs either a function or a table")
        self._func = func
        self._table = None if table is None else np.asarray(table, dtype=float)
        self._shared = shared

    @classmethod
    def from_series(cls, series: np.ndarray) -> "Integrand":
        """The same node series (scalars or fields) for every component."""
        return cls(table=series, shared=True)

    @classmethod
    def from_components(cls, table: np.ndarray) -> "Integrand":
        """Separate node series per component, table[j][n]."""
        return cls(table=table, shared=False)

    def eval(self, n: int, j: int) -> Any:
        if self._table is None:
            return self._func(n, j)
        if self._shared:
            return self._table[n]
        return self._table[j][n]

    def series(self, j: int, n0: int, n1: int) -> np.ndarray:
        """Node values n0..n1 (inclusive) for component j."""
        if self._table is not None:
            rows = self._table if self._shared else self._table[j]
            return np.asarray(rows[n0 : n1 + 1], dtype=float)
        return np.array([self._func(n, j) for n in range(n0, n1 + 1)], dtype=float)


@dataclass(eq=False)
class EulerState:
    """Prognostic state of the incompressible SALT Euler solver."""

    time: float
    omega: Optional[ScalarField] = None
    u: Optional[VectorField2D] = None
    p0: Optional[ScalarField] = None
    pk: tuple[ScalarField, ...] = ()

    @property
    def formulation(self) -> Formulation:
        return Formulation.VORTICITY if self.omega is not None else Formulation.VELOCITY


@dataclass(frozen=True)
class EulerConfig:
    """Settings of one incompressible SALT Euler run."""

    grid: Grid2D
    dt: float
    t_end: float
    formulation: Formulation = Formulation.VORTICITY
    seed: int = 0
    noise_k: int = 0
    noise_gamma: float = DEFAULT_NOISE_GAMMA
    noise_amplitude: float = DEFAULT_NOISE_AMPLITUDE
    noise_kmax: int = DEFAULT_NOISE_KMAX
    noise_modes: tuple[NoiseMode, ...] = ()
    output_every: int = 1

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def time_grid(self) -> TimeGrid:
        return TimeGrid(0.0, self.n_steps * self.dt, self.n_steps)


@dataclass(eq=False)
class RswState:
    """Velocity and total depth of the shallow-water layer."""

    time: float
    u: VectorField2D
    eta: ScalarField


@dataclass(eq=False)
class RswParams:
    """
    Physical parameters of the rotating shallow-water model.

    R holds the periodic part of the rotation potential: curl R = f - mean(f).
    """

    epsilon: float
    froude: float
    f: ScalarField
    b: ScalarField
    R: VectorField2D

    @property
    def f_mean(self) -> float:
        return float(np.mean(self.f.data))


@dataclass(frozen=True, eq=False)
class ParticleSet:
    """Particle positions on the torus, with their starting points."""

    positions: np.ndarray
    initial: np.ndarray

    @property
    def count(self) -> int:
        return self.positions.shape[0]


@dataclass
class DiagnosticsRecord:
    """Monitored quantities at one output step."""

    step: int
    time: float
    metrics: dict[str, float] = field(default_factory=dict)

    def as_row(self, columns: tuple[str, ...]) -> list[float]:
        row: list[float] = []
        for column in columns:
            if column == "step":
                row.append(self.step)
            elif column == "time":
                row.append(self.time)
            else:
                row.append(self.metrics[column])
        return row


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration of the batch driver."""

    mode: Mode
    nx: int
    ny: int
    dt: float
    t_end: float
    seed: int = 0
    members: int = 1
    workers: int = 1
    output_dir: str = "runs"
    snapshot_every: int = 0
    diagnostics_every: int = 1
    noise_k: int = 0
    noise_gamma: float = DEFAULT_NOISE_GAMMA
    noise_amplitude: float = DEFAULT_NOISE_AMPLITUDE
    noise_kmax: int = DEFAULT_NOISE_KMAX
    noise_modes: tuple[NoiseMode, ...] = ()
    driver: DriverKind = DriverKind.BROWNIAN
    ou_theta: float = DEFAULT_OU_THETA
    ou_sigma: float = DEFAULT_OU_SIGMA
    epsilon: float = DEFAULT_EPSILON
    froude: float = DEFAULT_FROUDE
    coriolis: float = DEFAULT_CORIOLIS
    topography: float = 0.0
    depth: float = DEFAULT_MEAN_DEPTH
    initial: InitialKind = InitialKind.TAYLOR_GREEN
    initial_amplitude: float = 1.0
    initial_kmax: int = 4
    initial_seed: int = 1234
    particles: int = 100
    sde_drift: float = 0.0
    sde_volatility: float = 1.0
    sde_x0: float = 1.0
    lemma_a: float = 0.25
    lemma_b: float = 0.75
    lemma_n_smooth: int = 8
    study_levels: int = 3

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def grid(self) -> Grid2D:
        return Grid2D(self.nx, self.ny)

    @property
    def time_grid(self) -> TimeGrid:
        return TimeGrid(0.0, self.n_steps * self.dt, self.n_steps)

    def euler_config(self, seed: Optional[int] = None) -> EulerConfig:
        """Euler settings of one member; seed defaults to the run seed."""
        formulation = (
            Formulation.VELOCITY if self.mode is Mode.EULER_VELOCITY else Formulation.VORTICITY
        )
        return EulerConfig(
            grid=self.grid,
            dt=self.dt,
            t_end=self.t_end,
            formulation=formulation,
            seed=self.seed if seed is None else seed,
            noise_k=self.noise_k,
            noise_gamma=self.noise_gamma,
            noise_amplitude=self.noise_amplitude,
            noise_kmax=self.noise_kmax,
            noise_modes=self.noise_modes,
            output_every=self.diagnostics_every,
        )


@dataclass
class MemberResult:
    """Outcome of one ensemble member."""

    index: int
    seed: int
    directory: str
    status: str = "ok"
    last_valid_step: Optional[int] = None
    message: str = ""
    wall_time: float = 0.0
    summary: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class CheckResult:
    """Result of one invariant check: passed when value is on the right side of threshold."""

    name: str
    value: float
    threshold: float
    passed: bool
