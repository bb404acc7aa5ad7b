"""
Batch driver: configuration, single runs, ensembles and convergence studies.

Every run writes one directory per ensemble member (diagnostics CSV, driving
path dump, optional field snapshots) and a single manifest written by the
coordinating process. The manifest echoes the full configuration and the
member seeds, so a run directory can be regenerated from it alone.
"""

import argparse
import dataclasses
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np

from . import __version__
from .advection import advect_density, advect_scalar, kiw_residual, track_particles
from .checks import run_invariant_suite
from .constants import (
    ADVECTION_COLUMNS,
    DIAGNOSTICS_FILE,
    EULER_COLUMNS,
    LEMMA_COLUMNS,
    MANIFEST_FILE,
    MEMBER_PATTERN,
    PATH_FILE,
    RSW_COLUMNS,
    SDE_COLUMNS,
    SNAPSHOT_PATTERN,
    STUDY_FILE,
    TRAJECTORY_COLUMNS,
    TRAJECTORY_FILE,
    ExitCode,
    Formulation,
    Mode,
)
from .fields import interpolate_array, resample_array, velocity_from_vorticity_array
from .file_operations import (
    ConfigFile,
    DiagnosticsWriter,
    GnuplotExporter,
    ManifestFile,
    PathFile,
    SnapshotFile,
)
from .formatters import CheckFormatter, StudyFormatter
from .initial_conditions import (
    initial_rsw_state,
    initial_vorticity,
    random_particles,
    random_smooth_field,
)
from .models import (
    DiagnosticsRecord,
    DrivingPath,
    EulerConfig,
    EulerState,
    MemberResult,
    NoiseBasis,
    RswState,
    RunConfig,
    ScalarField,
    TimeGrid,
    VectorField2D,
)
from .noise_basis import make_basis_from_modes, make_fourier_basis
from .paths import refine, sample_path
from .salt_euler import integrate_euler, state_velocity
from .salt_rsw import integrate_rsw, make_rsw_params
from .stratonovich import (
    NonFiniteStateError,
    fit_order,
    fundamental_lemma_check,
    geometric_sde_errors,
    lemma_success_fraction,
    log2_ratios,
)
from .validators import ConfigError, ConfigValidator, ValidationError

logger = logging.getLogger(__name__)


def parse_config(text: str) -> RunConfig:
    """
    Parse configuration text.

    Raises:
        ConfigError: Naming the offending key
    """
    return ConfigValidator.parse(text)


def serialize_config(config: RunConfig) -> str:
    return ConfigValidator.serialize(config)


def build_basis(config: Union[RunConfig, EulerConfig]) -> NoiseBasis:
    """Explicit modes when configured, otherwise the first K Fourier modes."""
    if config.noise_modes:
        return make_basis_from_modes(config.grid, config.noise_modes)
    return make_fourier_basis(
        config.grid, config.noise_k, config.noise_gamma, config.noise_amplitude, config.noise_kmax
    )


def build_path(
    config: RunConfig, K: int, seed: int, time_grid: Optional[TimeGrid] = None
) -> DrivingPath:
    return sample_path(
        time_grid or config.time_grid,
        K,
        config.driver,
        seed,
        theta=config.ou_theta,
        sigma=config.ou_sigma,
    )


def initial_euler_state(config: RunConfig) -> EulerState:
    """Initial state in the formulation selected by the run mode."""
    grid = config.grid
    omega = initial_vorticity(
        grid, config.initial, config.initial_amplitude, config.initial_kmax, config.initial_seed
    )
    if config.euler_config().formulation is Formulation.VELOCITY:
        velocity = velocity_from_vorticity_array(omega.data, grid)
        return EulerState(time=0.0, u=VectorField2D.from_array(grid, velocity))
    return EulerState(time=0.0, omega=omega)


def _relative_drift(records: Sequence[DiagnosticsRecord], metric: str) -> float:
    first = records[0].metrics[metric]
    last = records[-1].metrics[metric]
    return float(abs(last - first) / abs(first)) if first else float(abs(last - first))


def _snapshot_writer(directory: Path, config: RunConfig) -> Callable[[int, Any], None]:
    grid = config.grid

    def write(step: int, state: Any) -> None:
        if isinstance(state, RswState):
            fields = [state.u.u.data, state.u.v.data, state.eta.data]
        elif state.omega is not None:
            fields = [state.omega.data]
        else:
            fields = list(state_velocity(state))
        target = directory / SNAPSHOT_PATTERN.format(step=step)
        SnapshotFile.write(str(target), grid, state.time, fields)

    return write


def _euler_member(config: RunConfig, seed: int, directory: Path) -> dict[str, Any]:
    euler = config.euler_config(seed)
    basis = build_basis(euler)
    path = build_path(config, basis.K, euler.seed, euler.time_grid)
    PathFile.write(path, str(directory / PATH_FILE))
    with DiagnosticsWriter(str(directory / DIAGNOSTICS_FILE), EULER_COLUMNS) as writer:
        _, records = integrate_euler(
            initial_euler_state(config),
            basis,
            path,
            diagnostics_every=euler.output_every,
            snapshot_every=config.snapshot_every,
            on_record=writer.write,
            on_snapshot=_snapshot_writer(directory, config),
        )
    return {
        "energy_drift": _relative_drift(records, "energy"),
        "enstrophy_drift": _relative_drift(records, "enstrophy"),
        "div_rms_max": max(r.metrics["div_rms"] for r in records),
    }


def _rsw_member(config: RunConfig, seed: int, directory: Path) -> dict[str, Any]:
    grid = config.grid
    params = make_rsw_params(
        grid, config.epsilon, config.froude, config.coriolis, config.topography
    )
    state = initial_rsw_state(
        params,
        config.initial,
        config.depth,
        config.initial_amplitude,
        config.initial_kmax,
        config.initial_seed,
    )
    basis = build_basis(config)
    path = build_path(config, basis.K, seed)
    PathFile.write(path, str(directory / PATH_FILE))
    with DiagnosticsWriter(str(directory / DIAGNOSTICS_FILE), RSW_COLUMNS) as writer:
        _, records, _ = integrate_rsw(
            state,
            params,
            basis,
            path,
            diagnostics_every=config.diagnostics_every,
            snapshot_every=config.snapshot_every,
            on_record=writer.write,
            on_snapshot=_snapshot_writer(directory, config),
        )
    return {
        "mass_drift": _relative_drift(records, "mass"),
        "energy_drift": _relative_drift(records, "energy"),
        "eta_min": min(r.metrics["eta_min"] for r in records),
    }


def _advection_setup(
    config: RunConfig,
) -> tuple[VectorField2D, ScalarField, ScalarField, NoiseBasis]:
    grid = config.grid
    omega = initial_vorticity(
        grid, config.initial, config.initial_amplitude, config.initial_kmax, config.initial_seed
    )
    velocity = VectorField2D.from_array(grid, velocity_from_vorticity_array(omega.data, grid))
    scalar = random_smooth_field(grid, config.initial_seed, config.initial_kmax, 1.0, component=1)
    bump = random_smooth_field(grid, config.initial_seed, config.initial_kmax, 0.25, component=2)
    density = ScalarField(grid, 1.0 + bump.data)
    return velocity, scalar, density, build_basis(config)


def _advection_member(config: RunConfig, seed: int, directory: Path) -> dict[str, Any]:
    velocity, scalar, density, basis = _advection_setup(config)
    path = build_path(config, basis.K, seed)
    PathFile.write(path, str(directory / PATH_FILE))
    particles = random_particles(config.particles, config.initial_seed)

    scalars = advect_scalar(scalar, velocity, basis, path)
    densities = advect_density(density, velocity, basis, path)
    tracks = track_particles(particles, velocity, basis, path)
    residuals = kiw_residual(scalars, tracks)
    nodes = path.grid.nodes()
    area = config.grid.cell_area

    n_steps = path.grid.n_steps
    diagnostics_path = str(directory / DIAGNOSTICS_FILE)
    trajectory_path = str(directory / TRAJECTORY_FILE)
    writer = DiagnosticsWriter(diagnostics_path, ADVECTION_COLUMNS)
    trajectories = DiagnosticsWriter(trajectory_path, TRAJECTORY_COLUMNS)
    with writer, trajectories:
        for n in range(n_steps + 1):
            if n % config.diagnostics_every and n != n_steps:
                continue
            a = scalars[n].data
            metrics = {
                "kiw_residual": float(residuals[n]),
                "scalar_min": float(np.min(a)),
                "scalar_max": float(np.max(a)),
                "density_mass": float(np.sum(densities[n].data) * area),
            }
            writer.write(DiagnosticsRecord(step=n, time=float(nodes[n]), metrics=metrics))
            values = interpolate_array(a, config.grid, tracks[n].positions)
            trajectories.write_trajectory(
                n, float(nodes[n]), tracks[n], values, float(residuals[n])
            )
    mass = np.sum(densities[0].data) * area
    return {
        "kiw_residual": float(residuals[-1]),
        "density_mass_drift": float(abs(np.sum(densities[-1].data) * area - mass) / abs(mass)),
    }


def _sde_member(config: RunConfig, seed: int, directory: Path) -> dict[str, Any]:
    path = build_path(config, 1, seed)
    PathFile.write(path, str(directory / PATH_FILE))
    steps, errors = geometric_sde_errors(
        path, config.sde_drift, config.sde_volatility, config.sde_x0, config.study_levels, seed
    )
    with DiagnosticsWriter(str(directory / DIAGNOSTICS_FILE), SDE_COLUMNS) as writer:
        for level, (dt, error) in enumerate(zip(steps, errors)):
            writer.write_row([level, float(dt), float(error)])
    order = fit_order(steps, errors) if len(steps) > 1 else float("nan")
    logger.info("Member seed %d: fitted strong order %.3f", seed, order)
    return {"steps": steps.tolist(), "errors": errors.tolist(), "order": order}


def _lemma_member(config: RunConfig, seed: int, directory: Path) -> dict[str, Any]:
    path = build_path(config, 1, seed)
    PathFile.write(path, str(directory / PATH_FILE))
    errors = fundamental_lemma_check(
        path.values[1], path, 1, config.lemma_a, config.lemma_b, config.lemma_n_smooth
    )
    span = config.lemma_b - config.lemma_a
    with DiagnosticsWriter(str(directory / DIAGNOSTICS_FILE), LEMMA_COLUMNS) as writer:
        for m, error in enumerate(errors, start=1):
            writer.write_row([m, span * 2.0**-m, float(error)])
    return {"errors": errors.tolist()}


MEMBER_RUNNERS: dict[Mode, Callable[[RunConfig, int, Path], dict[str, Any]]] = {
    Mode.EULER_VORTICITY: _euler_member,
    Mode.EULER_VELOCITY: _euler_member,
    Mode.RSW: _rsw_member,
    Mode.ADVECTION_TEST: _advection_member,
    Mode.SDE_CONVERGENCE: _sde_member,
    Mode.LEMMA_CHECK: _lemma_member,
}


def run_member(config: RunConfig, index: int, seed: int, directory: str) -> MemberResult:
    """
    Run one ensemble member into its own directory.

    Solver aborts are recorded in the result rather than raised.

    Raises:
        ValidationError: If the configuration cannot be realized
    """
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    result = MemberResult(index=index, seed=seed, directory=target.name)
    logger.info("Member %d (seed %d) started: %s", index, seed, config.mode.label)
    start = time.perf_counter()
    try:
        result.summary = MEMBER_RUNNERS[config.mode](config, seed, target)
    except NonFiniteStateError as e:
        result.status = "aborted"
        result.last_valid_step = e.step
        result.message = str(e)
        logger.error("Member %d aborted: %s", index, e)
    result.wall_time = time.perf_counter() - start
    logger.info("Member %d finished with status %s", index, result.status)
    return result


def _ensemble_summary(config: RunConfig, results: Sequence[MemberResult]) -> dict[str, Any]:
    completed = [r for r in results if r.status == "ok"]
    if not completed:
        return {}
    if config.mode is Mode.LEMMA_CHECK:
        sequences = [np.asarray(r.summary["errors"]) for r in completed]
        rms = np.sqrt(np.mean(np.square(sequences), axis=0))
        return {
            "success_fraction": lemma_success_fraction(sequences),
            "rms_reduction": float(rms[0] / rms[-1]),
        }
    if config.mode is Mode.SDE_CONVERGENCE:
        steps = completed[0].summary["steps"]
        rms = np.sqrt(np.mean(np.square([r.summary["errors"] for r in completed]), axis=0))
        order = fit_order(steps, rms) if len(steps) > 1 else float("nan")
        return {"rms_errors": rms.tolist(), "order": order}
    keys = completed[0].summary.keys()
    return {key: float(np.median([r.summary[key] for r in completed])) for key in keys}


def run(config: RunConfig) -> ExitCode:
    """
    Execute a run or an ensemble and write its artifacts.

    Member i uses seed config.seed + i and writes member_<i> under the output
    directory; members run in a process pool when workers > 1.

    Returns:
        ExitCode.OK, or ExitCode.SOLVER_ABORT when any member aborted

    Raises:
        ValidationError: If the configuration cannot be realized
    """
    output = Path(config.output_dir)
    output.mkdir(parents=True, exist_ok=True)
    seeds = [config.seed + i for i in range(config.members)]
    directories = [str(output / MEMBER_PATTERN.format(index=i)) for i in range(config.members)]
    logger.info(
        "Run %s: %d member(s), %d step(s), %d worker(s)",
        config.mode.label,
        config.members,
        config.n_steps,
        config.workers,
    )
    start = time.perf_counter()
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [
                pool.submit(run_member, config, i, seed, directory)
                for i, (seed, directory) in enumerate(zip(seeds, directories))
            ]
            results = [future.result() for future in futures]
    else:
        results = [
            run_member(config, i, seed, directory)
            for i, (seed, directory) in enumerate(zip(seeds, directories))
        ]

    aborted = [r for r in results if r.status != "ok"]
    manifest = {
        "version": __version__,
        "mode": config.mode.label,
        "config": serialize_config(config),
        "seed": config.seed,
        "status": "aborted" if aborted else "ok",
        "wall_time": time.perf_counter() - start,
        "members": [dataclasses.asdict(r) for r in results],
        "summary": _ensemble_summary(config, results),
    }
    ManifestFile.write(str(output / MANIFEST_FILE), manifest)
    logger.info("Run finished: %d of %d member(s) aborted", len(aborted), len(results))
    return ExitCode.SOLVER_ABORT if aborted else ExitCode.OK


def _level_paths(config: RunConfig, K: int, seed: int, count: int) -> list[DrivingPath]:
    paths = [build_path(config, K, seed)]
    for level in range(1, count):
        paths.append(refine(paths[-1], 2, seed + level))
    return paths


def _euler_final(config: RunConfig, basis: NoiseBasis, path: DrivingPath) -> np.ndarray:
    state, _ = integrate_euler(initial_euler_state(config), basis, path)
    return state.omega.data if state.omega is not None else state_velocity(state)


def _rsw_final(config: RunConfig, basis: NoiseBasis, path: DrivingPath) -> np.ndarray:
    params = make_rsw_params(
        config.grid, config.epsilon, config.froude, config.coriolis, config.topography
    )
    state = initial_rsw_state(
        params,
        config.initial,
        config.depth,
        config.initial_amplitude,
        config.initial_kmax,
        config.initial_seed,
    )
    final, _, _ = integrate_rsw(state, params, basis, path)
    return np.concatenate([final.u.stack(), final.eta.data[None]])


def _self_convergence(
    config: RunConfig,
    seed: int,
    levels: int,
    solve: Callable[[RunConfig, NoiseBasis, DrivingPath], np.ndarray],
) -> tuple[np.ndarray, np.ndarray]:
    basis = build_basis(config)
    paths = _level_paths(config, basis.K, seed, levels + 1)
    finals = [solve(config, basis, path) for path in paths]
    area = config.grid.cell_area
    errors = np.array(
        [np.sqrt(np.sum((finals[i] - finals[i + 1]) ** 2) * area) for i in range(levels)]
    )
    steps = np.array([path.grid.dt for path in paths[:levels]])
    return steps, errors


def _kiw_levels(config: RunConfig, seed: int, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Invariance residual with dt halved and the grid doubled at every level."""
    coarse_velocity, coarse_scalar, _, coarse_basis = _advection_setup(config)
    particles = random_particles(config.particles, config.initial_seed)
    steps = np.empty(levels)
    errors = np.empty(levels)
    for level, path in enumerate(_level_paths(config, coarse_basis.K, seed, levels)):
        scale = 2**level
        refined = dataclasses.replace(config, nx=config.nx * scale, ny=config.ny * scale)
        grid = refined.grid
        velocity = VectorField2D.from_array(
            grid, resample_array(coarse_velocity.stack(), config.grid, grid)
        )
        scalar = ScalarField(grid, resample_array(coarse_scalar.data, config.grid, grid))
        basis = build_basis(refined)
        scalars = advect_scalar(scalar, velocity, basis, path)
        tracks = track_particles(particles, velocity, basis, path)
        steps[level] = path.grid.dt
        errors[level] = kiw_residual([scalars[0], scalars[-1]], [tracks[0], tracks[-1]])[-1]
    return steps, errors


def _study_member(config: RunConfig, seed: int, levels: int) -> tuple[str, np.ndarray, np.ndarray]:
    mode = config.mode
    if mode is Mode.SDE_CONVERGENCE:
        steps, errors = geometric_sde_errors(
            build_path(config, 1, seed),
            config.sde_drift,
            config.sde_volatility,
            config.sde_x0,
            levels,
            seed,
        )
        return "strong_error", steps, errors
    if mode in (Mode.EULER_VORTICITY, Mode.EULER_VELOCITY):
        name = "vorticity" if mode is Mode.EULER_VORTICITY else "velocity"
        return (name,) + _self_convergence(config, seed, levels, _euler_final)
    if mode is Mode.RSW:
        return ("state",) + _self_convergence(config, seed, levels, _rsw_final)
    if mode is Mode.ADVECTION_TEST:
        return ("kiw_residual",) + _kiw_levels(config, seed, levels)
    raise ConfigError("run.mode", f"no convergence study is defined for {mode.label}")


def convergence_study(config: RunConfig, levels: int) -> dict[str, Any]:
    """
    Nested-dt study on Brownian-bridge-refined paths.

    Level l uses dt / 2^l on the refinement of the level l - 1 path; the
    advection-test study also doubles the grid at every level. Modes with
    an exact oracle (sde-convergence, advection-test) report the error at each
    level; the solver modes report the L2 difference between consecutive levels.
    Errors are combined across members by RMS for sde-convergence and by the
    median otherwise.

    Returns:
        Report with per-metric errors, log2 ratios and fitted order

    Raises:
        ValidationError: If levels < 2 or the mode has no study
    """
    if levels < 2:
        raise ConfigError("study.levels", "must be at least 2")
    logger.info("Convergence study %s: %d level(s)", config.mode.label, levels)
    name = ""
    steps = np.empty(0)
    per_member = []
    for i in range(config.members):
        name, steps, errors = _study_member(config, config.seed + i, levels)
        per_member.append(errors)
    stacked = np.array(per_member)
    if config.mode is Mode.SDE_CONVERGENCE:
        combined = np.sqrt(np.mean(stacked**2, axis=0))
    else:
        combined = np.median(stacked, axis=0)
    return {
        "mode": config.mode.label,
        "levels": levels,
        "members": config.members,
        "steps": steps.tolist(),
        "metrics": {
            name: {
                "errors": combined.tolist(),
                "log2_ratios": log2_ratios(combined).tolist(),
                "order": fit_order(steps, combined),
            }
        },
    }


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="salt-lab", description="Stochastic fluid laboratory driven by semimartingales"
    )
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    parser.add_argument("--quiet", action="store_true", help="log warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run a configuration (optionally an ensemble)")
    run_parser.add_argument("config", help="configuration file")
    run_parser.add_argument("--seed", type=int, help="override run.seed")
    run_parser.add_argument("--members", type=int, help="override run.members")
    run_parser.add_argument("--out", help="override run.output_dir")

    study_parser = commands.add_parser("study", help="nested-dt convergence study")
    study_parser.add_argument("config", help="configuration file")
    study_parser.add_argument("--levels", type=int, help="override study.levels")

    commands.add_parser("check", help="run the built-in invariant suite")

    export_parser = commands.add_parser("export", help="convert a CSV file for gnuplot")
    export_parser.add_argument("csv", help="diagnostics CSV file")
    export_parser.add_argument("--out", help="output .dat file (default: next to the CSV)")
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    problem = ConfigFile.validate_file_path(args.config)
    if problem:
        raise ConfigError("config", problem)
    config = parse_config(ConfigFile.read(args.config))
    overrides: dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError("run.seed", "must be at least 0")
        overrides["seed"] = args.seed
    if getattr(args, "members", None) is not None:
        if args.members < 1:
            raise ConfigError("run.members", "must be at least 1")
        overrides["members"] = args.members
        overrides["workers"] = min(config.workers, args.members)
    if getattr(args, "out", None):
        overrides["output_dir"] = args.out
    return dataclasses.replace(config, **overrides) if overrides else config


def _command_run(args: argparse.Namespace) -> ExitCode:
    return run(_load_config(args))


def _command_study(args: argparse.Namespace) -> ExitCode:
    config = _load_config(args)
    levels = config.study_levels if args.levels is None else args.levels
    report = convergence_study(config, levels)
    output = Path(config.output_dir)
    output.mkdir(parents=True, exist_ok=True)
    ManifestFile.write(str(output / STUDY_FILE), report)
    print(StudyFormatter.format(report))
    return ExitCode.OK


def _command_check(args: argparse.Namespace) -> ExitCode:
    results = run_invariant_suite()
    print(CheckFormatter.format(results))
    return ExitCode.OK if all(r.passed for r in results) else ExitCode.CHECK_FAILURE


def _command_export(args: argparse.Namespace) -> ExitCode:
    out = args.out or str(Path(args.csv).with_suffix(".dat"))
    rows = GnuplotExporter.export(args.csv, out)
    logger.info("Wrote %d row(s) to %s", rows, out)
    return ExitCode.OK


COMMANDS: dict[str, Callable[[argparse.Namespace], ExitCode]] = {
    "run": _command_run,
    "study": _command_study,
    "check": _command_check,
    "export": _command_export,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Command-line entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return int(COMMANDS[args.command](args))
    except ValidationError as e:
        logger.error("Configuration error: %s", e)
        return int(ExitCode.CONFIG_ERROR)
    except (FileNotFoundError, ValueError) as e:
        logger.error("%s", e)
        return int(ExitCode.CONFIG_ERROR)
    except NonFiniteStateError as e:
        logger.error("Solver aborted: %s", e)
        return int(ExitCode.SOLVER_ABORT)


if __name__ == "__main__":
    sys.exit(main())
