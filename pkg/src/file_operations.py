"""
File operations for paths, field snapshots, diagnostics and manifests.
"""

import csv
import json
import struct
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .constants import PATH_MAGIC, PATH_VERSION, SNAPSHOT_MAGIC, SNAPSHOT_VERSION, ComponentKind
from .formatters import DiagnosticsFormatter, GnuplotFormatter, TrajectoryFormatter
from .models import DiagnosticsRecord, DrivingPath, Grid2D, ParticleSet, TimeGrid

PATH_HEADER = struct.Struct("<4sIQI")
SNAPSHOT_HEADER = struct.Struct("<4sIIIId")


def _require_file(file_path: str) -> Path:
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {file_path}")
    return path


class PathFile:
    """Binary dump of driving paths (little-endian, component-major)."""

    @staticmethod
    def write(path: DrivingPath, file_path: str) -> None:
        """
        Write a path.

        Args:
            path: Driving path
            file_path: Destination file
        """
        header = PATH_HEADER.pack(PATH_MAGIC, PATH_VERSION, path.grid.n_steps, path.n_components)
        with open(file_path, "wb") as file:
            file.write(header)
            file.write(np.ascontiguousarray(path.values, dtype="<f8").tobytes())

    @staticmethod
    def read(file_path: str, seed: int = 0) -> DrivingPath:
        """
        Read a path written by PathFile.write.

        Args:
            file_path: Source file
            seed: Seed to record on the loaded path (the format does not store it)

        Returns:
            DrivingPath

        Raises:
            FileNotFoundError: If the file doesn't exist
            ValueError: If the header or payload is invalid
        """
        data = _require_file(file_path).read_bytes()
        if len(data) < PATH_HEADER.size:
            raise ValueError(f"Truncated path file: {file_path}")
        magic, version, n_steps, n_components = PATH_HEADER.unpack_from(data)
        if magic != PATH_MAGIC:
            raise ValueError(f"Not a path file: {file_path}")
        if version != PATH_VERSION:
            raise ValueError(f"Unsupported path file version {version}")
        expected = n_components * (n_steps + 1) * 8
        payload = data[PATH_HEADER.size :]
        if len(payload) != expected:
            raise ValueError(f"Path file payload has {len(payload)} bytes, expected {expected}")
        values = np.frombuffer(payload, dtype="<f8").reshape(n_components, n_steps + 1).copy()
        grid = TimeGrid(float(values[0, 0]), float(values[0, -1]), int(n_steps))
        kinds = (ComponentKind.FINITE_VARIATION,) + (ComponentKind.MARTINGALE,) * (
            n_components - 1
        )
        return DrivingPath(grid=grid, values=values, seed=seed, kinds=kinds)


class SnapshotFile:
    """Binary field snapshots (header, then row-major float64 per field)."""

    @staticmethod
    def write(file_path: str, grid: Grid2D, time: float, fields: Sequence[np.ndarray]) -> None:
        """
        Write a snapshot of one or more fields at one time.

        Raises:
            ValueError: If a field does not match the grid
        """
        for field in fields:
            if np.shape(field) != (grid.nx, grid.ny):
                raise ValueError(f"Field shape {np.shape(field)} does not match the grid")
        header = SNAPSHOT_HEADER.pack(
            SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.nx, grid.ny, len(fields), float(time)
        )
        with open(file_path, "wb") as file:
            file.write(header)
            for field in fields:
                file.write(np.ascontiguousarray(field, dtype="<f8").tobytes())

    @staticmethod
    def read(file_path: str) -> tuple[Grid2D, float, list[np.ndarray]]:
        """
        Read a snapshot.

        Returns:
            (grid, time, fields)

        Raises:
            FileNotFoundError: If the file doesn't exist
            ValueError: If the header or payload is invalid
        """
        data = _require_file(file_path).read_bytes()
        if len(data) < SNAPSHOT_HEADER.size:
            raise ValueError(f"Truncated snapshot file: {file_path}")
        magic, version, nx, ny, n_fields, time = SNAPSHOT_HEADER.unpack_from(data)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"Not a snapshot file: {file_path}")
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"Unsupported snapshot version {version}")
        payload = data[SNAPSHOT_HEADER.size :]
        if len(payload) != n_fields * nx * ny * 8:
            raise ValueError("Snapshot payload does not match its header")
        flat = np.frombuffer(payload, dtype="<f8").reshape(n_fields, nx, ny)
        fields = [flat[i].copy() for i in range(n_fields)]
        return Grid2D(nx, ny), float(time), fields


class DiagnosticsWriter:
    """CSV writer for diagnostics records; usable as a context manager."""

    def __init__(self, file_path: str, columns: Sequence[str]):
        self.columns = tuple(columns)
        self._file = open(file_path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(self.columns)

    def write(self, record: DiagnosticsRecord) -> None:
        self._writer.writerow(DiagnosticsFormatter.format_row(record, self.columns))

    def write_trajectory(
        self, step: int, time: float, particles: ParticleSet, values: np.ndarray, residual: float
    ) -> None:
        self._writer.writerows(
            TrajectoryFormatter.format_rows(step, time, particles, values, residual)
        )

    def write_row(self, cells: Sequence[Any]) -> None:
        self._writer.writerow([repr(float(c)) if isinstance(c, float) else c for c in cells])

    def close(self) -> None:
        self._file.close()

    def __enter__(self) -> "DiagnosticsWriter":
        return self

    def __exit__(self, *exc_info: Any) -> None:
        self.close()


def read_csv(file_path: str) -> tuple[list[str], list[list[str]]]:
    """
    Read a CSV file.

    Returns:
        (header, rows)

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If the file is empty
    """
    with open(_require_file(file_path), "r", encoding="utf-8", newline="") as file:
        rows = list(csv.reader(file))
    if not rows:
        raise ValueError(f"Empty CSV file: {file_path}")
    return rows[0], rows[1:]


class ManifestFile:
    """JSON run manifest."""

    @staticmethod
    def write(file_path: str, manifest: dict) -> None:
        with open(file_path, "w", encoding="utf-8") as file:
            json.dump(manifest, file, indent=2, sort_keys=True)
            file.write("\n")

    @staticmethod
    def read(file_path: str) -> dict:
        with open(_require_file(file_path), "r", encoding="utf-8") as file:
            return json.load(file)


class ConfigFile:
    """Reader for configuration text files."""

    @staticmethod
    def read(file_path: str) -> str:
        """
        Read configuration text.

        Raises:
            FileNotFoundError: If the file doesn't exist
            ValueError: If the file is not valid UTF-8
        """
        try:
            return _require_file(file_path).read_text(encoding="utf-8")
        except UnicodeDecodeError as e:
            raise ValueError(f"Configuration file is not UTF-8: {e}") from e

    @staticmethod
    def validate_file_path(file_path: str) -> Optional[str]:
        """
        Validate that a file path exists and is readable.

        Returns:
            Error message if invalid, None if valid
        """
        if not file_path:
            return "No file path provided"
        path = Path(file_path)
        if not path.exists():
            return f"File does not exist: {file_path}"
        if not path.is_file():
            return f"Path is not a file: {file_path}"
        try:
            with open(file_path, "r", encoding="utf-8"):
                pass
        except PermissionError:
            return f"No permission to read file: {file_path}"
        except OSError as e:
            return f"Error accessing file: {e}"
        return None


class GnuplotExporter:
    """Converts diagnostics CSV files into gnuplot-ready data files."""

    @staticmethod
    def export(csv_path: str, out_path: str) -> int:
        """
        Write a whitespace-separated copy of a CSV file.

        Returns:
            Number of data rows written
        """
        header, rows = read_csv(csv_path)
        Path(out_path).write_text(GnuplotFormatter.format(header, rows), encoding="utf-8")
        return len(rows)
