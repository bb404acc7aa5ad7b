"""
Test suite for the file_operations module.
"""

import numpy as np
import pytest

from src.constants import PATH_MAGIC, PATH_VERSION
from src.file_operations import (
    PATH_HEADER,
    ConfigFile,
    DiagnosticsWriter,
    GnuplotExporter,
    ManifestFile,
    PathFile,
    SnapshotFile,
    read_csv,
)
from src.models import DiagnosticsRecord, Grid2D, ParticleSet, TimeGrid
from src.paths import sample_brownian


class TestPathFile:
    """Tests for PathFile class."""

    def test_write_and_read(self, tmp_path):
        """Test that a written path reads back bit for bit."""
        path = sample_brownian(TimeGrid(0.0, 1.0, 16), 3, seed=5)
        target = tmp_path / "path.smdp"
        PathFile.write(path, str(target))
        loaded = PathFile.read(str(target), seed=5)
        np.testing.assert_array_equal(loaded.values, path.values)
        assert loaded.grid == path.grid
        assert loaded.kinds == path.kinds
        assert loaded.seed == 5

    def test_file_size(self, tmp_path):
        """Test the header plus float64 payload layout."""
        path = sample_brownian(TimeGrid(0.0, 1.0, 4), 1, seed=0)
        target = tmp_path / "path.smdp"
        PathFile.write(path, str(target))
        data = target.read_bytes()
        assert data[:4] == PATH_MAGIC
        assert len(data) == PATH_HEADER.size + 2 * 5 * 8

    def test_missing_file(self, tmp_path):
        """Test reading a file that does not exist."""
        with pytest.raises(FileNotFoundError):
            PathFile.read(str(tmp_path / "missing.smdp"))

    def test_bad_magic(self, tmp_path):
        """Test a file with the wrong magic."""
        target = tmp_path / "bad.smdp"
        target.write_bytes(PATH_HEADER.pack(b"XXXX", 1, 0, 1) + b"\0" * 8)
        with pytest.raises(ValueError, match="Not a path file"):
            PathFile.read(str(target))

    def test_truncated_payload(self, tmp_path):
        """Test a payload shorter than the header promises."""
        path = sample_brownian(TimeGrid(0.0, 1.0, 4), 1, seed=0)
        target = tmp_path / "path.smdp"
        PathFile.write(path, str(target))
        target.write_bytes(target.read_bytes()[:-8])
        with pytest.raises(ValueError, match="expected 80"):
            PathFile.read(str(target))

    def test_truncated_header(self, tmp_path):
        """Test a file shorter than the header."""
        target = tmp_path / "short.smdp"
        target.write_bytes(b"SMDP")
        with pytest.raises(ValueError, match="Truncated"):
            PathFile.read(str(target))

    def test_degenerate_time_row(self, tmp_path):
        """Test that a path whose time row does not advance is refused."""
        target = tmp_path / "flat.smdp"
        target.write_bytes(PATH_HEADER.pack(PATH_MAGIC, PATH_VERSION, 2, 1) + b"\0" * 24)
        with pytest.raises(ValueError, match="greater than its start"):
            PathFile.read(str(target))


class TestSnapshotFile:
    """Tests for SnapshotFile class."""

    def test_write_and_read(self, tmp_path):
        """Test several fields in one snapshot."""
        grid = Grid2D(8, 16)
        rng = np.random.default_rng(0)
        fields = [rng.standard_normal((8, 16)) for _ in range(3)]
        target = tmp_path / "snapshot_000010.sfld"
        SnapshotFile.write(str(target), grid, 0.125, fields)
        loaded_grid, time, loaded = SnapshotFile.read(str(target))
        assert loaded_grid == grid
        assert time == 0.125
        for original, field in zip(fields, loaded):
            np.testing.assert_array_equal(field, original)

    def test_shape_mismatch(self, tmp_path):
        """Test that fields must match the grid."""
        with pytest.raises(ValueError, match="does not match"):
            SnapshotFile.write(str(tmp_path / "s.sfld"), Grid2D(8, 8), 0.0, [np.zeros((4, 4))])

    def test_wrong_file_type(self, tmp_path):
        """Test reading a path file as a snapshot."""
        path = sample_brownian(TimeGrid(0.0, 1.0, 64), 1, seed=0)
        target = tmp_path / "path.smdp"
        PathFile.write(path, str(target))
        with pytest.raises(ValueError, match="Not a snapshot file"):
            SnapshotFile.read(str(target))


class TestDiagnosticsWriter:
    """Tests for DiagnosticsWriter and read_csv."""

    def test_records_and_header(self, tmp_path):
        """Test that the header and rows follow the column order."""
        target = tmp_path / "diagnostics.csv"
        with DiagnosticsWriter(str(target), ("step", "time", "mass")) as writer:
            writer.write(DiagnosticsRecord(0, 0.0, {"mass": 39.5}))
            writer.write(DiagnosticsRecord(5, 0.05, {"mass": 39.25}))
        header, rows = read_csv(str(target))
        assert header == ["step", "time", "mass"]
        assert rows == [["0", "0.0", "39.5"], ["5", "0.05", "39.25"]]

    def test_trajectory_rows(self, tmp_path):
        """Test per-particle rows."""
        target = tmp_path / "trajectories.csv"
        positions = np.array([[1.0, 2.0]])
        particles = ParticleSet(positions=positions, initial=positions)
        with DiagnosticsWriter(str(target), ("step", "time", "particle_id")) as writer:
            writer.write_trajectory(1, 0.1, particles, np.array([0.5]), 0.0)
        _, rows = read_csv(str(target))
        assert rows == [["1", "0.1", "0", "1.0", "2.0", "0.5", "0.0"]]

    def test_write_row_uses_repr(self, tmp_path):
        """Test that free-form rows keep full float precision."""
        target = tmp_path / "sde.csv"
        with DiagnosticsWriter(str(target), ("level", "dt", "strong_error")) as writer:
            writer.write_row([0, 1.0 / 3.0, 2e-17])
        assert target.read_text().splitlines()[1] == f"0,{1.0 / 3.0!r},2e-17"

    def test_read_empty_csv(self, tmp_path):
        """Test that an empty file is rejected."""
        target = tmp_path / "empty.csv"
        target.write_text("")
        with pytest.raises(ValueError, match="Empty CSV"):
            read_csv(str(target))


class TestManifestFile:
    """Tests for ManifestFile class."""

    def test_write_and_read(self, tmp_path):
        """Test JSON round trip with sorted keys."""
        target = tmp_path / "manifest.json"
        ManifestFile.write(str(target), {"status": "ok", "members": [{"index": 0}]})
        assert ManifestFile.read(str(target)) == {"members": [{"index": 0}], "status": "ok"}
        assert target.read_text().index('"members"') < target.read_text().index('"status"')


class TestConfigFile:
    """Tests for ConfigFile class."""

    def test_read(self, tmp_path):
        """Test reading UTF-8 text."""
        target = tmp_path / "run.ini"
        target.write_text("[run]\nmode = rsw\n", encoding="utf-8")
        assert ConfigFile.read(str(target)) == "[run]\nmode = rsw\n"

    def test_read_not_utf8(self, tmp_path):
        """Test that invalid bytes raise ValueError."""
        target = tmp_path / "run.ini"
        target.write_bytes(b"\xff\xfe\x00bad")
        with pytest.raises(ValueError, match="not UTF-8"):
            ConfigFile.read(str(target))

    def test_validate_file_path(self, tmp_path):
        """Test the path validation messages."""
        target = tmp_path / "run.ini"
        target.write_text("[run]\n")
        assert ConfigFile.validate_file_path(str(target)) is None
        assert ConfigFile.validate_file_path("") == "No file path provided"
        assert "File does not exist" in ConfigFile.validate_file_path(str(tmp_path / "no.ini"))
        assert "Path is not a file" in ConfigFile.validate_file_path(str(tmp_path))


class TestGnuplotExporter:
    """Tests for GnuplotExporter class."""

    def test_export(self, tmp_path):
        """Test CSV to whitespace-separated conversion."""
        source = tmp_path / "diagnostics.csv"
        source.write_text("step,time,energy\n0,0.0,1.5\n1,0.1,1.25\n")
        target = tmp_path / "diagnostics.dat"
        assert GnuplotExporter.export(str(source), str(target)) == 2
        assert target.read_text() == "# step time energy\n0 0.0 1.5\n1 0.1 1.25\n"
