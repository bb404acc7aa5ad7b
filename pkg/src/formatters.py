"""
Output formatters for the SALT fluid laboratory.

Floats are written with repr so that reruns of one configuration produce
byte-identical files and values survive a text round trip unchanged.
"""

from typing import Sequence

import numpy as np

from .models import DiagnosticsRecord, ParticleSet


def format_float(value: float) -> str:
    return repr(float(value))


class DiagnosticsFormatter:
    """Formatter for per-step diagnostics rows."""

    @staticmethod
    def format_row(record: DiagnosticsRecord, columns: Sequence[str]) -> list[str]:
        """
        Render one record as CSV cells in column order.

        Args:
            record: Diagnostics record
            columns: Column names; "step" is written as an integer

        Returns:
            List of cell strings
        """
        cells = []
        for column, value in zip(columns, record.as_row(tuple(columns))):
            cells.append(str(int(value)) if column == "step" else format_float(value))
        return cells


class TrajectoryFormatter:
    """Formatter for particle trajectory rows."""

    @staticmethod
    def format_rows(
        step: int,
        time: float,
        particles: ParticleSet,
        values: np.ndarray,
        residual: float,
    ) -> list[list[str]]:
        """One row per particle: step, time, particle_id, x, y, a_value, residual."""
        rows = []
        for pid, (position, value) in enumerate(zip(particles.positions, values)):
            rows.append(
                [
                    str(step),
                    format_float(time),
                    str(pid),
                    format_float(position[0]),
                    format_float(position[1]),
                    format_float(value),
                    format_float(residual),
                ]
            )
        return rows


class StudyFormatter:
    """Formatter for convergence-study reports."""

    @staticmethod
    def format(report: dict) -> str:
        lines = [f"Convergence study: {report['mode']} ({report['levels']} levels)"]
        for metric, result in report["metrics"].items():
            ratios = ", ".join(f"{r:.3f}" for r in result["log2_ratios"])
            lines.append(f"  {metric}: order {result['order']:.3f} (log2 ratios: {ratios})")
        return "\n".join(lines)


class CheckFormatter:
    """Formatter for invariant-suite results."""

    @staticmethod
    def format(results: Sequence) -> str:
        width = max((len(r.name) for r in results), default=0)
        lines = []
        for result in results:
            status = "PASS" if result.passed else "FAIL"
            lines.append(
                f"{status}  {result.name:<{width}}  value={result.value:.3e}  "
                f"threshold={result.threshold:.3e}"
            )
        passed = sum(1 for r in results if r.passed)
        lines.append(f"{passed}/{len(results)} checks passed")
        return "\n".join(lines)


class GnuplotFormatter:
    """Formatter for whitespace-separated gnuplot data files."""

    @staticmethod
    def format(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
        lines = ["# " + " ".join(header)]
        lines.extend(" ".join(row) for row in rows)
        return "\n".join(lines) + "\n"
