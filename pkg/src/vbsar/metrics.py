"""Scoring and bookkeeping: RMSE, kinetic energy, timing, run ledgers.

RMSE is scored per cross-track row (each row is one inversion problem).
Kinetic energy is a field-level aggregate over all grid cells with unit
water density, KE = 0.5 * sum(u^2); the cell-area factor is omitted
because it cancels in the relative error. Ledger records are one line
per (row, solver) attempt; the summary aggregates per solver.
"""

from __future__ import annotations

import csv
import threading
import time
from dataclasses import dataclass

import numpy as np

LEDGER_COLUMNS = ("row", "solver", "iterations", "converged",
                  "rmse_vs_true", "wall_seconds", "error")
SUMMARY_COLUMNS = ("solver", "rows_completed", "rows_failed", "median_rmse",
                   "kinetic_energy", "ke_relative_error", "total_wall_seconds")
FLOAT_FORMAT = "%.17g"


def rmse(u_est: np.ndarray, u_true: np.ndarray) -> float:
    """Root-mean-square error between two equal-length rows."""
    u_est = np.asarray(u_est, dtype=float)
    u_true = np.asarray(u_true, dtype=float)
    if u_est.shape != u_true.shape:
        raise ValueError(f"shape mismatch: {u_est.shape} vs {u_true.shape}")
    return float(np.sqrt(np.mean((u_est - u_true) ** 2)))


def kinetic_energy(u: np.ndarray) -> float:
    """Bulk kinetic energy 0.5 * sum(u^2), unit density, cell weighted."""
    u = np.asarray(u, dtype=float)
    return 0.5 * float(np.sum(u * u))


def ke_relative_error(u_est: np.ndarray, u_true: np.ndarray) -> float | None:
    """|KE(est) - KE(true)| / KE(true); None (missing) when KE(true) = 0."""
    u_est = np.asarray(u_est, dtype=float)
    u_true = np.asarray(u_true, dtype=float)
    if u_est.shape != u_true.shape:
        raise ValueError(f"shape mismatch: {u_est.shape} vs {u_true.shape}")
    ke_true = kinetic_energy(u_true)
    if ke_true == 0.0:
        return None
    return abs(kinetic_energy(u_est) - ke_true) / ke_true


def timed(operation, *args, **kwargs):
    """Run operation, returning (result, wall-clock seconds)."""
    start = time.perf_counter()
    result = operation(*args, **kwargs)
    return result, time.perf_counter() - start


def format_float(value) -> str:
    if value is None:
        return ""
    return FLOAT_FORMAT % float(value)


@dataclass(frozen=True)
class LedgerRecord:
    """One (row, solver) attempt: metrics on success, message on failure."""
    row: int
    solver: str
    iterations: int = 0
    converged: bool = False
    rmse_vs_true: float | None = None
    wall_seconds: float = 0.0
    error: str = ""

    def as_csv_row(self) -> list[str]:
        return [str(self.row), self.solver, str(self.iterations),
                "true" if self.converged else "false",
                format_float(self.rmse_vs_true),
                format_float(self.wall_seconds), self.error]


class LedgerWriter:
    """Append-only, lock-guarded collector of per-row records."""

    def __init__(self):
        self._lock = threading.Lock()
        self._records: list[LedgerRecord] = []

    def append(self, record: LedgerRecord) -> None:
        with self._lock:
            self._records.append(record)

    def records(self) -> list[LedgerRecord]:
        with self._lock:
            ordered = sorted(self._records, key=lambda r: (r.row, r.solver))
        return ordered

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(LEDGER_COLUMNS)
            for record in self.records():
                writer.writerow(record.as_csv_row())


def summarize(records: list[LedgerRecord], estimates: dict[str, np.ndarray],
              u_true: np.ndarray) -> list[dict]:
    """Per-solver aggregate rows: medians plus field kinetic energies.

    estimates maps solver tag to the full estimated velocity grid; failed
    rows hold NaN and are excluded from the field aggregates by zeroing
    (a failed row contributes no kinetic energy, which is reported via
    rows_failed rather than silently interpolated).
    """
    tags = sorted({r.solver for r in records})
    rows = []
    for tag in tags:
        tagged = [r for r in records if r.solver == tag]
        done = [r for r in tagged if not r.error]
        failed = [r for r in tagged if r.error]
        rmses = [r.rmse_vs_true for r in done if r.rmse_vs_true is not None]
        grid = estimates.get(tag)
        ke_val = rel = None
        if grid is not None:
            filled = np.nan_to_num(grid, nan=0.0)
            ke_val = kinetic_energy(filled)
            rel = ke_relative_error(filled, u_true)
        rows.append({
            "solver": tag,
            "rows_completed": len(done),
            "rows_failed": len(failed),
            "median_rmse": float(np.median(rmses)) if rmses else None,
            "kinetic_energy": ke_val,
            "ke_relative_error": rel,
            "total_wall_seconds": sum(r.wall_seconds for r in tagged),
        })
    return rows


def write_summary_csv(path, summary_rows: list[dict]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_COLUMNS)
        for row in summary_rows:
            writer.writerow([
                row["solver"], str(row["rows_completed"]), str(row["rows_failed"]),
                format_float(row["median_rmse"]), format_float(row["kinetic_energy"]),
                format_float(row["ke_relative_error"]),
                format_float(row["total_wall_seconds"]),
            ])
