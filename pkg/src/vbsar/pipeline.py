"""Batch driver: synthesize, simulate, invert rows in parallel, persist.

Each cross-track row is an independent inversion problem; a worker pool
of the configured degree dispatches rows, and every artifact is
deterministic for a fixed (config, seed) regardless of parallelism or
scheduling order. Noise is drawn from per-row substreams keyed by
(master seed, row), so a worker never consumes another row's stream.
Per-row failures are recorded in the ledger and do not abort the batch.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import Config, config_hash, save_config
from .forward import (ImagingGeometry, RowOperator, SceneRealization,
                      add_noise, simulate_image, synthesize_scene)
from .gridio import write_grid
from .inverse import bfgs_solve, dfm_solve, newton_solve
from .kinematics import interferometric_phase, interferometric_velocity
from .metrics import (LedgerRecord, LedgerWriter, rmse, summarize,
                      write_summary_csv)

SCENE_GRIDS = ("surface_height", "radial_velocity_true", "radial_accel_true")
IMAGE_GRIDS = ("image_clean", "image_noisy")
ITERATIVE_TAGS = ("nl", "fm", "dfm")

# dispatch table for the iterative row solvers; tests may substitute
# entries (the row index is passed so a poisoned-row harness can target
# one row and leave the rest of the batch untouched)
SOLVER_FUNCS = {
    "nl": lambda row, data, op, opts: newton_solve(data, op, opts),
    "fm": lambda row, data, op, opts: bfgs_solve(data, op, opts),
    "dfm": lambda row, data, op, opts: dfm_solve(data, op, opts),
}


@dataclass
class PipelineResult:
    status: int
    out_dir: Path
    records: list[LedgerRecord] = field(default_factory=list)
    summary: list[dict] = field(default_factory=list)
    scene: SceneRealization | None = None
    estimates: dict[str, np.ndarray] = field(default_factory=dict)


def parse_row_range(spec: str, n: int) -> list[int]:
    """Parse "a..b" (inclusive) or a single index into row indices."""
    text = spec.strip()
    if ".." in text:
        lo_text, hi_text = text.split("..", 1)
        lo, hi = int(lo_text), int(hi_text)
    else:
        lo = hi = int(text)
    if lo < 0 or hi >= n or lo > hi:
        raise ValueError(f"row range {spec!r} outside 0..{n - 1}")
    return list(range(lo, hi + 1))


def _solve_one_row(row: int, data_row: np.ndarray, scene: SceneRealization,
                   cfg: Config, geom: ImagingGeometry, tags: list[str]):
    """Run the requested estimators on one row; never raises."""
    records = []
    estimates: dict[str, np.ndarray] = {}
    u_true = scene.u_r[row]
    operator = None
    for tag in tags:
        start = time.perf_counter()
        try:
            if tag == "ati":
                phase, _ = interferometric_phase(data_row)
                u_est = interferometric_velocity(
                    phase, geom.velocity, geom.baseline, geom.wavelength)
                records.append(LedgerRecord(
                    row=row, solver=tag, iterations=0, converged=True,
                    rmse_vs_true=rmse(u_est, u_true),
                    wall_seconds=time.perf_counter() - start))
                estimates[tag] = u_est
                continue
            if operator is None:
                operator = RowOperator(
                    scene.y, scene.a_r[row], scene.sigma0[row], geom,
                    cutoff_log=cfg.forward.gaussian_cutoff_log,
                    mass_warning_fraction=cfg.forward.mass_warning_fraction)
            result = SOLVER_FUNCS[tag](row, data_row, operator, cfg.solver_options(tag))
            records.append(LedgerRecord(
                row=row, solver=tag, iterations=result.iterations,
                converged=result.converged,
                rmse_vs_true=rmse(result.u_est, u_true),
                wall_seconds=result.seconds))
            estimates[tag] = result.u_est
        except Exception as exc:
            records.append(LedgerRecord(
                row=row, solver=tag, wall_seconds=time.perf_counter() - start,
                error=f"{type(exc).__name__}: {exc}"))
    return row, records, estimates


def run_pipeline(cfg: Config, out_dir=None, rows: list[int] | None = None,
                 stage: str = "invert") -> PipelineResult:
    """Execute the batch and write all artifacts under the output directory.

    stage "simulate" stops after the scene and image grids; "invert" also
    runs the configured estimators and writes velocity grids and ledgers.
    """
    started = time.perf_counter()
    out = Path(out_dir) if out_dir is not None else Path(cfg.run.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    chash = config_hash(cfg)
    n = cfg.geometry.grid_n

    scene = synthesize_scene(cfg)
    geom = ImagingGeometry.from_config(cfg)
    image_clean = simulate_image(scene, cfg)
    image_noisy = add_noise(image_clean, cfg.noise.snr_db, cfg.run.seed)

    save_config(cfg, out / "config_used.cfg")
    for name, grid in zip(SCENE_GRIDS, (scene.z, scene.u_r, scene.a_r)):
        write_grid(out / f"{name}.vbg", grid, chash)
    write_grid(out / "image_clean.vbg", image_clean, chash)
    write_grid(out / "image_noisy.vbg", image_noisy, chash)

    result = PipelineResult(status=0, out_dir=out, scene=scene)
    tags = cfg.solver_list()
    row_list = list(range(n)) if rows is None else sorted(set(rows))

    if stage == "invert":
        ledger = LedgerWriter()
        estimates = {tag: np.full((n, n), np.nan) for tag in tags}
        workers = cfg.run.parallelism
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_solve_one_row, row, image_noisy[row], scene,
                            cfg, geom, tags)
                for row in row_list
            ]
            for future in futures:
                row, records, row_estimates = future.result()
                for record in records:
                    ledger.append(record)
                for tag, u_est in row_estimates.items():
                    estimates[tag][row] = u_est
        result.records = ledger.records()
        # aggregates compare against the truth on the rows actually run
        u_true_run = np.zeros((n, n))
        u_true_run[row_list] = scene.u_r[row_list]
        result.summary = summarize(result.records, estimates, u_true_run)
        result.estimates = estimates
        hash_line = f"# config_sha256 {chash.hex()}\n"
        ledger.write_csv(out / "ledger.csv")
        write_summary_csv(out / "summary.csv", result.summary)
        for path in (out / "ledger.csv", out / "summary.csv"):
            path.write_text(hash_line + path.read_text())
        for tag in tags:
            write_grid(out / f"velocity_{tag}.vbg", estimates[tag], chash)
        if any(record.error for record in result.records):
            result.status = 1
    elif stage != "simulate":
        raise ValueError(f"unknown stage {stage!r}")

    from ._kernels import USING_NUMBA
    meta = {
        "version": __version__,
        "config_sha256": chash.hex(),
        "seed": cfg.run.seed,
        "grid_n": n,
        "stage": stage,
        "solvers": tags if stage == "invert" else [],
        "rows": [row_list[0], row_list[-1]] if row_list else [],
        "parallelism": cfg.run.parallelism,
        "accelerated_kernels": bool(USING_NUMBA),
        "elapsed_seconds": time.perf_counter() - started,
    }
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return result


def read_ledger_csv(path) -> tuple[list[str], list[list[str]]]:
    """Read a ledger or summary CSV, skipping embedded comment lines."""
    import csv as _csv
    with open(path, newline="") as handle:
        rows = [row for row in _csv.reader(
            line for line in handle if not line.startswith("#"))]
    if not rows:
        raise ValueError(f"{path} is empty")
    return rows[0], rows[1:]
