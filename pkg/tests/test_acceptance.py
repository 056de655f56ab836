"""Acceptance gate for the shipped configuration.

Eight product-level guarantees, one test per criterion. Each test prints
a single summary line with its measured margins. Criterion 4 is split:
the synthesis invariants pass, while the quoted wave-height calibration
target is unreachable from the configured spectrum; that test states the
discrepancy precisely and fails rather than hiding it. Expect the full
gate to take 15-20 minutes; the slow-baseline timing comparison in
criterion 6 dominates.

Run only this gate:   pytest tests/test_acceptance.py -v
Skip it:              pytest --ignore=tests/test_acceptance.py
"""

import json
import time
from dataclasses import replace

import numpy as np
import pytest

from vbsar.config import config_hash, default_config
from vbsar.forward import (ImagingGeometry, RowOperator, integrand_derivative,
                           vb_integrand)
from vbsar.gridio import read_grid
from vbsar.inverse import (bfgs_solve, dfm_solve, functional_gradient,
                           newton_solve, residual, residual_and_jacobian,
                           tikhonov_step)
from vbsar.metrics import rmse
from vbsar.pipeline import read_ledger_csv, run_pipeline
from vbsar.spectra import (directional_spectrum_grid, significant_wave_height,
                           synthesize_surface)


@pytest.fixture(scope="session")
def acceptance_run(tmp_path_factory):
    """One full-scale batch at the shipped defaults, shared by 2, 5, 7."""
    cfg = default_config()
    assert cfg.geometry.grid_n == 128
    assert cfg.noise.snr_db == 174.0
    assert cfg.solver_list() == ["nl", "fm", "ati"]
    out = tmp_path_factory.mktemp("acceptance")
    result = run_pipeline(cfg, out_dir=out)
    assert result.status == 0
    noisy, _ = read_grid(out / "image_noisy.vbg")
    meta = json.loads((out / "run_meta.json").read_text())
    return {
        "cfg": cfg,
        "result": result,
        "out": out,
        "noisy": noisy,
        "geom": ImagingGeometry.from_config(cfg),
        "elapsed": meta["elapsed_seconds"],
    }


def test_criterion_1_constant_velocity_closed_form():
    """A uniformly moving flat sea has an exact Gaussian-integral image."""
    t0 = time.perf_counter()
    cfg = default_config()
    geom = ImagingGeometry.from_config(cfg)
    n, domain = cfg.geometry.grid_n, cfg.geometry.domain
    y = -domain / 2.0 + (domain / n) * np.arange(n)
    op = RowOperator(y, np.zeros(n), np.ones(n), geom)

    rho = geom.azimuth_resolution
    vt = geom.velocity * geom.integration_time
    rho_p2 = rho**2 + geom.coherence_spread  # zero acceleration
    chirp = (2.0 * geom.baseline * geom.radar_wavenumber / geom.slant_range) \
        * (2.0 * rho**2 / rho_p2 - 1.0)

    worst = 0.0
    for c in (-1.0, 0.0, 1.0):
        # closed form: the shifted Gaussian integrates over the whole line,
        # the chirp turns into a real attenuation, the velocity phase
        # factors out, and the azimuth coordinate drops entirely
        closed = (geom.amplitude_const / np.sqrt(np.pi)
                  * np.exp(4.0 * geom.baseline**2 * rho**2 / (vt**2 * rho_p2))
                  * np.exp(-(chirp**2 * rho_p2) / (4.0 * np.pi**2))
                  * np.exp(1j * geom.phase_slope * c))
        image = op.image(np.full(n, c))
        worst = max(worst, float(np.abs(image - closed).max() / abs(closed)))
    elapsed = time.perf_counter() - t0
    print(f"criterion 1: PASS - max relative error {worst:.3e} "
          f"(bound 1e-6), {elapsed:.1f}s")
    assert worst < 1e-6
    assert elapsed < 10.0


def test_criterion_2_derivative_suite(acceptance_run):
    """All three derivative objects vs central differences plus symbolics."""
    t0 = time.perf_counter()
    sympy = pytest.importorskip("sympy")
    geom = acceptance_run["geom"]
    scene = acceptance_run["result"].scene
    rng = np.random.default_rng(2026)

    # scalar integrand derivative on 10 random probes
    worst_scalar = 0.0
    probes = []
    for _ in range(10):
        u = rng.uniform(-0.5, 0.5)
        a = rng.uniform(-0.05, 0.05)
        s0 = rng.uniform(0.5, 1.5)
        y = rng.uniform(-600, 600)
        yr = y + rng.uniform(-150, 150)
        probes.append((u, a, s0, y, yr))
        eps = 1e-6 * max(1.0, abs(u))
        fd = (vb_integrand(u + eps, a, s0, y, yr, geom)
              - vb_integrand(u - eps, a, s0, y, yr, geom)) / (2 * eps)
        got = integrand_derivative(u, a, s0, y, yr, geom)
        worst_scalar = max(worst_scalar, abs(got - fd) / abs(fd))

    # symbolic oracle: d integrand / du equals the two-term multiplier
    # [2 pi^2 R s / (V rho'^2) - 4j B k rho^2 / (V rho'^2)] * integrand
    # with azimuth shift s = yR - y - (R/V) u
    u_s, a_s, y_s, yr_s, s0_s = sympy.symbols("u a y yR sigma0", real=True)
    V, B, R, T0, tau, k, lam = sympy.symbols("V B R T0 tau k lam", positive=True)
    rho = lam * R / (2 * V * T0)
    rho2 = rho**2 + (sympy.pi / 2 * (T0 * R / V) * a_s) ** 2 \
        + rho**2 * T0**2 / tau**2
    shift = yr_s - y_s - (R / V) * u_s
    chirp = (2 * B * k / R) * (2 * rho**2 / rho2 - 1)
    integrand = (s0_s / sympy.sqrt(rho2)
                 * sympy.exp(-2 * sympy.I * k * B / V * u_s)
                 * sympy.exp(4 * B**2 * rho**2 / ((V * T0) ** 2 * rho2))
                 * sympy.exp(sympy.I * chirp * shift)
                 * sympy.exp(-sympy.pi**2 * shift**2 / rho2))
    multiplier = 2 * sympy.pi**2 * R * shift / (V * rho2) \
        - 4 * sympy.I * B * k * rho**2 / (V * rho2)
    residual_sym = sympy.simplify(sympy.diff(integrand, u_s) / integrand
                                  - multiplier)
    assert residual_sym == 0
    # and the implementation realizes exactly that multiplier
    for (u, a, s0, y, yr) in probes:
        shift_num = yr - y - geom.shift_ratio * u
        rho_num = geom.azimuth_resolution
        rho2_num = rho_num**2 + (np.pi / 2 * geom.integration_time
                                 * geom.slant_range / geom.velocity * a) ** 2 \
            + geom.coherence_spread
        mult_num = (2 * np.pi**2 * geom.slant_range * shift_num
                    / (geom.velocity * rho2_num)
                    - 4j * geom.baseline * geom.radar_wavenumber * rho_num**2
                    / (geom.velocity * rho2_num))
        expected = mult_num * vb_integrand(u, a, s0, y, yr, geom)
        got = integrand_derivative(u, a, s0, y, yr, geom)
        assert abs(got - expected) / abs(expected) < 1e-12

    # Jacobian action and functional gradient on the full-scale scene row
    row = 64
    op = RowOperator(scene.y, scene.a_r[row], scene.sigma0[row], geom)
    data = acceptance_run["noisy"][row]
    n = op.n
    worst_jac = worst_grad = 0.0
    for _ in range(10):
        u = 0.3 * rng.standard_normal(n)
        h = rng.standard_normal(n)
        _, jac = residual_and_jacobian(u, data, op)
        fd_dir = (residual(u + 1e-6 * h, data, op)
                  - residual(u - 1e-6 * h, data, op)) / 2e-6
        worst_jac = max(worst_jac, float(
            np.linalg.norm(jac @ h - fd_dir) / np.linalg.norm(fd_dir)))

        grad = functional_gradient(u, data, op)
        fd_grad = np.empty(n)
        for j in range(n):
            eps = 1e-6 * max(1.0, abs(u[j]))
            up, down = u.copy(), u.copy()
            up[j] += eps
            down[j] -= eps
            mis_up = data - op.image(up)
            mis_dn = data - op.image(down)
            fd_grad[j] = (0.5 * np.real(mis_up @ np.conj(mis_up))
                          - 0.5 * np.real(mis_dn @ np.conj(mis_dn))) / (2 * eps)
        worst_grad = max(worst_grad, float(
            np.linalg.norm(grad - fd_grad) / np.linalg.norm(grad)))

    elapsed = time.perf_counter() - t0
    print(f"criterion 2: PASS - worst relative error: integrand "
          f"{worst_scalar:.3e}, Jacobian action {worst_jac:.3e}, gradient "
          f"{worst_grad:.3e} (bound 1e-5); symbolic residual 0; {elapsed:.1f}s")
    assert worst_scalar < 1e-5
    assert worst_jac < 1e-5
    assert worst_grad < 1e-5
    assert elapsed < 60.0


def test_criterion_3_regularized_step_equivalence():
    """SVD-filtered step against a dense normal-equations solve."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(5):
        jac = rng.standard_normal((256, 128))
        f = rng.standard_normal(256)
        sigma1 = np.linalg.svd(jac, compute_uv=False)[0]
        h_svd = tikhonov_step(jac, f)
        h_ne = np.linalg.solve(jac.T @ jac + sigma1**2 * np.eye(128),
                               -jac.T @ f)
        worst = max(worst, float(
            np.linalg.norm(h_svd - h_ne) / np.linalg.norm(h_ne)))
    elapsed = time.perf_counter() - t0
    print(f"criterion 3: PASS - max relative difference {worst:.3e} "
          f"(bound 1e-10), {elapsed:.1f}s")
    assert worst < 1e-10
    assert elapsed < 10.0


def _hundred_seed_surfaces():
    cfg = default_config()
    sp = cfg.spectrum
    grid = directional_spectrum_grid(
        cfg.geometry.grid_n, cfg.geometry.domain, sp.alpha,
        2.0 * np.pi / sp.peak_wavelength, sp.enhancement,
        sp.spread_exponent, np.deg2rad(sp.wave_direction_deg))
    return grid, [synthesize_surface(grid, seed) for seed in range(100)]


def test_criterion_4_surface_invariants():
    """Realness and spectral-mass conservation of the surface synthesis."""
    t0 = time.perf_counter()
    grid, draws = _hundred_seed_surfaces()
    m0_grid = float(np.sum(grid.density) * grid.cell_area)

    worst_imag = 0.0
    variances = []
    for z, zhat in draws:
        full = np.fft.ifft2(zhat)
        worst_imag = max(worst_imag, float(
            np.abs(full.imag).max() / max(np.abs(full.real).max(), 1e-300)))
        variances.append(float(np.var(z)))
    mean_var = float(np.mean(variances))
    rel = abs(mean_var - m0_grid) / m0_grid
    elapsed = time.perf_counter() - t0
    print(f"criterion 4 (invariants): PASS - max imag/real {worst_imag:.3e}, "
          f"mean variance {mean_var:.6f} vs spectral mass {m0_grid:.6f} "
          f"({rel:.2%}, bound 5%), {elapsed:.1f}s")
    assert worst_imag < 1e-12
    assert rel < 0.05
    assert elapsed < 120.0


def test_criterion_4_wave_height_target():
    """Mean significant wave height against the quoted 0.586215 m.

    This clause fails, and the cause is a calibration inconsistency in
    the target itself, not a synthesis defect: 0.586215 m equals
    4 sqrt(alpha / (2.5 k_peak^2)) for the configured alpha and peak
    wavelength to four digits. That moment shortcut ignores the mass
    added by the enhancement-10 peak lobe, so no synthesis faithful to
    the configured spectrum can reach it. The spectrum actually
    integrates to m0 = 0.029017 on this grid (0.029475 in the
    continuum), which fixes the mean height near 4 sqrt(m0) = 0.681 m;
    the 100-seed measurement below sits about 45 standard errors from
    the quoted value while agreeing with the spectral mass to well
    under one percent.
    """
    t0 = time.perf_counter()
    target = 0.586215
    grid, draws = _hundred_seed_surfaces()
    heights = np.array([significant_wave_height(z) for z, _ in draws])
    mean = float(heights.mean())
    sem = float(heights.std(ddof=1) / np.sqrt(len(heights)))
    rel = (mean - target) / target
    m0_grid = float(np.sum(grid.density) * grid.cell_area)
    implied = (target / 4.0) ** 2
    elapsed = time.perf_counter() - t0
    verdict = "PASS" if abs(rel) < 0.05 else "FAIL"
    print(f"criterion 4 (wave height): {verdict} - mean H over "
          f"{len(heights)} seeds = {mean:.6f} m vs target {target} m "
          f"({rel:+.2%}, bound 5%, {abs(mean - target) / sem:.0f} standard "
          f"errors); target implies m0 = {implied:.6e}, configured spectrum "
          f"holds m0 = {m0_grid:.6e}; 4 sqrt(m0) = {4 * np.sqrt(m0_grid):.4f} m; "
          f"{elapsed:.1f}s")
    assert elapsed < 120.0
    assert abs(rel) < 0.05, (
        f"mean H_m0 = {mean:.6f} m is {rel:+.2%} from the quoted "
        f"0.586215 m ({abs(mean - target) / sem:.0f} standard errors, "
        f"n = {len(heights)}). The quoted value equals "
        f"4*sqrt(alpha/(2.5*k_peak^2)) = "
        f"{4 * np.sqrt(implied):.6f} m, a spectral-moment shortcut that "
        f"drops the enhancement-factor mass; the configured spectrum "
        f"integrates to m0 = {m0_grid:.6e} which forces mean H near "
        f"{4 * np.sqrt(m0_grid):.4f} m. The synthesis matches its own "
        f"spectrum (see the passing invariants test); the target and the "
        f"spectrum parameters are mutually inconsistent.")


def test_criterion_5_recovery_ordering(acceptance_run):
    """Error orderings across the three estimators on the full scene."""
    summary = {row["solver"]: row for row in acceptance_run["result"].summary}
    med = {tag: summary[tag]["median_rmse"] for tag in ("nl", "fm", "ati")}
    re_ke = {tag: summary[tag]["ke_relative_error"] for tag in ("nl", "fm", "ati")}
    for tag in ("nl", "fm", "ati"):
        assert summary[tag]["rows_failed"] == 0
    elapsed = acceptance_run["elapsed"]
    ok = (med["fm"] <= med["nl"] < med["ati"]
          and re_ke["fm"] < re_ke["nl"] < re_ke["ati"]
          and re_ke["ati"] > 0.05)
    print(f"criterion 5: {'PASS' if ok else 'FAIL'} - median RMSE "
          f"fm {med['fm']:.4e} <= nl {med['nl']:.4e} < ati {med['ati']:.4e}; "
          f"KE relative error fm {re_ke['fm']:.4f} < nl {re_ke['nl']:.4f} "
          f"< ati {re_ke['ati']:.4f} (ati > 0.05); run {elapsed:.0f}s "
          f"(budget 1800s)")
    assert med["fm"] <= med["nl"] < med["ati"]
    assert re_ke["fm"] < re_ke["nl"] < re_ke["ati"]
    assert re_ke["ati"] > 0.05
    assert elapsed < 1800.0


def test_criterion_6_speed_ordering(acceptance_run):
    """Analytic-gradient and Newton solvers vs the finite-difference
    baseline on a 16-row subset: each must be at least 100x faster."""
    cfg = acceptance_run["cfg"]
    geom = acceptance_run["geom"]
    scene = acceptance_run["result"].scene
    noisy = acceptance_run["noisy"]
    rows = list(range(4, 132, 8))
    assert len(rows) == 16

    totals = {"nl": 0.0, "fm": 0.0, "dfm": 0.0}
    solvers = {"nl": newton_solve, "fm": bfgs_solve, "dfm": dfm_solve}
    for row in rows:
        for tag, solve in solvers.items():
            op = RowOperator(scene.y, scene.a_r[row], scene.sigma0[row], geom,
                             cutoff_log=cfg.forward.gaussian_cutoff_log,
                             mass_warning_fraction=cfg.forward.mass_warning_fraction)
            result = solve(noisy[row], op, cfg.solver_options(tag))
            totals[tag] += result.seconds

    ratio_fm = totals["dfm"] / totals["fm"]
    ratio_nl = totals["dfm"] / totals["nl"]
    ok = ratio_fm >= 100.0 and ratio_nl >= 100.0
    print(f"criterion 6: {'PASS' if ok else 'FAIL'} - 16-row totals: "
          f"dfm {totals['dfm']:.1f}s, fm {totals['fm']:.2f}s "
          f"(ratio {ratio_fm:.0f}x), nl {totals['nl']:.2f}s "
          f"(ratio {ratio_nl:.0f}x); bound 100x for both")
    assert ratio_fm >= 100.0
    assert ratio_nl >= 100.0


def test_criterion_7_cross_validation(acceptance_run):
    """Newton and analytic-gradient estimates agree on every row to
    within twice the analytic-gradient estimate's own error."""
    result = acceptance_run["result"]
    u_true = result.scene.u_r
    u_nl = result.estimates["nl"]
    u_fm = result.estimates["fm"]
    worst = 0.0
    for row in range(u_true.shape[0]):
        cross = rmse(u_nl[row], u_fm[row])
        floor = rmse(u_fm[row], u_true[row])
        worst = max(worst, cross / (2.0 * floor))
    print(f"criterion 7: {'PASS' if worst < 1.0 else 'FAIL'} - worst row "
          f"RMSE(nl, fm) / (2 RMSE(fm, true)) = {worst:.3f} (bound 1)")
    assert worst < 1.0


def test_criterion_8_parallel_determinism(tmp_path):
    """Same run at pool sizes 1 and 8: artifacts must match byte for byte
    (timing columns excluded). Reduced 32x32 mesh, same mesh spacing."""
    t0 = time.perf_counter()
    base = default_config()
    base = replace(base, geometry=replace(base.geometry, grid_n=32, domain=320.0))
    outs = {}
    for degree in (1, 8):
        cfg = replace(base, run=replace(base.run, parallelism=degree))
        out = tmp_path / f"pool{degree}"
        result = run_pipeline(cfg, out_dir=out)
        assert result.status == 0
        outs[degree] = out

    grids = ("surface_height", "radial_velocity_true", "radial_accel_true",
             "image_clean", "image_noisy", "velocity_nl", "velocity_fm",
             "velocity_ati")
    for name in grids:
        b1 = (outs[1] / f"{name}.vbg").read_bytes()
        b8 = (outs[8] / f"{name}.vbg").read_bytes()
        assert b1 == b8, f"{name} differs between pool sizes"

    def stripped(path, drop):
        header, rows = read_ledger_csv(path)
        keep = [i for i, name in enumerate(header) if name not in drop]
        return [[r[i] for i in keep] for r in [header] + rows]

    for name, drop in (("ledger.csv", {"wall_seconds"}),
                       ("summary.csv", {"total_wall_seconds"})):
        assert stripped(outs[1] / name, drop) == stripped(outs[8] / name, drop)
        hash1 = (outs[1] / name).read_text().splitlines()[0]
        hash8 = (outs[8] / name).read_text().splitlines()[0]
        assert hash1 == hash8 and hash1.startswith("# config_sha256 ")

    elapsed = time.perf_counter() - t0
    print(f"criterion 8: PASS - {len(grids)} grids byte-identical, ledgers "
          f"identical outside timing columns, {elapsed:.1f}s")
