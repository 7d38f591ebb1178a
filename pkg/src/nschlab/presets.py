"""Experiment presets driven by a :class:`~nschlab.config.RunConfig`.

Each preset returns a :class:`PresetResult`: a JSON-ready report, named
record series (``"main"`` first) for CSV output, and an exit status.
Reports hold no timestamps or timings so identical inputs give identical
bytes.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from . import __version__, kernels
from .checkpoint import save_state
from .config import RunConfig
from .diagnostics import (
    DEFAULT_NEG_ORDERS,
    compute_record,
    dissipation_residual,
    fit_decay,
    sigma_target,
    validity_horizon,
)
from .errors import ConfigError, StepDiverged
from .inequalities import run_suite
from .initial import gaussian_lp_norm, generate_ic
from .integrator import StepControls, integrate
from .model import State
from .spectral import lp_norm

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_VIOLATION = 4

#: Relative slack when testing a recorded sequence for monotone decrease.
MONOTONE_RTOL = 1e-12


@dataclass
class PresetResult:
    report: dict
    series: Dict[str, list] = field(default_factory=dict)
    status: int = EXIT_OK


def metadata(cfg: RunConfig, **extra):
    p = cfg.params
    meta = {
        "package_version": __version__,
        "experiment": cfg.experiment,
        "kernel_backend": kernels.BACKEND,
        "paper_mode": p.paper_mode,
        "linearized": p.linearized,
        "kappa": p.kappa,
        "omega0": p.omega0,
        "seed": cfg.ic.seed,
        "grid": {"dim": cfg.grid.dim, "n": cfg.grid.n, "box_length": cfg.grid.box_length},
        "conventions": {
            "sigma_target": "3/2 (1/p - 1/2) + k/2, derivative index l taken equal to k",
            "negative_norm_decay_exponent": "(k + s)/2",
            "Y_top_order_weight": 3,
            "fractional_norms": "zero mode removed from phi; s = 0 keeps it",
            "phi_nonlinearity": "(phi + omega0)**3 - phi",
        },
        "validity_horizon": validity_horizon(cfg.grid.box_length),
    }
    meta.update(extra)
    return meta


def _initial_state(cfg: RunConfig, amplitude=None, params=None, width=None) -> State:
    ic = cfg.ic
    return generate_ic(
        ic.kind,
        cfg.grid,
        ic.amplitude if amplitude is None else amplitude,
        seed=ic.seed,
        params=cfg.params if params is None else params,
        width=ic.width if width is None else width,
        k_max=ic.k_max,
    )


def trajectory(state: State, controls: StepControls, stride=1, on_step=None, neg_orders=DEFAULT_NEG_ORDERS,
               sobolev_orders=None):
    """Integrate and return ``(records, final_state)``; the first record is at t0."""
    rec = lambda s: compute_record(s, neg_orders, sobolev_orders)  # noqa: E731
    records = [rec(state)]
    final = integrate(
        state, controls, [lambda s, r: records.append(r)], stride=stride, record_fn=rec, on_step=on_step
    )
    return records, final


def _checkpointer(out_dir, every):
    if not every or out_dir is None:
        return None
    out_dir = Path(out_dir)

    def hook(step, state):
        if step % every == 0:
            save_state(out_dir / f"checkpoint_{step:06d}.bin", state)

    return hook


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def preset_run(cfg: RunConfig, out_dir=None, state: Optional[State] = None) -> PresetResult:
    state = _initial_state(cfg) if state is None else state
    hook = _checkpointer(out_dir, cfg.outputs.checkpoint_stride)
    records, final = trajectory(state, cfg.controls, cfg.outputs.record_stride, hook)
    first, last = records[0], records[-1]
    residual = None
    if len(records) >= 3:
        try:
            residual = dissipation_residual(records)
        except ValueError:  # adaptive steps or a shortened last stride
            residual = None
    summary = {
        "records": len(records),
        "final_time": final.time,
        "energy_initial": first.energy,
        "energy_final": last.energy,
        "dissipation_residual": residual,
        "phi_mean_drift": abs(last.phi_mean - first.phi_mean),
        "max_div_u": max(r.div_u for r in records),
        "finite": final.is_finite(),
    }
    report = {"metadata": metadata(cfg), "summary": summary}
    return PresetResult(report, {"main": records})


# ---------------------------------------------------------------------------
# energy check
# ---------------------------------------------------------------------------


def observed_orders(residuals):
    out = []
    for a, b in zip(residuals, residuals[1:]):
        out.append(math.log2(a / b) if a > 0 and b > 0 else None)
    return out


def preset_energy_check(cfg: RunConfig, state: Optional[State] = None) -> PresetResult:
    """Energy-law defect at ``dt, dt/2, ...`` with the observed order."""
    state = _initial_state(cfg) if state is None else state
    levels = cfg.energy_check.levels
    rows = []
    series = {}
    for i in range(levels):
        dt = cfg.controls.dt / 2**i
        controls = dataclasses.replace(cfg.controls, dt=dt, adaptive=False)
        records, _ = trajectory(state, controls, 1)
        res = dissipation_residual(records)
        rows.append({"dt": dt, "steps": len(records) - 1, "residual": res})
        series["main" if i == 0 else f"dt_div{2**i}"] = records
    residuals = [r["residual"] for r in rows]
    orders = observed_orders(residuals)
    finite = [o for o in orders if o is not None]
    report = {
        "metadata": metadata(cfg),
        "levels": rows,
        "orders": orders,
        "observed_order": min(finite) if finite else None,
    }
    return PresetResult(report, series)


# ---------------------------------------------------------------------------
# smallness
# ---------------------------------------------------------------------------


def _max_ratio(values):
    v0 = values[0]
    if v0 == 0:
        return 1.0 if max(values) == 0 else math.inf
    return max(values) / v0


def _monotone(values):
    return all(b <= a * (1 + MONOTONE_RTOL) for a, b in zip(values, values[1:]))


def smallness_row(state: State, controls, stride, neg_orders, growth_tol):
    """Statistics of one trajectory for the smallness table."""
    row = {}
    try:
        records, _ = trajectory(state, controls, stride, neg_orders=neg_orders)
    except StepDiverged as exc:
        row.update(diverged=True, divergence=exc.to_dict(), monotone=False, bounded=False)
        return row, []
    X = [r.X for r in records]
    ratio = _max_ratio(X)
    row.update(
        diverged=False,
        X0=X[0],
        max_X_ratio=ratio,
        final_X_ratio=X[-1] / X[0] if X[0] else 1.0,
        monotone=_monotone(X),
        bounded=ratio <= 1 + growth_tol,
        max_neg_norm_ratio={format(s, "g"): _max_ratio([r.neg_norms[s] for r in records]) for s in neg_orders},
    )
    return row, records


def preset_smallness(cfg: RunConfig) -> PresetResult:
    """Sweep the initial critical size and track ``max_t X(t) / X(0)``."""
    opts = cfg.smallness
    table = []
    series = {}
    for amp in sorted(opts.amplitudes):
        state = _initial_state(cfg, amplitude=amp)
        row, records = smallness_row(
            state, cfg.controls, cfg.outputs.record_stride, opts.neg_orders, opts.growth_tol
        )
        table.append({"amplitude": amp, **row})
        if records:
            series["main" if not series else f"amp{amp:g}"] = records
    threshold = next((r["amplitude"] for r in table if not r["monotone"]), None)
    report = {
        "metadata": metadata(cfg, growth_tol=opts.growth_tol, x_ratio_zero_over_zero=1.0),
        "table": table,
        "monotone_threshold": threshold,
        "any_diverged": any(r["diverged"] for r in table),
    }
    return PresetResult(report, series)


# ---------------------------------------------------------------------------
# decay study
# ---------------------------------------------------------------------------


def decay_series(records, k):
    """Per-record norms for order ``k``: u, phi, grad-order phi and their sum."""
    u = np.array([r.sobolev_series[("u", float(k))] for r in records])
    phi = np.array([r.sobolev_series[("phi", float(k))] for r in records])
    phi1 = np.array([r.sobolev_series[("phi", float(k + 1))] for r in records])
    return {"combined": u + phi + phi1, "u": u, "phi": phi, "phi_next": phi1}


def _fits(records, orders, window, p):
    t = np.array([r.time for r in records])
    sel = (t >= window[0]) & (t <= window[1])
    out = {}
    for k in orders:
        target = sigma_target(k, p, paper_mode=False)
        entry = {}
        for name, values in decay_series(records, k).items():
            if not np.all(values[sel] > 0):
                entry[name] = {"skipped": "zero on the fit window"}
                continue
            entry[name] = fit_decay(t, values, window, sigma_paper=target).to_dict()
        out[str(k)] = entry
    return out


def preset_decay_study(cfg: RunConfig) -> PresetResult:
    """Fitted decay exponents of Gaussian data on a window before wrap-around.

    The fitted quantity for order ``k`` is ``|L^k u| + |L^k phi| + |L^(k+1) phi|``
    with the phi mean removed; each term is also fitted on its own when it
    is nonzero. The default width ``sqrt(2 D)`` makes the heat profile a
    function of ``1 + t``.
    """
    opts = cfg.decay_study
    grid = cfg.grid
    L = grid.box_length
    horizon = validity_horizon(L, opts.ln_factor, opts.diffusivity)
    t_end = cfg.controls.t_end
    window = (opts.fit_start, min(t_end, horizon))
    if not window[0] < window[1]:
        raise ConfigError(
            f"fit window [{window[0]:g}, {window[1]:g}] is empty; raise controls.t_end",
            "controls.t_end",
        )
    width = cfg.ic.width if cfg.ic.width is not None else math.sqrt(2.0 * opts.diffusivity)
    kmax = max(opts.orders)
    sob = {"u": tuple(range(kmax + 1)), "phi": tuple(range(kmax + 2))}

    runs = []
    if opts.linearized:
        runs.append(("linearized", True))
    if opts.nonlinear:
        runs.append(("nonlinear", False))
    results = {}
    series = {}
    blob = None
    for name, lin in runs:
        params = dataclasses.replace(cfg.params, linearized=lin)
        state = generate_ic("gaussian-blob", grid, cfg.ic.amplitude, params=params, width=width)
        blob = state
        records, _ = trajectory(state, cfg.controls, cfg.outputs.record_stride, sobolev_orders=sob)
        fits = _fits(records, opts.orders, window, opts.p)
        combined = [fits[str(k)]["combined"].get("sigma_hat") for k in opts.orders]
        increments = [
            b - a if a is not None and b is not None else None for a, b in zip(combined, combined[1:])
        ]
        results[name] = {"fits": fits, "increments": increments}
        series["main" if not series else name] = records

    if "linearized" in results and "nonlinear" in results:
        results["nonlinear_minus_linearized"] = {
            str(k): results["nonlinear"]["fits"][str(k)]["combined"]["sigma_hat"]
            - results["linearized"]["fits"][str(k)]["combined"]["sigma_hat"]
            for k in opts.orders
        }

    phi0 = blob.phi
    data = {
        "width": width,
        "amplitude": cfg.ic.amplitude,
        "p": opts.p,
        "lp_norm_grid": lp_norm(phi0, opts.p),
        "lp_norm_whole_space": gaussian_lp_norm(cfg.ic.amplitude, width, opts.p, grid.dim),
        "phi_mean": phi0.mean,
    }
    meta = metadata(
        cfg,
        validity_horizon=horizon,
        horizon_diffusivity=opts.diffusivity,
        fit_window=list(window),
        mean_removal=(
            "the phi mean is a conserved constant on the torus; it is removed "
            "before every norm, so decay refers to phi - mean(phi)"
        ),
        fitted_quantity="|L^k u| + |L^k phi| + |L^(k+1) phi|",
    )
    report = {
        "metadata": meta,
        "initial_data": data,
        "sigma_paper": {str(k): sigma_target(k, opts.p, paper_mode=False) for k in opts.orders},
        "runs": results,
    }
    return PresetResult(report, series)


# ---------------------------------------------------------------------------
# inequality suite
# ---------------------------------------------------------------------------


def preset_inequalities(cfg: RunConfig) -> PresetResult:
    """All inequality checkers; status 4 if a constant-1 inequality is violated.

    ``trials = 0`` gives an empty report (the interpolation trials are skipped too).
    """
    opts = cfg.inequalities
    if opts.trials == 0:
        reports = []
    else:
        reports = run_suite(
            cfg.grid, opts.trials, opts.interpolation_trials, cfg.ic.seed, refine_fields=opts.refine
        )
    violations = sum(r.violations for r in reports)
    report = {
        "metadata": metadata(cfg),
        "reports": [r.to_dict() for r in reports],
        "violations": violations,
    }
    return PresetResult(report, {}, EXIT_VIOLATION if violations else EXIT_OK)


PRESETS = {
    "run": preset_run,
    "energy-check": preset_energy_check,
    "smallness": preset_smallness,
    "decay-study": preset_decay_study,
    "ineq-suite": preset_inequalities,
}


def run_preset(cfg: RunConfig, out_dir=None) -> PresetResult:
    if cfg.experiment == "run":
        return preset_run(cfg, out_dir)
    return PRESETS[cfg.experiment](cfg)


def critical_ratio(records) -> float:
    """``max_t X(t) / X(0)`` with ``0/0`` read as 1."""
    return _max_ratio([r.X for r in records])


__all__ = [
    "PresetResult",
    "PRESETS",
    "run_preset",
    "preset_run",
    "preset_energy_check",
    "preset_smallness",
    "preset_decay_study",
    "preset_inequalities",
    "trajectory",
    "critical_ratio",
]
