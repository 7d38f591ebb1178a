"""Functionals evaluated along trajectories.

Every fractional norm is taken on mean-free data: the velocity mean is
kept (it is zero for all supported initial data), the order parameter mean
is removed because negative powers of ``|k|`` are singular on the torus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .model import ModelParams, State, chemical_potential

DEFAULT_NEG_ORDERS = (0.0, 0.25, 0.5)
DEFAULT_SOBOLEV_ORDERS = {"u": (0, 1, 2), "phi": (0, 1, 2, 3)}

#: Tail level ``exp(-LN_FACTOR)`` of a heat kernel at half the box length
#: that still counts as unaffected by the periodic images.
LN_FACTOR = 4.0 * math.log(10.0)


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    kinetic: float
    free_energy: float
    dissipation: float
    X: float
    Y: float
    neg_norms: Dict[float, float] = field(default_factory=dict)
    sobolev_series: Dict[Tuple[str, float], float] = field(default_factory=dict)
    energy: float = 0.0
    phi_mean: float = 0.0
    div_u: float = 0.0

    def __post_init__(self):
        for name in ("kinetic", "free_energy", "dissipation", "X", "Y"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def to_dict(self):
        return {
            "time": self.time,
            "kinetic": self.kinetic,
            "free_energy": self.free_energy,
            "dissipation": self.dissipation,
            "X": self.X,
            "Y": self.Y,
            "neg_norms": {_order_key(s): v for s, v in self.neg_norms.items()},
            "sobolev_series": {f"{f}:{_order_key(o)}": v for (f, o), v in self.sobolev_series.items()},
            "energy": self.energy,
            "phi_mean": self.phi_mean,
            "div_u": self.div_u,
        }


def _order_key(s):
    return format(float(s), "g")


@dataclass(frozen=True)
class DecayFit:
    sigma_hat: float
    window: Tuple[float, float]
    residual: float
    sigma_paper: float = float("nan")
    npoints: int = 0

    def __post_init__(self):
        if not self.window[0] < self.window[1]:
            raise ValueError("window must satisfy t0 < t1")
        if self.residual < 0:
            raise ValueError("residual must be >= 0")

    def to_dict(self):
        return {
            "sigma_hat": self.sigma_hat,
            "window": list(self.window),
            "residual": self.residual,
            "sigma_paper": None if math.isnan(self.sigma_paper) else self.sigma_paper,
            "npoints": self.npoints,
        }


# ---------------------------------------------------------------------------
# Spectral helpers
# ---------------------------------------------------------------------------


def _mean_free(hat, dim):
    out = np.array(hat)
    out[(Ellipsis,) + (0,) * dim] = 0.0
    return out


def _sq(grid, hat, order):
    """``||Lambda**order f||**2`` for spectral data ``hat`` (zero mode kept at order 0)."""
    if order == 0:
        return grid.parseval(hat)
    return grid.parseval(hat, grid.power(2.0 * order))


def kinetic_energy(state: State) -> float:
    return 0.5 * state.grid.parseval(state.u.spectral)


def free_energy(state: State) -> float:
    """``int (eps/2 |grad phi|**2 + zeta F(phi + omega0)) dx``.

    The gradient term is exact through Parseval; the quartic is summed on
    the padded grid, where the rectangle rule is exact for band-limited phi.
    """
    grid = state.grid
    p = state.params
    grad_sq = grid.parseval(state.phi.spectral, grid.k2)
    phi_pad = np.ascontiguousarray(grid.to_padded(state.phi.spectral)).reshape(-1)
    dv = (grid.box_length / (2 * grid.n)) ** grid.dim
    well = kernels.double_well_sum(phi_pad, p.omega0) * dv
    return 0.5 * p.eps * grad_sq + p.zeta * well


def total_energy(state: State) -> float:
    """``1/2 ||u||**2 + K * free energy``."""
    return kinetic_energy(state) + state.params.capillarity * free_energy(state)


def dissipation(state: State, mu=None) -> float:
    """``nu ||grad u||**2 + K M ||grad mu||**2``."""
    grid = state.grid
    p = state.params
    if mu is None:
        mu = chemical_potential(state.phi, p)
    du = grid.parseval(state.u.spectral, grid.k2)
    dmu = grid.parseval(mu.spectral, grid.k2)
    return p.nu * du + p.capillarity * p.mobility * dmu


def critical_pair(state: State) -> Tuple[float, float]:
    """Critical energy ``X`` and its dissipation ``Y``.

    ``X = |u|_{1/2}^2 + |phi|_{1/2}^2 + |phi|_{3/2}^2`` and
    ``Y = |u|_{3/2}^2 + |phi|_{3/2}^2 + 3 |phi|_{5/2}^2`` (homogeneous norms).
    """
    grid = state.grid
    u = state.u.spectral
    phi = _mean_free(state.phi.spectral, grid.dim)
    X = _sq(grid, u, 0.5) + _sq(grid, phi, 0.5) + _sq(grid, phi, 1.5)
    Y = _sq(grid, u, 1.5) + _sq(grid, phi, 1.5) + 3.0 * _sq(grid, phi, 2.5)
    return X, Y


def negative_norm(state: State, s: float, paper_mode: bool = True) -> float:
    """``|Lambda^-s u|^2 + |Lambda^-s phi|^2 + |Lambda^-s grad phi|^2`` on mean-free data."""
    if paper_mode and not 0.0 <= s <= 0.5:
        raise ValueError(f"s must lie in [0, 1/2] in paper mode, got {s}")
    grid = state.grid
    u = _mean_free(state.u.spectral, grid.dim)
    phi = _mean_free(state.phi.spectral, grid.dim)
    w = grid.power(-2.0 * s)
    return grid.parseval(u, w) + grid.parseval(phi, w) + grid.parseval(phi, w * grid.k2)


def negative_norm_parts(state: State, s: float):
    """The three contributions of :func:`negative_norm` separately."""
    grid = state.grid
    u = _mean_free(state.u.spectral, grid.dim)
    phi = _mean_free(state.phi.spectral, grid.dim)
    w = grid.power(-2.0 * s)
    return {
        "u": grid.parseval(u, w),
        "phi": grid.parseval(phi, w),
        "grad_phi": grid.parseval(phi, w * grid.k2),
    }


def sobolev_series(state: State, orders=None) -> Dict[Tuple[str, float], float]:
    """Norms ``||Lambda**k f||`` keyed by ``(field, k)``; phi mean-free."""
    orders = DEFAULT_SOBOLEV_ORDERS if orders is None else orders
    grid = state.grid
    data = {
        "u": state.u.spectral,
        "phi": _mean_free(state.phi.spectral, grid.dim),
    }
    out = {}
    for name in sorted(orders):
        for k in orders[name]:
            out[(name, float(k))] = math.sqrt(_sq(grid, data[name], k))
    return out


def compute_record(
    state: State,
    neg_orders: Sequence[float] = DEFAULT_NEG_ORDERS,
    sobolev_orders=None,
) -> DiagnosticsRecord:
    p = state.params
    mu = chemical_potential(state.phi, p)
    kin = kinetic_energy(state)
    fe = free_energy(state)
    X, Y = critical_pair(state)
    return DiagnosticsRecord(
        time=state.time,
        kinetic=kin,
        free_energy=fe,
        dissipation=dissipation(state, mu),
        X=X,
        Y=Y,
        neg_norms={float(s): negative_norm(state, s, p.paper_mode) for s in neg_orders},
        sobolev_series=sobolev_series(state, sobolev_orders),
        energy=kin + p.capillarity * fe,
        phi_mean=state.phi.mean,
        div_u=state.divergence_norm(),
    )


# ---------------------------------------------------------------------------
# Trajectory functionals
# ---------------------------------------------------------------------------

ENERGY_FLOOR = 1e-300


def dissipation_residual(records: Sequence[DiagnosticsRecord]) -> float:
    """Relative defect of the energy law over the span of ``records``.

    ``|E(t_b) - E(t_a) + int D dt| / max(E(t_a), floor)`` with the trapezoid
    rule; records must be equispaced in time.
    """
    if len(records) < 3:
        raise ValueError("dissipation_residual needs at least 3 records")
    t = np.array([r.time for r in records])
    steps = np.diff(t)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-8 * steps.mean():
        raise ValueError("records must be equispaced in time")
    d = np.array([r.dissipation for r in records])
    integral = float(np.sum(0.5 * (d[1:] + d[:-1]) * steps))
    e_a, e_b = records[0].energy, records[-1].energy
    return abs(e_b - e_a + integral) / max(e_a, ENERGY_FLOOR)


def fit_decay(times, values, window=None, sigma_paper=float("nan"), min_points=10) -> DecayFit:
    """Least-squares exponent of ``values ~ C (1 + t)**(-sigma)`` on ``window``."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape:
        raise ValueError("times and values differ in length")
    if window is None:
        window = (float(t.min()), float(t.max()))
    t0, t1 = float(window[0]), float(window[1])
    sel = (t >= t0) & (t <= t1)
    if sel.sum() < min_points:
        raise ValueError(f"need at least {min_points} points in the window, got {int(sel.sum())}")
    if np.any(v[sel] <= 0) or not np.all(np.isfinite(v[sel])):
        raise ValueError("values must be positive and finite on the window")
    x = np.log1p(t[sel])
    y = np.log(v[sel])
    slope, intercept = np.polyfit(x, y, 1)
    misfit = y - (slope * x + intercept)
    return DecayFit(
        sigma_hat=float(-slope),
        window=(t0, t1),
        residual=float(np.sqrt(np.mean(misfit**2))),
        sigma_paper=float(sigma_paper),
        npoints=int(sel.sum()),
    )


def sigma_target(k: int, p: float, paper_mode: bool = True) -> float:
    """Decay exponent ``3/2 (1/p - 1/2) + k/2`` for ``L**p`` data."""
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k}")
    if paper_mode and not 1.5 <= p <= 2.0:
        raise ValueError(f"p must lie in [3/2, 2] in paper mode, got {p}")
    return 1.5 * (1.0 / p - 0.5) + 0.5 * k


def validity_horizon(box_length: float, ln_factor: float = LN_FACTOR, diffusivity: float = 1.0) -> float:
    """Time ``(L/2)**2 / (4 D ln_factor)`` until periodic images interact."""
    return (0.5 * box_length) ** 2 / (4.0 * diffusivity * ln_factor)


CSV_FIXED = ("time", "kinetic", "free_energy", "dissipation", "X", "Y")


def csv_columns(record: DiagnosticsRecord):
    cols = list(CSV_FIXED)
    cols += [f"neg_norm_s{_order_key(s)}" for s in record.neg_norms]
    cols += [f"{f}_H{_order_key(o)}" for (f, o) in record.sobolev_series]
    return cols


def csv_row(record: DiagnosticsRecord):
    vals = [getattr(record, c) for c in CSV_FIXED]
    vals += list(record.neg_norms.values())
    vals += list(record.sobolev_series.values())
    return [format(float(v), ".17g") for v in vals]
