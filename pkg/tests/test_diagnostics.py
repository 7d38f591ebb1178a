import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nschlab.diagnostics import (
    DecayFit,
    DiagnosticsRecord,
    compute_record,
    critical_pair,
    csv_columns,
    csv_row,
    dissipation,
    dissipation_residual,
    fit_decay,
    free_energy,
    kinetic_energy,
    negative_norm,
    negative_norm_parts,
    sigma_target,
    total_energy,
    validity_horizon,
)
from nschlab.initial import periodized_gaussian
from nschlab.integrator import StepControls, integrate
from nschlab.model import ModelParams, State
from nschlab.spectral import Field, VectorField, make_grid, sobolev_norm

from conftest import VOL


def stokes(grid):
    x = grid.coordinates()
    z = np.zeros(grid.shape)
    return VectorField.from_values(grid, np.stack([np.sin(x[1]), z, z]))


def phi_state(grid, values, params=None):
    return State(VectorField.zeros(grid), Field(grid, values), params or ModelParams())


# -- energies ------------------------------------------------------------------


def test_energy_of_pure_phase(g8):
    s = State.zeros(g8)
    assert total_energy(s) == 0.0
    assert dissipation(s) == 0.0


def test_kinetic_energy_stokes(g8):
    s = State(stokes(g8), Field.zeros(g8))
    assert kinetic_energy(s) == pytest.approx(VOL / 4, rel=1e-14)
    assert total_energy(s) == pytest.approx(VOL / 4, rel=1e-14)
    # grad u has the same L2 norm as u for |k| = 1, mu = 0
    assert dissipation(s) == pytest.approx(VOL / 2, rel=1e-14)


@pytest.mark.parametrize("a", [0.1, 0.5, 1.0])
def test_free_energy_single_mode(g8, a):
    # F(1 + s) = s**2 + s**3 + s**4 / 4 averaged over sin x, plus a**2 / 4 from the gradient
    x = g8.coordinates()
    s = phi_state(g8, a * np.sin(x[0]))
    expected = VOL * (0.75 * a**2 + 3 * a**4 / 32)
    assert free_energy(s) == pytest.approx(expected, rel=1e-13)


def test_free_energy_quadrature(g16):
    # a band-limited field evaluated on a 4x finer grid gives an independent reference
    rng = np.random.default_rng(3)
    x = g16.coordinates()
    coef = rng.standard_normal(3) * 0.3
    phi = coef[0] * np.sin(x[0]) + coef[1] * np.cos(2 * x[1]) + coef[2] * np.sin(x[0] + x[2])
    fine = make_grid(3, 64)
    xf = fine.coordinates()
    phif = coef[0] * np.sin(xf[0]) + coef[1] * np.cos(2 * xf[1]) + coef[2] * np.sin(xf[0] + xf[2])
    gx = coef[0] * np.cos(xf[0]) + coef[2] * np.cos(xf[0] + xf[2])
    gy = -2 * coef[1] * np.sin(2 * xf[1])
    gz = coef[2] * np.cos(xf[0] + xf[2])
    dens = 0.5 * (gx**2 + gy**2 + gz**2) + 0.25 * ((phif + 1) ** 2 - 1) ** 2
    quad = dens.sum() * fine.spacing**3
    assert free_energy(phi_state(g16, phi)) == pytest.approx(quad, rel=1e-12)


# -- critical pair and negative norms --------------------------------------------


def test_critical_pair_sin(g8):
    x = g8.coordinates()
    X, Y = critical_pair(phi_state(g8, np.sin(x[0])))
    assert X == pytest.approx(VOL, rel=1e-14)
    assert Y == pytest.approx(2 * VOL, rel=1e-14)


def test_critical_pair_ignores_phi_mean(g8):
    x = g8.coordinates()
    a = critical_pair(phi_state(g8, np.sin(x[0])))
    b = critical_pair(phi_state(g8, np.sin(x[0]) + 0.3))
    assert a == pytest.approx(b, rel=1e-14)


def test_critical_pair_velocity(g16):
    x = g16.coordinates()
    z = np.zeros(g16.shape)
    u = VectorField.from_values(g16, np.stack([np.sin(2 * x[1]), z, z]))
    X, Y = critical_pair(State(u, Field.zeros(g16)))
    assert X == pytest.approx(VOL, rel=1e-14)  # 2 * |sin|**2
    assert Y == pytest.approx(4 * VOL, rel=1e-14)  # 8 * |sin|**2


def test_negative_norm_sin2x(g8):
    x = g8.coordinates()
    s = phi_state(g8, np.sin(2 * x[0]))
    assert negative_norm(s, 0.5) == pytest.approx(1.25 * VOL, rel=1e-14)
    parts = negative_norm_parts(s, 0.5)
    assert parts["phi"] == pytest.approx(VOL / 4) and parts["grad_phi"] == pytest.approx(VOL)
    assert parts["u"] == 0.0


def test_negative_norm_range(g8):
    s = State.zeros(g8)
    with pytest.raises(ValueError):
        negative_norm(s, 0.75)
    with pytest.raises(ValueError):
        negative_norm(s, -0.1)
    assert negative_norm(s, 0.75, paper_mode=False) == 0.0


@given(st.floats(0.0, 0.5))
def test_negative_norm_monotone_in_s(s):
    # on modes |k| >= 1 raising s can only lower every term
    g = make_grid(3, 8)
    x = g.coordinates()
    st_ = phi_state(g, np.sin(x[0]) + np.cos(3 * x[1]))
    assert negative_norm(st_, s) <= negative_norm(st_, 0.0) * (1 + 1e-14)


# -- records --------------------------------------------------------------------


def test_record_fields(g8):
    x = g8.coordinates()
    s = State(stokes(g8), Field(g8, 0.1 * np.sin(x[0])))
    r = compute_record(s)
    assert r.energy == pytest.approx(total_energy(s))
    assert set(r.neg_norms) == {0.0, 0.25, 0.5}
    assert r.sobolev_series[("phi", 1.0)] == pytest.approx(sobolev_norm(s.phi, 1))
    d = r.to_dict()
    assert d["neg_norms"]["0.25"] == r.neg_norms[0.25]
    assert "u:2" in d["sobolev_series"]


def test_record_rejects_negative():
    with pytest.raises(ValueError):
        DiagnosticsRecord(0.0, -1.0, 0.0, 0.0, 0.0, 0.0)


def test_csv_column_order(g8):
    r = compute_record(State.zeros(g8), neg_orders=(0.0, 0.5), sobolev_orders={"u": (0,), "phi": (1, 2)})
    assert csv_columns(r) == [
        "time", "kinetic", "free_energy", "dissipation", "X", "Y",
        "neg_norm_s0", "neg_norm_s0.5", "phi_H1", "phi_H2", "u_H0",
    ]
    assert len(csv_row(r)) == len(csv_columns(r))


# -- energy law residual ----------------------------------------------------------


def collect(state, dt, t_end):
    records = [compute_record(state)]
    integrate(state, StepControls(dt, t_end), [lambda s, r: records.append(r)])
    return records


def test_residual_zero_trajectory(g8):
    assert dissipation_residual(collect(State.zeros(g8), 0.01, 0.05)) == 0.0


def test_residual_stokes_first_order(g8):
    s = State(stokes(g8), Field.zeros(g8))
    r1 = dissipation_residual(collect(s, 0.02, 0.2))
    r2 = dissipation_residual(collect(s, 0.01, 0.2))
    assert r1 < 0.05
    assert math.log2(r1 / r2) == pytest.approx(1.0, abs=0.1)


def test_residual_input_checks(g8):
    recs = collect(State.zeros(g8), 0.01, 0.05)
    with pytest.raises(ValueError):
        dissipation_residual(recs[:2])
    with pytest.raises(ValueError):
        dissipation_residual([recs[0], recs[1], recs[3]])


# -- decay fits ---------------------------------------------------------------------


@pytest.mark.parametrize("sigma", [0.25, 0.5, 0.75, 1.0, 1.5])
def test_fit_exact_power_law(sigma):
    t = np.linspace(0, 30, 61)
    fit = fit_decay(t, 3.0 * (1 + t) ** (-sigma), window=(5, 30))
    assert fit.sigma_hat == pytest.approx(sigma, abs=1e-10)
    assert fit.residual < 1e-12
    assert fit.npoints == 51


def test_fit_constant_series():
    t = np.linspace(0, 10, 21)
    assert fit_decay(t, np.full_like(t, 2.0)).sigma_hat == pytest.approx(0.0, abs=1e-12)


def test_fit_input_checks():
    t = np.linspace(0, 10, 21)
    with pytest.raises(ValueError):
        fit_decay(t, np.ones(5))
    with pytest.raises(ValueError):
        fit_decay(t, np.ones_like(t), window=(9, 10))
    with pytest.raises(ValueError):
        fit_decay(t, -np.ones_like(t))
    with pytest.raises(ValueError):
        DecayFit(0.5, (2.0, 1.0), 0.0)


def test_fit_heat_gaussian():
    # heat flow of a Gaussian of variance 2 has variance 2 (1 + t), so
    # ||grad e^{t lap} G|| = C (1 + t)**(-(3/4 + 1/2)) in whole space
    L = 16 * math.pi
    g = make_grid(3, 32, L)
    f0 = Field(g, periodized_gaussian(g, math.sqrt(2.0)))
    t_star = validity_horizon(L)
    times = np.linspace(0, t_star, 60)
    norms = [sobolev_norm(Field(g, spectral=f0.spectral * np.exp(-t * g.k2)), 1) for t in times]
    fit = fit_decay(times, norms, window=(5.0, t_star))
    assert fit.sigma_hat == pytest.approx(1.25, rel=0.15)


# -- exponents and horizon ------------------------------------------------------------


@pytest.mark.parametrize("k, p, expected", [(0, 2.0, 0.0), (0, 1.5, 0.25), (1, 1.5, 0.75), (2, 1.5, 1.25)])
def test_sigma_target(k, p, expected):
    assert sigma_target(k, p) == pytest.approx(expected)


def test_sigma_target_checks():
    with pytest.raises(ValueError):
        sigma_target(0, 1.0)
    with pytest.raises(ValueError):
        sigma_target(-1, 2.0)
    assert sigma_target(0, 1.0, paper_mode=False) == pytest.approx(0.75)


def test_validity_horizon():
    assert validity_horizon(32 * math.pi, diffusivity=2.0) == pytest.approx(34.29, abs=0.01)
    assert validity_horizon(2 * math.pi, ln_factor=1.0) == pytest.approx(math.pi**2 / 4)
