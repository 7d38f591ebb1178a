import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nschlab.errors import ExponentMismatch
from nschlab.inequalities import (
    IneqReport,
    check_embedding,
    check_gn,
    check_hls,
    check_interpolation,
    check_kato_ponce,
    gn_theta,
    hls_gaussian_family,
    interpolation_theta,
    random_field,
    refine,
    run_suite,
    suite_interpolation,
)
from nschlab.spectral import Field, make_grid, sobolev_norm

from conftest import VOL


def sin_field(grid, m=1, axis=0):
    x = grid.coordinates()
    return Field(grid, np.sin(m * x[axis]))


# -- embedding -----------------------------------------------------------------


def test_embedding_s0_is_one(g16, rng):
    f = random_field(g16, rng)
    assert check_embedding(f, 0.0) == pytest.approx(1.0, rel=1e-13)


def test_embedding_single_mode(g16):
    # mean of sin**6 is 5/16; |sin|_{H^1}**2 = VOL / 2
    expected = (VOL * 5 / 16) ** (1 / 6) / math.sqrt(VOL / 2)
    assert check_embedding(sin_field(g16), 1.0) == pytest.approx(expected, rel=1e-13)


def test_embedding_range(g8):
    with pytest.raises(ExponentMismatch) as info:
        check_embedding(sin_field(g8), 1.5)
    assert info.value.residual == pytest.approx(0.0)
    with pytest.raises(ExponentMismatch) as info:
        check_embedding(sin_field(g8), -0.25)
    assert info.value.residual == pytest.approx(0.25)


# -- Gagliardo-Nirenberg ----------------------------------------------------------


def test_gn_degenerate_theta(g16, rng):
    f = random_field(g16, rng)
    assert check_gn(f, 1.0, 1.0, 2.0, 3.0, 3.0, 2.0, theta=0.0) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("m", [1, 3])
def test_gn_single_mode_l2(g16, m):
    assert check_gn(sin_field(g16, m), 1.0, 0.0, 2.0, 2.0, 2.0, 2.0) == pytest.approx(1.0, rel=1e-13)


def test_gn_theta_solution():
    assert gn_theta(1.0, 0.0, 2.0, 2.0, 2.0, 2.0) == pytest.approx(0.5)
    assert gn_theta(1.0, 1.0, 1.0, 2.0, 2.0, 2.0) is None


def test_gn_rejects_bad_exponents(g8):
    # alpha above l
    with pytest.raises(ExponentMismatch):
        check_gn(sin_field(g8), 3.0, 0.0, 2.0, 2.0, 2.0, 2.0)
    # theta solves to 1.5
    with pytest.raises(ExponentMismatch):
        check_gn(sin_field(g8), 2.0, 0.0, 2.0, 6.0, 2.0, 2.0)


def test_gn_residual_value(g8):
    with pytest.raises(ExponentMismatch) as info:
        check_gn(sin_field(g8), 1.0, 0.0, 2.0, 2.0, 2.0, 2.0, theta=0.25)
    assert info.value.residual == pytest.approx((1 / 3 - 1 / 2) - (-1 / 2 + 0.25 * 2 / 3))


@given(st.integers(0, 10_000), st.floats(-2.0, 2.0))
def test_gn_l2_case_is_hoelder(seed, slope):
    g = make_grid(3, 8)
    f = random_field(g, np.random.default_rng(seed), slope=slope)
    assert check_gn(f, 1.0, 0.0, 2.0, 2.0, 2.0, 2.0) <= 1 + 1e-10


# -- Kato-Ponce -------------------------------------------------------------------


def test_kp_constant_f_product(g16, rng):
    g = random_field(g16, rng)
    one = Field.constant(g16, 1.0)
    product, _ = check_kato_ponce(one, g, 1.0, p=2.0, p1=math.inf, p2=2.0, q1=4.0, q2=4.0)
    assert product == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("c", [1.0, -2.0])
def test_kp_constant_f_commutator(g16, rng, c):
    g = random_field(g16, rng)
    _, comm = check_kato_ponce(Field.constant(g16, c), g, 1.0)
    assert comm == 0.0


def test_kp_rejects_hoelder_violation(g8):
    f = sin_field(g8)
    with pytest.raises(ExponentMismatch) as info:
        check_kato_ponce(f, f, 1.0, p=2.0, p1=4.0, p2=4.0, q1=2.0, q2=4.0)
    assert info.value.residual == pytest.approx(-0.25)
    with pytest.raises(ValueError):
        check_kato_ponce(f, f, 0.0)


def test_kp_ratios_finite(g16, rng):
    f, g = random_field(g16, rng), random_field(g16, rng)
    product, comm = check_kato_ponce(f, g, 1.0)
    assert 0 < product < 10 and 0 < comm < 10


# -- HLS --------------------------------------------------------------------------


def test_hls_s0(g16, rng):
    assert check_hls(random_field(g16, rng), 0.0, 2.0) == pytest.approx(1.0, rel=1e-13)


def test_hls_single_mode():
    # int_0^{2 pi} |sin|**1.5 = 2 B(5/4, 1/2)
    g = make_grid(3, 64)
    beta = math.gamma(1.25) * math.gamma(0.5) / math.gamma(1.75)
    lp = (4 * math.pi**2 * 2 * beta) ** (2 / 3)
    expected = math.sqrt(VOL / 2) / lp
    # |sin|**1.5 has a kink at its zeros, so the rectangle rule converges like h**2.5
    assert check_hls(sin_field(g), 0.5, 1.5) == pytest.approx(expected, rel=1e-4)


def test_hls_rejects_exponents(g8):
    with pytest.raises(ExponentMismatch) as info:
        check_hls(sin_field(g8), 0.5, 2.0)
    assert info.value.residual == pytest.approx(1 / 6)


def test_hls_gaussian_family_bounded():
    g = make_grid(3, 32)
    widths = [g.box_length / w for w in (8, 12, 16, 24, 32)]
    ratios = hls_gaussian_family(g, widths)
    assert all(np.isfinite(ratios))
    assert max(ratios) / min(ratios) < 2.0


# -- interpolation -----------------------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3])
def test_interpolation_single_mode(g16, m):
    assert check_interpolation(sin_field(g16, m), 1.3, 0.7) == pytest.approx(1.0, rel=1e-12)


def test_interpolation_theta():
    assert interpolation_theta(0, 1) == 0.5


def test_interpolation_two_modes(g16):
    x = g16.coordinates()
    f = Field(g16, np.sin(x[0]) + np.sin(4 * x[1]))
    assert check_interpolation(f, 0.0, 1.0) < 1 - 1e-3


def test_interpolation_rejects_negative(g8):
    with pytest.raises(ExponentMismatch):
        check_interpolation(sin_field(g8), -1.0, 0.5)


@given(st.integers(0, 10_000), st.floats(-2.0, 2.0), st.floats(0.0, 3.0), st.floats(0.0, 1.5))
def test_interpolation_never_exceeds_one(seed, slope, l, s):
    g = make_grid(3, 8)
    f = random_field(g, np.random.default_rng(seed), slope=slope)
    assert check_interpolation(f, l, s) <= 1 + 1e-10


# -- fields and suites ---------------------------------------------------------------


def test_random_field_properties(g16, rng):
    f = random_field(g16, rng)
    assert f.spectral[0, 0, 0] == 0
    assert np.abs(f.spectral[g16.k2 > 16 + 1e-9]).max() == 0


def test_refine_preserves_norms(g16, rng):
    f = random_field(g16, rng)
    fine = refine(f)
    assert fine.grid.n == 32
    for s in (0, 1, -0.5):
        assert sobolev_norm(fine, s) == pytest.approx(sobolev_norm(f, s), rel=1e-12)


def test_report_dict():
    rep = IneqReport("x", 3, 0.5, {"s": 1}, 0, 7, 0.51)
    d = rep.to_dict()
    assert set(d) >= {"id", "params", "trials", "worst_ratio", "violations", "seed"}
    assert d["refinement_change"] == pytest.approx(0.02)
    with pytest.raises(ValueError):
        IneqReport("x", 1, -1.0)


def test_suite_zero_trials(g8):
    assert run_suite(g8, trials=0, interpolation_trials=0) == []


def test_suite_deterministic(g8):
    a = [r.to_dict() for r in run_suite(g8, trials=5, interpolation_trials=50, seed=3)]
    b = [r.to_dict() for r in run_suite(g8, trials=5, interpolation_trials=50, seed=3)]
    assert a == b
    assert [r["id"] for r in a] == [
        "interpolation", "embedding", "gagliardo-nirenberg",
        "kato-ponce-product", "kato-ponce-commutator", "hardy-littlewood-sobolev",
    ]


def test_interpolation_suite_small(g8):
    rep = suite_interpolation(g8, 300, seed=1)
    assert rep.violations == 0 and rep.worst_ratio <= 1 + 1e-10
