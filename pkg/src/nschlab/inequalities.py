"""Empirical checks of the functional inequalities used in the analysis.

Every checker returns ``LHS / RHS`` evaluated with the spectral norms of
:mod:`nschlab.spectral`. Only the interpolation inequality has constant
exactly 1 (it is Hoelder's inequality in Fourier space) and is a hard
pass/fail; for the others the suite reports the worst ratio seen over
random band-limited fields and how it moves under grid refinement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ExponentMismatch
from .initial import periodized_gaussian, random_band_limited
from .spectral import (
    Field,
    Grid,
    dealiased_product,
    fractional_laplacian,
    gradient,
    lp_norm,
    remove_mean,
    sobolev_norm,
)

EXPONENT_TOL = 1e-12
INTERPOLATION_TOL = 1e-10

#: Numerators below this fraction of their natural scale count as exact zeros.
ZERO_FRACTION = 1e-13


@dataclass
class IneqReport:
    id: str
    trials: int
    worst_ratio: float
    params: dict = field(default_factory=dict)
    violations: int = 0
    seed: Optional[int] = None
    refined_worst_ratio: Optional[float] = None

    def __post_init__(self):
        if self.worst_ratio < 0:
            raise ValueError("worst_ratio must be >= 0")

    @property
    def refinement_change(self):
        """Relative change of the worst ratio under refinement (None if not run)."""
        if self.refined_worst_ratio is None or self.worst_ratio == 0:
            return None
        return abs(self.refined_worst_ratio - self.worst_ratio) / self.worst_ratio

    def to_dict(self):
        return {
            "id": self.id,
            "params": self.params,
            "trials": self.trials,
            "worst_ratio": self.worst_ratio,
            "violations": self.violations,
            "seed": self.seed,
            "refined_worst_ratio": self.refined_worst_ratio,
            "refinement_change": self.refinement_change,
        }


def _lam_lp(f: Field, order, p):
    """``||Lambda**order f||_{L^p}``; order 0 is ``f`` itself."""
    if order == 0:
        return lp_norm(f, p)
    return lp_norm(fractional_laplacian(f, 0.5 * order), p)


def _inv(p):
    return 0.0 if p == math.inf else 1.0 / p


def _ratio(num, den, scale):
    if num <= ZERO_FRACTION * scale:
        return 0.0
    return num / den


# ---------------------------------------------------------------------------
# Single-field checkers
# ---------------------------------------------------------------------------


def embedding_exponent(s, dim=3):
    return 2.0 * dim / (dim - 2.0 * s)


def check_embedding(f: Field, s: float) -> float:
    """``||f||_{L^{2d/(d-2s)}} / ||f||_{H^s}`` for ``0 <= s < d/2``."""
    d = f.grid.dim
    if not 0.0 <= s < 0.5 * d:
        residual = -s if s < 0 else s - 0.5 * d
        raise ExponentMismatch(f"embedding needs 0 <= s < {d / 2}", residual)
    p = embedding_exponent(s, d)
    return lp_norm(f, p) / sobolev_norm(f, s)


def gn_theta(alpha, m, l, p, q, r, dim=3):
    """Solve the scaling relation for ``theta``; None if it leaves theta free."""
    lhs = alpha / dim - _inv(p)
    a = m / dim - _inv(q)
    b = l / dim - _inv(r)
    if abs(b - a) <= EXPONENT_TOL:
        if abs(lhs - a) > EXPONENT_TOL:
            raise ExponentMismatch("scaling relation has no solution", lhs - a)
        return None
    return (lhs - a) / (b - a)


def check_gn(f: Field, alpha, m, l, p, q, r, theta=None) -> float:
    """Gagliardo-Nirenberg ratio ``|L^a f|_p / (|L^m f|_q^(1-t) |L^l f|_r^t)``.

    ``theta`` is solved from the scaling relation unless given; a given or
    solved value must satisfy the relation to 1e-12 and lie in [0, 1].
    """
    d = f.grid.dim
    if not (0 <= m <= l and 0 <= alpha <= l):
        raise ExponentMismatch("need 0 <= m, alpha <= l", max(m - l, alpha - l, -m, -alpha))
    solved = gn_theta(alpha, m, l, p, q, r, d)
    if theta is None:
        theta = 0.0 if solved is None else solved
    lhs = alpha / d - _inv(p)
    rhs = (m / d - _inv(q)) * (1 - theta) + (l / d - _inv(r)) * theta
    if abs(lhs - rhs) > EXPONENT_TOL:
        raise ExponentMismatch("exponents violate the scaling relation", lhs - rhs)
    if not 0.0 <= theta <= 1.0:
        raise ExponentMismatch("theta outside [0, 1]", theta - min(max(theta, 0.0), 1.0))
    if p == math.inf and not 0.0 < theta < 1.0:
        raise ExponentMismatch("p = inf requires 0 < theta < 1", 0.0)
    num = _lam_lp(f, alpha, p)
    den = _lam_lp(f, m, q) ** (1 - theta) * _lam_lp(f, l, r) ** theta
    return num / den


def _check_holder(p, p1, p2, q1, q2):
    r1 = _inv(p) - _inv(p1) - _inv(p2)
    r2 = _inv(p) - _inv(q1) - _inv(q2)
    worst = r1 if abs(r1) >= abs(r2) else r2
    if abs(worst) > EXPONENT_TOL:
        raise ExponentMismatch("need 1/p = 1/p1 + 1/p2 = 1/q1 + 1/q2", worst)


def check_kato_ponce(f: Field, g: Field, s, p=2.0, p1=4.0, p2=4.0, q1=4.0, q2=4.0):
    """Product-rule and commutator ratios ``(product, commutator)``.

    product:    ``|L^s(fg)|_p / (|f|_p1 |L^s g|_p2 + |L^s f|_q1 |g|_q2)``
    commutator: ``|L^s(fg) - f L^s g|_p / (|grad f|_p1 |L^(s-1) g|_p2 + |L^s f|_q1 |g|_q2)``

    A numerator that vanishes to rounding gives ratio 0 (this covers the
    0/0 of a constant ``f`` in the commutator). For ``s < 1`` the
    commutator needs a mean-free ``g``.
    """
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    if not (1 < p < math.inf and 1 < p2 < math.inf and 1 < q2 < math.inf):
        raise ExponentMismatch("need 1 < p, p2, q2 < inf", 0.0)
    _check_holder(p, p1, p2, q1, q2)
    grid = f.grid
    if g.grid != grid:
        raise ValueError("f and g live on different grids")
    fg = dealiased_product([f, g])
    ls_fg = fractional_laplacian(fg, 0.5 * s)
    ls_f = fractional_laplacian(f, 0.5 * s)
    ls_g = fractional_laplacian(g, 0.5 * s)
    ls_f_q1 = lp_norm(ls_f, q1)
    g_q2 = lp_norm(g, q2)

    num_p = lp_norm(ls_fg, p)
    den_p = lp_norm(f, p1) * lp_norm(ls_g, p2) + ls_f_q1 * g_q2
    f_ls_g = dealiased_product([f, ls_g])
    product = _ratio(num_p, den_p, lp_norm(f_ls_g, p) + num_p)

    comm = ls_fg - f_ls_g
    num_c = lp_norm(comm, p)
    grad_f = lp_norm(gradient(f), p1)
    lower = g if s == 1 else fractional_laplacian(g, 0.5 * (s - 1.0))
    den_c = grad_f * lp_norm(lower, p2) + ls_f_q1 * g_q2
    commutator = _ratio(num_c, den_c, num_p + lp_norm(f_ls_g, p))
    return product, commutator


def hls_exponent(s, dim=3):
    return 1.0 / (0.5 + s / dim)


def check_hls(f: Field, s, p) -> float:
    """``||f||_{H^-s} / ||f||_{L^p}`` with ``1/2 + s/d = 1/p``; ``f`` mean-free."""
    d = f.grid.dim
    residual = 0.5 + s / d - 1.0 / p
    if abs(residual) > EXPONENT_TOL:
        raise ExponentMismatch("need 1/2 + s/d = 1/p", residual)
    if not (0.0 <= s < 0.5 * d and 1.0 < p <= 2.0):
        raise ExponentMismatch(f"need 0 <= s < {d / 2} and 1 < p <= 2", residual)
    return sobolev_norm(fractional_laplacian(f, -0.5 * s), 0) / lp_norm(f, p)


def interpolation_theta(l, s):
    return 1.0 / (l + 1.0 + s)


def check_interpolation(f: Field, l, s) -> float:
    """``|L^l f| / (|L^(l+1) f|^(1-t) |f|_{H^-s}^t)``, ``t = 1/(l+1+s)``.

    Hoelder's inequality in Fourier space makes the constant exactly 1.
    """
    if l < 0 or s < 0:
        raise ExponentMismatch("need l >= 0 and s >= 0", min(l, s))
    theta = interpolation_theta(l, s)
    num = sobolev_norm(f, l)
    top = sobolev_norm(f, l + 1)
    neg = sobolev_norm(fractional_laplacian(f, -0.5 * s), 0) if s else sobolev_norm(f, 0)
    return num / (top ** (1 - theta) * neg**theta)


# ---------------------------------------------------------------------------
# Random fields and suites
# ---------------------------------------------------------------------------


def random_field(grid: Grid, rng, kmax_index=None, slope=0.0) -> Field:
    """Mean-free real field, band-limited to ``|m| <= n/4``.

    Coefficients are unit complex Gaussians times ``|m|**slope``.
    """
    kmax_index = grid.n // 4 if kmax_index is None else kmax_index
    hat = random_band_limited(grid, rng, kmax_index)
    if slope:
        hat = hat * grid.power(slope) * grid.fundamental ** (-slope)
    return Field(grid, spectral=hat)


def refine(f: Field) -> Field:
    """The same band-limited field sampled on a grid twice as fine."""
    fine = Grid(f.grid.dim, 2 * f.grid.n, f.grid.box_length)
    return Field(fine, spectral=f.grid.pad(f.spectral))


def _worst(ratios):
    return max(ratios) if ratios else 0.0


def _run_pairs(check, fields, refine_fields):
    coarse = [check(*fs) for fs in fields]
    fine = [check(*(refine(f) for f in fs)) for fs in fields] if refine_fields else None
    return coarse, fine


def suite_embedding(grid, trials, seed, s=1.0, refine_fields=True):
    rng = np.random.default_rng(seed)
    fields = [(random_field(grid, rng),) for _ in range(trials)]
    coarse, fine = _run_pairs(lambda f: check_embedding(f, s), fields, refine_fields)
    return IneqReport(
        "embedding", trials, _worst(coarse), {"s": s, "p": embedding_exponent(s, grid.dim)},
        seed=seed, refined_worst_ratio=_worst(fine) if fine is not None else None,
    )


def suite_gn(grid, trials, seed, alpha=1.0, m=0.0, l=2.0, p=2.0, q=2.0, r=2.0, refine_fields=True):
    rng = np.random.default_rng(seed)
    theta = gn_theta(alpha, m, l, p, q, r, grid.dim)
    fields = [(random_field(grid, rng),) for _ in range(trials)]
    check = lambda f: check_gn(f, alpha, m, l, p, q, r)  # noqa: E731
    coarse, fine = _run_pairs(check, fields, refine_fields)
    params = {"alpha": alpha, "m": m, "l": l, "p": p, "q": q, "r": r, "theta": theta}
    hard = p == q == r == 2.0
    violations = sum(c > 1 + INTERPOLATION_TOL for c in coarse) if hard else 0
    return IneqReport(
        "gagliardo-nirenberg", trials, _worst(coarse), params, violations, seed,
        _worst(fine) if fine is not None else None,
    )


def suite_kato_ponce(grid, trials, seed, s=1.0, p=2.0, p1=4.0, p2=4.0, q1=4.0, q2=4.0, refine_fields=True):
    rng = np.random.default_rng(seed)
    fields = [(random_field(grid, rng), random_field(grid, rng)) for _ in range(trials)]
    check = lambda f, g: check_kato_ponce(f, g, s, p, p1, p2, q1, q2)  # noqa: E731
    pairs = [check(*fs) for fs in fields]
    params = {"s": s, "p": p, "p1": p1, "p2": p2, "q1": q1, "q2": q2}
    out = []
    for idx, name in ((0, "kato-ponce-product"), (1, "kato-ponce-commutator")):
        coarse = [r[idx] for r in pairs]
        out.append(IneqReport(name, trials, _worst(coarse), dict(params), seed=seed))
    if refine_fields:
        fine = [check(*(refine(f) for f in fs)) for fs in fields]
        for idx, rep in enumerate(out):
            rep.refined_worst_ratio = _worst([r[idx] for r in fine])
    return out


def suite_hls(grid, trials, seed, s=0.5, refine_fields=True):
    rng = np.random.default_rng(seed)
    p = hls_exponent(s, grid.dim)
    fields = [(random_field(grid, rng),) for _ in range(trials)]
    coarse, fine = _run_pairs(lambda f: check_hls(f, s, p), fields, refine_fields)
    return IneqReport(
        "hardy-littlewood-sobolev", trials, _worst(coarse), {"s": s, "p": p},
        seed=seed, refined_worst_ratio=_worst(fine) if fine is not None else None,
    )


def suite_interpolation(grid, trials, seed, l_max=3.0, s_max=1.5):
    """Hard check: random fields, random spectral slope, random ``(l, s)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = 0
    for _ in range(trials):
        f = random_field(grid, rng, slope=rng.uniform(-2.0, 2.0))
        l = rng.uniform(0.0, l_max)
        s = rng.uniform(0.0, s_max)
        ratio = check_interpolation(f, l, s)
        worst = max(worst, ratio)
        violations += ratio > 1.0 + INTERPOLATION_TOL
    return IneqReport(
        "interpolation", trials, worst, {"l_max": l_max, "s_max": s_max, "tol": INTERPOLATION_TOL},
        violations, seed,
    )


def run_suite(grid: Grid, trials: int = 200, interpolation_trials: int = 10_000, seed: int = 0,
              refine_fields: bool = True):
    """All checkers with fixed seeds; reports sorted in a fixed order."""
    if trials < 0 or interpolation_trials < 0:
        raise ValueError("trial counts must be >= 0")
    reports = []
    if interpolation_trials:
        reports.append(suite_interpolation(grid, interpolation_trials, seed))
    if trials:
        reports.append(suite_embedding(grid, trials, seed + 1, refine_fields=refine_fields))
        reports.append(suite_gn(grid, trials, seed + 2, refine_fields=refine_fields))
        reports.extend(suite_kato_ponce(grid, trials, seed + 3, refine_fields=refine_fields))
        reports.append(suite_hls(grid, trials, seed + 4, refine_fields=refine_fields))
    return reports


def hls_gaussian_family(grid: Grid, widths, s=0.5):
    """HLS ratios for mean-removed periodised Gaussians of shrinking width."""
    p = hls_exponent(s, grid.dim)
    out = []
    for w in widths:
        f = remove_mean(Field(grid, periodized_gaussian(grid, w)))
        out.append(check_hls(f, s, p))
    return out
