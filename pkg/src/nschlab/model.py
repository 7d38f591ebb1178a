"""Navier-Stokes-Cahn-Hilliard right-hand sides on the periodic box.

Unknowns are the velocity ``u`` and the shifted order parameter
``phi = varphi - omega0``. With every physical constant equal to one::

    u_t   = P[-u.grad u - lap(phi) grad(phi)] + lap u
    phi_t = -u.grad(phi) - lap^2 phi + lap[(phi + omega0)**3 - phi]

``P`` is the Leray projector, so the pressure never appears; it can be
recovered with :func:`recover_pressure`. For the time splitting a multiple
``kappa`` of ``-lap phi`` is moved to the implicit side and compensated in
the explicit nonlinearity.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .spectral import Field, Grid, VectorField, dealiased_product, leray_hat

PHYSICAL_CONSTANTS = ("nu", "mobility", "capillarity", "eps", "zeta")


@dataclass(frozen=True)
class ModelParams:
    """Model constants.

    In paper mode ``omega0`` must be +-1 and every physical constant 1.
    ``kappa`` is the borrowed-Laplacian stabilisation (1 by default).
    ``linearized`` drops convection, the capillary force and the nonlinear
    part of the double-well derivative.
    """

    omega0: float = 1.0
    kappa: float = 1.0
    nu: float = 1.0
    mobility: float = 1.0
    capillarity: float = 1.0
    eps: float = 1.0
    zeta: float = 1.0
    linearized: bool = False
    paper_mode: bool = True

    def __post_init__(self):
        for name in ("omega0", "kappa") + PHYSICAL_CONSTANTS:
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        for name in PHYSICAL_CONSTANTS:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.paper_mode:
            if self.omega0 not in (-1.0, 1.0):
                raise ValueError(f"omega0 must be +1 or -1 in paper mode, got {self.omega0}")
            for name in PHYSICAL_CONSTANTS:
                if getattr(self, name) != 1.0:
                    raise ValueError(f"{name} is pinned to 1 in paper mode")

    @property
    def linear_well_slope(self):
        """``3 omega0**2 - 1``: coefficient of phi in the linearised ``(phi+omega0)**3 - phi``."""
        return 3.0 * self.omega0**2 - 1.0


@dataclass(frozen=True)
class State:
    """Velocity, shifted order parameter, constants and time."""

    u: VectorField
    phi: Field
    params: ModelParams = field(default_factory=ModelParams)
    time: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.phi.grid:
            raise ValueError("u and phi must share one grid")
        if self.time < 0:
            raise ValueError("time must be >= 0")

    @property
    def grid(self) -> Grid:
        return self.phi.grid

    @classmethod
    def from_spectral(cls, grid, u_hat, phi_hat, params=None, time=0.0):
        return cls(
            VectorField.from_spectral(grid, u_hat),
            Field(grid, spectral=phi_hat),
            params if params is not None else ModelParams(),
            float(time),
        )

    @classmethod
    def zeros(cls, grid, params=None):
        return cls(VectorField.zeros(grid), Field.zeros(grid), params or ModelParams())

    def replace(self, **changes):
        data = dict(u=self.u, phi=self.phi, params=self.params, time=self.time)
        data.update(changes)
        return State(**data)

    def divergence_norm(self):
        """``||div u||_2`` computed spectrally."""
        g = self.grid
        div = np.sum(1j * g.k_deriv * self.u.spectral, axis=0)
        return float(np.sqrt(g.parseval(div)))

    def is_finite(self):
        return bool(np.all(np.isfinite(self.u.spectral)) and np.all(np.isfinite(self.phi.spectral)))


def double_well(s_val):
    """``F(s) = (s**2 - 1)**2 / 4``; works elementwise on arrays."""
    return 0.25 * (np.square(s_val) - 1.0) ** 2


# ---------------------------------------------------------------------------
# Field-level operators
# ---------------------------------------------------------------------------


def _shifted_hat(phi: Field, omega0):
    hat = np.array(phi.spectral)
    hat[(0,) * phi.grid.dim] += omega0
    return hat


def chemical_potential(phi: Field, params: ModelParams = ModelParams()) -> Field:
    """``mu = -eps lap phi + zeta [(phi+omega0)**3 - (phi+omega0)]``, cubic dealiased."""
    grid = phi.grid
    shifted = Field(grid, spectral=_shifted_hat(phi, params.omega0))
    cube = dealiased_product([shifted, shifted, shifted])
    hat = params.eps * grid.k2 * phi.spectral + params.zeta * (cube.spectral - shifted.spectral)
    return Field(grid, spectral=hat)


def korteweg_force(phi: Field, coef: float = 1.0) -> VectorField:
    """Capillary force ``-coef * lap(phi) * grad(phi)`` (dealiased)."""
    grid = phi.grid
    hat = phi.spectral
    stack = np.concatenate([(-grid.k2 * hat)[np.newaxis], 1j * grid.k_deriv * hat])
    pad = grid.to_padded(stack)
    m = pad[0].size
    out = np.empty((grid.dim, m))
    kernels.korteweg(pad[0].reshape(-1), pad[1:].reshape(grid.dim, m), coef, out)
    return VectorField.from_spectral(
        grid, grid.from_padded(out.reshape((grid.dim,) + grid.padded_shape))
    )


def korteweg_force_stress(phi: Field, coef: float = 1.0) -> VectorField:
    """Capillary force in stress form ``-coef * div(grad phi (x) grad phi)``."""
    grid = phi.grid
    d = grid.dim
    grads = grid.to_padded(1j * grid.k_deriv * phi.spectral)
    comps = []
    for i in range(d):
        acc = np.zeros(grid.spectral_shape, dtype=complex)
        for j in range(d):
            tij = grid.from_padded(grads[i] * grads[j])
            acc += 1j * grid.k_deriv[j] * tij
        comps.append(-coef * acc)
    return VectorField.from_spectral(grid, np.stack(comps))


# ---------------------------------------------------------------------------
# Tendencies on spectral arrays
# ---------------------------------------------------------------------------


def _pairs(d):
    return [(i, l) for i in range(d) for l in range(i, d)]


def explicit_terms(grid: Grid, u_hat, phi_hat, params: ModelParams):
    """Explicit parts of both tendencies, momentum *not* yet projected.

    Returns ``(n_u, n_phi)`` with::

        n_u   = -div(u (x) u) - K eps lap(phi) grad(phi)
        n_phi = -u.grad(phi) + lap[M zeta (phi+omega0)**3 - (M zeta + kappa) phi]

    Zero modes of both are exactly zero (they vanish analytically).
    """
    d = grid.dim
    mz = params.mobility * params.zeta
    if params.linearized:
        n_u = np.zeros_like(u_hat)
        # linear part of M zeta [(phi+omega0)**3 - phi] - kappa phi
        n_phi = -grid.k2 * (mz * params.linear_well_slope - params.kappa) * phi_hat
        return n_u, n_phi

    kd = grid.k_deriv
    # physical fields on the padded grid: u (d), phi, grad phi (d), lap phi
    stack = np.concatenate(
        [
            u_hat,
            phi_hat[np.newaxis],
            1j * kd * phi_hat,
            (-grid.k2 * phi_hat)[np.newaxis],
        ]
    )
    pad = grid.to_padded(stack)
    m = pad[0].size
    flat = pad.reshape(pad.shape[0], m)
    u_p = flat[:d]
    phi_p = flat[d]
    grad_p = flat[d + 1 : 2 * d + 1]
    lap_p = flat[2 * d + 1]

    pairs = _pairs(d)
    prods = np.empty((len(pairs) + d + 2, m))
    kernels.sym_outer(u_p, prods[: len(pairs)])
    base = len(pairs)
    kernels.korteweg(lap_p, grad_p, params.capillarity * params.eps, prods[base : base + d])
    kernels.dot_pointwise(u_p, grad_p, prods[base + d])
    kernels.phi_source(phi_p, params.omega0, mz, mz + params.kappa, prods[base + d + 1])
    hats = grid.from_padded(prods.reshape((prods.shape[0],) + grid.padded_shape))

    index = {pair: p for p, pair in enumerate(pairs)}
    n_u = np.empty_like(u_hat)
    for i in range(d):
        acc = np.zeros(grid.spectral_shape, dtype=complex)
        for j in range(d):
            acc += kd[j] * hats[index[(min(i, j), max(i, j))]]
        n_u[i] = -1j * acc + hats[base + i]
    n_phi = -hats[base + d] - grid.k2 * hats[base + d + 1]

    zero = (Ellipsis,) + (0,) * d
    n_u[zero] = 0.0
    n_phi[zero] = 0.0
    return n_u, n_phi


@functools.lru_cache(maxsize=32)
def implicit_symbols(grid: Grid, params: ModelParams):
    """Diagonal implicit operators: ``(-nu|k|^2, -M eps|k|^4 - kappa|k|^2)``."""
    su = -params.nu * grid.k2
    sphi = -params.mobility * params.eps * grid.k2**2 - params.kappa * grid.k2
    su.setflags(write=False)
    sphi.setflags(write=False)
    return su, sphi


def rhs_hat(grid, u_hat, phi_hat, params):
    """Full tendencies on spectral arrays (projected momentum)."""
    n_u, n_phi = explicit_terms(grid, u_hat, phi_hat, params)
    su, sphi = implicit_symbols(grid, params)
    du = leray_hat(grid, n_u) + su * u_hat
    dphi = n_phi + sphi * phi_hat
    return du, dphi


# ---------------------------------------------------------------------------
# State-level API
# ---------------------------------------------------------------------------


def rhs(state: State):
    """Return ``(du, dphi)``, the projected tendencies of ``state``."""
    grid = state.grid
    du, dphi = rhs_hat(grid, state.u.spectral, state.phi.spectral, state.params)
    return VectorField.from_spectral(grid, du), Field(grid, spectral=dphi)


def rhs_split(state: State):
    """Split the tendencies into implicit (diagonal linear) and explicit parts.

    Returns ``((du_imp, dphi_imp), (du_exp, dphi_exp))``; the two pairs add
    up to :func:`rhs`. The explicit momentum part is projected.
    """
    grid = state.grid
    u_hat, phi_hat = state.u.spectral, state.phi.spectral
    n_u, n_phi = explicit_terms(grid, u_hat, phi_hat, state.params)
    su, sphi = implicit_symbols(grid, state.params)
    implicit = (
        VectorField.from_spectral(grid, su * u_hat),
        Field(grid, spectral=sphi * phi_hat),
    )
    explicit = (
        VectorField.from_spectral(grid, leray_hat(grid, n_u)),
        Field(grid, spectral=n_phi),
    )
    return implicit, explicit


def momentum_unprojected(state: State) -> VectorField:
    """``-u.grad u + F_K + nu lap u`` before pressure elimination."""
    grid = state.grid
    n_u, _ = explicit_terms(grid, state.u.spectral, state.phi.spectral, state.params)
    su, _ = implicit_symbols(grid, state.params)
    return VectorField.from_spectral(grid, n_u + su * state.u.spectral)


def recover_pressure(state: State) -> Field:
    """Zero-mean pressure solving ``-lap pi = div(u.grad u - F_K)``.

    The momentum tendency is then ``momentum_unprojected - grad pi``.
    """
    grid = state.grid
    n_u, _ = explicit_terms(grid, state.u.spectral, state.phi.spectral, state.params)
    # -lap pi = div(-n_u)  ->  |k|^2 pi_hat = -i k.n_u
    div = np.sum(1j * grid.k_deriv * n_u, axis=0)
    pi_hat = -div * grid.inv_k2_deriv
    pi_hat[(0,) * grid.dim] = 0.0
    return Field(grid, spectral=pi_hat)
