"""Time stepping for the NSCH state.

``imex1`` is first-order implicit-explicit Euler with the diagonal linear
operators (viscosity, biharmonic, borrowed Laplacian) treated implicitly.
``rk4`` is the classical explicit Runge-Kutta method on the full right-hand
side and serves as an independent reference.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from . import kernels
from .errors import StepDiverged
from .model import State, explicit_terms, implicit_symbols, rhs_hat
from .spectral import leray_hat

SCHEMES = ("imex1", "rk4")


@dataclass(frozen=True)
class StepControls:
    dt: float
    t_end: float
    cfl_safety: float = 0.4
    scheme: str = "imex1"
    adaptive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "t_end", float(self.t_end))
        object.__setattr__(self, "cfl_safety", float(self.cfl_safety))
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        if self.t_end > 0 and self.dt > self.t_end:
            raise ValueError(f"dt ({self.dt}) exceeds t_end ({self.t_end})")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")


@functools.lru_cache(maxsize=16)
def _imex_factors(grid, params, dt):
    su, sphi = implicit_symbols(grid, params)
    inv_u = 1.0 / (1.0 - dt * su)
    inv_phi = 1.0 / (1.0 - dt * sphi)
    return np.ascontiguousarray(inv_u).reshape(-1), np.ascontiguousarray(inv_phi).reshape(-1)


def _check_finite(u_hat, phi_hat, time):
    if not (np.all(np.isfinite(u_hat)) and np.all(np.isfinite(phi_hat))):
        raise StepDiverged(time)


def imex_hat(grid, params, u_hat, phi_hat, dt):
    """One IMEX Euler step on spectral arrays; returns new copies."""
    n_u, n_phi = explicit_terms(grid, u_hat, phi_hat, params)
    n_u = leray_hat(grid, n_u)
    inv_u, inv_phi = _imex_factors(grid, params, dt)
    d = grid.dim
    new_u = np.empty_like(u_hat)
    uf = np.ascontiguousarray(u_hat).reshape(d, -1)
    nf = n_u.reshape(d, -1)
    out = new_u.reshape(d, -1)
    for i in range(d):
        kernels.imex_update(uf[i], nf[i], dt, inv_u, out[i])
    new_u = leray_hat(grid, new_u)
    new_phi = np.empty_like(phi_hat)
    kernels.imex_update(
        np.ascontiguousarray(phi_hat).reshape(-1),
        n_phi.reshape(-1),
        dt,
        inv_phi,
        new_phi.reshape(-1),
    )
    return new_u, new_phi


def rk4_hat(grid, params, u_hat, phi_hat, dt):
    """Classical RK4 on spectral arrays (every stage projected)."""
    k1u, k1p = rhs_hat(grid, u_hat, phi_hat, params)
    k2u, k2p = rhs_hat(grid, u_hat + 0.5 * dt * k1u, phi_hat + 0.5 * dt * k1p, params)
    k3u, k3p = rhs_hat(grid, u_hat + 0.5 * dt * k2u, phi_hat + 0.5 * dt * k2p, params)
    k4u, k4p = rhs_hat(grid, u_hat + dt * k3u, phi_hat + dt * k3p, params)
    new_u = u_hat + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    new_phi = phi_hat + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return new_u, new_phi


_STEPPERS = {"imex1": imex_hat, "rk4": rk4_hat}


def _step(state: State, dt, scheme):
    grid = state.grid
    new_u, new_phi = _STEPPERS[scheme](
        grid, state.params, state.u.spectral, state.phi.spectral, dt
    )
    t = state.time + dt
    _check_finite(new_u, new_phi, t)
    return State.from_spectral(grid, new_u, new_phi, state.params, t)


def imex_step(state: State, dt: float) -> State:
    """Advance ``state`` by one IMEX Euler step of size ``dt``.

    Raises :class:`StepDiverged` if the result is not finite.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    return _step(state, dt, "imex1")


def rk4_step(state: State, dt: float) -> State:
    """Advance ``state`` by one explicit RK4 step (caller keeps dt stable)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return _step(state, dt, "rk4")


def cfl_candidates(state: State) -> dict:
    """The three explicit-term step limits (``inf`` when a guard is inactive).

    * ``advection``: ``h / max|u|``
    * ``advection_diffusion``: ``2 nu / max|u|**2``
    * ``phi_diffusion``: ``h**2 / max|3(phi+omega0)**2 - 1 - kappa|``
    """
    grid = state.grid
    p = state.params
    h = grid.spacing
    if p.linearized:
        umax = 0.0
        cmax = abs(p.linear_well_slope - p.kappa)
    else:
        umax = float(np.sqrt(np.sum(state.u.values**2, axis=0)).max())
        slope = 3.0 * (state.phi.values + p.omega0) ** 2 - 1.0 - p.kappa
        cmax = float(np.abs(slope).max())
    inf = math.inf
    return {
        "advection": h / umax if umax > 0 else inf,
        "advection_diffusion": 2.0 * p.nu / umax**2 if umax > 0 else inf,
        "phi_diffusion": h * h / cmax if cmax > 0 else inf,
    }


def cfl_dt(state: State, controls: StepControls) -> float:
    """``cfl_safety`` times the smallest of :func:`cfl_candidates`, capped at ``controls.dt``."""
    limit = min(cfl_candidates(state).values())
    if math.isinf(limit):
        return controls.dt
    return min(controls.dt, controls.cfl_safety * limit)


Observer = Callable[[State, object], None]


def integrate(
    state: State,
    controls: StepControls,
    observers: Iterable[Observer] = (),
    stride: int = 1,
    record_fn: Optional[Callable[[State], object]] = None,
    on_step: Optional[Callable[[int, State], None]] = None,
) -> State:
    """Step ``state`` to ``controls.t_end``.

    After every ``stride``-th step (and after the last one) each observer is
    called with ``(state, record)`` where ``record = record_fn(state)``; the
    default ``record_fn`` is :func:`nschlab.diagnostics.compute_record`.
    ``on_step(i, state)`` is called after every step. Fixed steps land on
    ``t_end`` exactly (the last step is shortened if needed).
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    observers = list(observers)
    if record_fn is None and observers:
        from .diagnostics import compute_record

        record_fn = compute_record

    t0 = state.time
    t_end = controls.t_end
    if t_end <= t0:
        return state

    grid = state.grid
    params = state.params
    stepper = _STEPPERS[controls.scheme]
    u_hat = state.u.spectral
    phi_hat = state.phi.spectral

    if not controls.adaptive:
        nsteps = max(1, math.ceil((t_end - t0) / controls.dt - 1e-9))
    step = 0
    t = t0
    current = state
    while True:
        if controls.adaptive:
            if t >= t_end - 1e-12 * max(1.0, t_end):
                break
            dt = min(cfl_dt(current, controls), t_end - t)
            t_next = t + dt
        else:
            if step >= nsteps:
                break
            t_next = t_end if step + 1 == nsteps else t0 + (step + 1) * controls.dt
            dt = t_next - t
        try:
            u_hat, phi_hat = stepper(grid, params, u_hat, phi_hat, dt)
            _check_finite(u_hat, phi_hat, t_next)
        except StepDiverged as exc:
            raise StepDiverged(t_next, last_good_time=t, steps_completed=step) from exc
        step += 1
        t = t_next
        current = State.from_spectral(grid, u_hat, phi_hat, params, t)
        if on_step is not None:
            on_step(step, current)
        last = (not controls.adaptive and step == nsteps) or (
            controls.adaptive and t >= t_end - 1e-12 * max(1.0, t_end)
        )
        if observers and (step % stride == 0 or last):
            record = record_fn(current)
            for obs in observers:
                obs(current, record)
    return current
