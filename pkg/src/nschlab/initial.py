"""Initial-condition generators."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .model import ModelParams, State
from .spectral import Field, Grid, VectorField, forward, inverse, leray_hat

IC_KINDS = ("taylor-green-like", "random-divfree", "gaussian-blob", "single-mode")

#: Default spectral band of random-divfree data, in units of 2 pi / L.
DEFAULT_KMAX = 2.0


def random_band_limited(grid: Grid, rng, kmax_index, ncomp=None):
    """Real mean-free field(s) with unit complex Gaussian coefficients on ``0 < |m| <= kmax_index``.

    ``m`` is the integer mode index; Hermitian symmetry is enforced by a
    physical round trip and Nyquist modes are zeroed. Returns spectral data.
    """
    shape = grid.spectral_shape if ncomp is None else (ncomp,) + grid.spectral_shape
    hat = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    hat /= math.sqrt(2.0)
    index2 = grid.k2 / grid.fundamental**2
    mask = (index2 > 0) & (index2 <= kmax_index**2 + 1e-9) & ~grid.nyquist
    hat = hat * mask
    values = inverse(hat, grid.shape)
    return forward(values, grid.dim) * mask


def _critical_size(grid, u_hat, phi_hat):
    w1 = grid.power(1.0)
    w3 = grid.power(3.0)
    a = math.sqrt(grid.parseval(u_hat, w1))
    b = math.sqrt(grid.parseval(phi_hat, w1))
    c = math.sqrt(grid.parseval(phi_hat, w3))
    return a + b + c


def critical_size(state: State):
    """``|u|_{H^1/2} + |phi|_{H^1/2} + |phi|_{H^3/2}`` (phi mean-free)."""
    grid = state.grid
    phi = np.array(state.phi.spectral)
    phi[(0,) * grid.dim] = 0.0
    return _critical_size(grid, state.u.spectral, phi)


def periodized_gaussian(grid: Grid, width, center=None, images=1):
    """``exp(-|x - c|**2 / (2 width**2))`` summed over neighbouring periodic images."""
    L = grid.box_length
    if center is None:
        center = (0.5 * L,) * grid.dim
    coords = grid.coordinates()
    out = np.zeros(grid.shape)
    for shift in itertools.product(range(-images, images + 1), repeat=grid.dim):
        r2 = sum((x - c - s * L) ** 2 for x, c, s in zip(coords, center, shift))
        out += np.exp(-r2 / (2.0 * width**2))
    return out


def gaussian_lp_norm(amplitude, width, p, dim):
    """Whole-space ``L**p`` norm of ``A exp(-|x|**2 / (2 w**2))``."""
    return abs(amplitude) * (2.0 * math.pi * width**2 / p) ** (dim / (2.0 * p))


def generate_ic(
    kind: str,
    grid: Grid,
    amplitude: float,
    seed: int = 0,
    params: ModelParams | None = None,
    width: float | None = None,
    k_max: float = DEFAULT_KMAX,
) -> State:
    """Build an initial :class:`State`.

    ``random-divfree``
        Band-limited (``|k| <= k_max`` fundamentals) divergence-free ``u`` and
        mean-free ``phi``, jointly rescaled so the critical size equals
        ``amplitude``.
    ``gaussian-blob``
        ``phi`` a periodised Gaussian of peak ``amplitude`` and ``width``
        (default ``L/16``), ``u = 0``.
    ``single-mode``
        ``u = A (sin(k y), 0[, 0])``, ``phi = A sin(k x)`` at the fundamental.
    ``taylor-green-like``
        Taylor-Green velocity and ``phi = A cos x cos y [cos z]``.
    """
    if kind not in IC_KINDS:
        raise ValueError(f"unknown initial condition kind {kind!r}; choose from {IC_KINDS}")
    if not amplitude > 0:
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    params = params if params is not None else ModelParams()
    d = grid.dim
    k0 = grid.fundamental

    if kind == "random-divfree":
        rng = np.random.default_rng(seed)
        u_hat = leray_hat(grid, random_band_limited(grid, rng, k_max, ncomp=d))
        phi_hat = random_band_limited(grid, rng, k_max)
        size = _critical_size(grid, u_hat, phi_hat)
        if size == 0:
            raise ValueError("k_max admits no nonzero modes")
        scale = amplitude / size
        return State.from_spectral(grid, u_hat * scale, phi_hat * scale, params)

    if kind == "gaussian-blob":
        w = grid.box_length / 16.0 if width is None else float(width)
        if not w > 0:
            raise ValueError("width must be positive")
        phi = Field(grid, amplitude * periodized_gaussian(grid, w))
        hat = np.array(phi.spectral)
        hat[grid.nyquist] = 0.0
        return State.from_spectral(grid, np.zeros((d,) + grid.spectral_shape, complex), hat, params)

    x = grid.coordinates()
    if kind == "single-mode":
        u = [amplitude * np.sin(k0 * x[1])] + [np.zeros(grid.shape)] * (d - 1)
        phi = amplitude * np.sin(k0 * x[0])
    else:
        if d == 3:
            cx, cy, cz = (np.cos(k0 * xi) for xi in x)
            sx, sy = np.sin(k0 * x[0]), np.sin(k0 * x[1])
            u = [amplitude * sx * cy * cz, -amplitude * cx * sy * cz, np.zeros(grid.shape)]
            phi = amplitude * cx * cy * cz
        else:
            cx, cy = np.cos(k0 * x[0]), np.cos(k0 * x[1])
            sx, sy = np.sin(k0 * x[0]), np.sin(k0 * x[1])
            u = [amplitude * sx * cy, -amplitude * cx * sy]
            phi = amplitude * cx * cy
    return State(VectorField.from_values(grid, np.stack(u)), Field(grid, phi), params)
