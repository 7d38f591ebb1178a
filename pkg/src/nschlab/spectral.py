"""Periodic-box spectral infrastructure.

Fields are stored as real samples on an isotropic ``n**dim`` grid and as
real-FFT coefficients normalised so that coefficient ``c_k`` is the Fourier
series coefficient ``f(x) = sum_k c_k exp(i k.x)``. Parseval then reads
``||f||_2**2 = L**dim * sum_k |c_k|**2`` summed over the full (Hermitian)
spectrum, and zero padding is a plain copy of coefficients.

Odd-order derivatives use a wavevector whose Nyquist components are zeroed,
so every derivative of a real field stays real. Even-order multipliers such
as ``|k|**s`` use the true wavevector.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.fft as sfft

from . import kernels
from .errors import NegativePowerOnNonzeroMean

#: Worker threads handed to scipy.fft; each 1D transform runs on one thread,
#: so the result does not depend on this value.
FFT_WORKERS = 1

#: Zero-mode tolerance (relative to the L2 norm) for negative powers.
MEAN_TOLERANCE = 1e-10


def forward(values, dim):
    """Real FFT over the trailing ``dim`` axes, forward-normalised."""
    axes = tuple(range(-dim, 0))
    return sfft.rfftn(values, axes=axes, norm="forward", workers=FFT_WORKERS)


def inverse(hat, shape):
    """Inverse of :func:`forward` onto a physical grid of ``shape``."""
    axes = tuple(range(-len(shape), 0))
    return sfft.irfftn(hat, s=shape, axes=axes, norm="forward", workers=FFT_WORKERS)


@dataclass(frozen=True)
class Grid:
    """Isotropic periodic box ``[0, L)**dim`` sampled with ``n`` points per axis."""

    dim: int
    n: int
    box_length: float = 2 * math.pi

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if int(self.n) != self.n or self.n < 8:
            raise ValueError(f"n must be an integer >= 8, got {self.n}")
        if self.n % 2:
            raise ValueError(f"n must be even, got {self.n}")
        if not (self.box_length > 0 and math.isfinite(self.box_length)):
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box_length", float(self.box_length))

    # -- shapes and scales -------------------------------------------------
    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def spectral_shape(self):
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @property
    def padded_shape(self):
        return (2 * self.n,) * self.dim

    @property
    def spacing(self):
        return self.box_length / self.n

    @property
    def volume(self):
        return self.box_length**self.dim

    @property
    def fundamental(self):
        return 2 * math.pi / self.box_length

    # -- wavenumber tables -------------------------------------------------
    @functools.cached_property
    def wavenumbers(self):
        """Per-axis wavenumbers in physical units (last axis is the half axis)."""
        full = np.fft.fftfreq(self.n, d=1.0 / self.n) * self.fundamental
        half = np.fft.rfftfreq(self.n, d=1.0 / self.n) * self.fundamental
        return tuple([full] * (self.dim - 1) + [half])

    @functools.cached_property
    def k(self):
        """Dense wavevector, shape ``(dim, *spectral_shape)``."""
        return np.stack(np.meshgrid(*self.wavenumbers, indexing="ij"))

    @functools.cached_property
    def k2(self):
        return np.sum(self.k**2, axis=0)

    @functools.cached_property
    def kabs(self):
        return np.sqrt(self.k2)

    @functools.cached_property
    def nyquist(self):
        """Mask of modes with at least one component on the Nyquist plane."""
        idx = np.meshgrid(
            *[np.arange(s) for s in self.spectral_shape], indexing="ij"
        )
        return np.any(np.stack(idx) == self.n // 2, axis=0)

    @functools.cached_property
    def k_deriv(self):
        """Wavevector used by odd derivatives: Nyquist components zeroed."""
        kd = self.k.copy()
        h = self.n // 2
        for axis in range(self.dim):
            sl = [slice(None)] * (self.dim + 1)
            sl[0] = axis
            sl[axis + 1] = h
            kd[tuple(sl)] = 0.0
        return np.ascontiguousarray(kd)

    @functools.cached_property
    def inv_k2_deriv(self):
        k2 = np.sum(self.k_deriv**2, axis=0)
        out = np.zeros_like(k2)
        np.divide(1.0, k2, out=out, where=k2 > 0)
        return out

    @functools.cached_property
    def multiplicity(self):
        """Number of Hermitian partners each stored coefficient stands for."""
        m = np.full(self.spectral_shape, 2.0)
        m[..., 0] = 1.0
        m[..., -1] = 1.0
        return m

    def power(self, exponent):
        """``|k|**exponent`` with the zero mode set to 0 (1 when exponent is 0)."""
        return _symbol_power(self, float(exponent))

    def coordinates(self):
        x = np.arange(self.n) * self.spacing
        return np.meshgrid(*([x] * self.dim), indexing="ij")

    # -- padding -----------------------------------------------------------
    @functools.cached_property
    def _pad_blocks(self):
        n, h = self.n, self.n // 2
        full = [(slice(0, h), slice(0, h)), (slice(h + 1, n), slice(2 * n - h + 1, 2 * n))]
        last = [(slice(0, h), slice(0, h))]
        return [
            (tuple(b[0] for b in combo), tuple(b[1] for b in combo))
            for combo in itertools.product(*([full] * (self.dim - 1) + [last]))
        ]

    def pad(self, hat):
        """Embed coefficients into the 2n grid; Nyquist modes are dropped."""
        lead = hat.shape[: hat.ndim - self.dim]
        m = 2 * self.n
        out = np.zeros(lead + (m,) * (self.dim - 1) + (self.n + 1,), dtype=complex)
        for src, dst in self._pad_blocks:
            out[(Ellipsis,) + dst] = hat[(Ellipsis,) + src]
        return out

    def truncate(self, hat_padded):
        """Inverse of :meth:`pad`; the Nyquist modes of the result are zero."""
        lead = hat_padded.shape[: hat_padded.ndim - self.dim]
        out = np.zeros(lead + self.spectral_shape, dtype=complex)
        for src, dst in self._pad_blocks:
            out[(Ellipsis,) + src] = hat_padded[(Ellipsis,) + dst]
        return out

    def _axis_slices(self, ndim, axis, dst, src):
        a = [slice(None)] * ndim
        b = [slice(None)] * ndim
        a[axis] = dst
        b[axis] = src
        return tuple(a), tuple(b)

    def to_padded(self, hat):
        """Physical samples on the 2n grid of the band-limited interpolant.

        Transforms axis by axis so the zero blocks of the padded spectrum are
        never transformed; equivalent to ``inverse(self.pad(hat), ...)``.
        """
        n, h, m = self.n, self.n // 2, 2 * self.n
        a = hat[..., :h]
        for axis in range(-self.dim, -1):
            shape = list(a.shape)
            shape[axis] = m
            b = np.zeros(shape, dtype=complex)
            dst, src = self._axis_slices(a.ndim, axis, slice(0, h), slice(0, h))
            b[dst] = a[src]
            dst, src = self._axis_slices(a.ndim, axis, slice(m - h + 1, m), slice(n - h + 1, n))
            b[dst] = a[src]
            a = sfft.ifft(b, axis=axis, norm="forward", workers=FFT_WORKERS, overwrite_x=True)
        shape = list(a.shape)
        shape[-1] = n + 1
        b = np.zeros(shape, dtype=complex)
        b[..., :h] = a
        return sfft.irfft(b, n=m, axis=-1, norm="forward", workers=FFT_WORKERS, overwrite_x=True)

    def from_padded(self, values):
        """Spectral coefficients of padded samples, truncated to this grid."""
        n, h, m = self.n, self.n // 2, 2 * self.n
        a = sfft.rfft(values, axis=-1, norm="forward", workers=FFT_WORKERS)[..., :h]
        for axis in range(-2, -self.dim - 1, -1):
            a = sfft.fft(a, axis=axis, norm="forward", workers=FFT_WORKERS, overwrite_x=True)
            shape = list(a.shape)
            shape[axis] = n
            b = np.zeros(shape, dtype=complex)
            dst, src = self._axis_slices(a.ndim, axis, slice(0, h), slice(0, h))
            b[dst] = a[src]
            dst, src = self._axis_slices(a.ndim, axis, slice(n - h + 1, n), slice(m - h + 1, m))
            b[dst] = a[src]
            a = b
        shape = list(a.shape)
        shape[-1] = n // 2 + 1
        out = np.zeros(shape, dtype=complex)
        out[..., :h] = a
        return out

    # -- reductions --------------------------------------------------------
    def parseval(self, hat, weight=None):
        """``L**dim * sum mult * weight * |hat|**2`` over stored modes.

        ``hat`` may carry leading component axes; they are summed over.
        """
        w = self.multiplicity if weight is None else self.multiplicity * weight
        c = np.ascontiguousarray(hat).reshape(-1, w.size)
        wf = np.ascontiguousarray(w, dtype=float).reshape(-1)
        total = 0.0
        for row in c:
            total += kernels.weighted_sq_sum(row, wf)
        return self.volume * total


@functools.lru_cache(maxsize=64)
def _symbol_power(grid, exponent):
    if exponent == 0.0:
        out = np.ones(grid.spectral_shape)
    else:
        out = np.zeros(grid.spectral_shape)
        nz = grid.k2 > 0
        out[nz] = grid.kabs[nz] ** exponent
    out.setflags(write=False)
    return out


def make_grid(dim, n, box_length=2 * math.pi):
    """Build a :class:`Grid`; raises ``ValueError`` on invalid arguments."""
    return Grid(dim, n, box_length)


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True, order="C")
    a.setflags(write=False)
    return a


class Field:
    """Real scalar field with lazily paired physical and spectral forms."""

    __slots__ = ("grid", "_values", "_spectral")

    def __init__(self, grid: Grid, values=None, *, spectral=None):
        if (values is None) == (spectral is None):
            raise ValueError("give exactly one of values or spectral")
        self.grid = grid
        self._values = None
        self._spectral = None
        if values is not None:
            values = _frozen(values, float)
            if values.shape != grid.shape:
                raise ValueError(f"values shape {values.shape} != grid shape {grid.shape}")
            self._values = values
        else:
            spectral = _frozen(spectral, complex)
            if spectral.shape != grid.spectral_shape:
                raise ValueError(
                    f"spectral shape {spectral.shape} != {grid.spectral_shape}"
                )
            self._spectral = spectral

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(*grid.coordinates()))

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, spectral=np.zeros(grid.spectral_shape, dtype=complex))

    @property
    def values(self):
        if self._values is None:
            self._values = _frozen(inverse(self._spectral, self.grid.shape), float)
        return self._values

    @property
    def spectral(self):
        if self._spectral is None:
            self._spectral = _frozen(forward(self._values, self.grid.dim), complex)
        return self._spectral

    @property
    def mean(self):
        return float(self.spectral[(0,) * self.grid.dim].real)

    def _binary(self, other, op):
        if isinstance(other, Field):
            _check_same_grid(self, other)
            return Field(self.grid, spectral=op(self.spectral, other.spectral))
        if np.isscalar(other):
            return Field(self.grid, values=op(self.values, other))
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not np.isscalar(other):
            return NotImplemented
        return Field(self.grid, spectral=self.spectral * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1.0 / other)

    def __neg__(self):
        return Field(self.grid, spectral=-self.spectral)

    def __repr__(self):
        return f"Field(dim={self.grid.dim}, n={self.grid.n}, L={self.grid.box_length:.6g})"


class VectorField:
    """``dim`` scalar components on one grid."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Field]):
        components = tuple(components)
        if not components:
            raise ValueError("a vector field needs components")
        grid = components[0].grid
        for c in components[1:]:
            if c.grid != grid:
                raise ValueError("all components must share one grid")
        if len(components) != grid.dim:
            raise ValueError(f"expected {grid.dim} components, got {len(components)}")
        self.components = components

    @classmethod
    def from_spectral(cls, grid, hat):
        return cls([Field(grid, spectral=h) for h in hat])

    @classmethod
    def from_values(cls, grid, values):
        return cls([Field(grid, v) for v in values])

    @classmethod
    def zeros(cls, grid):
        return cls([Field.zeros(grid) for _ in range(grid.dim)])

    @property
    def grid(self):
        return self.components[0].grid

    @property
    def dim(self):
        return len(self.components)

    @property
    def spectral(self):
        return np.stack([c.spectral for c in self.components])

    @property
    def values(self):
        return np.stack([c.values for c in self.components])

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __add__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return VectorField([a + b for a, b in zip(self, other)])

    def __sub__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return VectorField([a - b for a, b in zip(self, other)])

    def __mul__(self, other):
        if not np.isscalar(other):
            return NotImplemented
        return VectorField([c * other for c in self])

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField([-c for c in self])

    def __repr__(self):
        g = self.grid
        return f"VectorField(dim={g.dim}, n={g.n}, L={g.box_length:.6g})"


AnyField = Union[Field, VectorField]


def _check_same_grid(*fields):
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ValueError("fields live on different grids")
    return grid


def _spectral_stack(f):
    """Spectral data with a leading component axis, and the grid."""
    if isinstance(f, VectorField):
        return f.spectral, f.grid
    return f.spectral[np.newaxis], f.grid


# ---------------------------------------------------------------------------
# Linear operators
# ---------------------------------------------------------------------------


def gradient(f: Field) -> VectorField:
    hat = f.spectral
    return VectorField.from_spectral(f.grid, 1j * f.grid.k_deriv * hat)


def divergence(v: VectorField) -> Field:
    grid = v.grid
    return Field(grid, spectral=np.sum(1j * grid.k_deriv * v.spectral, axis=0))


def laplacian(f: Field) -> Field:
    return Field(f.grid, spectral=-f.grid.k2 * f.spectral)


def remove_mean(f):
    """Copy of ``f`` (scalar or vector) with the zero mode removed."""
    if isinstance(f, VectorField):
        return VectorField([remove_mean(c) for c in f])
    hat = np.array(f.spectral)
    hat[(0,) * f.grid.dim] = 0.0
    return Field(f.grid, spectral=hat)


def _check_mean_free(hat, grid):
    zero = (Ellipsis,) + (0,) * grid.dim
    mean_part = math.sqrt(grid.volume) * float(np.sqrt(np.sum(np.abs(hat[zero]) ** 2)))
    total = math.sqrt(grid.parseval(hat))
    if mean_part > MEAN_TOLERANCE * total:
        raise NegativePowerOnNonzeroMean(mean_part / total)


def fractional_laplacian(f, delta):
    """Apply ``Lambda**(2*delta)``: multiply every mode by ``|k|**(2*delta)``.

    The zero mode is annihilated for ``delta > 0`` and kept for ``delta == 0``.
    For ``delta < 0`` the field must be mean-free (to 1e-10 of its L2 norm),
    otherwise :class:`NegativePowerOnNonzeroMean` is raised.
    """
    hat, grid = _spectral_stack(f)
    if not np.all(np.isfinite(hat)):
        raise ValueError("non-finite field")
    if delta < 0:
        _check_mean_free(hat, grid)
    out = hat * grid.power(2.0 * delta)
    if isinstance(f, VectorField):
        return VectorField.from_spectral(grid, out)
    return Field(grid, spectral=out[0])


def leray_hat(grid, vhat):
    """Leray projection of spectral data ``(dim, *spectral_shape)`` (copy)."""
    out = np.array(vhat, dtype=complex, order="C", copy=True)
    flat = out.reshape(grid.dim, -1)
    kernels.leray_inplace(
        flat,
        grid.k_deriv.reshape(grid.dim, -1),
        grid.inv_k2_deriv.reshape(-1),
    )
    return out


def leray_project(v: VectorField) -> VectorField:
    """Project onto divergence-free fields: ``v - k (k.v)/|k|**2`` per mode."""
    hat = v.spectral
    if not np.all(np.isfinite(hat)):
        raise ValueError("non-finite field")
    return VectorField.from_spectral(v.grid, leray_hat(v.grid, hat))


# ---------------------------------------------------------------------------
# Norms and inner products
# ---------------------------------------------------------------------------


def sobolev_norm(f, s):
    """Homogeneous Sobolev norm ``||Lambda**s f||_2``.

    ``s == 0`` is the full L2 norm (zero mode included); for any other ``s``
    the zero mode is excluded. Vector fields sum their components.
    """
    hat, grid = _spectral_stack(f)
    if s == 0:
        return math.sqrt(grid.parseval(hat))
    return math.sqrt(grid.parseval(hat, grid.power(2.0 * s)))


def lp_norm(f, p):
    """Rectangle-rule ``L**p`` norm; ``p = inf`` is the max norm.

    For vector fields the pointwise Euclidean magnitude is used.
    """
    if p != math.inf and not p >= 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    if isinstance(f, VectorField):
        a = np.sqrt(np.sum(f.values**2, axis=0))
    else:
        a = np.abs(f.values)
    if p == math.inf:
        return float(a.max())
    dv = f.grid.spacing**f.grid.dim
    if p == 2:
        return math.sqrt(float(np.sum(a * a)) * dv)
    return float((np.sum(a**p) * dv) ** (1.0 / p))


def inner(f, g):
    """L2 inner product via Parseval (scalars or vectors)."""
    a, grid = _spectral_stack(f)
    b, _ = _spectral_stack(g)
    _check_same_grid(f, g)
    prod = np.sum(a * np.conj(b), axis=0).real
    return grid.volume * float(np.sum(grid.multiplicity * prod))


# ---------------------------------------------------------------------------
# Nonlinear products
# ---------------------------------------------------------------------------


def dealiased_product(factors):
    """Pointwise product of 2 or 3 factors without aliasing.

    Each factor is transformed to a grid padded by a factor 2, multiplied
    there and truncated back; Nyquist modes of the factors are discarded.
    Scalar factors multiply the result directly.
    """
    factors = list(factors)
    if not 2 <= len(factors) <= 3:
        raise ValueError("dealiased_product takes 2 or 3 factors")
    coef = 1.0
    fields = []
    for fac in factors:
        if isinstance(fac, Field):
            fields.append(fac)
        elif np.isscalar(fac):
            coef *= fac
        else:
            raise TypeError(f"unsupported factor {type(fac).__name__}")
    if not fields:
        raise ValueError("at least one factor must be a Field")
    grid = _check_same_grid(*fields)
    if len(fields) == 1:
        return fields[0] * coef
    padded = grid.to_padded(np.stack([f.spectral for f in fields]))
    prod = padded[0]
    for a in padded[1:]:
        prod = prod * a
    return Field(grid, spectral=coef * grid.from_padded(prod))
