"""Numpy implementations of the fused kernels in ``_kernels.pyx``."""
import numpy as np


def leray_inplace(vhat, k, inv_k2):
    dot = np.einsum("im,im->m", k, vhat) * inv_k2
    vhat -= k * dot
    return vhat


def weighted_sq_sum(c, w):
    return float(np.sum(w * (c.real * c.real + c.imag * c.imag)))


def imex_update(hat, tend, dt, inv_denom, out):
    np.multiply(hat + dt * tend, inv_denom, out=out)
    return out


def phi_source(phi, omega0, cub, lin, out):
    s = phi + omega0
    np.multiply(cub * s * s, s, out=out)
    out -= lin * phi
    return out


def korteweg(lap, grad, coef, out):
    np.multiply(grad, -coef * lap, out=out)
    return out


def sym_outer(u, out):
    d = u.shape[0]
    p = 0
    for i in range(d):
        for l in range(i, d):
            np.multiply(u[i], u[l], out=out[p])
            p += 1
    return out


def dot_pointwise(a, b, out):
    np.einsum("im,im->m", a, b, out=out)
    return out


def double_well_sum(phi, omega0):
    q = (phi + omega0) ** 2 - 1.0
    return float(0.25 * np.sum(q * q))
