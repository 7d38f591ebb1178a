# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fused per-mode and per-point loops.

Every function takes flat C-contiguous buffers (vector quantities are
``(ncomp, npoints)``) and mirrors ``nschlab._kernels_py`` exactly.
"""


def leray_inplace(double complex[:, ::1] vhat, const double[:, ::1] k,
                  const double[::1] inv_k2):
    cdef Py_ssize_t d = vhat.shape[0]
    cdef Py_ssize_t m = vhat.shape[1]
    cdef Py_ssize_t i, j
    cdef double complex dot
    cdef double w
    for j in range(m):
        w = inv_k2[j]
        if w == 0.0:
            continue
        dot = 0.0
        for i in range(d):
            dot = dot + k[i, j] * vhat[i, j]
        dot = dot * w
        for i in range(d):
            vhat[i, j] = vhat[i, j] - k[i, j] * dot
    return vhat


def weighted_sq_sum(const double complex[::1] c, const double[::1] w):
    cdef Py_ssize_t j, m = c.shape[0]
    cdef double acc = 0.0
    cdef double re, im
    for j in range(m):
        re = c[j].real
        im = c[j].imag
        acc += w[j] * (re * re + im * im)
    return acc


def imex_update(const double complex[::1] hat, const double complex[::1] tend,
                double dt, const double[::1] inv_denom, double complex[::1] out):
    cdef Py_ssize_t j, m = hat.shape[0]
    cdef double w
    # real arithmetic avoids the generic complex multiply
    for j in range(m):
        w = inv_denom[j]
        out[j].real = (hat[j].real + dt * tend[j].real) * w
        out[j].imag = (hat[j].imag + dt * tend[j].imag) * w
    return out


def phi_source(const double[::1] phi, double omega0, double cub, double lin,
               double[::1] out):
    cdef Py_ssize_t j, m = phi.shape[0]
    cdef double s
    for j in range(m):
        s = phi[j] + omega0
        out[j] = cub * s * s * s - lin * phi[j]
    return out


def korteweg(const double[::1] lap, const double[:, ::1] grad, double coef,
             double[:, ::1] out):
    cdef Py_ssize_t d = grad.shape[0]
    cdef Py_ssize_t m = grad.shape[1]
    cdef Py_ssize_t i, j
    for i in range(d):
        for j in range(m):
            out[i, j] = (-coef * lap[j]) * grad[i, j]
    return out


def sym_outer(const double[:, ::1] u, double[:, ::1] out):
    cdef Py_ssize_t d = u.shape[0]
    cdef Py_ssize_t m = u.shape[1]
    cdef Py_ssize_t i, l, j, p = 0
    # one contiguous pass per output row
    for i in range(d):
        for l in range(i, d):
            for j in range(m):
                out[p, j] = u[i, j] * u[l, j]
            p += 1
    return out


def dot_pointwise(const double[:, ::1] a, const double[:, ::1] b, double[::1] out):
    cdef Py_ssize_t d = a.shape[0]
    cdef Py_ssize_t m = a.shape[1]
    cdef Py_ssize_t i, j
    for j in range(m):
        out[j] = a[0, j] * b[0, j]
    for i in range(1, d):
        for j in range(m):
            out[j] += a[i, j] * b[i, j]
    return out


def double_well_sum(const double[::1] phi, double omega0):
    cdef Py_ssize_t j, m = phi.shape[0]
    cdef double acc = 0.0
    cdef double s, q
    for j in range(m):
        s = phi[j] + omega0
        q = s * s - 1.0
        acc += 0.25 * q * q
    return acc
