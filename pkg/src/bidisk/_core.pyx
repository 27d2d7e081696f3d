# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: dense bivariate Horner, Gram factors, truncated convolution.

Each function mirrors one in :mod:`bidisk._pure` and must return the same
values up to floating rounding.
"""
import numpy as np


cdef inline double complex _conj(double complex z) noexcept nogil:
    return z.real - 1j * z.imag


def horner2(double complex[:, ::1] c, double complex[::1] z1, double complex[::1] z2):
    """Evaluate ``sum c[i, j] z1**i z2**j`` at each point pair."""
    cdef Py_ssize_t n = z1.shape[0]
    cdef Py_ssize_t d1 = c.shape[0], d2 = c.shape[1]
    cdef Py_ssize_t k, i, j
    cdef double complex acc, inner, x, y
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    if d1 == 0 or d2 == 0:
        return out
    with nogil:
        for k in range(n):
            x = z1[k]
            y = z2[k]
            acc = 0
            for i in range(d1 - 1, -1, -1):
                inner = 0
                for j in range(d2 - 1, -1, -1):
                    inner = inner * y + c[i, j]
                acc = acc * x + inner
            o[k] = acc
    return out


def factor_gram(double complex[::1] fz, double complex[::1] xz,
                double complex[::1] fw, double complex[::1] xw):
    """Matrix ``(1 - conj(fw[j]) fz[i]) / (1 - conj(xw[j]) xz[i])``."""
    cdef Py_ssize_t m = fz.shape[0], n = fw.shape[0]
    cdef Py_ssize_t i, j
    cdef double complex cf, cx
    out = np.empty((m, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    with nogil:
        for j in range(n):
            cf = _conj(fw[j])
            cx = _conj(xw[j])
            for i in range(m):
                o[i, j] = (1.0 - cf * fz[i]) / (1.0 - cx * xz[i])
    return out


def polymul2(double complex[:, ::1] a, double complex[:, ::1] b,
             Py_ssize_t cap1, Py_ssize_t cap2):
    """2-D convolution of coefficient arrays, cropped to indices ``<= cap``.

    A negative cap means no truncation along that axis.
    """
    cdef Py_ssize_t a1 = a.shape[0], a2 = a.shape[1]
    cdef Py_ssize_t b1 = b.shape[0], b2 = b.shape[1]
    cdef Py_ssize_t r1, r2, i, j, k, l, kmax, lmax
    cdef double complex s
    if a1 == 0 or a2 == 0 or b1 == 0 or b2 == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    r1 = a1 + b1 - 1
    r2 = a2 + b2 - 1
    if cap1 >= 0 and cap1 + 1 < r1:
        r1 = cap1 + 1
    if cap2 >= 0 and cap2 + 1 < r2:
        r2 = cap2 + 1
    out = np.zeros((r1, r2), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    with nogil:
        for i in range(min(a1, r1)):
            for j in range(min(a2, r2)):
                s = a[i, j]
                if s == 0:
                    continue
                kmax = min(b1, r1 - i)
                lmax = min(b2, r2 - j)
                for k in range(kmax):
                    for l in range(lmax):
                        o[i + k, j + l] = o[i + k, j + l] + s * b[k, l]
    return out
