"""Pure numpy versions of the routines in ``_core.pyx``."""
import numpy as np


def horner2(c, z1, z2):
    c = np.asarray(c, dtype=np.complex128)
    z1 = np.asarray(z1, dtype=np.complex128)
    z2 = np.asarray(z2, dtype=np.complex128)
    out = np.zeros(z1.shape, dtype=np.complex128)
    if c.size == 0:
        return out
    for i in range(c.shape[0] - 1, -1, -1):
        inner = np.zeros_like(out)
        for j in range(c.shape[1] - 1, -1, -1):
            inner = inner * z2 + c[i, j]
        out = out * z1 + inner
    return out


def factor_gram(fz, xz, fw, xw):
    fz = np.asarray(fz, dtype=np.complex128)
    xz = np.asarray(xz, dtype=np.complex128)
    fw = np.asarray(fw, dtype=np.complex128)
    xw = np.asarray(xw, dtype=np.complex128)
    num = 1.0 - np.conj(fw)[None, :] * fz[:, None]
    den = 1.0 - np.conj(xw)[None, :] * xz[:, None]
    return num / den


def polymul2(a, b, cap1, cap2):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.size == 0 or b.size == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    r1 = a.shape[0] + b.shape[0] - 1
    r2 = a.shape[1] + b.shape[1] - 1
    if cap1 >= 0:
        r1 = min(r1, cap1 + 1)
    if cap2 >= 0:
        r2 = min(r2, cap2 + 1)
    out = np.zeros((r1, r2), dtype=np.complex128)
    # loop over the sparser operand, add shifted copies of the other
    if np.count_nonzero(a) > np.count_nonzero(b):
        a, b = b, a
    for i, j in zip(*np.nonzero(a)):
        if i >= r1 or j >= r2:
            continue
        k = min(b.shape[0], r1 - i)
        l = min(b.shape[1], r2 - j)
        out[i:i + k, j:j + l] += a[i, j] * b[:k, :l]
    return out
