"""Bivariate analytic polynomials and trigonometric polynomials on the torus.

A :class:`BiPoly` is a finitely supported power series in ``z1, z2`` with
nonnegative exponents; a :class:`TrigPoly` allows arbitrary integer
exponents and models a function on the torus. Both keep a canonical form in
which no stored coefficient is exactly zero. Coefficients are complex
floats; there is no epsilon pruning in the arithmetic itself.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import _backend

__all__ = [
    "BiPoly",
    "TrigPoly",
    "Point2",
    "NotDivisible",
    "evaluate",
    "compose",
    "backward_shift",
    "project",
    "divide_exact",
    "embed",
    "sup_norm_grid",
    "prune",
]


class NotDivisible(ArithmeticError):
    """Raised when polynomial division leaves a nonzero remainder."""


def _canon(items: Iterable[tuple[tuple[int, int], complex]], analytic: bool) -> dict:
    out: dict = {}
    for key, c in items:
        m, n = key
        if not (isinstance(m, (int, np.integer)) and isinstance(n, (int, np.integer))):
            raise TypeError(f"exponents must be integers, got {key!r}")
        m, n = int(m), int(n)
        if analytic and (m < 0 or n < 0):
            raise ValueError(f"BiPoly exponents must be nonnegative, got {(m, n)}")
        out[(m, n)] = out.get((m, n), 0j) + complex(c)
    return {k: v for k, v in out.items() if v != 0}


def _terms_to_json(coeffs: Mapping) -> dict:
    terms = [
        {"i": i, "j": j, "re": float(c.real), "im": float(c.imag)}
        for (i, j), c in sorted(coeffs.items())
    ]
    return {"terms": terms}


def _terms_from_json(obj) -> dict:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "terms" not in obj:
        raise ValueError("polynomial JSON must be an object with a 'terms' list")
    seen = set()
    items = []
    for t in obj["terms"]:
        key = (int(t["i"]), int(t["j"]))
        if key in seen:
            raise ValueError(f"duplicate term {key}")
        seen.add(key)
        items.append((key, complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))))
    return dict(items)


class _Laurent:
    """Shared dict-backed storage for the two polynomial classes."""

    __slots__ = ("_c",)
    _analytic = True

    def __init__(self, coeffs: Mapping | None = None):
        self._c = _canon((coeffs or {}).items(), self._analytic)

    @classmethod
    def _raw(cls, coeffs: dict):
        obj = cls.__new__(cls)
        obj._c = {k: v for k, v in coeffs.items() if v != 0}
        return obj

    @property
    def coeffs(self) -> dict:
        return dict(self._c)

    def coeff(self, m: int, n: int) -> complex:
        return self._c.get((m, n), 0j)

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self):
        return bool(self._c)

    def __len__(self):
        return len(self._c)

    def __iter__(self):
        return iter(sorted(self._c.items()))

    def __eq__(self, other):
        if isinstance(other, (int, float, complex)):
            other = type(self).constant(other)
        if type(other) is not type(self):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash((type(self).__name__, frozenset(self._c.items())))

    @classmethod
    def constant(cls, c: complex):
        return cls({(0, 0): c})

    def _coerce(self, other):
        if isinstance(other, type(self)):
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return type(self).constant(complex(other))
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self._c)
        for k, v in other._c.items():
            out[k] = out.get(k, 0j) + v
        return type(self)._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return type(self)._raw({k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def scale(self, s: complex):
        return type(self)._raw({k: v * s for k, v in self._c.items()})

    def max_abs_coeff(self) -> float:
        return max((abs(v) for v in self._c.values()), default=0.0)

    def to_json(self) -> dict:
        return _terms_to_json(self._c)

    @classmethod
    def from_json(cls, obj):
        return cls(_terms_from_json(obj))

    def __repr__(self):
        if not self._c:
            return f"{type(self).__name__}(0)"
        parts = []
        for (m, n), c in sorted(self._c.items()):
            mono = "".join(
                s for s in (
                    "" if m == 0 else ("z1" if m == 1 else f"z1^{m}"),
                    "" if n == 0 else ("z2" if n == 1 else f"z2^{n}"),
                )
            )
            parts.append(f"({c:g}){mono}")
        return f"{type(self).__name__}({' + '.join(parts)})"


class BiPoly(_Laurent):
    """Analytic polynomial ``sum c[i, j] z1**i z2**j`` on the bidisk."""

    __slots__ = ()
    _analytic = True

    @classmethod
    def z1(cls) -> "BiPoly":
        return cls({(1, 0): 1.0})

    @classmethod
    def z2(cls) -> "BiPoly":
        return cls({(0, 1): 1.0})

    @classmethod
    def monomial(cls, i: int, j: int, c: complex = 1.0) -> "BiPoly":
        return cls({(i, j): c})

    @classmethod
    def from_dense(cls, arr) -> "BiPoly":
        arr = np.asarray(arr, dtype=np.complex128)
        nz = np.nonzero(arr)
        return cls._raw({(int(i), int(j)): complex(arr[i, j]) for i, j in zip(*nz)})

    @property
    def deg1(self) -> int:
        return max((i for i, _ in self._c), default=0)

    @property
    def deg2(self) -> int:
        return max((j for _, j in self._c), default=0)

    def degree(self, var: int) -> int:
        return self.deg1 if var == 1 else self.deg2

    @property
    def total_degree(self) -> int:
        return max((i + j for i, j in self._c), default=0)

    def to_dense(self, shape: tuple[int, int] | None = None) -> np.ndarray:
        if shape is None:
            shape = (self.deg1 + 1, self.deg2 + 1)
        out = np.zeros(shape, dtype=np.complex128)
        for (i, j), c in self._c.items():
            if i < shape[0] and j < shape[1]:
                out[i, j] = c
        return out

    def depends_on(self, var: int) -> bool:
        idx = 0 if var == 1 else 1
        return any(k[idx] > 0 for k in self._c)

    def truncate(self, cap1: int, cap2: int | None = None) -> "BiPoly":
        cap2 = cap1 if cap2 is None else cap2
        return BiPoly._raw({(i, j): c for (i, j), c in self._c.items() if i <= cap1 and j <= cap2})

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return _mul_capped(self, other, -1, -1)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "BiPoly":
        if k < 0:
            raise ValueError("negative power")
        out = BiPoly.constant(1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __call__(self, z1, z2):
        return evaluate(self, (z1, z2))

    def conj_coeffs(self) -> "BiPoly":
        """Polynomial with conjugated coefficients (``conj(p(conj z))``)."""
        return BiPoly._raw({k: v.conjugate() for k, v in self._c.items()})


class TrigPoly(_Laurent):
    """Trigonometric polynomial ``sum c[m, n] z1**m z2**n`` on the torus."""

    __slots__ = ()
    _analytic = False

    def conj(self) -> "TrigPoly":
        """Pointwise complex conjugate on the torus."""
        return TrigPoly._raw({(-m, -n): v.conjugate() for (m, n), v in self._c.items()})

    @property
    def max_degree(self) -> int:
        """Largest ``|m|`` or ``|n|`` in the support."""
        return max((max(abs(m), abs(n)) for m, n in self._c), default=0)

    def bounds(self) -> tuple[int, int, int, int]:
        if not self._c:
            return 0, 0, 0, 0
        ms = [m for m, _ in self._c]
        ns = [n for _, n in self._c]
        return min(ms), max(ms), min(ns), max(ns)

    def to_offset_dense(self) -> tuple[np.ndarray, int, int]:
        """Dense array ``A`` with ``A[m - m0, n - n0] = c[m, n]``; returns (A, m0, n0)."""
        m0, m1, n0, n1 = self.bounds()
        arr = np.zeros((m1 - m0 + 1, n1 - n0 + 1), dtype=np.complex128)
        for (m, n), c in self._c.items():
            arr[m - m0, n - n0] = c
        return arr, m0, n0

    def analytic_part(self) -> BiPoly:
        return BiPoly._raw({k: v for k, v in self._c.items() if k[0] >= 0 and k[1] >= 0})

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not self._c or not other._c:
            return TrigPoly()
        a, am, an = self.to_offset_dense()
        b, bm, bn = other.to_offset_dense()
        prod = _backend.polymul2(a, b, -1, -1)
        m0, n0 = am + bm, an + bn
        nz = np.nonzero(prod)
        return TrigPoly._raw(
            {(int(i) + m0, int(j) + n0): complex(prod[i, j]) for i, j in zip(*nz)}
        )

    __rmul__ = __mul__


def embed(p: BiPoly | TrigPoly) -> TrigPoly:
    """View an analytic polynomial as a function on the torus."""
    if isinstance(p, TrigPoly):
        return p
    return TrigPoly._raw(p.coeffs)


def _mul_capped(p: BiPoly, q: BiPoly, cap1: int, cap2: int) -> BiPoly:
    if p.is_zero() or q.is_zero():
        return BiPoly()
    prod = _backend.polymul2(p.to_dense(), q.to_dense(), cap1, cap2)
    return BiPoly.from_dense(prod)


@dataclass(frozen=True)
class Point2:
    """A point of the open bidisk."""

    z1: complex
    z2: complex

    def __post_init__(self):
        object.__setattr__(self, "z1", complex(self.z1))
        object.__setattr__(self, "z2", complex(self.z2))
        if not (abs(self.z1) < 1 and abs(self.z2) < 1):
            raise ValueError(f"point ({self.z1}, {self.z2}) is not inside the open bidisk")

    def __iter__(self):
        yield self.z1
        yield self.z2

    def to_json(self) -> dict:
        return {"z1": [self.z1.real, self.z1.imag], "z2": [self.z2.real, self.z2.imag]}

    @classmethod
    def from_json(cls, obj) -> "Point2":
        if isinstance(obj, dict):
            a, b = obj["z1"], obj["z2"]
        else:
            a, b = obj
        return cls(complex(*a), complex(*b))


def evaluate(p: BiPoly, z) -> complex | np.ndarray:
    """Evaluate ``p`` at a point, or at arrays of coordinates.

    ``z`` is a :class:`Point2`, a pair of scalars, or a pair of equal-length
    arrays ``(z1s, z2s)``; array input returns an array.
    """
    z1, z2 = z
    scalar = np.ndim(z1) == 0 and np.ndim(z2) == 0
    z1 = np.ascontiguousarray(np.atleast_1d(z1), dtype=np.complex128)
    z2 = np.ascontiguousarray(np.atleast_1d(z2), dtype=np.complex128)
    z1, z2 = np.broadcast_arrays(z1, z2)
    c = np.ascontiguousarray(p.to_dense()) if not p.is_zero() else np.zeros((1, 1), np.complex128)
    vals = _backend.horner2(c, np.ascontiguousarray(z1), np.ascontiguousarray(z2))
    return complex(vals[0]) if scalar else np.asarray(vals)


def compose(p: BiPoly, B: tuple[BiPoly, BiPoly], cap: int) -> BiPoly:
    """``p(phi(z), psi(z))`` with monomials beyond ``cap`` in either variable dropped.

    Box truncation commutes with multiplication of analytic polynomials, so
    truncating after every product loses nothing inside the box.
    """
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    phi, psi = B
    phi = phi.truncate(cap)
    psi = psi.truncate(cap)
    if p.is_zero():
        return BiPoly()
    d1, d2 = p.deg1, p.deg2
    c = p.to_dense()
    psi_pows = [BiPoly.constant(1.0)]
    for _ in range(d2):
        psi_pows.append(_mul_capped(psi_pows[-1], psi, cap, cap))
    acc = BiPoly()
    for i in range(d1, -1, -1):
        inner = BiPoly()
        for j in range(d2 + 1):
            if c[i, j] != 0:
                inner = inner + psi_pows[j].scale(c[i, j])
        acc = _mul_capped(acc, phi, cap, cap) + inner
    return acc.truncate(cap)


def backward_shift(p: BiPoly, j: int) -> BiPoly:
    """``(p - p o P_j) / z_j``: drop terms free of ``z_j``, lower its exponent by one."""
    _check_var(j)
    if j == 1:
        return BiPoly._raw({(a - 1, b): c for (a, b), c in p._c.items() if a > 0})
    return BiPoly._raw({(a, b - 1): c for (a, b), c in p._c.items() if b > 0})


def project(p: BiPoly, j: int) -> BiPoly:
    """``p o P_j``: set ``z_j = 0``."""
    _check_var(j)
    idx = j - 1
    return BiPoly._raw({k: c for k, c in p._c.items() if k[idx] == 0})


def _check_var(j):
    if j not in (1, 2):
        raise ValueError(f"variable index must be 1 or 2, got {j!r}")


def _grlex_key(mono: tuple[int, int]) -> tuple[int, int]:
    # graded lexicographic with z1 > z2
    return (mono[0] + mono[1], mono[0])


def divide_exact(p: BiPoly, d: BiPoly, tol: float = 0.0) -> BiPoly:
    """Quotient ``q`` with ``q * d == p``, by grlex division (``z1 > z2``).

    Remainder terms of modulus ``<= tol`` are ignored; with the default
    ``tol=0`` the division must be exact.

    Raises
    ------
    NotDivisible
        If a remainder term exceeds ``tol``.
    """
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    lead = max(d._c, key=_grlex_key)
    lc = d._c[lead]
    rest = {k: v for k, v in d._c.items() if k != lead}
    work = dict(p._c)
    quot: dict = {}
    while work:
        mono = max(work, key=_grlex_key)
        c = work.pop(mono)
        if c == 0:
            continue
        a, b = mono[0] - lead[0], mono[1] - lead[1]
        if a < 0 or b < 0:
            if abs(c) > tol:
                raise NotDivisible(f"nonzero remainder term {c!r} at z1^{mono[0]} z2^{mono[1]}")
            continue
        t = c / lc
        quot[(a, b)] = quot.get((a, b), 0j) + t
        for (i, j), v in rest.items():
            key = (i + a, j + b)
            work[key] = work.get(key, 0j) - t * v
    return BiPoly._raw(quot)


def sup_norm_grid(p: BiPoly, n: int) -> float:
    """Max of ``|p|`` on the ``n x n`` grid of roots of unity on the torus.

    A lower bound for the sup norm over the bidisk (attained on the torus).
    """
    if n < 2:
        raise ValueError("grid size must be at least 2")
    if p.is_zero():
        return 0.0
    c = p.to_dense()
    t = np.exp(2j * np.pi * np.arange(n) / n)
    v1 = t[:, None] ** np.arange(c.shape[0])[None, :]
    v2 = t[:, None] ** np.arange(c.shape[1])[None, :]
    vals = v1 @ c @ v2.T
    return float(np.max(np.abs(vals)))


def prune(p, tol: float):
    """Drop coefficients with modulus ``<= tol`` (callers own the tolerance)."""
    return type(p)._raw({k: v for k, v in p._c.items() if abs(v) > tol})
