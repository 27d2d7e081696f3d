"""Pythagorean mates, range-space decompositions and multiplier constants.

The three decomposition forms correspond to the mates

* ``ex1``: ``phi = (1 + z1)/2``,    ``a = (1 - z1)/2``,    ``f = (z1 - 1) f1 + f2(z2)``
* ``ex2``: ``phi = (1 + z1 z2)/2``, ``a = (1 - z1 z2)/2``, ``f = f1(z1) + f2(z2) + (z1 z2 - 1) f3``
* ``ex3``: ``phi = (z1 + z2)/2``,   ``a = (z1 - z2)/2``,   ``f = f1(z1) + f2(z2) + (z1 - z2) f3``
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bipoly import BiPoly, divide_exact, embed, prune, sup_norm_grid
from .hardy_ops import MonoIndex, toeplitz
from .kernels import DBR2, multiplier_norm_lb, random_pointset, trial_rng

__all__ = [
    "DegenerateSymbol",
    "MATE_PAIRS",
    "Decomposition",
    "mate_deviation",
    "mate_check",
    "decompose",
    "decompose_ex1",
    "decompose_ex2",
    "decompose_ex3",
    "assemble",
    "g_function",
    "mate_preimage",
    "ComKEstimate",
    "theorem_com_k",
    "default_com_sets",
]

Z1 = BiPoly.z1()
Z2 = BiPoly.z2()
ONE = BiPoly.constant(1.0)

#: (phi, a) for each decomposition form
MATE_PAIRS = {
    "ex1": ((ONE + Z1).scale(0.5), (ONE - Z1).scale(0.5)),
    "ex2": ((ONE + Z1 * Z2).scale(0.5), (ONE - Z1 * Z2).scale(0.5)),
    "ex3": ((Z1 + Z2).scale(0.5), (Z1 - Z2).scale(0.5)),
}

DIVISORS = {"ex1": Z1 - ONE, "ex2": Z1 * Z2 - ONE, "ex3": Z1 - Z2}


class DegenerateSymbol(ValueError):
    """The multiplier symbol is identically zero."""


def mate_deviation(phi: BiPoly, a: BiPoly) -> float:
    """Largest coefficient of ``|phi|^2 + |a|^2 - 1`` on the torus."""
    p, q = embed(phi), embed(a)
    total = p * p.conj() + q * q.conj() - 1.0
    return total.max_abs_coeff()


def mate_check(phi: BiPoly, a: BiPoly, tol: float = 1e-12) -> bool:
    """Whether ``|phi|^2 + |a|^2 = 1`` on the torus, coefficient-wise within ``tol``."""
    return mate_deviation(phi, a) <= tol


@dataclass(frozen=True)
class Decomposition:
    form: str
    f1: BiPoly
    f2: BiPoly
    f3: BiPoly | None = None

    def __post_init__(self):
        if self.form not in ("ex1", "ex2", "ex3"):
            raise ValueError(f"unknown form {self.form!r}")
        if self.f2.depends_on(1):
            raise ValueError("f2 must be a function of z2 alone")
        if self.form == "ex1":
            if self.f3 is not None:
                raise ValueError("ex1 has no f3 component")
        else:
            if self.f1.depends_on(2):
                raise ValueError("f1 must be a function of z1 alone")
            if self.f3 is None:
                raise ValueError(f"{self.form} needs an f3 component")

    def to_json(self) -> dict:
        return {
            "form": self.form,
            "f1": self.f1.to_json(),
            "f2": self.f2.to_json(),
            "f3": None if self.f3 is None else self.f3.to_json(),
            "g": g_function(self).to_json(),
        }

    @classmethod
    def from_json(cls, obj) -> "Decomposition":
        f3 = obj.get("f3")
        return cls(obj["form"], BiPoly.from_json(obj["f1"]), BiPoly.from_json(obj["f2"]),
                   None if f3 is None else BiPoly.from_json(f3))


def _division_tol(f: BiPoly) -> float:
    # exact for dyadic/integer coefficients; absorbs rounding otherwise
    return 1e-12 * (1.0 + f.max_abs_coeff())


def decompose_ex1(f: BiPoly) -> Decomposition:
    """``f = (z1 - 1) f1 + f2(z2)`` with ``f2(z2) = f(1, z2)``."""
    f2: dict = {}
    for (i, j), c in f.coeffs.items():
        f2[(0, j)] = f2.get((0, j), 0j) + c
    f2p = BiPoly(f2)
    f1 = divide_exact(f - f2p, DIVISORS["ex1"], tol=_division_tol(f))
    return Decomposition("ex1", f1, f2p)


def decompose_ex2(f: BiPoly) -> Decomposition:
    """Split ``f(t, 1/t)`` into nonnegative powers (``f1``) and negative powers (``f2``)."""
    f1: dict = {}
    f2: dict = {}
    for (i, j), c in f.coeffs.items():
        k = i - j
        if k >= 0:
            f1[(k, 0)] = f1.get((k, 0), 0j) + c
        else:
            f2[(0, -k)] = f2.get((0, -k), 0j) + c
    f1p, f2p = BiPoly(f1), BiPoly(f2)
    f3 = divide_exact(f - f1p - f2p, DIVISORS["ex2"], tol=_division_tol(f))
    return Decomposition("ex2", f1p, f2p, f3)


def decompose_ex3(f: BiPoly) -> Decomposition:
    """Put the diagonal restriction ``f(z1, z1)`` into ``f1``; ``f2 = 0``."""
    f1: dict = {}
    for (i, j), c in f.coeffs.items():
        f1[(i + j, 0)] = f1.get((i + j, 0), 0j) + c
    f1p = BiPoly(f1)
    f3 = divide_exact(f - f1p, DIVISORS["ex3"], tol=_division_tol(f))
    return Decomposition("ex3", f1p, BiPoly(), f3)


_DECOMPOSERS = {"ex1": decompose_ex1, "ex2": decompose_ex2, "ex3": decompose_ex3}


def decompose(f: BiPoly, form: str) -> Decomposition:
    try:
        return _DECOMPOSERS[form](f)
    except KeyError:
        raise ValueError(f"unknown form {form!r}") from None


def assemble(d: Decomposition) -> BiPoly:
    """Rebuild ``f`` from its components."""
    if d.form == "ex1":
        return DIVISORS["ex1"] * d.f1 + d.f2
    return d.f1 + d.f2 + DIVISORS[d.form] * d.f3


def g_function(d: Decomposition) -> BiPoly:
    """The auxiliary function whose boundedness makes ``f`` a multiplier."""
    if d.form == "ex1":
        return Z1 * d.f1 + d.f2
    if d.form == "ex2":
        return d.f1 + d.f2 + Z1 * Z2 * d.f3
    return Z1 * d.f1 - Z2 * d.f2 + Z1 * Z2 * d.f3


def mate_preimage(f: BiPoly, a: BiPoly, N: int) -> tuple[BiPoly, float]:
    """Least-squares ``h`` on the box ``N`` with ``T_conj(a) h = f``; returns ``(h, residual)``."""
    if a.is_zero():
        raise DegenerateSymbol("mate must be nonzero")
    idx = MonoIndex(N)
    rhs = idx.vector(f)
    T = toeplitz(embed(a).conj(), N).matrix
    h, *_ = np.linalg.lstsq(T, rhs, rcond=None)
    residual = float(np.linalg.norm(T @ h - rhs))
    hp = idx.poly(h)
    hp = prune(hp, 1e-13 * max(1.0, hp.max_abs_coeff()))
    return hp, residual


@dataclass
class ComKEstimate:
    """Sampled estimate of the largest admissible ``c`` for ``B = (phi, c psi)``.

    ``k`` is an upper bound on the true constant: every sampled pencil value
    and the grid sup norm under-estimate ``||M_psi||``.
    """

    k: float
    best_index: int
    deltas: list
    sup_norm: float
    note: str = "upper bound on k from finite sampling"


def theorem_com_k(phi: BiPoly, psi: BiPoly, S_list) -> ComKEstimate:
    """Estimate ``k = 1 / ||M_psi||`` on the space with kernel ``DBR2(phi)``.

    The multiplier norm is bounded below by the largest pencil value over
    ``S_list`` and by the sup norm of ``psi``; ``k`` is the reciprocal of
    the larger lower bound.
    """
    if psi.is_zero():
        raise DegenerateSymbol("psi must be nonzero")
    K = DBR2(phi)
    deltas = [multiplier_norm_lb(psi, K, S) for S in S_list]
    best = int(np.argmax(deltas)) if deltas else -1
    sup = sup_norm_grid(psi, 64)
    lower = max(max(deltas, default=0.0), sup)
    return ComKEstimate(1.0 / lower, best, deltas, sup)


def default_com_sets(seed: int = 0, n_sets: int = 10, size: int = 64) -> list:
    """Random point sets for :func:`theorem_com_k`.

    Pencil values grow with the set size; small sets give a ``k`` that is
    too optimistic to be used as a safe scaling.
    """
    return [random_pointset(trial_rng(seed, t), size) for t in range(n_sets)]
