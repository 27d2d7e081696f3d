"""Kernel expressions on the bidisk, Gram matrices and positivity tests.

Kernels are small expression trees. Every node knows how to build the
cross matrix ``K(z_i, w_j)`` for arrays of points, which is all the
positivity and pencil machinery below needs.

A sampled positivity screen can only falsify: a verdict of
``NO_COUNTEREXAMPLE`` is evidence, not a proof that the kernel is positive.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from . import _backend
from .bipoly import BiPoly, Point2, evaluate, sup_norm_grid

log = logging.getLogger(__name__)

PSD = "PSD"
NOT_PSD = "NotPSD"
NO_COUNTEREXAMPLE = "no counterexample found"

SAMPLE_RADIUS = 0.98
DEFAULT_TOL = 1e-8
_BALL_SLACK = 1e-9


class SingularPencil(np.linalg.LinAlgError):
    """The Gram matrix defining a pencil is singular even after regularization."""


# ---------------------------------------------------------------------------
# expression tree


def _pts(points) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(points, PointSet):
        return points.z1, points.z2
    z1, z2 = points
    return (np.ascontiguousarray(np.atleast_1d(z1), dtype=np.complex128),
            np.ascontiguousarray(np.atleast_1d(z2), dtype=np.complex128))


def _check_contractive(p: BiPoly, name: str):
    s = sup_norm_grid(p, 64)
    if s > 1 + _BALL_SLACK:
        raise ValueError(f"{name} has sup norm {s:.6g} > 1 on the torus grid")


class KernelExpr:
    """Base class; subclasses implement :meth:`cross`."""

    kind = ""

    def cross(self, Z, W) -> np.ndarray:
        """Matrix with entry ``[i, j] = K(Z[i], W[j])``."""
        raise NotImplementedError

    def __call__(self, z, w) -> complex:
        return kernel_eval(self, z, w)

    def __add__(self, other):
        return Sum(self, other)

    def __mul__(self, other):
        if isinstance(other, KernelExpr):
            return Product(self, other)
        return Scalar(float(other), self)

    __rmul__ = __mul__

    def __pow__(self, alpha):
        return Power(self, alpha)

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Szego(KernelExpr):
    kind = "szego"

    def cross(self, Z, W):
        z1, z2 = _pts(Z)
        w1, w2 = _pts(W)
        zero_z = np.zeros_like(z1)
        zero_w = np.zeros_like(w1)
        return (_backend.factor_gram(zero_z, z1, zero_w, w1)
                * _backend.factor_gram(zero_z, z2, zero_w, w2))

    def to_json(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=False)
class OneVarDBR(KernelExpr):
    """``(1 - conj(b(w)) b(z)) / (1 - conj(w_v) z_v)`` for ``b`` in one variable ``v``."""

    b: BiPoly
    var: int = 1
    kind = "one_var_dbr"

    def __post_init__(self):
        if self.var not in (1, 2):
            raise ValueError("var must be 1 or 2")
        if self.b.depends_on(3 - self.var):
            raise ValueError(f"b must depend on z{self.var} only")
        _check_contractive(self.b, "b")

    def cross(self, Z, W):
        z = _pts(Z)
        w = _pts(W)
        k = self.var - 1
        return _backend.factor_gram(evaluate(self.b, z), z[k], evaluate(self.b, w), w[k])

    def to_json(self):
        return {"kind": self.kind, "b": self.b.to_json(), "var": self.var}


@dataclass(frozen=True, eq=False)
class DBR2(KernelExpr):
    """Two-variable de Branges-Rovnyak kernel ``(1 - conj(phi(w)) phi(z)) * Szego``."""

    phi: BiPoly
    kind = "dbr2"

    def __post_init__(self):
        _check_contractive(self.phi, "phi")

    def cross(self, Z, W):
        z = _pts(Z)
        w = _pts(W)
        zero_z = np.zeros_like(z[1])
        zero_w = np.zeros_like(w[1])
        return (_backend.factor_gram(evaluate(self.phi, z), z[0], evaluate(self.phi, w), w[0])
                * _backend.factor_gram(zero_z, z[1], zero_w, w[1]))

    def to_json(self):
        return {"kind": self.kind, "phi": self.phi.to_json()}


@dataclass(frozen=True, eq=False)
class RKernel(KernelExpr):
    """The kernel whose positivity makes ``C_B`` bounded for ``B = (phi, psi)``."""

    phi: BiPoly
    psi: BiPoly
    kind = "r_kernel"

    def __post_init__(self):
        _check_contractive(self.phi, "phi")
        _check_contractive(self.psi, "psi")

    def cross(self, Z, W):
        z = _pts(Z)
        w = _pts(W)
        return (_backend.factor_gram(evaluate(self.phi, z), z[0], evaluate(self.phi, w), w[0])
                * _backend.factor_gram(evaluate(self.psi, z), z[1], evaluate(self.psi, w), w[1]))

    def to_json(self):
        return {"kind": self.kind, "phi": self.phi.to_json(), "psi": self.psi.to_json()}


@dataclass(frozen=True, eq=False)
class Sum(KernelExpr):
    left: KernelExpr
    right: KernelExpr
    kind = "sum"

    def cross(self, Z, W):
        return self.left.cross(Z, W) + self.right.cross(Z, W)

    def to_json(self):
        return {"kind": self.kind, "left": self.left.to_json(), "right": self.right.to_json()}


@dataclass(frozen=True, eq=False)
class Product(KernelExpr):
    left: KernelExpr
    right: KernelExpr
    kind = "product"

    def cross(self, Z, W):
        return self.left.cross(Z, W) * self.right.cross(Z, W)

    def to_json(self):
        return {"kind": self.kind, "left": self.left.to_json(), "right": self.right.to_json()}


@dataclass(frozen=True, eq=False)
class Power(KernelExpr):
    base: KernelExpr
    alpha: int
    kind = "power"

    def __post_init__(self):
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise ValueError("alpha must be a positive integer")

    def cross(self, Z, W):
        return self.base.cross(Z, W) ** int(self.alpha)

    def to_json(self):
        return {"kind": self.kind, "alpha": int(self.alpha), "base": self.base.to_json()}


@dataclass(frozen=True, eq=False)
class ConjMult(KernelExpr):
    """``conj(f(w)) f(z) K(z, w)``."""

    f: BiPoly
    base: KernelExpr
    kind = "conj_mult"

    def cross(self, Z, W):
        fz = evaluate(self.f, _pts(Z))
        fw = evaluate(self.f, _pts(W))
        return fz[:, None] * np.conj(fw)[None, :] * self.base.cross(Z, W)

    def to_json(self):
        return {"kind": self.kind, "f": self.f.to_json(), "base": self.base.to_json()}


@dataclass(frozen=True, eq=False)
class Scalar(KernelExpr):
    c: float
    base: KernelExpr
    kind = "scalar"

    def __post_init__(self):
        if not (self.c >= 0):
            raise ValueError("scalar multiple must be a nonnegative real")

    def cross(self, Z, W):
        return self.c * self.base.cross(Z, W)

    def to_json(self):
        return {"kind": self.kind, "c": float(self.c), "base": self.base.to_json()}


def kernel_from_json(obj) -> KernelExpr:
    """Inverse of ``KernelExpr.to_json``."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("kernel JSON must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "szego":
        return Szego()
    if kind == "one_var_dbr":
        return OneVarDBR(BiPoly.from_json(obj["b"]), int(obj.get("var", 1)))
    if kind == "dbr2":
        return DBR2(BiPoly.from_json(obj["phi"]))
    if kind == "r_kernel":
        return RKernel(BiPoly.from_json(obj["phi"]), BiPoly.from_json(obj["psi"]))
    if kind in ("sum", "product"):
        cls = Sum if kind == "sum" else Product
        return cls(kernel_from_json(obj["left"]), kernel_from_json(obj["right"]))
    if kind == "power":
        return Power(kernel_from_json(obj["base"]), int(obj["alpha"]))
    if kind == "conj_mult":
        return ConjMult(BiPoly.from_json(obj["f"]), kernel_from_json(obj["base"]))
    if kind == "scalar":
        return Scalar(float(obj["c"]), kernel_from_json(obj["base"]))
    raise ValueError(f"unknown kernel kind {kind!r}")


# ---------------------------------------------------------------------------
# point sets and Gram matrices


class PointSet:
    """Ordered set of distinct points of the open bidisk."""

    __slots__ = ("z1", "z2")

    def __init__(self, points: Sequence):
        pts = [p if isinstance(p, Point2) else Point2(*p) for p in points]
        if not pts:
            raise ValueError("empty point set")
        self.z1 = np.array([p.z1 for p in pts], dtype=np.complex128)
        self.z2 = np.array([p.z2 for p in pts], dtype=np.complex128)
        if len(pts) > 1:
            d = (np.abs(self.z1[:, None] - self.z1[None, :]) ** 2
                 + np.abs(self.z2[:, None] - self.z2[None, :]) ** 2)
            np.fill_diagonal(d, np.inf)
            if d.min() <= 0:
                raise ValueError("points must be pairwise distinct")

    @classmethod
    def from_arrays(cls, z1, z2) -> "PointSet":
        return cls(list(zip(np.asarray(z1).tolist(), np.asarray(z2).tolist())))

    def __len__(self):
        return len(self.z1)

    def __getitem__(self, k) -> Point2:
        return Point2(self.z1[k], self.z2[k])

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    def extend(self, p) -> "PointSet":
        return PointSet(list(self) + [p])

    def to_json(self) -> list:
        return [p.to_json() for p in self]

    @classmethod
    def from_json(cls, obj) -> "PointSet":
        return cls([Point2.from_json(p) for p in obj])


def kernel_eval(K: KernelExpr, z, w) -> complex:
    """``K(z, w)`` for single points."""
    return complex(K.cross(_pts(tuple(z)), _pts(tuple(w)))[0, 0])


def gram(K: KernelExpr, S) -> np.ndarray:
    """Hermitian Gram matrix ``K(s_i, s_j)`` (symmetrized)."""
    pts = _pts(S)
    M = K.cross(pts, pts)
    return 0.5 * (M + M.conj().T)


@dataclass
class PsdVerdict:
    status: str
    min_eig: float
    certificate: np.ndarray | None = None

    @property
    def is_psd(self) -> bool:
        return self.status == PSD


def psd_check(M: np.ndarray, tol: float = DEFAULT_TOL) -> PsdVerdict:
    """PSD iff the smallest eigenvalue is at least ``-tol * max(1, trace)``.

    On failure the certificate is a unit eigenvector ``c`` with ``c* M c < 0``.
    """
    M = np.asarray(M, dtype=np.complex128)
    M = 0.5 * (M + M.conj().T)
    evals, evecs = np.linalg.eigh(M)
    lo = float(evals[0])
    thresh = -tol * max(1.0, float(np.trace(M).real))
    if lo >= thresh:
        return PsdVerdict(PSD, lo)
    return PsdVerdict(NOT_PSD, lo, evecs[:, 0].copy())


def quad_form(M: np.ndarray, c: np.ndarray) -> float:
    return float(np.real(np.vdot(c, M @ c)))


# ---------------------------------------------------------------------------
# random screens


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trial ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),)))


def sample_disk(rng: np.random.Generator, n: int, radius: float = SAMPLE_RADIUS) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    t = 2 * np.pi * rng.random(n)
    return r * np.exp(1j * t)


def random_pointset(rng: np.random.Generator, n: int, radius: float = SAMPLE_RADIUS) -> PointSet:
    return PointSet.from_arrays(sample_disk(rng, n, radius), sample_disk(rng, n, radius))


@dataclass
class Certificate:
    """A point set and coefficients with a negative Gram quadratic form."""

    points: PointSet
    coeffs: np.ndarray
    value: float
    evaluations: int = 0

    def recheck(self, K: KernelExpr) -> float:
        """Quadratic form recomputed from scratch."""
        return quad_form(gram(K, self.points), self.coeffs)

    def to_json(self) -> dict:
        return {
            "points": self.points.to_json(),
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
            "value": float(self.value),
        }

    @classmethod
    def from_json(cls, obj) -> "Certificate":
        return cls(PointSet.from_json(obj["points"]),
                   np.array([complex(a, b) for a, b in obj["coeffs"]]),
                   float(obj["value"]))


@dataclass
class PositivityResult:
    verdict: str
    worst_min_eig: float
    worst_set: PointSet | None
    trials_run: int
    certificate: Certificate | None = None
    min_eigs: list = field(default_factory=list, repr=False)


def positivity_test(K: KernelExpr, trials: int = 200, set_size: int = 12,
                    seed: int = 0, tol: float = DEFAULT_TOL) -> PositivityResult:
    """Random falsification screen for kernel positivity.

    Each trial draws a point set of size between 1 and ``set_size`` with
    coordinates uniform in the disk of radius 0.98, and checks its Gram
    matrix. Stops at the first negativity certificate.
    """
    if trials < 1 or set_size < 1:
        raise ValueError("trials and set_size must be positive")
    worst, worst_set = np.inf, None
    mins = []
    for t in range(trials):
        rng = trial_rng(seed, t)
        m = int(rng.integers(1, set_size + 1))
        S = random_pointset(rng, m)
        M = gram(K, S)
        v = psd_check(M, tol)
        mins.append(v.min_eig)
        if v.min_eig < worst:
            worst, worst_set = v.min_eig, S
        if not v.is_psd:
            cert = Certificate(S, v.certificate, quad_form(M, v.certificate))
            log.info("negativity certificate in trial %d: %.6g", t, cert.value)
            return PositivityResult(NOT_PSD, worst, worst_set, t + 1, cert, mins)
    return PositivityResult(NO_COUNTEREXAMPLE, float(worst), worst_set, trials, None, mins)


def _min_eig(K, z1, z2):
    M = K.cross((z1, z2), (z1, z2))
    M = 0.5 * (M + M.conj().T)
    return float(np.linalg.eigvalsh(M)[0]), M


def _refine(K, z1, z2, budget, radius, step=0.1, min_step=1e-4):
    """Derivative-free coordinate descent on the smallest Gram eigenvalue."""
    x = np.concatenate([z1.real, z1.imag, z2.real, z2.imag])
    n = len(z1)

    def unpack(v):
        return (np.ascontiguousarray(v[:n] + 1j * v[n:2 * n]),
                np.ascontiguousarray(v[2 * n:3 * n] + 1j * v[3 * n:]))

    def feasible(v):
        a, b = unpack(v)
        return np.all(np.abs(a) <= radius) and np.all(np.abs(b) <= radius)

    best, _ = _min_eig(K, *unpack(x))
    evals = 1
    while step >= min_step and evals < budget:
        improved = False
        for k in range(len(x)):
            for sgn in (1.0, -1.0):
                if evals >= budget:
                    break
                y = x.copy()
                y[k] += sgn * step
                if not feasible(y):
                    continue
                val, _ = _min_eig(K, *unpack(y))
                evals += 1
                if val < best:
                    x, best, improved = y, val, True
                    break
        if not improved:
            step /= 2
    a, b = unpack(x)
    return a, b, best, evals


def negativity_search(K: KernelExpr, n_points: int = 2, restarts: int = 4, seed: int = 0,
                      max_evals: int = 10_000, tol: float = DEFAULT_TOL,
                      init: PointSet | None = None,
                      radius: float = SAMPLE_RADIUS) -> Certificate | None:
    """Search for a negative Gram quadratic form.

    Random restarts (plus ``init`` if given) are refined by coordinate
    descent with step 0.1 halved on failure down to 1e-4. ``max_evals``
    bounds the total number of Gram evaluations. Returns the most negative
    certificate, or ``None`` if no form falls below ``-tol * max(1, trace)``.
    """
    if n_points < 2 and init is None:
        raise ValueError("n_points must be at least 2")
    starts = []
    if init is not None:
        starts.append((init.z1.copy(), init.z2.copy()))
    for r in range(restarts):
        rng = trial_rng(seed, r)
        starts.append((sample_disk(rng, n_points, radius), sample_disk(rng, n_points, radius)))
    best = None
    used = 0
    per_start = max(1, max_evals // len(starts))
    for z1, z2 in starts:
        budget = min(per_start, max_evals - used)
        if budget <= 0:
            break
        a, b, val, n = _refine(K, z1, z2, budget, radius)
        used += n
        if best is None or val < best[2]:
            best = (a, b, val)
    if best is None:
        return None
    a, b, _ = best
    try:
        S = PointSet.from_arrays(a, b)
    except ValueError:
        return None
    M = gram(K, S)
    v = psd_check(M, tol)
    if v.is_psd:
        return None
    return Certificate(S, v.certificate, quad_form(M, v.certificate), used)


# ---------------------------------------------------------------------------
# pencils


def pencil_max(B: np.ndarray, A: np.ndarray) -> float:
    """Largest ``lam`` with ``B v = lam A v`` for Hermitian ``B`` and PD ``A``.

    ``A`` is Cholesky-factored (with a ``1e-12 * trace`` shift if needed)
    and the pencil reduced to an ordinary Hermitian eigenproblem.
    """
    A = 0.5 * (A + A.conj().T)
    B = 0.5 * (B + B.conj().T)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        eps = 1e-12 * float(np.trace(A).real)
        try:
            L = np.linalg.cholesky(A + eps * np.eye(len(A)))
        except np.linalg.LinAlgError as exc:
            raise SingularPencil("Gram matrix is singular after regularization") from exc
    X = scipy.linalg.solve_triangular(L, B, lower=True)
    C = scipy.linalg.solve_triangular(L, X.conj().T, lower=True).conj().T
    C = 0.5 * (C + C.conj().T)
    return float(np.linalg.eigvalsh(C)[-1])


def membership_norm(f: BiPoly, K: KernelExpr, S) -> float:
    """Lower bound for the norm of ``f`` in the space with kernel ``K`` from set ``S``."""
    A = gram(K, S)
    fv = evaluate(f, _pts(S))
    B = np.outer(fv, fv.conj())
    return float(np.sqrt(max(pencil_max(B, A), 0.0)))


def multiplier_norm_lb(psi: BiPoly, K: KernelExpr, S) -> float:
    """Lower bound for the multiplier norm of ``psi`` from set ``S``."""
    A = gram(K, S)
    pv = evaluate(psi, _pts(S))
    B = np.outer(pv, pv.conj()) * A
    return float(np.sqrt(max(pencil_max(B, A), 0.0)))


def dominance_delta(K1: KernelExpr, K2: KernelExpr, S) -> float:
    """Smallest ``delta`` with ``gram(K2) - gram(K1) / delta**2`` PSD on ``S``."""
    lam = pencil_max(gram(K1, S), gram(K2, S))
    return float(np.sqrt(max(lam, 0.0)))
