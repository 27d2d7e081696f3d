"""Finite sections of Toeplitz, Hankel and composition operators on H^2 of the bidisk.

Matrices are written in the orthonormal monomial basis. Domains are boxes
``{0..N}^2`` of exponents; a Hankel codomain is a window of non-analytic
exponents. Norms of finite sections are lower bounds for operator norms.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .bipoly import BiPoly, Point2, TrigPoly, embed, evaluate, sup_norm_grid
from .kernels import DBR2, kernel_eval

__all__ = [
    "OriginOnBoundary",
    "MonoIndex",
    "OpMatrix",
    "SymbolPair",
    "toeplitz",
    "toeplitz_apply",
    "hankel",
    "composition_matrix",
    "lossfree_cap",
    "op_norm",
    "power_norm",
    "comp_norm_sequence",
    "is_stabilized",
    "verify_han",
    "theorem_M_bound",
    "normalized_F",
    "dbr_defect_check",
    "dbr_defect_error",
]

PLATEAU_TOL = 1e-6
PLATEAU_RUN = 3
_POWER_ABOVE = 60


class OriginOnBoundary(ValueError):
    """``|phi(0)| = 1`` or ``|psi(0)| = 1``: the norm bound degenerates."""


class MonoIndex:
    """Graded-lex enumeration (``z1 > z2``) of a box ``{0..N1} x {0..N2}``."""

    def __init__(self, N1: int, N2: int | None = None):
        N2 = N1 if N2 is None else N2
        self.N1, self.N2 = N1, N2
        monos = [(i, j) for i in range(N1 + 1) for j in range(N2 + 1)]
        monos.sort(key=lambda m: (m[0] + m[1], -m[0]))
        self.monomials = monos
        self.position = {m: k for k, m in enumerate(monos)}
        self._i = np.array([m[0] for m in monos], dtype=np.int64)
        self._j = np.array([m[1] for m in monos], dtype=np.int64)

    def __len__(self):
        return len(self.monomials)

    def __contains__(self, m):
        return m in self.position

    def vector(self, p: BiPoly) -> np.ndarray:
        """Coefficient vector of ``p``; raises if ``p`` leaves the box."""
        v = np.zeros(len(self), dtype=np.complex128)
        for m, c in p.coeffs.items():
            if m not in self.position:
                raise ValueError(f"monomial {m} outside the box")
            v[self.position[m]] = c
        return v

    def poly(self, v: np.ndarray) -> BiPoly:
        return BiPoly({m: c for m, c in zip(self.monomials, v) if c != 0})

    def from_dense(self, arr: np.ndarray) -> np.ndarray:
        return arr[self._i, self._j]

    def to_dense(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros((self.N1 + 1, self.N2 + 1), dtype=np.complex128)
        out[self._i, self._j] = v
        return out


@dataclass
class OpMatrix:
    """Dense matrix with explicit exponent maps for rows and columns."""

    matrix: np.ndarray
    rows: list
    cols: list
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.matrix.shape

    def adjoint(self) -> "OpMatrix":
        return OpMatrix(self.matrix.conj().T, self.cols, self.rows, dict(self.meta))

    def to_json(self) -> dict:
        m = self.matrix
        return {
            "rows": [list(r) for r in self.rows],
            "cols": [list(c) for c in self.cols],
            "shape": list(m.shape),
            "entries": [[float(x.real), float(x.imag)] for x in m.ravel(order="C")],
            "meta": self.meta,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class SymbolPair:
    """Analytic self-map ``B = (phi, psi)`` of the closed bidisk."""

    phi: BiPoly
    psi: BiPoly

    def __post_init__(self):
        for name in ("phi", "psi"):
            s = sup_norm_grid(getattr(self, name), 64)
            if s > 1 + 1e-9:
                raise ValueError(f"{name} has sup norm {s:.6g} > 1")

    def __iter__(self):
        yield self.phi
        yield self.psi


def _sym_lookup(sym: TrigPoly, dm: np.ndarray, dn: np.ndarray) -> np.ndarray:
    out = np.zeros(dm.shape, dtype=np.complex128)
    if sym.is_zero():
        return out
    arr, m0, n0 = sym.to_offset_dense()
    a = dm - m0
    b = dn - n0
    ok = (a >= 0) & (a < arr.shape[0]) & (b >= 0) & (b < arr.shape[1])
    out[ok] = arr[a[ok], b[ok]]
    return out


def toeplitz(sym: TrigPoly | BiPoly, N: int, N_out: int | None = None) -> OpMatrix:
    """Section of ``T_sym`` from the box ``N`` to the box ``N_out`` (default ``N``)."""
    sym = embed(sym)
    dom = MonoIndex(N)
    cod = dom if N_out is None else MonoIndex(N_out)
    dm = cod._i[:, None] - dom._i[None, :]
    dn = cod._j[:, None] - dom._j[None, :]
    return OpMatrix(_sym_lookup(sym, dm, dn), cod.monomials, dom.monomials,
                    {"op": "toeplitz", "N": N})


def toeplitz_apply(sym: TrigPoly | BiPoly, coeffs: np.ndarray, N: int) -> np.ndarray:
    """``P(sym * h)`` cropped to the box ``N``; ``coeffs`` is the dense array of ``h``."""
    sym = embed(sym)
    h = np.zeros((N + 1, N + 1), dtype=np.complex128)
    s1, s2 = min(coeffs.shape[0], N + 1), min(coeffs.shape[1], N + 1)
    h[:s1, :s2] = coeffs[:s1, :s2]
    if sym.is_zero():
        return np.zeros_like(h)
    arr, m0, n0 = sym.to_offset_dense()
    full = _backend.polymul2(np.ascontiguousarray(arr), h, -1, -1)
    # full[a, b] holds exponent (a + m0, b + n0)
    out = np.zeros_like(h)
    a0, b0 = -m0, -n0
    src = full[max(a0, 0):, max(b0, 0):]
    dst_a, dst_b = max(m0, 0), max(n0, 0)
    ka = min(src.shape[0], N + 1 - dst_a)
    kb = min(src.shape[1], N + 1 - dst_b)
    if ka > 0 and kb > 0:
        out[dst_a:dst_a + ka, dst_b:dst_b + kb] = src[:ka, :kb]
    return out


def hankel(sym: TrigPoly | BiPoly, N: int, window: int | None = None) -> OpMatrix:
    """Section of ``H_sym = (I - P)(sym * .)`` on the box ``N``.

    Rows are the exponents ``(m, n)`` with ``min(m, n) < 0`` and
    ``|m|, |n| <= window`` (default ``N + deg(sym)``), which holds the whole
    image of the box.
    """
    sym = embed(sym)
    W = N + sym.max_degree if window is None else window
    rows = [(m, n) for m in range(-W, W + 1) for n in range(-W, W + 1) if min(m, n) < 0]
    rows.sort(key=lambda r: (r[0] + r[1], -r[0]))
    dom = MonoIndex(N)
    rm = np.array([r[0] for r in rows], dtype=np.int64)
    rn = np.array([r[1] for r in rows], dtype=np.int64)
    mat = _sym_lookup(sym, rm[:, None] - dom._i[None, :], rn[:, None] - dom._j[None, :])
    return OpMatrix(mat, rows, dom.monomials, {"op": "hankel", "N": N, "window": W})


def lossfree_cap(B, N: int) -> tuple[int, int]:
    """Per-variable degree of ``phi**i psi**j`` over the box ``i, j <= N``."""
    phi, psi = B
    return (N * (phi.deg1 + psi.deg1), N * (phi.deg2 + psi.deg2))


def composition_matrix(B, N: int, M: int | None = None) -> OpMatrix:
    """Section of ``C_B``: column ``z1^i z2^j`` holds the coefficients of ``phi^i psi^j``.

    Columns run over the box ``N``, rows over the box ``M`` (default: the
    smallest box that loses nothing). Products are formed by evaluation on
    a torus grid large enough to avoid aliasing, then an FFT.
    """
    phi, psi = B
    L1, L2 = lossfree_cap(B, N)
    if M is None:
        M1, M2 = L1, L2
    else:
        M1 = M2 = M
    g1, g2 = L1 + 1, L2 + 1
    t1 = np.exp(2j * np.pi * np.arange(g1) / g1)
    t2 = np.exp(2j * np.pi * np.arange(g2) / g2)
    Z1, Z2 = np.meshgrid(t1, t2, indexing="ij")
    fv = evaluate(phi, (Z1.ravel(), Z2.ravel())).reshape(g1, g2)
    gv = evaluate(psi, (Z1.ravel(), Z2.ravel())).reshape(g1, g2)
    dom = MonoIndex(N)
    cod = MonoIndex(M1, M2)
    gpow = np.stack([gv ** j for j in range(N + 1)])
    mat = np.zeros((len(cod), len(dom)), dtype=np.complex128)
    fi = np.ones_like(fv)
    r1, r2 = min(M1 + 1, g1), min(M2 + 1, g2)
    for i in range(N + 1):
        coef = np.fft.fft2(fi[None, :, :] * gpow, axes=(1, 2)) / (g1 * g2)
        for j in range(N + 1):
            dense = np.zeros((M1 + 1, M2 + 1), dtype=np.complex128)
            dense[:r1, :r2] = coef[j, :r1, :r2]
            mat[:, dom.position[(i, j)]] = cod.from_dense(dense)
        fi = fi * fv
    truncated = M1 < L1 or M2 < L2
    return OpMatrix(mat, cod.monomials, dom.monomials,
                    {"op": "composition", "N": N, "M": [M1, M2], "truncated": truncated})


def power_norm(A: np.ndarray, rtol: float = 1e-10, maxiter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value by power iteration on ``A* A``."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(maxiter):
        w = A.conj().T @ (A @ v)
        lam = np.linalg.norm(w)
        if lam == 0:
            return 0.0
        v = w / lam
        new = np.sqrt(lam)
        if abs(new - sigma) <= rtol * new:
            return float(new)
        sigma = new
    return float(sigma)


def op_norm(A: OpMatrix | np.ndarray, method: str = "auto") -> float:
    """Largest singular value; SVD by default, power iteration for big boxes."""
    mat = A.matrix if isinstance(A, OpMatrix) else np.asarray(A)
    if mat.size == 0:
        return 0.0
    if method == "auto":
        N = A.meta.get("N", 0) if isinstance(A, OpMatrix) else 0
        method = "power" if N > _POWER_ABOVE else "svd"
    if method == "svd":
        return float(np.linalg.svd(mat, compute_uv=False)[0])
    if method == "power":
        return power_norm(mat)
    raise ValueError(f"unknown method {method!r}")


def comp_norm_sequence(B, N_list) -> list[float]:
    """Norms of loss-free sections of ``C_B``, one per ``N``; lower bounds for ``||C_B||``."""
    N_list = list(N_list)
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be increasing")
    return [op_norm(composition_matrix(B, N)) for N in N_list]


def is_stabilized(norms, tol: float = PLATEAU_TOL, run: int = PLATEAU_RUN) -> bool:
    """True when ``run`` consecutive relative increments fall below ``tol``."""
    streak = 0
    for a, b in zip(norms, norms[1:]):
        if abs(b - a) <= tol * max(abs(b), 1e-300):
            streak += 1
            if streak >= run:
                return True
        else:
            streak = 0
    return False


def verify_han(f: TrigPoly | BiPoly, g: TrigPoly | BiPoly, N: int) -> float:
    """Max deviation of ``T_fg`` from ``T_f T_g + H_conj(f)* H_g`` on the protected box.

    The sign follows from ``P(f u) = H_conj(f)* u`` for ``u`` orthogonal to H^2.

    All matrices are built on the box ``N``; entries are compared on the
    sub-box ``N - d`` (``d`` the largest symbol degree), where truncation
    cannot enter.
    """
    f, g = embed(f), embed(g)
    d = max(f.max_degree, g.max_degree)
    if N <= d:
        raise ValueError(f"N={N} leaves no protected window for degree {d}")
    W = N + d
    lhs = toeplitz(f * g, N).matrix
    rhs = (toeplitz(f, N).matrix @ toeplitz(g, N).matrix
           + hankel(f.conj(), N, W).matrix.conj().T @ hankel(g, N, W).matrix)
    idx = MonoIndex(N)
    keep = [idx.position[(i, j)] for i in range(N - d + 1) for j in range(N - d + 1)]
    diff = (lhs - rhs)[np.ix_(keep, keep)]
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def _origin_values(B):
    phi, psi = B
    a, b = phi.coeff(0, 0), psi.coeff(0, 0)
    if abs(a) >= 1 or abs(b) >= 1:
        raise OriginOnBoundary(f"|phi(0)| = {abs(a):g}, |psi(0)| = {abs(b):g}")
    return a, b


def theorem_M_bound(B) -> float:
    """``sqrt((1+|phi(0)|)/(1-|phi(0)|)) * sqrt((1+|psi(0)|)/(1-|psi(0)|))``."""
    a, b = _origin_values(B)
    ra, rb = abs(a), abs(b)
    return float(np.sqrt((1 + ra) / (1 - ra)) * np.sqrt((1 + rb) / (1 - rb)))


def normalized_F(B) -> BiPoly:
    """``R(z, 0) / sqrt(R(0, 0))`` as a polynomial."""
    phi, psi = B
    a, b = _origin_values(B)
    s = np.sqrt((1 - abs(a) ** 2) * (1 - abs(b) ** 2))
    return ((1 - phi.scale(np.conj(a))) * (1 - psi.scale(np.conj(b)))).scale(1 / s)


def dbr_defect_check(phi: BiPoly, w, z, N: int) -> complex:
    """Evaluate ``(I - T_phi T_conj(phi)) k_w`` at ``z`` on the box ``N``.

    ``k_w`` is the Szego kernel truncated to the box. The result tends to
    the two-variable de Branges-Rovnyak kernel at ``(z, w)`` as ``N`` grows.
    """
    w = w if isinstance(w, Point2) else Point2(*w)
    z = z if isinstance(z, Point2) else Point2(*z)
    k = np.arange(N + 1)
    kw = np.outer(np.conj(w.z1) ** k, np.conj(w.z2) ** k)
    sym = embed(phi)
    u = toeplitz_apply(sym.conj(), kw, N)
    v = kw - toeplitz_apply(sym, u, N)
    return complex(evaluate(BiPoly.from_dense(v), (z.z1, z.z2)))


def dbr_defect_error(phi: BiPoly, w, z, N: int) -> float:
    """Distance between :func:`dbr_defect_check` and the closed-form kernel."""
    return abs(dbr_defect_check(phi, w, z, N) - kernel_eval(DBR2(phi), tuple(z), tuple(w)))
