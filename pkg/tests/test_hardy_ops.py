import json

import numpy as np
import pytest

from bidisk.bipoly import BiPoly, TrigPoly, backward_shift, compose, embed, evaluate
from bidisk.hardy_ops import (MonoIndex, OriginOnBoundary, SymbolPair, comp_norm_sequence,
                              composition_matrix, dbr_defect_check, dbr_defect_error, hankel,
                              is_stabilized, lossfree_cap, normalized_F, op_norm, power_norm,
                              theorem_M_bound, toeplitz, toeplitz_apply, verify_han)
from bidisk.kernels import RKernel, Szego, kernel_eval

from conftest import rand_poly, rand_trig

z1, z2 = BiPoly.z1(), BiPoly.z2()
ONE = BiPoly.constant(1)
HALF = (ONE + z1).scale(0.5)


class TestMonoIndex:
    def test_bijective(self):
        idx = MonoIndex(4)
        assert len(idx) == 25
        assert sorted(idx.monomials) == [(i, j) for i in range(5) for j in range(5)]
        assert [idx.position[m] for m in idx.monomials] == list(range(25))

    def test_graded(self):
        deg = [i + j for i, j in MonoIndex(3).monomials]
        assert deg == sorted(deg)
        assert MonoIndex(2).monomials[:3] == [(0, 0), (1, 0), (0, 1)]

    def test_vector_roundtrip(self, rng):
        idx = MonoIndex(5)
        p = rand_poly(rng, 5)
        assert idx.poly(idx.vector(p)) == p
        np.testing.assert_array_equal(idx.from_dense(idx.to_dense(idx.vector(p))), idx.vector(p))
        with pytest.raises(ValueError):
            idx.vector(BiPoly.monomial(6, 0))


class TestToeplitz:
    def test_identity(self):
        np.testing.assert_array_equal(toeplitz(TrigPoly.constant(1), 3).matrix, np.eye(16))

    def test_shift(self):
        idx = MonoIndex(3)
        T = toeplitz(embed(z1), 3).matrix
        for (i, j) in idx.monomials:
            col = T[:, idx.position[(i, j)]]
            if i < 3:
                expect = np.zeros(16)
                expect[idx.position[(i + 1, j)]] = 1
                np.testing.assert_array_equal(col, expect)
            else:
                assert not col.any()

    def test_backward_shift_oracle(self, rng):
        N = 6
        idx = MonoIndex(N)
        T = toeplitz(embed(z1).conj(), N).matrix
        for _ in range(5):
            p = rand_poly(rng, N)
            np.testing.assert_array_equal(T @ idx.vector(p), idx.vector(backward_shift(p, 1)))

    def test_adjoint(self, rng):
        s = rand_trig(rng, 3)
        np.testing.assert_array_equal(toeplitz(s.conj(), 5).matrix, toeplitz(s, 5).matrix.conj().T)

    def test_apply_matches_matrix(self, rng):
        N = 6
        idx = MonoIndex(N)
        s = rand_trig(rng, 3)
        h = rand_poly(rng, N)
        via_mat = toeplitz(s, N).matrix @ idx.vector(h)
        via_conv = idx.from_dense(toeplitz_apply(s, h.to_dense(), N))
        np.testing.assert_allclose(via_conv, via_mat, atol=1e-13)

    def test_json_dump(self):
        obj = json.loads(toeplitz(embed(z1), 1).dumps())
        assert obj["shape"] == [4, 4]
        assert len(obj["entries"]) == 16 and obj["rows"][1] == [1, 0]


class TestHankel:
    def test_analytic_symbol(self, rng):
        assert not hankel(embed(rand_poly(rng, 3)), 4).matrix.any()

    def test_conj_z1_on_one(self):
        H = hankel(embed(z1).conj(), 3)
        out = H.matrix[:, 0]
        k = H.rows.index((-1, 0))
        assert out[k] == 1 and np.count_nonzero(out) == 1

    def test_hstar_h(self):
        N = 4
        H = hankel(embed(z1).conj(), N).matrix
        G = H.conj().T @ H
        idx = MonoIndex(N)
        for j in range(N + 1):
            e = idx.vector(BiPoly.monomial(0, j))
            np.testing.assert_array_equal(G @ e, e)

    def test_toeplitz_plus_hankel_is_multiplication(self, rng):
        # columns of T and H together hold every coefficient of sym * h
        N = 4
        s = rand_trig(rng, 2)
        T, H = toeplitz(s, N, N + 2), hankel(s, N)
        idx = MonoIndex(N)
        for col, (i, j) in enumerate(idx.monomials):
            prod = s * TrigPoly({(i, j): 1})
            got = {}
            for r, v in zip(T.rows, T.matrix[:, col]):
                if v != 0:
                    got[r] = v
            for r, v in zip(H.rows, H.matrix[:, col]):
                if v != 0:
                    got[r] = v
            assert TrigPoly(got) == prod


class TestComposition:
    def test_identity(self):
        A = composition_matrix((z1, z2), 3)
        np.testing.assert_allclose(A.matrix, np.eye(16), atol=1e-14)

    def test_diagonal_map(self):
        A = composition_matrix((z1, z1), 2, 4)
        idx = MonoIndex(4)
        for col, (i, j) in enumerate(A.cols):
            expect = np.zeros(len(idx))
            expect[idx.position[(i + j, 0)]] = 1
            np.testing.assert_allclose(A.matrix[:, col], expect, atol=1e-14)

    def test_constant_map(self):
        A = composition_matrix((BiPoly.constant(0.3), BiPoly.constant(-0.5j)), 3)
        assert np.linalg.matrix_rank(A.matrix, tol=1e-12) == 1
        assert A.matrix.shape == (1, 16)
        np.testing.assert_allclose(A.matrix[0, :3], [1, 0.3, -0.5j])

    def test_matches_exact_compose(self, rng):
        phi = rand_poly(rng, 2).scale(0.05)
        psi = rand_poly(rng, 2).scale(0.05)
        N = 3
        A = composition_matrix((phi, psi), N)
        L = max(lossfree_cap((phi, psi), N))
        cod = MonoIndex(*lossfree_cap((phi, psi), N))
        for col, (i, j) in enumerate(A.cols):
            exact = compose(BiPoly.monomial(i, j), (phi, psi), L)
            np.testing.assert_allclose(A.matrix[:, col], cod.vector(exact), atol=1e-13)
        assert not A.meta["truncated"]

    def test_truncated_flag(self):
        assert composition_matrix((z1, z1), 3, 4).meta["truncated"]


class TestNorms:
    def test_identity(self):
        assert op_norm(np.eye(7)) == pytest.approx(1)

    def test_shift(self):
        assert op_norm(toeplitz(embed(z1), 5)) == pytest.approx(1)

    @pytest.mark.parametrize("N", [1, 2, 5, 9])
    def test_diagonal_map(self, N):
        assert op_norm(composition_matrix((z1, z1), N, 2 * N)) == pytest.approx(np.sqrt(N + 1), abs=1e-8)

    def test_power_matches_svd(self, rng):
        X = rng.normal(size=(30, 20)) + 1j * rng.normal(size=(30, 20))
        assert power_norm(X) == pytest.approx(op_norm(X, "svd"), rel=1e-8)

    def test_sequences(self):
        assert comp_norm_sequence((z1, z2), [1, 2, 3]) == pytest.approx([1, 1, 1])
        seq = comp_norm_sequence((z1.scale(0.5), z1.scale(0.5)), [20, 25, 30])
        assert abs(seq[-1] - seq[0]) < 1e-6
        with pytest.raises(ValueError):
            comp_norm_sequence((z1, z2), [3, 2])

    def test_nondecreasing(self, rng):
        phi = (z1 + z2 * z1).scale(0.5)
        psi = (z2 + BiPoly.constant(0.5)).scale(0.5)
        seq = comp_norm_sequence((phi, psi), range(1, 7))
        assert all(b >= a - 1e-12 for a, b in zip(seq, seq[1:]))

    def test_plateau(self):
        assert is_stabilized([1, 1.5, 1.6, 1.6, 1.6, 1.6])
        assert not is_stabilized([1, 2, 3, 4, 4, 5])
        assert not is_stabilized(np.sqrt(np.arange(1, 31)))


class TestHan:
    def test_analytic_pair(self):
        assert verify_han(embed(z1), embed(z1), 6) == 0

    def test_exact_pair(self):
        assert verify_han(embed(z1), embed(z1).conj(), 8) <= 1e-12

    def test_random(self, rng):
        for _ in range(5):
            assert verify_han(rand_trig(rng, 3), rand_trig(rng, 3), 8) <= 1e-12

    def test_needs_window(self):
        with pytest.raises(ValueError):
            verify_han(embed(z1 ** 3), embed(z1), 3)


class TestBound:
    def test_values(self):
        assert theorem_M_bound((z1, z2)) == 1
        assert theorem_M_bound((HALF, z2)) == pytest.approx(np.sqrt(3))
        assert theorem_M_bound((HALF, (ONE + z2).scale(0.5))) == pytest.approx(3)

    def test_boundary(self):
        with pytest.raises(OriginOnBoundary):
            theorem_M_bound((ONE, z2))
        with pytest.raises(OriginOnBoundary):
            normalized_F((z1, ONE))

    def test_F(self, rng):
        assert normalized_F((z1, z2)) == ONE
        F = normalized_F((HALF, z2))
        expect = (BiPoly.constant(0.75) - z1.scale(0.25)).scale(2 / np.sqrt(3))
        assert (F - expect).max_abs_coeff() < 1e-15
        R = RKernel(HALF, z2)
        for _ in range(5):
            z = tuple(0.8 * (rng.random(2) - 0.5) + 0.3j * rng.random(2))
            assert evaluate(F, z) == pytest.approx(kernel_eval(R, z, (0, 0)) / np.sqrt(kernel_eval(R, (0, 0), (0, 0))))

    def test_F_at_origin(self):
        phi, psi = HALF, (z2 + BiPoly.constant(0.3j)).scale(0.5)
        a, b = 0.5, 0.15
        assert evaluate(normalized_F((phi, psi)), (0, 0)) == pytest.approx(np.sqrt((1 - a * a) * (1 - b * b)))

    def test_symbol_pair(self):
        SymbolPair(HALF, z2)
        with pytest.raises(ValueError):
            SymbolPair(z1 + z2, z2)


class TestDefect:
    def test_zero_symbol(self):
        z, w = (0.3, -0.2j), (0.1, 0.4)
        assert dbr_defect_check(BiPoly(), w, z, 30) == pytest.approx(kernel_eval(Szego(), z, w))

    def test_half(self):
        z = w = (0.3, 0.2)
        assert dbr_defect_error(HALF, w, z, 40) <= 1e-6

    def test_inner_monomial(self, rng):
        phi = z1 * z2
        for _ in range(5):
            z = tuple(0.5 * np.sqrt(rng.random(2)) * np.exp(2j * np.pi * rng.random(2)))
            w = tuple(0.5 * np.sqrt(rng.random(2)) * np.exp(2j * np.pi * rng.random(2)))
            s = kernel_eval(Szego(), z, w)
            closed = s - np.conj(w[0] * w[1]) * z[0] * z[1] * s
            assert dbr_defect_check(phi, w, z, 40) == pytest.approx(closed, abs=1e-6)

    def test_error_decreases(self):
        z, w = (0.45, 0.3j), (-0.4, 0.35)
        phi = (z1 + z2).scale(0.5)
        errs = [dbr_defect_error(phi, w, z, N) for N in (5, 10, 20, 40)]
        assert all(b <= a + 1e-9 for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("phi,psi", [
    (HALF, z2),
    (HALF, (ONE + z2).scale(0.5)),
    ((ONE + z1 * z2).scale(0.5), z2.scale(0.5)),
    ((z1 + z2).scale(0.5), (z2 * z2).scale(0.4)),
])
def test_norms_below_bound_when_screen_passes(phi, psi):
    from bidisk.kernels import NO_COUNTEREXAMPLE, positivity_test
    assert positivity_test(RKernel(phi, psi), trials=40, seed=3).verdict == NO_COUNTEREXAMPLE
    bound = theorem_M_bound((phi, psi))
    for v in comp_norm_sequence((phi, psi), range(1, 9)):
        assert v <= bound + 1e-9
