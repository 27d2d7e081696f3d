import os

import numpy as np
import pytest

from bidisk import _backend, _pure

core = pytest.importorskip("bidisk._core")


def _c(rng, *shape):
    return np.ascontiguousarray(rng.normal(size=shape) + 1j * rng.normal(size=shape))


@pytest.mark.skipif(os.environ.get("BIDISK_BACKEND", "auto") != "auto", reason="backend forced")
def test_compiled_core_selected_by_default():
    assert _backend.NAME == "cython"


@pytest.mark.parametrize("shape,n", [((1, 1), 3), ((4, 7), 20), ((9, 2), 1), ((3, 3), 0)])
def test_horner2_matches(rng, shape, n):
    c = _c(rng, *shape)
    z1, z2 = 0.9 * _c(rng, n) / 3, 0.9 * _c(rng, n) / 3
    ref = np.array([sum(c[i, j] * a ** i * b ** j for i in range(shape[0]) for j in range(shape[1]))
                    for a, b in zip(z1, z2)], dtype=complex)
    np.testing.assert_allclose(core.horner2(c, z1, z2), ref, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(_pure.horner2(c, z1, z2), ref, rtol=1e-12, atol=1e-12)


def test_factor_gram_matches(rng):
    fz, xz, fw, xw = (0.5 * _c(rng, 5), 0.5 * _c(rng, 5), 0.5 * _c(rng, 3), 0.5 * _c(rng, 3))
    np.testing.assert_allclose(core.factor_gram(fz, xz, fw, xw),
                               _pure.factor_gram(fz, xz, fw, xw), rtol=1e-14)


@pytest.mark.parametrize("caps", [(-1, -1), (3, 2), (0, 5), (10, 10)])
def test_polymul2_matches(rng, caps):
    a = _c(rng, 4, 3)
    a[1, 1] = 0
    b = _c(rng, 2, 5)
    ref = np.zeros((5, 7), dtype=complex)
    for i in range(4):
        for j in range(3):
            ref[i:i + 2, j:j + 5] += a[i, j] * b
    r1 = ref.shape[0] if caps[0] < 0 else min(ref.shape[0], caps[0] + 1)
    r2 = ref.shape[1] if caps[1] < 0 else min(ref.shape[1], caps[1] + 1)
    np.testing.assert_allclose(core.polymul2(a, b, *caps), ref[:r1, :r2], atol=1e-13)
    np.testing.assert_allclose(_pure.polymul2(a, b, *caps), ref[:r1, :r2], atol=1e-13)


def test_use_switches_everywhere():
    from bidisk.bipoly import BiPoly, evaluate

    p = BiPoly({(2, 1): 3.0, (0, 0): 1.0})
    prev = _backend.use("python")
    try:
        assert _backend.horner2 is _pure.horner2
        assert evaluate(p, (0.5, 0.5)) == pytest.approx(1.375)
    finally:
        _backend.use(prev)
    assert _backend.NAME == prev
    assert _backend.horner2 is (core.horner2 if prev == "cython" else _pure.horner2)


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.use("fortran")
