import numpy as np
import pytest
from hypothesis import strategies as st

from bidisk import _backend
from bidisk.bipoly import BiPoly, TrigPoly


def rand_poly(rng, deg, lo=-3, hi=3, gaussian=True, density=0.6):
    """Random polynomial with small Gaussian-integer coefficients (exact in float64)."""
    shape = (deg + 1, deg + 1)
    re = rng.integers(lo, hi + 1, size=shape)
    im = rng.integers(lo, hi + 1, size=shape) if gaussian else np.zeros(shape, int)
    mask = rng.random(shape) < density
    return BiPoly.from_dense(np.where(mask, re + 1j * im, 0).astype(np.complex128))


def rand_poly_total(rng, deg, lo=-5, hi=5):
    """Random polynomial of total degree at most ``deg``."""
    re = rng.integers(lo, hi + 1, size=(deg + 1, deg + 1))
    im = rng.integers(lo, hi + 1, size=(deg + 1, deg + 1))
    tri = np.add.outer(np.arange(deg + 1), np.arange(deg + 1)) <= deg
    return BiPoly.from_dense(np.where(tri, re + 1j * im, 0).astype(np.complex128))


def rand_trig(rng, deg, nterms=6):
    keys = rng.integers(-deg, deg + 1, size=(nterms, 2))
    return TrigPoly({(int(a), int(b)): complex(*rng.normal(size=2)) for a, b in keys})


def rand_one_var(rng, deg, var=1):
    c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
    if var == 1:
        return BiPoly({(k, 0): c[k] for k in range(deg + 1)})
    return BiPoly({(0, k): c[k] for k in range(deg + 1)})


gauss_int = st.builds(complex, st.integers(-4, 4), st.integers(-4, 4))


@st.composite
def polys(draw, max_deg=4, max_terms=8):
    n = draw(st.integers(0, max_terms))
    items = {}
    for _ in range(n):
        key = (draw(st.integers(0, max_deg)), draw(st.integers(0, max_deg)))
        items[key] = draw(gauss_int)
    return BiPoly(items)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=_backend.available())
def each_backend(request):
    prev = _backend.use(request.param)
    yield request.param
    _backend.use(prev)


# ---------------------------------------------------------------------------
# one summary line per acceptance criterion

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criterion")


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_c" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        name = report.nodeid.split("::")[-1]
        detail = dict(report.user_properties).get("detail", "")
        if report.failed:
            detail = (detail + " " if detail else "") + "(failed in " + report.when + ")"
        ok = _ACCEPTANCE.get(name, (True, ""))[0] and not report.failed
        _ACCEPTANCE[name] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[name]
        num = int(name[6:8])
        label = name[9:].replace("_", " ")
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {label}: {detail}")
