"""Select the compiled core or the numpy fallback.

The choice is made at import from ``BIDISK_BACKEND`` (``auto``, ``cython`` or
``python``) and can be switched later with :func:`use`. Library code always
calls through this module, so a switch takes effect everywhere.
"""
import os

from . import _pure

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

NAME = "python"
horner2 = _pure.horner2
factor_gram = _pure.factor_gram
polymul2 = _pure.polymul2


def available():
    return ["cython", "python"] if _core is not None else ["python"]


def use(name):
    """Bind the hot routines to backend ``name``; return the previous name."""
    global NAME, horner2, factor_gram, polymul2
    if name == "auto":
        name = "cython" if _core is not None else "python"
    if name == "cython":
        if _core is None:
            raise ImportError("bidisk._core is not built")
        mod = _core
    elif name == "python":
        mod = _pure
    else:
        raise ValueError(f"unknown backend {name!r}")
    prev = NAME
    NAME = name
    horner2 = mod.horner2
    factor_gram = mod.factor_gram
    polymul2 = mod.polymul2
    return prev


use(os.environ.get("BIDISK_BACKEND", "auto"))
