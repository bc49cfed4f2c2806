"""Hot-loop backend selection.

The compiled extension ``bettersol._kernels`` is used when it imports;
otherwise the numpy twin ``bettersol._kernels_py`` takes over.  Both expose
``fisher_yates``, ``ks_dist``, ``ks_min``, ``nll_min`` and ``lts_batch`` with
identical signatures.
"""

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = ("cython", "python")


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: the active one)."""
    if name is None:
        return _active
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available():
    return tuple(b for b in BACKENDS if b == "python" or _compiled is not None)


def set_backend(name):
    global _active, BACKEND
    _active = get_backend(name)
    BACKEND = name


_active = _compiled if _compiled is not None else _kernels_py
BACKEND = "cython" if _compiled is not None else "python"


def fisher_yates(n, m, draws):
    return _active.fisher_yates(n, m, draws)


def ks_dist(v, fam, df, scale, theta):
    return _active.ks_dist(v, fam, df, scale, theta)


def ks_min(V, fam, df, scale, tol):
    return _active.ks_min(V, fam, df, scale, tol)


def nll_min(V, fam, df, scale, tol):
    return _active.nll_min(V, fam, df, scale, tol)


def lts_batch(X, y, S):
    return _active.lts_batch(X, y, S)
