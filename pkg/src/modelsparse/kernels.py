"""Kernel backend selection.

The compiled Cython kernels are used when importable; otherwise the numpy
fallback in ``_pykernels`` is used. Setting ``MODELSPARSE_PURE_PYTHON=1``
forces the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("MODELSPARSE_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        _impl = _ckernels
        BACKEND = "cython"


def available_backends():
    """Names of the kernel backends importable in this environment."""
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        return names
    return ["cython"] + names


def get_backend(name):
    """Return the kernel module for ``name`` ('cython' or 'python')."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def jacobi_eigenvalues(a, tol=1e-12, max_sweeps=100):
    return _impl.jacobi_eigenvalues(a, tol, max_sweeps)


def topk_stable(values, k):
    return _impl.topk_stable(values, k)


def segment_sq_norms(values, indptr, indices):
    return _impl.segment_sq_norms(values, indptr, indices)
