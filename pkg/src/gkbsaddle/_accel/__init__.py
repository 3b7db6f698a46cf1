"""Kernel backend selection.

Prefers the compiled Cython module; falls back to the pure-numpy mirror
when the extension is unavailable or ``GKBSADDLE_NO_ACCEL`` is set in the
environment.  Both backends expose identical signatures.
"""
import os

if os.environ.get("GKBSADDLE_NO_ACCEL"):
    from . import py_kernels as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import py_kernels as _impl

BACKEND = _impl.BACKEND
csr_matvec = _impl.csr_matvec
csr_matvec_t = _impl.csr_matvec_t
etree = _impl.etree
chol_counts = _impl.chol_counts
chol_factor = _impl.chol_factor
lower_solve = _impl.lower_solve
lower_t_solve = _impl.lower_t_solve


def backend():
    """Name of the active kernel backend: 'cython' or 'python'."""
    return BACKEND
