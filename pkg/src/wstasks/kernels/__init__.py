"""Benchmark kernels, compiled when possible.

The compiled extension (``_ckernels``) releases the GIL inside every loop so
worker threads run kernels in parallel.  Without it the numpy fallback is
used; set ``WSTASKS_KERNELS=python`` to force the fallback.
"""
import importlib
import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

NAMES = (
    "daxpy", "stream_copy", "stream_scale", "stream_add", "stream_triad", "multiply",
    "axpy", "xpby", "block_sum", "nbody_forces", "nbody_update", "matmul_rows", "ell_matvec",
)


def _load_compiled():
    try:
        return importlib.import_module(f"{__name__}._ckernels")
    except ImportError:
        return None


_compiled = _load_compiled()


def backend_module(name: str):
    """Kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built (pip install -e . to build)")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list:
    return ["cython", "python"] if _compiled is not None else ["python"]


_choice = os.environ.get("WSTASKS_KERNELS", "auto").lower()
if _choice == "python" or _compiled is None:
    if _choice == "cython":
        log.warning("WSTASKS_KERNELS=cython but the extension is missing; using numpy")
    BACKEND = "python"
else:
    BACKEND = "cython"

_impl = backend_module(BACKEND)
globals().update({n: getattr(_impl, n) for n in NAMES})

__all__ = ["BACKEND", "available_backends", "backend_module", *NAMES]
