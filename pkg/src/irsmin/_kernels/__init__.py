"""Kernel backend selection.

The hot SGD loops exist twice: a Cython extension (``_cyloops``) and a
pure-NumPy fallback (``_pyloops``) with identical interfaces.  The compiled
backend is used when importable; set ``IRSMIN_KERNELS=numpy`` or
``IRSMIN_KERNELS=cython`` to force a choice (forcing ``cython`` raises if
the extension is missing).  ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

from irsmin._kernels import _pyloops

try:
    from irsmin._kernels import _cyloops
except ImportError:
    _cyloops = None

_ENV_VAR = "IRSMIN_KERNELS"


def available_backends() -> tuple[str, ...]:
    """Backend names, fastest first."""
    if _cyloops is not None:
        return ("cython", "numpy")
    return ("numpy",)


def backend(name: str | None = None):
    """Resolve a kernel backend module.

    ``name=None`` honors the IRSMIN_KERNELS environment variable, then picks
    the fastest available backend.
    """
    if name is None:
        name = os.environ.get(_ENV_VAR, "").strip().lower() or None
    if name is None:
        return _cyloops if _cyloops is not None else _pyloops
    if name == "numpy":
        return _pyloops
    if name == "cython":
        if _cyloops is None:
            raise RuntimeError(
                "the compiled kernel extension is not available; "
                "build it with `pip install -e .` or unset IRSMIN_KERNELS"
            )
        return _cyloops
    raise ValueError(f"unknown kernel backend {name!r} (choices: cython, numpy)")


def backend_name() -> str:
    """Name of the backend currently selected by ``backend()``."""
    return backend().NAME
