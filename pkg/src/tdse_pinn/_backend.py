"""Kernel backend selection.

The compiled extension is preferred; set ``TDSE_PINN_PURE_PYTHON=1`` to force
the NumPy fallback (useful for debugging and for the benchmark).
"""
import ctypes
import ctypes.util
import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

# glibc mallopt parameters
_M_TRIM_THRESHOLD = -1
_M_MMAP_THRESHOLD = -3


def _load():
    if os.environ.get("TDSE_PINN_PURE_PYTHON", "").strip() not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError as exc:  # pragma: no cover - depends on build
        log.debug("compiled kernels unavailable (%s); using NumPy fallback", exc)
        return _kernels_py, "python"
    return _kernels, "compiled"


def tune_allocator() -> bool:
    """Keep multi-megabyte temporaries on the heap instead of fresh mmaps.

    Training allocates and frees the same few jet-sized arrays every step;
    with glibc's default 128 KiB mmap threshold each one page-faults anew,
    which roughly doubles the step time. No-op off glibc or when
    ``TDSE_PINN_NO_MALLOPT`` is set.
    """
    if os.environ.get("TDSE_PINN_NO_MALLOPT"):
        return False
    name = ctypes.util.find_library("c")
    if not name:
        return False
    try:
        libc = ctypes.CDLL(name)
        ok = libc.mallopt(_M_MMAP_THRESHOLD, 32 * 1024 * 1024)
        ok &= libc.mallopt(_M_TRIM_THRESHOLD, 256 * 1024 * 1024)
    except (OSError, AttributeError):
        return False
    return bool(ok)


kernels, BACKEND = _load()
tune_allocator()
