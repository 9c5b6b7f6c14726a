"""Backend dispatch for the hot detection kernels.

The compiled extension is used when it imported successfully and the cell
shape is one it supports; everything else runs on the NumPy fallback.  Set
``OFDMCE_PURE_PYTHON=1`` to force the fallback (used by tests and the
benchmark).
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on build environment
    _ckernels = None

_FORCE_PURE = os.environ.get("OFDMCE_PURE_PYTHON", "").strip() not in ("", "0")
_EXT_ACTIVE = _ckernels is not None and not _FORCE_PURE


def backend() -> str:
    """Name of the active kernel backend: 'cython' or 'python'."""
    return "cython" if _EXT_ACTIVE else "python"


def have_extension() -> bool:
    return _ckernels is not None


def zf_detect_cells(h: np.ndarray, y: np.ndarray, cond_limit: float = 1e8):
    """Batched per-cell zero-forcing detection; see ``_pykernels`` for the contract."""
    h = np.ascontiguousarray(h, dtype=np.complex128)
    y = np.ascontiguousarray(y, dtype=np.complex128)
    if _EXT_ACTIVE and h.ndim == 3 and h.shape[1:] in ((1, 1), (2, 2)):
        return _ckernels.zf_detect_cells(h, y, cond_limit)
    return _pykernels.zf_detect_cells(h, y, cond_limit)


def qpsk_hard_bits(symbols: np.ndarray) -> np.ndarray:
    """Hard QPSK demapping to a uint8 bit stream."""
    symbols = np.ascontiguousarray(symbols, dtype=np.complex128).reshape(-1)
    if _EXT_ACTIVE:
        return _ckernels.qpsk_hard_bits(symbols)
    return _pykernels.qpsk_hard_bits(symbols)
