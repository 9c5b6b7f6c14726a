"""NumPy implementations of the hot detection kernels.

Selected by :mod:`ofdmce.kernels` when the compiled extension is missing or
disabled.  The 1x1 and 2x2 paths use the same closed-form expressions as the
extension so both backends agree to rounding error.
"""

from __future__ import annotations

import numpy as np


def zf_detect_cells(h: np.ndarray, y: np.ndarray, cond_limit: float = 1e8):
    """Per-cell zero-forcing detection over a batch of grid cells.

    Parameters
    ----------
    h : (n_cells, m_r, m_t) complex channel matrices
    y : (n_cells, m_r) received vectors
    cond_limit : cells whose channel 2-norm condition number exceeds this are
        flagged and their outputs zeroed

    Returns
    -------
    (x_hat, bad) : detected (n_cells, m_t) symbols and a boolean flag per cell
    """
    h = np.asarray(h, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    n_cells, m_r, m_t = h.shape
    if y.shape != (n_cells, m_r):
        raise ValueError(f"y shape {y.shape} does not match h shape {h.shape}")
    if m_r == 1 and m_t == 1:
        return _zf_1x1(h, y, cond_limit)
    if m_r == 2 and m_t == 2:
        return _zf_2x2(h, y, cond_limit)
    return _zf_general(h, y, cond_limit)


def _zf_1x1(h, y, cond_limit):
    a = h[:, 0, 0]
    bad = a == 0
    x = np.zeros((len(a), 1), dtype=np.complex128)
    ok = ~bad
    x[ok, 0] = y[ok, 0] / a[ok]
    return x, bad


def _zf_2x2(h, y, cond_limit):
    a, b = h[:, 0, 0], h[:, 0, 1]
    c, d = h[:, 1, 0], h[:, 1, 1]
    det = a * d - b * c
    # singular values of a 2x2 from its Frobenius norm and determinant
    frob2 = (np.abs(a) ** 2 + np.abs(b) ** 2 + np.abs(c) ** 2 + np.abs(d) ** 2).real
    det2 = np.abs(det) ** 2
    disc = np.sqrt(np.maximum(frob2 * frob2 - 4.0 * det2, 0.0))
    s_max2 = 0.5 * (frob2 + disc)
    s_min2 = 0.5 * (frob2 - disc)
    bad = s_min2 * (cond_limit**2) < s_max2
    x = np.zeros((len(a), 2), dtype=np.complex128)
    ok = ~bad
    inv_det = np.zeros_like(det)
    inv_det[ok] = 1.0 / det[ok]
    x[:, 0] = (d * y[:, 0] - b * y[:, 1]) * inv_det
    x[:, 1] = (a * y[:, 1] - c * y[:, 0]) * inv_det
    return x, bad


def _zf_general(h, y, cond_limit):
    n_cells, _, m_t = h.shape
    x = np.zeros((n_cells, m_t), dtype=np.complex128)
    bad = np.zeros(n_cells, dtype=bool)
    for i in range(n_cells):
        s = np.linalg.svd(h[i], compute_uv=False)
        if s[-1] == 0 or s[0] > cond_limit * s[-1]:
            bad[i] = True
            continue
        x[i], *_ = np.linalg.lstsq(h[i], y[i], rcond=None)
    return x, bad


def qpsk_hard_bits(symbols: np.ndarray) -> np.ndarray:
    """Hard QPSK demapping: bit = 1 when the component is strictly negative."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    bits = np.empty(2 * symbols.size, dtype=np.uint8)
    bits[0::2] = symbols.real < 0
    bits[1::2] = symbols.imag < 0
    return bits
