# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled detection kernels (1x1 and 2x2 fast paths).

Same closed-form arithmetic as ofdmce._pykernels; the dispatcher routes
unsupported shapes to the NumPy fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def zf_detect_cells(cnp.complex128_t[:, :, ::1] h, cnp.complex128_t[:, ::1] y,
                    double cond_limit=1e8):
    """Per-cell zero-forcing detection; see ofdmce._pykernels.zf_detect_cells."""
    cdef Py_ssize_t n_cells = h.shape[0]
    cdef Py_ssize_t m_r = h.shape[1]
    cdef Py_ssize_t m_t = h.shape[2]
    if y.shape[0] != n_cells or y.shape[1] != m_r:
        raise ValueError("y shape does not match h shape")
    if not ((m_r == 1 and m_t == 1) or (m_r == 2 and m_t == 2)):
        raise ValueError("compiled kernel supports 1x1 and 2x2 cells only")

    x_arr = np.zeros((n_cells, m_t), dtype=np.complex128)
    bad_arr = np.zeros(n_cells, dtype=np.uint8)
    cdef cnp.complex128_t[:, ::1] x = x_arr
    cdef cnp.uint8_t[::1] bad = bad_arr

    cdef Py_ssize_t i
    cdef double complex a, b, c, d, det, inv_det
    cdef double frob2, det2, disc, s_max2, s_min2
    cdef double lim2 = cond_limit * cond_limit

    if m_r == 1:
        for i in range(n_cells):
            a = h[i, 0, 0]
            if a == 0:
                bad[i] = 1
            else:
                x[i, 0] = y[i, 0] / a
        return x_arr, bad_arr.astype(bool)

    for i in range(n_cells):
        a = h[i, 0, 0]
        b = h[i, 0, 1]
        c = h[i, 1, 0]
        d = h[i, 1, 1]
        det = a * d - b * c
        frob2 = (a.real * a.real + a.imag * a.imag
                 + b.real * b.real + b.imag * b.imag
                 + c.real * c.real + c.imag * c.imag
                 + d.real * d.real + d.imag * d.imag)
        det2 = det.real * det.real + det.imag * det.imag
        disc = frob2 * frob2 - 4.0 * det2
        if disc < 0.0:
            disc = 0.0
        disc = sqrt(disc)
        s_max2 = 0.5 * (frob2 + disc)
        s_min2 = 0.5 * (frob2 - disc)
        if s_min2 * lim2 < s_max2:
            bad[i] = 1
            continue
        inv_det = 1.0 / det
        x[i, 0] = (d * y[i, 0] - b * y[i, 1]) * inv_det
        x[i, 1] = (a * y[i, 1] - c * y[i, 0]) * inv_det
    return x_arr, bad_arr.astype(bool)


def qpsk_hard_bits(cnp.complex128_t[::1] symbols):
    """Hard QPSK demapping; see ofdmce._pykernels.qpsk_hard_bits."""
    cdef Py_ssize_t n = symbols.shape[0]
    bits_arr = np.empty(2 * n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] bits = bits_arr
    cdef Py_ssize_t i
    for i in range(n):
        bits[2 * i] = 1 if symbols[i].real < 0.0 else 0
        bits[2 * i + 1] = 1 if symbols[i].imag < 0.0 else 0
    return bits_arr
