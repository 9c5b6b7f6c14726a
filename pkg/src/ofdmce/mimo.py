"""Bit mapping, spatial-multiplexing detection, and error counting.

Data streams are Gray-mapped (QPSK by default, 16-QAM optional) and detected
per subcarrier with zero forcing on the estimated channel matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError, NumericalError

COND_LIMIT = 1e8


@dataclass(frozen=True)
class AntennaConfig:
    m_t: int
    m_r: int

    def __post_init__(self):
        if self.m_t < 1 or self.m_r < 1:
            raise ConfigurationError("antenna counts must be >= 1")
        if self.m_r < self.m_t:
            raise ConfigurationError(
                f"zero-forcing needs m_r >= m_t, got {self.m_r} < {self.m_t}"
            )


def qpsk_map(bits: np.ndarray) -> np.ndarray:
    """Gray QPSK: pairs (b0, b1) -> ((1-2b0) + j(1-2b1)) / sqrt(2)."""
    bits = np.asarray(bits)
    if bits.size % 2:
        raise ValueError(f"bit count must be even, got {bits.size}")
    b = bits.reshape(-1, 2).astype(np.float64)
    return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / np.sqrt(2.0)


def qpsk_demap(symbols: np.ndarray) -> np.ndarray:
    """Hard-decision inverse of :func:`qpsk_map`; boundary values decide bit 0."""
    return kernels.qpsk_hard_bits(symbols)


def qam16_map(bits: np.ndarray) -> np.ndarray:
    """Gray 16-QAM with unit average energy, two bits per I/Q rail."""
    bits = np.asarray(bits)
    if bits.size % 4:
        raise ValueError(f"bit count must be a multiple of 4, got {bits.size}")
    b = bits.reshape(-1, 4).astype(np.float64)
    i = (1 - 2 * b[:, 0]) * (2 - (1 - 2 * b[:, 2]))
    q = (1 - 2 * b[:, 1]) * (2 - (1 - 2 * b[:, 3]))
    return (i + 1j * q) / np.sqrt(10.0)


def qam16_demap(symbols: np.ndarray) -> np.ndarray:
    """Hard-decision inverse of :func:`qam16_map`."""
    s = np.asarray(symbols, dtype=np.complex128).reshape(-1) * np.sqrt(10.0)
    bits = np.empty(4 * s.size, dtype=np.uint8)
    bits[0::4] = s.real < 0
    bits[1::4] = s.imag < 0
    bits[2::4] = np.abs(s.real) > 2
    bits[3::4] = np.abs(s.imag) > 2
    return bits


MODULATIONS = {
    "qpsk": (2, qpsk_map, qpsk_demap),
    "qam16": (4, qam16_map, qam16_demap),
}


def bits_per_symbol(modulation: str) -> int:
    try:
        return MODULATIONS[modulation.lower()][0]
    except KeyError:
        raise ConfigurationError(f"unknown modulation {modulation!r}") from None


def zf_detect(y: np.ndarray, h_hat: np.ndarray, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Zero-forcing detection for one cell: solve h_hat @ x = y in the LS sense.

    Raises :class:`NumericalError` when the channel matrix is too badly
    conditioned to invert (the Monte-Carlo harness instead flags and erases
    such cells via the batched kernel).
    """
    y = np.asarray(y, dtype=np.complex128).reshape(1, -1)
    h = np.asarray(h_hat, dtype=np.complex128)
    x, bad = kernels.zf_detect_cells(h[None, :, :], y, cond_limit)
    if bad[0]:
        raise NumericalError(f"channel matrix condition number exceeds {cond_limit:g}")
    return x[0]


def ber(tx_bits: np.ndarray, rx_bits: np.ndarray) -> float:
    """Bit error rate between two equal-length bit streams."""
    tx_bits = np.asarray(tx_bits)
    rx_bits = np.asarray(rx_bits)
    if tx_bits.shape != rx_bits.shape:
        raise ValueError(f"length mismatch: {tx_bits.shape} vs {rx_bits.shape}")
    if tx_bits.size == 0:
        raise ValueError("empty bit streams")
    return float(np.count_nonzero(tx_bits != rx_bits) / tx_bits.size)
