"""Frequency-selective Rayleigh FIR channels, AWGN, and exact frequency responses.

Channels are sample-spaced FIR filters drawn i.i.d. per (rx, tx) antenna pair
and held constant over one processing block (block fading).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO

import numpy as np

from .errors import ConfigurationError
from .grid import GridConfig


@dataclass(frozen=True)
class NoiseConfig:
    """Per-complex-sample AWGN power (variance 0 means noiseless)."""

    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ConfigurationError(f"noise variance must be >= 0, got {self.variance}")


@dataclass(frozen=True)
class ChannelRealization:
    """FIR taps per antenna pair, shape (m_r, m_t, n_taps), plus the tap power profile."""

    taps: np.ndarray
    pdp: np.ndarray

    @property
    def n_rx(self) -> int:
        return self.taps.shape[0]

    @property
    def n_tx(self) -> int:
        return self.taps.shape[1]

    @property
    def n_taps(self) -> int:
        return self.taps.shape[2]


def uniform_pdp(n_taps: int) -> np.ndarray:
    """Flat power-delay profile with unit total energy."""
    if n_taps < 1:
        raise ConfigurationError(f"tap count must be >= 1, got {n_taps}")
    return np.full(n_taps, 1.0 / n_taps)


def draw_channel(
    n_taps: int,
    pdp: np.ndarray,
    m_t: int,
    m_r: int,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw i.i.d. Rayleigh taps: tap l ~ CN(0, pdp[l]) for every antenna pair."""
    pdp = np.asarray(pdp, dtype=float)
    if n_taps < 1 or pdp.shape != (n_taps,):
        raise ConfigurationError(f"pdp must have length {n_taps}, got shape {pdp.shape}")
    if np.any(pdp < 0) or abs(pdp.sum() - 1.0) > 1e-8:
        raise ConfigurationError("pdp entries must be >= 0 and sum to 1")
    scale = np.sqrt(pdp / 2.0)
    shape = (m_r, m_t, n_taps)
    taps = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return ChannelRealization(taps=taps, pdp=pdp)


def apply_channel(tx: np.ndarray, ch: ChannelRealization) -> np.ndarray:
    """Linear convolution of per-antenna streams with the FIR channel.

    ``tx`` has shape (m_t, n); the result has shape (m_r, n) with the
    convolution tail beyond n dropped (each block's tail is absorbed by the
    next symbol's guard region).
    """
    tx = np.atleast_2d(np.asarray(tx, dtype=np.complex128))
    if tx.shape[0] != ch.n_tx:
        raise ValueError(f"expected {ch.n_tx} transmit streams, got {tx.shape[0]}")
    n = tx.shape[1]
    rx = np.zeros((ch.n_rx, n), dtype=np.complex128)
    for r in range(ch.n_rx):
        for t in range(ch.n_tx):
            rx[r] += np.convolve(tx[t], ch.taps[r, t])[:n]
    return rx


def add_awgn(x: np.ndarray, noise: NoiseConfig, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise of the configured variance."""
    x = np.asarray(x, dtype=np.complex128)
    if noise.variance == 0.0:
        return x.copy()
    sigma = np.sqrt(noise.variance / 2.0)
    w = sigma * (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape))
    return x + w


def true_cfr(ch: ChannelRealization, cfg: GridConfig) -> np.ndarray:
    """Exact channel frequency response H[r, t, k] = sum_l h_l e^{-j2pi kl/N}."""
    return np.fft.fft(ch.taps, n=cfg.fft_size, axis=-1)


def dump_taps_csv(ch: ChannelRealization, fh: IO[str]) -> None:
    """Debug dump: one CSV row per tap (rx,tx,tap,re,im)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["rx", "tx", "tap", "re", "im"])
    for r in range(ch.n_rx):
        for t in range(ch.n_tx):
            for l in range(ch.n_taps):
                h = ch.taps[r, t, l]
                writer.writerow([r, t, l, repr(h.real), repr(h.imag)])
