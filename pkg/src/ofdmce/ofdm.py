"""OFDM modulation and the two guard-interval schemes (CP and ZP).

Both DFT directions are unitary (1/sqrt(N) scaling) so energies and noise
variances carry across domains unchanged.  The zero-padding receiver folds
the trailing guard samples onto the symbol head (overlap-add), which restores
the circular-convolution structure for channels no longer than guard + 1 taps
at the cost of doubling the noise on the first guard_len samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .grid import GridConfig

CP = "cp"
ZP = "zp"
SCHEMES = (CP, ZP)


@dataclass(frozen=True)
class GuardConfig:
    scheme: str
    length: int

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown guard scheme {self.scheme!r} (valid: cp, zp)")
        if self.length < 0:
            raise ConfigurationError(f"guard length must be >= 0, got {self.length}")


def ofdm_modulate(freq_bins: np.ndarray) -> np.ndarray:
    """Unitary inverse DFT along the last axis: x[n] = (1/sqrt(N)) sum X[k] e^{+j2pi kn/N}."""
    x = np.asarray(freq_bins, dtype=np.complex128)
    return np.fft.ifft(x, norm="ortho")


def ofdm_demodulate(samples: np.ndarray) -> np.ndarray:
    """Unitary forward DFT along the last axis; inverse of :func:`ofdm_modulate`."""
    x = np.asarray(samples, dtype=np.complex128)
    return np.fft.fft(x, norm="ortho")


def add_guard(x: np.ndarray, guard: GuardConfig) -> np.ndarray:
    """Prepend a cyclic prefix or append a zero pad along the last axis."""
    x = np.asarray(x)
    n = x.shape[-1]
    if guard.length >= n:
        raise ConfigurationError(f"guard length {guard.length} must be < symbol length {n}")
    if guard.scheme == CP:
        return np.concatenate([x[..., n - guard.length :], x], axis=-1)
    pad = np.zeros(x.shape[:-1] + (guard.length,), dtype=x.dtype)
    return np.concatenate([x, pad], axis=-1)


def strip_guard(y: np.ndarray, guard: GuardConfig) -> np.ndarray:
    """Undo the guard interval on received symbols of length N + guard.

    CP: drop the first ``guard.length`` samples.  ZP: overlap-add fold,
    out[i] = y[i] + y[N+i] for i < guard.length.
    """
    y = np.asarray(y)
    n = y.shape[-1] - guard.length
    if n <= 0:
        raise ValueError(f"input length {y.shape[-1]} too short for guard {guard.length}")
    if guard.scheme == CP:
        return y[..., guard.length :]
    out = y[..., :n].copy()
    out[..., : guard.length] += y[..., n:]
    return out


def efficiency_factors(cfg: GridConfig, guard: GuardConfig) -> dict[str, float]:
    """Power-efficiency and noise-enhancement ratios of the guard scheme.

    CP spends transmit power on the guard copy (power efficiency N/(N+Lg));
    ZP spends none but its fold raises the aggregate noise power by (N+Lg)/N.
    """
    n = cfg.fft_size
    lg = guard.length
    if guard.scheme == CP:
        return {"power_efficiency": n / (n + lg), "noise_enhancement": 1.0}
    return {"power_efficiency": 1.0, "noise_enhancement": (n + lg) / n}
