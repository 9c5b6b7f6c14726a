"""Pilot-based channel estimation: LS, simplified LMMSE, and low-rank LMMSE.

The LS estimate divides each received pilot by its known symbol.  The
simplified LMMSE filters the LS vector through

    W = R (R + (beta / snr) I)^{-1}

where R is the channel frequency-correlation matrix over the pilot
subcarriers and beta depends on the constellation.  The low-rank variant
keeps only the strongest p eigenmodes of R:

    W_p = U diag(d_1, ..., d_p, 0, ..., 0) U^H,   d_i = lambda_i / (lambda_i + beta/snr)

with eigenvalues sorted descending.  All filters act per pilot OFDM symbol
and per antenna pair; pilot orthogonality across ports makes each pair a
clean SISO problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, EstimationError, InterpolationError, NumericalError
from .grid import GridConfig, occupied_bins

LS = "ls"
LMMSE = "lmmse"
LR_LMMSE = "lrlmmse"
ESTIMATORS = (LS, LMMSE, LR_LMMSE)

# Relative eigenvalue threshold used when beta/snr == 0 and the filter
# degenerates to a projector onto the channel subspace.
_RANK_TOL = 1e-10


@dataclass(frozen=True)
class PilotObservation:
    """Received pilots, the known pilot symbols, and their grid positions."""

    y_pilots: np.ndarray
    x_pilots: np.ndarray
    positions: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.y_pilots) != len(self.x_pilots) or len(self.y_pilots) != len(self.positions):
            raise EstimationError("pilot observation fields must have equal length")


@dataclass(frozen=True)
class CorrelationModel:
    """Pilot-subcarrier correlation matrix with its cached eigendecomposition.

    ``eigenvalues`` are sorted descending (ties keep their original order);
    ``eigenvectors`` columns are aligned with them.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    assumed_taps: int

    @property
    def n_pilots(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EstimatorConfig:
    """Estimator selection plus the statistics it assumes."""

    kind: str
    beta: float = 1.0
    snr: float = math.inf
    rank: int | None = None

    def __post_init__(self):
        if self.kind not in ESTIMATORS:
            raise ConfigurationError(f"unknown estimator {self.kind!r} (valid: {ESTIMATORS})")
        if self.beta < 1.0:
            raise ConfigurationError(f"beta must be >= 1, got {self.beta}")
        if not self.snr > 0:
            raise ConfigurationError(f"snr must be > 0, got {self.snr}")

    @property
    def alpha(self) -> float:
        """Regularization beta/snr; zero when snr is infinite."""
        return self.beta / self.snr if math.isfinite(self.snr) else 0.0


def ls_estimate(obs: PilotObservation) -> np.ndarray:
    """Least-squares estimates at the pilot positions: Y_p / X_p."""
    x = np.asarray(obs.x_pilots, dtype=np.complex128)
    if np.any(x == 0):
        raise EstimationError("zero pilot symbol: LS estimate undefined")
    return np.asarray(obs.y_pilots, dtype=np.complex128) / x


def freq_correlation(delta_k, n_taps: int, fft_size: int):
    """Channel correlation between subcarriers ``delta_k`` bins apart.

    Assumes a uniform power-delay profile over ``n_taps`` sample-spaced taps:
    r(dk) = (1/L) sum_l e^{-j2pi dk l / N}.  Accepts scalars or arrays.
    """
    if n_taps < 1:
        raise ConfigurationError(f"tap count must be >= 1, got {n_taps}")
    delta = np.asarray(delta_k, dtype=float)
    l = np.arange(n_taps)
    r = np.exp(-2j * np.pi * delta[..., None] * l / fft_size).mean(axis=-1)
    return r if delta.ndim else complex(r)


def build_correlation(
    pilot_subcarriers: Sequence[int],
    n_taps: int,
    fft_size: int,
    cfg: GridConfig | None = None,
) -> CorrelationModel:
    """Correlation model over a set of pilot subcarriers.

    With ``cfg`` given, the indices are occupied-subcarrier indices and are
    mapped through the FFT-bin layout (so the spacing across the DC gap is
    honoured); otherwise they are used as bin indices directly.
    """
    idx = np.asarray(pilot_subcarriers, dtype=np.intp)
    if len(np.unique(idx)) != len(idx):
        raise ConfigurationError("pilot subcarrier indices must be distinct")
    if cfg is not None:
        idx = occupied_bins(cfg)[idx]
    delta = idx[:, None] - idx[None, :]
    r = freq_correlation(delta, n_taps, fft_size)
    # enforce exact Hermitian symmetry before eigh
    r = 0.5 * (r + r.conj().T)
    try:
        eigvals, eigvecs = np.linalg.eigh(r)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh on PSD rarely fails
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(-eigvals, kind="stable")
    return CorrelationModel(
        matrix=r,
        eigenvalues=eigvals[order],
        eigenvectors=eigvecs[:, order],
        assumed_taps=n_taps,
    )


def _projector_filter(model: CorrelationModel) -> np.ndarray:
    """Limit of the LMMSE filter as beta/snr -> 0: projector onto range(R)."""
    lam = model.eigenvalues
    keep = lam > _RANK_TOL * max(lam[0], 0.0)
    u = model.eigenvectors[:, keep]
    return u @ u.conj().T


def lmmse_filter(model: CorrelationModel, cfg: EstimatorConfig) -> np.ndarray:
    """Filter matrix W = R (R + alpha I)^{-1}, computed via a Hermitian solve."""
    alpha = cfg.alpha
    if alpha == 0.0:
        return _projector_filter(model)
    r = model.matrix
    a = r + alpha * np.eye(model.n_pilots)
    try:
        # W^H = (R + alpha I)^{-1} R because both factors are Hermitian
        return np.linalg.solve(a, r).conj().T
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"LMMSE system singular: {exc}") from exc


def lmmse_estimate(h_ls: np.ndarray, model: CorrelationModel, cfg: EstimatorConfig) -> np.ndarray:
    """Simplified LMMSE estimate R (R + beta/snr I)^{-1} h_ls.

    Solved as a linear system; no explicit inverse is formed.  With infinite
    snr the filter degenerates to the projector onto the channel subspace.
    """
    h_ls = np.asarray(h_ls, dtype=np.complex128)
    if h_ls.shape[0] != model.n_pilots:
        raise ValueError(f"estimate length {h_ls.shape[0]} != pilot count {model.n_pilots}")
    alpha = cfg.alpha
    if alpha == 0.0:
        return _projector_filter(model) @ h_ls
    a = model.matrix + alpha * np.eye(model.n_pilots)
    try:
        z = np.linalg.solve(a, h_ls)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"LMMSE system singular: {exc}") from exc
    return model.matrix @ z


def lr_lmmse_filter(model: CorrelationModel, cfg: EstimatorConfig) -> np.ndarray:
    """Rank-p filter U diag(d_1..d_p, 0..0) U^H."""
    p = _checked_rank(model, cfg)
    lam = model.eigenvalues[:p]
    alpha = cfg.alpha
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(lam + alpha > 0, lam / (lam + alpha), 0.0)
    u = model.eigenvectors[:, :p]
    return (u * d) @ u.conj().T


def lr_lmmse_estimate(h_ls: np.ndarray, model: CorrelationModel, cfg: EstimatorConfig) -> np.ndarray:
    """Low-rank LMMSE estimate keeping the top-p eigenmodes of R."""
    h_ls = np.asarray(h_ls, dtype=np.complex128)
    if h_ls.shape[0] != model.n_pilots:
        raise ValueError(f"estimate length {h_ls.shape[0]} != pilot count {model.n_pilots}")
    p = _checked_rank(model, cfg)
    lam = model.eigenvalues[:p]
    alpha = cfg.alpha
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(lam + alpha > 0, lam / (lam + alpha), 0.0)
    u = model.eigenvectors[:, :p]
    coeff = u.conj().T @ h_ls
    if coeff.ndim > 1:
        d = d[:, None]
    return u @ (d * coeff)


def _checked_rank(model: CorrelationModel, cfg: EstimatorConfig) -> int:
    p = cfg.rank if cfg.rank is not None else model.n_pilots
    if not 1 <= p <= model.n_pilots:
        raise ValueError(f"rank {p} outside [1, {model.n_pilots}]")
    return p


def beta_for(constellation: str) -> float:
    """Constellation scaling factor E|x|^2 E|1/x|^2 of the LMMSE filter."""
    name = constellation.lower()
    if name == "qpsk":
        return 1.0
    if name in ("qam16", "16qam"):
        return 17.0 / 9.0
    raise ConfigurationError(f"unsupported constellation {constellation!r}")


def interpolate_grid(
    h_pilot: np.ndarray,
    positions: Sequence[tuple[int, int]],
    cfg: GridConfig,
    n_symbols: int | None = None,
) -> np.ndarray:
    """Expand pilot-position estimates to every (symbol, occupied subcarrier).

    Within each pilot symbol the estimates are linearly interpolated across
    subcarriers (edge values held beyond the first/last pilot); every other
    symbol copies the nearest pilot symbol's vector, ties resolved toward the
    earlier symbol.  Returns an (n_symbols, occupied_subcarriers) array.
    """
    h_pilot = np.asarray(h_pilot, dtype=np.complex128)
    pos = np.asarray(positions, dtype=np.intp)
    if len(h_pilot) != len(pos):
        raise ValueError(f"{len(h_pilot)} estimates for {len(pos)} positions")
    if n_symbols is None:
        n_symbols = 2 * cfg.symbols_per_slot

    n_u = cfg.occupied_subcarriers
    all_k = np.arange(n_u)
    pilot_syms = np.unique(pos[:, 0])
    rows = np.empty((len(pilot_syms), n_u), dtype=np.complex128)
    for i, sym in enumerate(pilot_syms):
        sel = np.nonzero(pos[:, 0] == sym)[0]
        ks = pos[sel, 1]
        order = np.argsort(ks)
        ks, vals = ks[order], h_pilot[sel[order]]
        if len(ks) < 2:
            raise InterpolationError(f"symbol {sym}: need >= 2 pilot subcarriers, got {len(ks)}")
        rows[i] = np.interp(all_k, ks, vals.real) + 1j * np.interp(all_k, ks, vals.imag)

    # nearest pilot symbol per output symbol; argmin takes the first (earlier)
    # pilot symbol on ties because pilot_syms is sorted ascending
    dist = np.abs(np.arange(n_symbols)[:, None] - pilot_syms[None, :])
    return rows[np.argmin(dist, axis=1)]


def mse(est: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared error |est - truth|^2 averaged over all entries."""
    est = np.asarray(est)
    truth = np.asarray(truth)
    if est.shape != truth.shape:
        raise ValueError(f"shape mismatch: {est.shape} vs {truth.shape}")
    return float(np.mean(np.abs(est - truth) ** 2))
