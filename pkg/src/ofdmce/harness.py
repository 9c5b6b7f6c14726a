"""Monte-Carlo experiment driver: seeded trials, sweeps, CSV tables, plots.

One trial is one subframe (two slots) sent end-to-end: random bits are mapped
onto per-port resource grids, OFDM modulated with the selected guard scheme,
convolved with a fresh Rayleigh channel realization, hit with AWGN, received,
and every configured estimator is run on the identical samples so estimator
comparisons are paired.  Guard-scheme comparisons are paired too: the trial
seed does not include the scheme, so CP and ZP see identical channels, bits
and underlying noise draws.

Trial seeds are derived as SeedSequence entropy (master_seed, snr_index,
trial_index), making every trial an independent, reproducible stream and the
sweep deterministic for any worker count.
"""

from __future__ import annotations

import functools
import math
import multiprocessing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .channel import NoiseConfig, add_awgn, apply_channel, draw_channel, true_cfr, uniform_pdp
from .errors import ConfigurationError
from .estimation import (
    ESTIMATORS,
    LMMSE,
    LR_LMMSE,
    LS,
    CorrelationModel,
    EstimatorConfig,
    PilotObservation,
    beta_for,
    build_correlation,
    interpolate_grid,
    lmmse_filter,
    lr_lmmse_filter,
    ls_estimate,
)
from .grid import (
    SLOTS_PER_SUBFRAME,
    CellKind,
    GridConfig,
    PilotPattern,
    cell_kinds,
    default_pilot_pattern,
    map_grid,
    occupied_bins,
    pilot_positions,
    pilot_values,
)
from .mimo import COND_LIMIT, MODULATIONS, AntennaConfig, bits_per_symbol
from .ofdm import CP, SCHEMES, ZP, GuardConfig, add_guard, ofdm_demodulate, ofdm_modulate, strip_guard

SUBFRAMES_PER_FRAME = 10

RAW = "raw"
ENERGY_NORMALIZED = "energy-normalized"
SNR_CONVENTIONS = (RAW, ENERGY_NORMALIZED)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte-Carlo experiment."""

    grid: GridConfig
    schemes: tuple[str, ...] = (CP, ZP)
    estimators: tuple[str, ...] = (LS, LMMSE, LR_LMMSE)
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    frames: int = 20
    n_taps: int = 8
    pdp: tuple[float, ...] | None = None
    antennas: AntennaConfig = AntennaConfig(2, 2)
    seed: int = 42
    snr_convention: str = RAW
    modulation: str = "qpsk"
    rank: int | None = None

    def __post_init__(self):
        if self.frames < 1:
            raise ConfigurationError(f"frames must be >= 1, got {self.frames}")
        if not self.schemes or any(s not in SCHEMES for s in self.schemes):
            raise ConfigurationError(f"schemes must be a nonempty subset of {SCHEMES}")
        if not self.estimators or any(e not in ESTIMATORS for e in self.estimators):
            raise ConfigurationError(f"estimators must be a nonempty subset of {ESTIMATORS}")
        if len(self.snr_db) == 0:
            raise ConfigurationError("at least one SNR point required")
        if any(not math.isfinite(s) for s in self.snr_db):
            raise ConfigurationError("sweep SNR points must be finite")
        if any(b >= a for a, b in zip(self.snr_db[1:], self.snr_db)):
            raise ConfigurationError(f"SNR points must be strictly increasing: {self.snr_db}")
        if self.n_taps < 1:
            raise ConfigurationError(f"tap count must be >= 1, got {self.n_taps}")
        if self.n_taps > self.grid.guard_len + 1:
            raise ConfigurationError(
                f"channel with {self.n_taps} taps exceeds guard capacity "
                f"{self.grid.guard_len} + 1: inter-symbol interference would not be absorbed"
            )
        if self.pdp is not None and len(self.pdp) != self.n_taps:
            raise ConfigurationError("pdp length must equal tap count")
        if self.snr_convention not in SNR_CONVENTIONS:
            raise ConfigurationError(
                f"unknown SNR convention {self.snr_convention!r} (valid: {SNR_CONVENTIONS})"
            )
        bits_per_symbol(self.modulation)  # raises on unknown modulation
        n_pilots = self.grid.occupied_subcarriers // default_pilot_pattern(self.antennas.m_t).freq_spacing
        rank = self.effective_rank
        if not 1 <= rank <= n_pilots:
            raise ConfigurationError(f"rank {rank} outside [1, {n_pilots}]")

    @property
    def effective_rank(self) -> int:
        return self.rank if self.rank is not None else self.n_taps

    @property
    def trials_per_point(self) -> int:
        return self.frames * SUBFRAMES_PER_FRAME


@dataclass(frozen=True)
class SweepRecord:
    scheme: str
    estimator: str
    snr_db: float
    mse_pilot: float
    mse_grid: float
    ber: float
    trials: int
    bit_count: int


@dataclass
class SweepResult:
    records: list[SweepRecord]
    # optional per-trial metric arrays keyed (scheme, estimator, snr_db);
    # populated by sweep(..., keep_trials=True), never serialized to CSV
    trial_data: dict | None = None

    def sorted_records(self) -> list[SweepRecord]:
        return sorted(self.records, key=lambda r: (r.scheme, r.estimator, r.snr_db))

    def record(self, scheme: str, estimator: str, snr_db: float) -> SweepRecord:
        for r in self.records:
            if r.scheme == scheme and r.estimator == estimator and r.snr_db == snr_db:
                return r
        raise KeyError((scheme, estimator, snr_db))


def derive_trial_seed(seed: int, snr_index: int, trial_index: int) -> tuple[int, int, int]:
    """Entropy tuple for one trial's random stream.

    The guard scheme is deliberately absent so CP and ZP runs of the same
    trial reuse identical channel, bits and noise draws (paired comparison).
    """
    return (seed, snr_index, trial_index)


def noise_variance_for(cfg: ExperimentConfig, scheme: str, snr_db: float) -> float:
    """Per-sample noise variance realizing ``snr_db`` under the configured convention.

    ``raw`` sets the post-DFT per-bin SNR of the CP system to the nominal
    value, ZP inheriting the same transmit power (and hence its fold's noise
    enhancement).  ``energy-normalized`` additionally charges CP for the
    guard energy, lowering its effective SNR by fft/(fft+guard).
    """
    if math.isinf(snr_db):
        return 0.0
    sigma2 = 10.0 ** (-snr_db / 10.0)
    if cfg.snr_convention == ENERGY_NORMALIZED and scheme == CP:
        n, lg = cfg.grid.fft_size, cfg.grid.guard_len
        sigma2 *= (n + lg) / n
    return sigma2


def effective_snr(grid: GridConfig, scheme: str, sigma2: float) -> float:
    """Post-processing per-bin linear SNR seen by the estimators."""
    if sigma2 == 0.0:
        return math.inf
    if scheme == ZP:
        sigma2 = sigma2 * (grid.fft_size + grid.guard_len) / grid.fft_size
    return 1.0 / sigma2


class _PilotBlock:
    """Pilot geometry of one (port, pilot symbol) within a subframe."""

    __slots__ = ("gsym", "ks", "bins_key", "x_values", "positions")

    def __init__(self, gsym, ks, bins_key, x_values, positions):
        self.gsym = gsym
        self.ks = ks
        self.bins_key = bins_key
        self.x_values = x_values
        self.positions = positions


class _TrialLayout:
    """Cached subframe geometry shared by every trial of a configuration."""

    __slots__ = (
        "occ_bins",
        "n_symbols",
        "n_data_slot",
        "n_data_cells",
        "n_pilot_slot",
        "cell_sym",
        "cell_k",
        "pilot_blocks",
        "positions",
    )

    def __init__(self, grid: GridConfig, pattern: PilotPattern, m_t: int):
        self.occ_bins = occupied_bins(grid)
        sps = grid.symbols_per_slot
        self.n_symbols = SLOTS_PER_SUBFRAME * sps

        data_mask = cell_kinds(0, pattern, grid) == CellKind.DATA
        k_idx, s_idx = np.nonzero(data_mask)
        self.n_data_slot = len(k_idx)
        self.n_data_cells = SLOTS_PER_SUBFRAME * self.n_data_slot
        self.cell_sym = np.concatenate(
            [slot * sps + s_idx for slot in range(SLOTS_PER_SUBFRAME)]
        )
        self.cell_k = np.concatenate([k_idx] * SLOTS_PER_SUBFRAME)

        self.n_pilot_slot = []
        self.pilot_blocks = []
        self.positions = []
        for port in range(m_t):
            slot_positions = pilot_positions(0, port, pattern, grid)
            self.n_pilot_slot.append(len(slot_positions))
            blocks = []
            all_positions = []
            for slot in range(SLOTS_PER_SUBFRAME):
                values = pilot_values(port, slot, len(slot_positions))
                start = 0
                for sym, off in zip(pattern.pilot_symbols, pattern.offsets[port]):
                    ks = np.arange(off, grid.occupied_subcarriers, pattern.freq_spacing)
                    gsym = slot * sps + sym
                    block_positions = tuple((gsym, int(k)) for k in ks)
                    blocks.append(
                        _PilotBlock(
                            gsym=gsym,
                            ks=ks,
                            bins_key=tuple(int(b) for b in self.occ_bins[ks]),
                            x_values=values[start : start + len(ks)],
                            positions=block_positions,
                        )
                    )
                    all_positions.extend(block_positions)
                    start += len(ks)
            self.pilot_blocks.append(blocks)
            self.positions.append(tuple(all_positions))


@functools.lru_cache(maxsize=8)
def _trial_layout(grid: GridConfig, m_t: int) -> _TrialLayout:
    return _TrialLayout(grid, default_pilot_pattern(m_t), m_t)


# Filter matrices depend only on geometry and (beta, snr, rank); they are
# reused across trials of a sweep point.
_MODEL_CACHE: dict = {}
_FILTER_CACHE: dict = {}


def _correlation_model(bins_key: tuple, n_taps: int, fft_size: int) -> CorrelationModel:
    key = (bins_key, n_taps, fft_size)
    model = _MODEL_CACHE.get(key)
    if model is None:
        model = build_correlation(np.array(bins_key), n_taps, fft_size)
        _MODEL_CACHE[key] = model
    return model


def _estimator_filter(
    kind: str, bins_key: tuple, n_taps: int, fft_size: int, beta: float, snr: float, rank: int
) -> np.ndarray:
    key = (kind, bins_key, n_taps, fft_size, beta, snr, rank)
    w = _FILTER_CACHE.get(key)
    if w is None:
        model = _correlation_model(bins_key, n_taps, fft_size)
        est = EstimatorConfig(kind=kind, beta=beta, snr=snr, rank=rank)
        w = lmmse_filter(model, est) if kind == LMMSE else lr_lmmse_filter(model, est)
        _FILTER_CACHE[key] = w
    return w


def run_trial(
    cfg: ExperimentConfig, scheme: str, snr_db: float, trial_seed
) -> dict[str, dict]:
    """Run one subframe end-to-end and return per-estimator metrics.

    Returns ``{estimator: {"mse_pilot", "mse_grid", "ber", "errors", "bits"}}``.
    Deterministic given (cfg, scheme, snr_db, trial_seed); all estimators see
    the identical received samples.
    """
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown guard scheme {scheme!r}")
    grid = cfg.grid
    ant = cfg.antennas
    pattern = default_pilot_pattern(ant.m_t)
    layout = _trial_layout(grid, ant.m_t)
    guard = GuardConfig(scheme, grid.guard_len)
    bps, mapper, demapper = MODULATIONS[cfg.modulation]
    pdp = np.asarray(cfg.pdp, dtype=float) if cfg.pdp is not None else uniform_pdp(cfg.n_taps)

    rng = np.random.default_rng(trial_seed)
    ch = draw_channel(cfg.n_taps, pdp, ant.m_t, ant.m_r, rng)
    bits = rng.integers(0, 2, size=(ant.m_t, layout.n_data_cells * bps), dtype=np.uint8)
    sigma2 = noise_variance_for(cfg, scheme, snr_db)

    # transmit: grids -> FFT bins -> time -> guard -> stream
    n_fft = grid.fft_size
    sps = grid.symbols_per_slot
    x_bins = np.zeros((ant.m_t, layout.n_symbols, n_fft), dtype=np.complex128)
    for port in range(ant.m_t):
        syms = mapper(bits[port])
        for slot in range(SLOTS_PER_SUBFRAME):
            data = syms[slot * layout.n_data_slot : (slot + 1) * layout.n_data_slot]
            pilots = pilot_values(port, slot, layout.n_pilot_slot[port])
            g = map_grid(data, pilots, port, pattern, grid)
            x_bins[port, slot * sps : (slot + 1) * sps][:, layout.occ_bins] = g.cells.T
    tx = add_guard(ofdm_modulate(x_bins), guard).reshape(ant.m_t, -1)

    rx = apply_channel(tx, ch)
    rx = add_awgn(rx, NoiseConfig(sigma2), rng)

    # receive: window -> strip/fold -> DFT -> occupied cells
    rx_sym = rx.reshape(ant.m_r, layout.n_symbols, n_fft + guard.length)
    y_occ = ofdm_demodulate(strip_guard(rx_sym, guard))[..., layout.occ_bins]

    h_true = true_cfr(ch, grid)[..., layout.occ_bins]
    snr_eff = effective_snr(grid, scheme, sigma2)
    beta = beta_for(cfg.modulation)
    rank = cfg.effective_rank

    # LS at the pilots, shared by every estimator
    ls_blocks = {}
    truth_blocks = {}
    for port in range(ant.m_t):
        for j, blk in enumerate(layout.pilot_blocks[port]):
            rows = []
            for r in range(ant.m_r):
                obs = PilotObservation(
                    y_pilots=y_occ[r, blk.gsym, blk.ks],
                    x_pilots=blk.x_values,
                    positions=blk.positions,
                )
                rows.append(ls_estimate(obs))
            ls_blocks[port, j] = np.stack(rows)
            truth_blocks[port, j] = h_true[:, port][:, blk.ks]

    results = {}
    n_cells = layout.n_data_cells
    bit_count = ant.m_t * n_cells * bps
    for kind in cfg.estimators:
        sq_sum = 0.0
        n_obs = 0
        est_grid = np.empty((ant.m_r, ant.m_t, layout.n_symbols, grid.occupied_subcarriers),
                            dtype=np.complex128)
        blocks_hat = {}
        for port in range(ant.m_t):
            for j, blk in enumerate(layout.pilot_blocks[port]):
                h_ls = ls_blocks[port, j]
                if kind == LS:
                    h_hat = h_ls
                else:
                    w = _estimator_filter(
                        kind, blk.bins_key, cfg.n_taps, n_fft, beta, snr_eff, rank
                    )
                    h_hat = h_ls @ w.T
                blocks_hat[port, j] = h_hat
                diff = h_hat - truth_blocks[port, j]
                sq_sum += float(np.sum(diff.real**2 + diff.imag**2))
                n_obs += diff.size
            h_cat = np.concatenate(
                [blocks_hat[port, j] for j in range(len(layout.pilot_blocks[port]))], axis=1
            )
            for r in range(ant.m_r):
                est_grid[r, port] = interpolate_grid(
                    h_cat[r], layout.positions[port], grid, layout.n_symbols
                )
        mse_grid = float(np.mean(np.abs(est_grid - h_true[:, :, None, :]) ** 2))

        h_cells = np.ascontiguousarray(
            est_grid[:, :, layout.cell_sym, layout.cell_k].transpose(2, 0, 1)
        )
        y_cells = np.ascontiguousarray(y_occ[:, layout.cell_sym, layout.cell_k].T)
        x_hat, bad = kernels.zf_detect_cells(h_cells, y_cells, COND_LIMIT)

        errors = 0
        for port in range(ant.m_t):
            wrong = demapper(x_hat[:, port]) != bits[port]
            wrong = wrong.reshape(n_cells, bps)
            if bad.any():
                # erased cells count as errors on every bit they carry
                wrong[bad] = True
            errors += int(np.count_nonzero(wrong))

        results[kind] = {
            "mse_pilot": sq_sum / n_obs,
            "mse_grid": mse_grid,
            "errors": errors,
            "bits": bit_count,
            "ber": errors / bit_count,
        }
    return results


def _trial_job(cfg: ExperimentConfig, job: tuple) -> dict[str, dict]:
    scheme, snr_db, seed = job
    return run_trial(cfg, scheme, snr_db, seed)


def sweep(cfg: ExperimentConfig, workers: int = 1, keep_trials: bool = False) -> SweepResult:
    """Run the full (scheme x SNR x trial) grid and aggregate per-estimator metrics.

    MSE records are arithmetic means over trials (accumulated in trial order,
    so results are identical for any worker count); BER records are total
    errors over total bits.
    """
    n_trials = cfg.trials_per_point
    records = []
    trial_data: dict | None = {} if keep_trials else None
    pool = multiprocessing.Pool(processes=workers) if workers > 1 else None
    try:
        for scheme in cfg.schemes:
            for i_snr, snr_db in enumerate(cfg.snr_db):
                jobs = [
                    (scheme, snr_db, derive_trial_seed(cfg.seed, i_snr, t))
                    for t in range(n_trials)
                ]
                runner = functools.partial(_trial_job, cfg)
                if pool is not None:
                    outs = pool.map(runner, jobs, chunksize=max(1, n_trials // (4 * workers)))
                else:
                    outs = [runner(job) for job in jobs]
                for kind in cfg.estimators:
                    mse_pilot = sum(o[kind]["mse_pilot"] for o in outs) / n_trials
                    mse_grid = sum(o[kind]["mse_grid"] for o in outs) / n_trials
                    errors = sum(o[kind]["errors"] for o in outs)
                    bit_count = sum(o[kind]["bits"] for o in outs)
                    records.append(
                        SweepRecord(
                            scheme=scheme,
                            estimator=kind,
                            snr_db=float(snr_db),
                            mse_pilot=mse_pilot,
                            mse_grid=mse_grid,
                            ber=errors / bit_count,
                            trials=n_trials,
                            bit_count=bit_count,
                        )
                    )
                    if trial_data is not None:
                        trial_data[scheme, kind, float(snr_db)] = {
                            "ber": np.array([o[kind]["ber"] for o in outs]),
                            "mse_pilot": np.array([o[kind]["mse_pilot"] for o in outs]),
                        }
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return SweepResult(records=records, trial_data=trial_data)


CSV_HEADER = "scheme,estimator,snr_db,mse_pilot,mse_grid,ber,trials,bit_count"


def write_csv(result: SweepResult, path) -> None:
    """Write records sorted by (scheme, estimator, snr_db), 17 significant digits."""
    lines = [CSV_HEADER]
    for r in result.sorted_records():
        lines.append(
            f"{r.scheme},{r.estimator},{r.snr_db:.17e},{r.mse_pilot:.17e},"
            f"{r.mse_grid:.17e},{r.ber:.17e},{r.trials},{r.bit_count}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_csv(path) -> SweepResult:
    """Parse a file produced by :func:`write_csv`."""
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: not a sweep result file")
    records = []
    for line in lines[1:]:
        scheme, estimator, snr_db, mse_pilot, mse_grid, ber_v, trials, bit_count = line.split(",")
        records.append(
            SweepRecord(
                scheme=scheme,
                estimator=estimator,
                snr_db=float(snr_db),
                mse_pilot=float(mse_pilot),
                mse_grid=float(mse_grid),
                ber=float(ber_v),
                trials=int(trials),
                bit_count=int(bit_count),
            )
        )
    return SweepResult(records=records)


def _series(result: SweepResult):
    """Yield ((scheme, estimator), snr array, record list) per curve, sorted."""
    groups: dict[tuple[str, str], list[SweepRecord]] = {}
    for r in result.sorted_records():
        groups.setdefault((r.scheme, r.estimator), []).append(r)
    for key, recs in sorted(groups.items()):
        yield key, np.array([r.snr_db for r in recs]), recs


BER_PLOT_FLOOR = 1e-7


def build_figures(result: SweepResult):
    """Build (BER, MSE) matplotlib figures; used by :func:`emit_plots` and tests."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not result.records:
        raise ValueError("cannot plot an empty sweep result")

    fig_ber, ax_ber = plt.subplots(figsize=(7, 5))
    clamped = False
    for (scheme, estimator), snr, recs in _series(result):
        ber_vals = np.array([r.ber for r in recs])
        if np.any(ber_vals < BER_PLOT_FLOOR):
            clamped = True
        ax_ber.semilogy(
            snr, np.maximum(ber_vals, BER_PLOT_FLOOR), marker="o",
            label=f"{scheme}-{estimator}",
        )
    ax_ber.set_xlabel("SNR (dB)")
    ax_ber.set_ylabel("BER")
    title = "BER versus SNR"
    if clamped:
        title += f" (zeros clamped to {BER_PLOT_FLOOR:g})"
    ax_ber.set_title(title)
    ax_ber.grid(True, which="both", linestyle="--", linewidth=0.5)
    ax_ber.legend()
    fig_ber.tight_layout()

    fig_mse, ax_mse = plt.subplots(figsize=(7, 5))
    for (scheme, estimator), snr, recs in _series(result):
        ax_mse.semilogy(
            snr, [r.mse_pilot for r in recs], marker="s", label=f"{scheme}-{estimator}"
        )
    ax_mse.set_xlabel("SNR (dB)")
    ax_mse.set_ylabel("pilot MSE")
    ax_mse.set_title("MSE versus SNR")
    ax_mse.grid(True, which="both", linestyle="--", linewidth=0.5)
    ax_mse.legend()
    fig_mse.tight_layout()
    return fig_ber, fig_mse


def emit_plots(result: SweepResult, out_dir) -> tuple[Path, Path]:
    """Save BER and MSE comparison plots; returns the two file paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fig_ber, fig_mse = build_figures(result)
    import matplotlib.pyplot as plt
    ber_path = out / "ber_vs_snr.png"
    mse_path = out / "mse_vs_snr.png"
    fig_ber.savefig(ber_path, dpi=150)
    fig_mse.savefig(mse_path, dpi=150)
    plt.close(fig_ber)
    plt.close(fig_mse)
    return ber_path, mse_path
