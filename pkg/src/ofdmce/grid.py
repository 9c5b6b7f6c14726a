"""Downlink resource-grid geometry: bandwidth tables, pilot placement, bin mapping.

The grid is one slot of ``symbols_per_slot`` OFDM symbols by ``occupied_subcarriers``
subcarriers per antenna port.  Reference-signal (pilot) cells sit on two OFDM
symbols per slot with a fixed frequency stride; cells used as pilots by one
port are nulled on every other port so pilot observations stay interference
free.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import IO

import numpy as np

from .errors import ConfigurationError, MappingError

SYMBOLS_PER_SLOT = 7
SLOTS_PER_FRAME = 20
SLOTS_PER_SUBFRAME = 2

# bandwidth (MHz) -> (fft_size, occupied_subcarriers, prb_count, sampling_rate_hz)
# The 2.5 MHz column carries 15 PRBs so that occupied = 12 * prb holds for
# every row.
_BANDWIDTH_TABLE = {
    1.25: (128, 72, 6, 1.92e6),
    2.5: (256, 180, 15, 3.84e6),
    5.0: (512, 300, 25, 7.68e6),
    10.0: (1024, 600, 50, 15.36e6),
    15.0: (1536, 900, 75, 23.04e6),
    20.0: (2048, 1200, 100, 30.72e6),
}

# Seed tag for the deterministic reference-signal sequences.
_PILOT_SEED = 0x5253


class CellKind(IntEnum):
    DATA = 0
    PILOT = 1
    NULL = 2


@dataclass(frozen=True)
class GridConfig:
    """Static geometry for one downlink bandwidth configuration."""

    bandwidth_mhz: float
    fft_size: int
    occupied_subcarriers: int
    prb_count: int
    sampling_rate: float
    guard_len: int
    symbols_per_slot: int = SYMBOLS_PER_SLOT
    slots_per_frame: int = SLOTS_PER_FRAME

    def __post_init__(self):
        if self.occupied_subcarriers != 12 * self.prb_count:
            raise ConfigurationError(
                f"occupied_subcarriers={self.occupied_subcarriers} != 12 * {self.prb_count}"
            )
        if not 0 <= self.guard_len < self.fft_size:
            raise ConfigurationError(
                f"guard_len={self.guard_len} must lie in [0, fft_size={self.fft_size})"
            )
        if self.occupied_subcarriers + 1 > self.fft_size:
            raise ConfigurationError("occupied subcarriers plus DC do not fit the FFT")


def lookup_grid_config(bandwidth_mhz: float, guard_len: int | None = None) -> GridConfig:
    """Return the grid configuration for one of the six supported bandwidths.

    ``guard_len`` defaults to ``fft_size // 32`` (16 samples at 5 MHz) and may
    be overridden, e.g. to run with a longer guard interval.
    """
    key = float(bandwidth_mhz)
    if key not in _BANDWIDTH_TABLE:
        valid = ", ".join(str(b) for b in sorted(_BANDWIDTH_TABLE))
        raise ConfigurationError(f"unknown bandwidth {bandwidth_mhz} MHz (valid: {valid})")
    fft_size, n_occ, prb, fs = _BANDWIDTH_TABLE[key]
    if guard_len is None:
        guard_len = fft_size // 32
    return GridConfig(
        bandwidth_mhz=key,
        fft_size=fft_size,
        occupied_subcarriers=n_occ,
        prb_count=prb,
        sampling_rate=fs,
        guard_len=guard_len,
    )


@dataclass(frozen=True)
class PilotPattern:
    """Pilot placement within a slot.

    ``offsets[port][i]`` is the frequency offset of the pilot comb on
    ``pilot_symbols[i]`` for the given antenna port.  The default staggers
    ports 0 and 1 by half the frequency spacing so their pilots never collide.
    """

    pilot_symbols: tuple[int, ...] = (0, 4)
    freq_spacing: int = 6
    offsets: tuple[tuple[int, ...], ...] = ((0, 3), (3, 0))

    def __post_init__(self):
        for per_port in self.offsets:
            if len(per_port) != len(self.pilot_symbols):
                raise ConfigurationError("one offset required per pilot symbol")
            for off in per_port:
                if not 0 <= off < self.freq_spacing:
                    raise ConfigurationError(f"offset {off} outside [0, {self.freq_spacing})")
        # Pilot orthogonality requires distinct offsets per pilot symbol.
        for i in range(len(self.pilot_symbols)):
            col = [per_port[i] for per_port in self.offsets]
            if len(set(col)) != len(col):
                raise ConfigurationError("pilot offsets collide across ports")

    @property
    def n_ports(self) -> int:
        return len(self.offsets)


def default_pilot_pattern(n_ports: int = 2) -> PilotPattern:
    """Pilot pattern for ``n_ports`` transmit ports (1 or 2 supported)."""
    if n_ports == 1:
        return PilotPattern(offsets=((0, 3),))
    if n_ports == 2:
        return PilotPattern(offsets=((0, 3), (3, 0)))
    raise ConfigurationError(f"pilot pattern defined for at most 2 ports, got {n_ports}")


@lru_cache(maxsize=64)
def _pilot_positions(port: int, pattern: PilotPattern, cfg: GridConfig) -> tuple[tuple[int, int], ...]:
    if not 0 <= port < pattern.n_ports:
        raise ConfigurationError(f"port {port} outside [0, {pattern.n_ports})")
    positions = []
    for sym, off in zip(pattern.pilot_symbols, pattern.offsets[port]):
        for k in range(off, cfg.occupied_subcarriers, pattern.freq_spacing):
            positions.append((sym, k))
    return tuple(sorted(positions))


def pilot_positions(
    slot_index: int, port: int, pattern: PilotPattern, cfg: GridConfig
) -> list[tuple[int, int]]:
    """List of (symbol, subcarrier) pilot cells for ``port``, sorted.

    The pattern repeats identically in every slot, so ``slot_index`` does not
    change the result; it is part of the signature because pilot *values* are
    slot dependent.
    """
    del slot_index  # pattern is slot-invariant by design
    return list(_pilot_positions(port, pattern, cfg))


def pilot_values(port: int, slot_index: int, count: int) -> np.ndarray:
    """Deterministic unit-modulus QPSK reference-signal values.

    The sequence depends only on (port, slot) so the receiver can regenerate
    it; it is independent of the experiment seed.
    """
    rng = np.random.default_rng((_PILOT_SEED, port, slot_index))
    quadrant = rng.integers(0, 4, size=count)
    return np.exp(1j * (np.pi / 4 + np.pi / 2 * quadrant))


@dataclass
class ResourceGrid:
    """One slot of complex cells for a single antenna port.

    ``cells`` has shape (occupied_subcarriers, symbols_per_slot); ``kind``
    tags each cell as DATA, PILOT or NULL.  Treated as immutable once built.
    """

    antenna_port: int
    cells: np.ndarray
    kind: np.ndarray

    @property
    def data_count(self) -> int:
        return int(np.count_nonzero(self.kind == CellKind.DATA))

    @property
    def pilot_count(self) -> int:
        return int(np.count_nonzero(self.kind == CellKind.PILOT))

    @property
    def null_count(self) -> int:
        return int(np.count_nonzero(self.kind == CellKind.NULL))


@lru_cache(maxsize=64)
def _cell_kinds(port: int, pattern: PilotPattern, cfg: GridConfig) -> np.ndarray:
    kind = np.full((cfg.occupied_subcarriers, cfg.symbols_per_slot), CellKind.DATA, dtype=np.int8)
    for other in range(pattern.n_ports):
        tag = CellKind.PILOT if other == port else CellKind.NULL
        for sym, k in _pilot_positions(other, pattern, cfg):
            kind[k, sym] = tag
    kind.setflags(write=False)
    return kind


def cell_kinds(port: int, pattern: PilotPattern, cfg: GridConfig) -> np.ndarray:
    """Kind matrix for one port: own pilots PILOT, other ports' pilots NULL."""
    return _cell_kinds(port, pattern, cfg).copy()


def map_grid(
    data_syms: np.ndarray,
    pilot_syms: np.ndarray,
    port: int,
    pattern: PilotPattern,
    cfg: GridConfig,
) -> ResourceGrid:
    """Fill one slot grid from a data stream and a pilot stream.

    Pilot cells are filled in ``pilot_positions`` order and must be supplied
    exactly; data cells are filled in subcarrier-major (C) order from the
    front of ``data_syms``.  Cells that other ports use for pilots are set to
    exact zero.

    Returns the filled grid; ``grid.data_count`` / ``grid.pilot_count`` report
    how many symbols were consumed from each stream.
    """
    kind = cell_kinds(port, pattern, cfg)
    positions = _pilot_positions(port, pattern, cfg)
    if len(pilot_syms) != len(positions):
        raise MappingError(
            f"pilot stream length {len(pilot_syms)} != pilot cell count {len(positions)}"
        )
    n_data = int(np.count_nonzero(kind == CellKind.DATA))
    if len(data_syms) < n_data:
        raise MappingError(f"data stream underflow: need {n_data}, got {len(data_syms)}")

    cells = np.zeros(kind.shape, dtype=np.complex128)
    pos = np.asarray(positions, dtype=np.intp)
    cells[pos[:, 1], pos[:, 0]] = np.asarray(pilot_syms)
    cells[kind == CellKind.DATA] = np.asarray(data_syms)[:n_data]
    return ResourceGrid(antenna_port=port, cells=cells, kind=kind)


def demap_grid(
    grid: ResourceGrid, pattern: PilotPattern, cfg: GridConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`map_grid`: returns (data_syms, pilot_syms)."""
    data = grid.cells[grid.kind == CellKind.DATA]
    positions = pilot_positions(0, grid.antenna_port, pattern, cfg)
    pilots = np.array([grid.cells[k, sym] for sym, k in positions], dtype=np.complex128)
    return data, pilots


def subcarrier_to_bin(k: int, cfg: GridConfig) -> int:
    """Map occupied-subcarrier index ``k`` to its FFT bin.

    Occupied subcarriers straddle DC symmetrically; the DC bin itself is never
    used.  The lower half maps to negative frequencies (upper FFT bins).
    """
    n_u = cfg.occupied_subcarriers
    if not 0 <= k < n_u:
        raise ValueError(f"subcarrier index {k} outside [0, {n_u})")
    if k < n_u // 2:
        return cfg.fft_size - n_u // 2 + k
    return k - n_u // 2 + 1


def occupied_bins(cfg: GridConfig) -> np.ndarray:
    """FFT bin index for every occupied subcarrier, as an int array."""
    n_u = cfg.occupied_subcarriers
    k = np.arange(n_u)
    bins = np.where(k < n_u // 2, cfg.fft_size - n_u // 2 + k, k - n_u // 2 + 1)
    return bins.astype(np.intp)


def dump_grid_csv(grid: ResourceGrid, slot_index: int, fh: IO[str]) -> None:
    """Debug dump: one CSV row per cell (slot,symbol,subcarrier,kind,re,im)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["slot", "symbol", "subcarrier", "kind", "re", "im"])
    n_u, n_sym = grid.cells.shape
    for sym in range(n_sym):
        for k in range(n_u):
            value = grid.cells[k, sym]
            writer.writerow(
                [slot_index, sym, k, CellKind(grid.kind[k, sym]).name, repr(value.real), repr(value.imag)]
            )
