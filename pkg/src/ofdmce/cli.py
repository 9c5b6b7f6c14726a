"""Command-line interface: ``simulate`` runs a sweep, ``plot`` re-renders a CSV.

A plain ``key = value`` config file can preset any flag; flags given on the
command line win.  Exit codes: 0 success, 2 configuration error, 3 runtime or
numerical error.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

from .errors import ConfigurationError, SimulationError
from .grid import lookup_grid_config
from .harness import (
    SNR_CONVENTIONS,
    ExperimentConfig,
    emit_plots,
    read_csv,
    sweep,
    write_csv,
)
from .mimo import AntennaConfig

DEFAULTS = {
    "bandwidth": 5.0,
    "schemes": "cp,zp",
    "estimators": "ls,lmmse,lrlmmse",
    "snr_db": "0:5:30",
    "frames": 20,
    "taps": 8,
    "rank": None,
    "seed": 42,
    "snr_convention": "raw",
    "modulation": "qpsk",
    "antennas": "2x2",
    "workers": 1,
    "out": "results",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ofdmce", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo sweep and write CSV + plots")
    sim.add_argument("--config", type=Path, help="key = value file presetting any flag")
    sim.add_argument("--bandwidth", type=float, help="bandwidth in MHz (default 5)")
    sim.add_argument("--schemes", help="comma list from {cp,zp}")
    sim.add_argument("--estimators", help="comma list from {ls,lmmse,lrlmmse}")
    sim.add_argument("--snr-db", dest="snr_db", help="start:step:stop or comma list, in dB")
    sim.add_argument("--frames", type=int, help="radio frames per SNR point (default 20)")
    sim.add_argument("--taps", type=int, help="channel tap count (default 8)")
    sim.add_argument("--rank", type=int, help="low-rank estimator order (default = taps)")
    sim.add_argument("--seed", type=int, help="master seed (default 42)")
    sim.add_argument("--snr-convention", dest="snr_convention", choices=SNR_CONVENTIONS)
    sim.add_argument("--modulation", choices=["qpsk", "qam16"])
    sim.add_argument("--antennas", help="MxN transmit x receive (default 2x2)")
    sim.add_argument("--workers", type=int, help="parallel trial workers (default 1)")
    sim.add_argument("--out", help="output directory (default results/)")

    plot = sub.add_parser("plot", help="re-render plots from a sweep CSV")
    plot.add_argument("csv", type=Path, help="result CSV produced by simulate")
    plot.add_argument("--out", help="output directory (default: CSV's directory)")
    return parser


def parse_snr_spec(spec: str) -> tuple[float, ...]:
    """Parse '0:5:30' (inclusive stop) or '0,5,10' into sorted SNR points."""
    spec = spec.strip()
    try:
        if ":" in spec:
            start_s, step_s, stop_s = spec.split(":")
            start, step, stop = float(start_s), float(step_s), float(stop_s)
            if step <= 0 or stop < start:
                raise ValueError
            count = int((stop - start) / step + 1e-9) + 1
            return tuple(start + step * i for i in range(count))
        return tuple(float(tok) for tok in spec.split(","))
    except ValueError:
        raise ConfigurationError(f"cannot parse SNR specification {spec!r}") from None


def parse_antennas(spec: str) -> AntennaConfig:
    try:
        m_t_s, m_r_s = spec.lower().split("x")
        return AntennaConfig(int(m_t_s), int(m_r_s))
    except ValueError:
        raise ConfigurationError(f"cannot parse antenna specification {spec!r}") from None


def load_config_file(path: Path) -> dict:
    """Read ``key = value`` lines; '#' starts a comment; keys mirror the flags."""
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


_INT_KEYS = {"frames", "taps", "rank", "seed", "workers"}


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and CLI flags (flags win)."""
    settings = dict(DEFAULTS)
    if args.config is not None:
        for key, raw in load_config_file(args.config).items():
            if key == "rank":
                settings[key] = None if raw.lower() in ("", "none") else int(raw)
            elif key in _INT_KEYS:
                settings[key] = int(raw)
            else:
                settings[key] = raw
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def make_experiment(settings: dict) -> ExperimentConfig:
    grid = lookup_grid_config(float(settings["bandwidth"]))
    snr = settings["snr_db"]
    snr_points = parse_snr_spec(snr) if isinstance(snr, str) else tuple(snr)
    antennas = settings["antennas"]
    if isinstance(antennas, str):
        antennas = parse_antennas(antennas)
    rank = settings["rank"]
    return ExperimentConfig(
        grid=grid,
        schemes=tuple(s.strip() for s in str(settings["schemes"]).split(",") if s.strip()),
        estimators=tuple(e.strip() for e in str(settings["estimators"]).split(",") if e.strip()),
        snr_db=snr_points,
        frames=int(settings["frames"]),
        n_taps=int(settings["taps"]),
        antennas=antennas,
        seed=int(settings["seed"]),
        snr_convention=str(settings["snr_convention"]),
        modulation=str(settings["modulation"]),
        rank=None if rank in (None, "", "none") else int(rank),
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    cfg = make_experiment(settings)
    workers = int(settings["workers"])
    if workers < 1:
        raise ConfigurationError(f"workers must be >= 1, got {workers}")
    out_dir = Path(settings["out"])
    out_dir.mkdir(parents=True, exist_ok=True)

    result = sweep(cfg, workers=workers)
    csv_path = out_dir / "results.csv"
    write_csv(result, csv_path)
    ber_path, mse_path = emit_plots(result, out_dir)

    for rec in result.sorted_records():
        print(
            f"{rec.scheme:>2s} {rec.estimator:>7s} snr={rec.snr_db:5.1f} dB  "
            f"mse_pilot={rec.mse_pilot:.4e}  mse_grid={rec.mse_grid:.4e}  ber={rec.ber:.4e}"
        )
    print(f"wrote {csv_path}, {ber_path}, {mse_path}")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    result = read_csv(args.csv)
    out_dir = Path(args.out) if args.out else args.csv.parent
    ber_path, mse_path = emit_plots(result, out_dir)
    print(f"wrote {ber_path}, {mse_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_plot(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception:  # pragma: no cover - unexpected failures still exit 3
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
