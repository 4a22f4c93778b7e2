"""Command-line entry points.

``simulate`` runs a Monte Carlo experiment and writes CSVs (plus PNG figures).
``dasalign-debug`` dumps a single topology, its channels, or a beam pattern.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ..beamforming import beam_pattern
from .config import PRESETS, ConfigError, ExperimentConfig, load_config
from .experiment import run_experiment
from .report import write_csv
from .runner import build_scenes, trial_streams

log = logging.getLogger("dasalign")


def _load(path) -> ExperimentConfig:
    return load_config(path) if path else ExperimentConfig()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simulate", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="YAML config file (all keys optional)")
    p.add_argument("--preset", choices=sorted(PRESETS), help="pilot-length sweep preset")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--threads", type=int, help="worker processes")
    p.add_argument("--out", help="output directory")
    p.add_argument("--no-plots", action="store_true", help="write CSVs only")
    p.add_argument("--trace", action="store_true", help="also write the per-pair trace CSV")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _load(args.config).with_overrides(
            preset=args.preset, trials=args.trials, seed=args.seed, workers=args.threads,
            output_dir=args.out, plots=False if args.no_plots else None,
            trace=True if args.trace else None)
        result = run_experiment(config)
    except ConfigError as exc:
        print(f"simulate: error: {exc}", file=sys.stderr)
        return 2
    for row in result.summary:
        print(f"T={row['T']:5d} {row['method']:<18s} P_sys={row['p_mis_sys']:.4f} "
              f"+/-{row['p_mis_sys_ci']:.4f} mean_rate={row['rate_mean']:.3f}")
    print(f"results written to {Path(config.output_dir).resolve()}")
    return 0


def build_debug_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dasalign-debug", description="debug dumps")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--seed", type=int)
    sub = p.add_subparsers(dest="command", required=True)

    topo = sub.add_parser("topology", help="RRU and user positions of one trial")
    topo.add_argument("--trial", type=int, default=0)
    topo.add_argument("--layout", choices=["distributed", "centralized"], default="distributed")
    topo.add_argument("--out", default="topology.csv")

    ch = sub.add_parser("channels", help="per-pair blockage, path loss and LOS angle of one trial")
    ch.add_argument("--trial", type=int, default=0)
    ch.add_argument("--layout", choices=["distributed", "centralized"], default="distributed")
    ch.add_argument("--out", default="channels.csv")

    bp = sub.add_parser("beam-pattern", help="array gain of one steered beam over a fine angle grid")
    bp.add_argument("--steer-deg", type=float, default=0.0)
    bp.add_argument("--points", type=int, default=3600)
    bp.add_argument("--out", default="beam_pattern.csv")
    return p


def debug_main(argv=None) -> int:
    args = build_debug_parser().parse_args(argv)
    try:
        config = _load(args.config).with_overrides(seed=args.seed)
        if args.command == "beam-pattern":
            grid = np.linspace(0.0, 2 * np.pi, args.points, endpoint=False)
            gain = beam_pattern(config.uca(), np.deg2rad(args.steer_deg), grid)
            write_csv(args.out, ({"theta_rad": float(t), "gain": float(g)} for t, g in zip(grid, gain)),
                      ["theta_rad", "gain"])
        else:
            methods = ("OSES-centralized",) if args.layout == "centralized" else ("TSSA",)
            scenes = build_scenes(config.with_overrides(methods=methods), trial_streams(config.seed, args.trial))
            scene = scenes[args.layout]
            if args.command == "topology":
                scene.topology.to_csv(args.out)
            else:
                scene.channels.to_csv(args.out)
    except (ConfigError, OSError) as exc:
        print(f"dasalign-debug: error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
