#!/usr/bin/env python3
"""Run experiment configs and print a success-frequency table.

    python3 scripts/run_experiments.py configs/e1.json configs/e2.json --out results
    python3 scripts/run_experiments.py --all --trials 50
"""
import argparse
from pathlib import Path

from varsamp.experiments import ExperimentConfig, run, write_outputs

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _fmt(v):
    return "-" if v is None else f"{v:.4g}"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("configs", nargs="*")
    ap.add_argument("--all", action="store_true", help="run every config in configs/")
    ap.add_argument("--trials", type=int, help="override the trial count")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    paths = sorted(CONFIG_DIR.glob("e*.json")) if args.all else [Path(p) for p in args.configs]
    if not paths:
        ap.error("no configs given")
    for path in paths:
        cfg = ExperimentConfig.from_json(path)
        if args.trials:
            cfg.trials = args.trials
        cfg.workers = args.workers
        rows, summary = run(cfg)
        write_outputs(cfg, rows, summary, args.out)
        print(f"\n{cfg.experiment} ({path.name})")
        print(f"{'scheme':>18} {'m':>6} {'freq':>7} {'wilson':>17} {'med err':>10} {'med ratio':>10} {'viol':>5}")
        for g in summary["groups"]:
            print(f"{g['scheme']:>18} {g['m']:>6} {g['frequency']:>7.3f} "
                  f"[{g['wilson_low']:.3f}, {g['wilson_high']:.3f}] {_fmt(g['median_error']):>10} "
                  f"{_fmt(g['median_ratio']):>10} {g['bound_violations']:>5}")
        for k, v in summary["extra"].items():
            print(f"  {k}: {v}")


if __name__ == "__main__":
    main()
