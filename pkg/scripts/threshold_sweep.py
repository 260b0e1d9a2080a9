#!/usr/bin/env python
"""Logical failure curves for several distances and the threshold they imply.

Writes one CSV of per-point statistics plus the crossing report on stdout.
"""
from __future__ import annotations

import argparse
import csv
from dataclasses import asdict, dataclass, field

import numpy as np

from qdesk.surface import TRIAL_COLUMNS, threshold_estimate


@dataclass
class SweepConfig:
    distances: list[int] = field(default_factory=lambda: [3, 5, 7])
    eps_lo: float = 0.08
    eps_hi: float = 0.12
    points: int = 5
    trials: int = 20000
    seed: int = 2024
    workers: int = 1


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--distances", type=int, nargs="+", default=SweepConfig().distances)
    p.add_argument("--eps-lo", type=float, default=SweepConfig.eps_lo)
    p.add_argument("--eps-hi", type=float, default=SweepConfig.eps_hi)
    p.add_argument("--points", type=int, default=SweepConfig.points)
    p.add_argument("--trials", type=int, default=SweepConfig.trials)
    p.add_argument("--seed", type=int, default=SweepConfig.seed)
    p.add_argument("--workers", type=int, default=SweepConfig.workers)
    p.add_argument("--csv", default="threshold_sweep.csv")
    args = p.parse_args()
    cfg = SweepConfig(args.distances, args.eps_lo, args.eps_hi, args.points, args.trials,
                      args.seed, args.workers)

    grid = [round(float(x), 6) for x in np.linspace(cfg.eps_lo, cfg.eps_hi, cfg.points)]
    rep = threshold_estimate(cfg.distances, grid, cfg.trials, cfg.seed, workers=cfg.workers)
    with open(args.csv, "w", newline="") as fh:
        fh.write(f"# config: {asdict(cfg)}\n")
        w = csv.writer(fh)
        w.writerow(TRIAL_COLUMNS)
        w.writerows(st.csv_row() for st in rep.stats)
    for line in rep.lines():
        print(line)


if __name__ == "__main__":
    main()
