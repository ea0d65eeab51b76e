"""Severity of the nominal specimen along the exposure axis.

Severity is the largest metric-to-threshold ratio; failure is severity > 1.
Writes exposure_scan.csv with one row per exposure.

    python scripts/exposure_scan.py --T-max 200 --step 2
"""
import argparse
from pathlib import Path

import numpy as np

from rthsdeg import io
from rthsdeg.config import RunConfig, load_config
from rthsdeg.engine import run_rths
from rthsdeg.metrics import METRIC_NAMES, compute_metrics


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config")
    p.add_argument("--T-max", dest="T_max", type=float, default=200.0)
    p.add_argument("--step", type=float, default=5.0)
    p.add_argument("--out", default="results/scan")
    args = p.parse_args()

    cfg = load_config(args.config) if args.config else RunConfig().validate()
    sc = cfg.scenario()
    deg = cfg.degradation_model()
    limits = sc.thresholds.limits()
    rows = []
    for T in np.arange(0.0, args.T_max + 0.5 * args.step, args.step):
        rec = run_rths(sc.structure, sc.plant.degraded(deg, T), sc.controller, sc.motion, sc.engine)
        vals = compute_metrics(rec, sc.structure).values()
        ratios = [vals[n] / limits[n] for n in METRIC_NAMES]
        worst = int(np.argmax(ratios))
        rows.append([T, *ratios, max(ratios), METRIC_NAMES[worst]])
        print(f"T={T:7.2f} d  severity={max(ratios):.3f}  ({METRIC_NAMES[worst]})")
    header = ["T_days", *(f"{n}_ratio" for n in METRIC_NAMES), "severity", "governing"]
    path = io.write_csv(Path(args.out) / "exposure_scan.csv", header, rows,
                        {"config_hash": cfg.hash(), "seed": cfg.run.seed})
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
