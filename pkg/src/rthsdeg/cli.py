"""Command-line entry point: ``rthsdeg <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .config import OUTPUT_DIR_ENV, ConfigError, RunConfig, load_config
from .control import UndefinedMetricError
from .degradation import fit_power_law
from .engine import EngineInstability, run_rths
from .metrics import (
    ZeroGroundMotionError, compute_metrics, transmissibility_curve, transmissibility_scalar,
)
from .motion import MotionFormatError, write_motion_csv
from .plant import PlantFault
from .reliability import (
    CensoredDataError, DegenerateDataError, SpecimenError, fragility_curve, goodness_of_fit,
    mttf, run_campaign, specimen_model, time_to_failure, weibull_mle,
)

EXIT_CODES = {
    "ok": 0,
    "internal": 1,
    "usage": 2,
    "config": 3,
    "input": 4,
    "instability": 5,
    "output": 6,
    "statistics": 7,
}

EPILOG = "exit codes: " + ", ".join(f"{v}={k}" for k, v in EXIT_CODES.items()) + (
    f".  Default output directory: ${OUTPUT_DIR_ENV}, else ./rthsdeg-out."
)


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig().validate()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, run=replace(cfg.run, seed=args.seed))
    return cfg


def _meta(cfg: RunConfig, **extra) -> dict:
    return {"config_hash": cfg.hash(), "seed": cfg.run.seed, **extra}


def _emit(summary: dict) -> None:
    print(json.dumps(summary, sort_keys=True))


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = cfg.output_dir(args.out)
    deg = cfg.degradation_model()
    if args.specimen is not None:
        deg = specimen_model(cfg.campaign_config(), args.specimen)
    sc = cfg.scenario()
    rec = run_rths(sc.structure, sc.plant.degraded(deg, args.exposure_days), sc.controller,
                   sc.motion, sc.engine)
    meta = _meta(cfg, exposure_days=args.exposure_days, specimen=args.specimen)
    rec.metadata.update(meta)
    metrics = compute_metrics(rec, sc.structure, sc.thresholds)
    io.write_record_csv(rec, out / "record.csv", meta)
    io.write_metrics_json(metrics, out / "metrics.json",
                          {**meta, "tracking_nrms_pct": rec.tracking_nrms_pct()})
    _emit({"out": str(out), "violated": list(metrics.violated), **metrics.values(),
           "tracking_nrms_pct": rec.tracking_nrms_pct()})
    return 0


def cmd_campaign(args) -> int:
    cfg = _config(args)
    out = cfg.output_dir(args.out)
    cc = cfg.campaign_config(**_campaign_overrides(args))
    s = time_to_failure(cfg.degradation_model(), cc, 0)
    io.write_ttf_csv([s], out / "ttf_nominal.csv", _meta(cfg, dT=cc.dT, T_max=cc.T_max))
    _emit({"out": str(out), "tf_days": s.tf_days, "censored": s.censored,
           "violated": list(s.violated)})
    return 0


def _campaign_overrides(args) -> dict:
    o = {}
    for key, attr in (("n_specimens", "specimens"), ("dT", "dT"), ("T_max", "T_max"),
                      ("workers", "workers"), ("scan", "scan")):
        v = getattr(args, attr, None)
        if v is not None:
            o[key] = v
    return o


def cmd_mc(args) -> int:
    cfg = _config(args)
    out = cfg.output_dir(args.out)
    cc = cfg.campaign_config(**_campaign_overrides(args))
    samples = run_campaign(cc)
    meta = _meta(cfg, n_specimens=cc.n_specimens, dT=cc.dT, T_max=cc.T_max)
    path = io.write_ttf_csv(samples, out / (args.name or "ttf.csv"), meta)
    failed = [s.tf_days for s in samples if s.tf_days is not None]
    errors = [s.error for s in samples if s.error]
    _emit({"out": str(path), "failed": len(failed),
           "censored": sum(s.censored for s in samples), "errors": errors,
           "tf_days": [s.tf_days for s in samples]})
    return EXIT_CODES["instability"] if errors else 0


def cmd_fit_deg(args) -> int:
    obs = io.read_observations_csv(args.observations)
    A0, m = fit_power_law(obs)
    payload = {"A0": A0, "m": m, "observations": [[o.T, o.frac_increase] for o in obs]}
    if args.out:
        io.write_json(Path(args.out) / "degradation_fit.json", "degradation_fit", payload)
    _emit({"A0": A0, "m": m})
    return 0


def cmd_fit_weibull(args) -> int:
    samples = io.read_ttf_csv(args.ttf)
    meta, _, _ = io.read_csv(args.ttf)
    fit = weibull_mle(samples)
    gof = goodness_of_fit(samples, fit, n_boot=args.n_boot, seed=args.boot_seed)
    fit = replace(fit, p_value=gof.p_value, ks_statistic=gof.statistic)
    out = Path(args.out) if args.out else Path(args.ttf).parent
    prov = {"config_hash": meta.get("config_hash") or None, "seed": meta.get("seed") or None,
            "n_boot": args.n_boot, "boot_seed": args.boot_seed}
    io.write_fit_json(fit, out / "weibull_fit.json", mttf(fit), prov)
    io.write_weibull_plot_csv(samples, out / "weibull_plot.csv", fit, prov)
    _emit({"shape": fit.shape, "scale": fit.scale, "mttf_days": mttf(fit),
           "p_value": gof.p_value, "ks_statistic": gof.statistic, "n": fit.n})
    return 0


def cmd_fragility(args) -> int:
    fit = io.read_fit_json(args.fit)
    doc = io.read_json(args.fit)
    T = np.arange(0.0, args.T_max + 0.5 * args.step, args.step)
    fc = fragility_curve(fit, T)
    out = Path(args.out) if args.out else Path(args.fit).parent
    path = io.write_fragility_csv(fc, out / "fragility.csv",
                                  {"config_hash": doc.get("config_hash"), "seed": doc.get("seed")})
    _emit({"out": str(path), "points": int(T.size)})
    return 0


def cmd_transmissibility(args) -> int:
    rec = io.read_record_csv(args.record)
    tc = transmissibility_curve(rec, window=args.window)
    out = Path(args.out) if args.out else Path(args.record).parent
    meta = {"config_hash": rec.metadata.get("config_hash"), "seed": rec.metadata.get("seed")}
    path = io.write_transmissibility_csv(tc, out / "transmissibility.csv", meta)
    f, r = tc.peak()
    _emit({"out": str(path), "peak_hz": f, "peak_ratio": r,
           "scalar": transmissibility_scalar(rec)})
    return 0


def cmd_gen_motion(args) -> int:
    cfg = _config(args)
    spec = cfg.motion
    if args.motion_seed is not None:
        spec = replace(spec, seed=args.motion_seed)
    if args.duration is not None:
        spec = replace(spec, duration=args.duration)
    cfg = replace(cfg, motion=spec)
    motion = cfg.ground_motion()
    out = cfg.output_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = write_motion_csv(motion, out / "motion.csv",
                            {"config_hash": cfg.hash(), "seed": cfg.run.seed,
                             "motion_seed": spec.seed})
    _emit({"out": str(path), "samples": len(motion.samples), "dt": motion.dt,
           "pga_m_s2": float(np.max(np.abs(motion.samples))) if motion.samples.size else 0.0})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rthsdeg",
        description="Virtual RTHS testbed for a base-isolated building with a degrading isolator.",
        epilog=EPILOG,
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_, epilog=EPILOG)
        sp.set_defaults(fn=fn)
        return sp

    def common(sp, seed=True):
        sp.add_argument("--config", help="INI or JSON run configuration (defaults if omitted)")
        sp.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./rthsdeg-out)")
        if seed:
            sp.add_argument("--seed", type=int, help="master seed (overrides [run] seed)")

    def campaign_opts(sp):
        sp.add_argument("--dT", type=float, help="exposure grid step, days")
        sp.add_argument("--T-max", dest="T_max", type=float, help="exposure cap, days")
        sp.add_argument("--scan", choices=("exhaustive", "refine"), help="grid scan mode")

    sp = add("simulate", cmd_simulate, "one RTHS run at a given exposure")
    common(sp)
    sp.add_argument("--exposure-days", type=float, default=0.0, help="degradation exposure T")
    sp.add_argument("--specimen", type=int, help="use sampled specimen ID instead of nominal")

    sp = add("campaign", cmd_campaign, "time to failure of the nominal specimen")
    common(sp)
    campaign_opts(sp)

    sp = add("mc", cmd_mc, "Monte-Carlo time-to-failure campaign, writes ttf.csv")
    common(sp)
    campaign_opts(sp)
    sp.add_argument("--specimens", type=int, help="number of specimens N")
    sp.add_argument("--workers", type=int, help="worker processes")
    sp.add_argument("--name", help="output file name (default ttf.csv)")

    sp = add("fit-deg", cmd_fit_deg, "fit A0 and m to exposure observations")
    sp.add_argument("observations", help="CSV with T_days,frac_increase rows")
    sp.add_argument("--out", help="directory for degradation_fit.json (optional)")

    sp = add("fit-weibull", cmd_fit_weibull, "Weibull fit, KS p-value and MTTF of a TTF CSV")
    sp.add_argument("ttf", help="ttf.csv from mc, or one column of failure times")
    sp.add_argument("--n-boot", type=int, default=2000, help="bootstrap replicates")
    sp.add_argument("--boot-seed", type=int, default=0, help="bootstrap seed")
    sp.add_argument("--out", help="output directory (default: next to the input)")

    sp = add("fragility", cmd_fragility, "fragility curve CSV from a Weibull fit JSON")
    sp.add_argument("fit", help="weibull_fit.json")
    sp.add_argument("--T-max", dest="T_max", type=float, default=200.0, help="last exposure, days")
    sp.add_argument("--step", type=float, default=1.0, help="grid step, days")
    sp.add_argument("--out", help="output directory (default: next to the input)")

    sp = add("transmissibility", cmd_transmissibility, "transmissibility curve of a record CSV")
    sp.add_argument("record", help="record.csv from simulate")
    sp.add_argument("--window", type=float, default=8.0, help="Welch segment length, s")
    sp.add_argument("--out", help="output directory (default: next to the input)")

    sp = add("gen-motion", cmd_gen_motion, "write the configured ground motion as CSV")
    common(sp)
    sp.add_argument("--motion-seed", type=int, help="override the synthesis seed")
    sp.add_argument("--duration", type=float, help="override the duration, s")
    return p


def _category(exc: BaseException) -> str:
    if isinstance(exc, ConfigError):
        return "config"
    if isinstance(exc, (EngineInstability, SpecimenError, PlantFault)):
        return "instability"
    if isinstance(exc, io.OutputError):
        return "output"
    if isinstance(exc, (DegenerateDataError, CensoredDataError, UndefinedMetricError,
                        ZeroGroundMotionError)):
        return "statistics"
    if isinstance(exc, (MotionFormatError, FileNotFoundError, ValueError, KeyError)):
        return "input"
    return "internal"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help exits 0, bad flags exit 2
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except Exception as exc:  # every failure maps to a documented exit code
        cat = _category(exc)
        print(f"rthsdeg: error[{cat}]: {exc}", file=sys.stderr)
        return EXIT_CODES[cat]


if __name__ == "__main__":
    sys.exit(main())
