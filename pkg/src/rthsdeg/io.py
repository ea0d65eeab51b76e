"""Result files: CSV time histories and tables, versioned JSON documents.

Every file carries the configuration hash and master seed, CSV as leading
``# key=value`` comment lines and JSON as top-level fields.  Floats are
written with ``repr`` so they read back bit-identically.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .degradation import DegObservation
from .engine import CHANNELS, SimulationRecord
from .metrics import METRIC_NAMES, MetricsReport, TransmissibilityCurve
from .reliability import FragilityCurve, TTFSample, WeibullFit, median_rank_points

SCHEMA_VERSION = 1


class OutputError(OSError):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _provenance(meta: dict | None) -> dict:
    meta = dict(meta or {})
    return {"schema_version": SCHEMA_VERSION, "config_hash": meta.pop("config_hash", None),
            "seed": meta.pop("seed", None), **meta}


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], meta: dict | None = None) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            for k, v in _provenance(meta).items():
                fh.write(f"# {k}={_fmt(v)}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    """(comment metadata, header, rows of strings)."""
    path = Path(path)
    meta, header, rows = {}, None, []
    with path.open(newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k.strip()] = v
                continue
            if not line.strip():
                continue
            fields = next(csv.reader([line]))
            if header is None:
                header = fields
            else:
                rows.append(fields)
    if header is None:
        raise ValueError(f"{path}: no header row")
    return meta, header, rows


def write_json(path, kind: str, payload: dict, meta: dict | None = None) -> Path:
    path = Path(path)
    doc = {**_provenance(meta), "kind": kind, **payload}
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_json(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {doc.get('schema_version')!r}")
    return doc


# --- specific writers -------------------------------------------------------


def record_header() -> list[str]:
    return [f"{name} [{unit}]" for name, unit in CHANNELS]


def write_record_csv(rec: SimulationRecord, path, meta: dict | None = None) -> Path:
    meta = {**rec.metadata, **(meta or {})}
    cols = rec.columns()
    names = [name for name, _ in CHANNELS]
    data = np.column_stack([cols[n] for n in names]) if len(rec) else np.zeros((0, len(names)))
    return write_csv(path, record_header(), data.tolist(), meta)


def metrics_payload(m: MetricsReport) -> dict:
    return {"metrics": m.values(), "violated": list(m.violated)}


def write_metrics_json(m: MetricsReport, path, meta: dict | None = None) -> Path:
    return write_json(path, "metrics", metrics_payload(m), meta)


def read_metrics_json(path) -> MetricsReport:
    doc = read_json(path)
    return MetricsReport(**{k: float(doc["metrics"][k]) for k in METRIC_NAMES},
                         violated=tuple(doc["violated"]))


TTF_HEADER = ["specimen_id", "tf_days", "censored", "violated", "k0", "A0", "m", "error"]


def write_ttf_csv(samples: Sequence[TTFSample], path, meta: dict | None = None) -> Path:
    rows = [
        [s.specimen_id, s.tf_days, s.censored, ";".join(s.violated), s.k0, s.A0, s.m, s.error]
        for s in samples
    ]
    return write_csv(path, TTF_HEADER, rows, meta)


def read_ttf_csv(path) -> list[TTFSample]:
    """TTF samples from a campaign CSV, or from a bare one-column list of days."""
    meta, header, rows = read_csv(path)
    if header[:2] != TTF_HEADER[:2]:
        # single column of failure times, header optional
        values = ([] if _is_text(header[0]) else [header]) + rows
        return [TTFSample(i, float(r[0])) for i, r in enumerate(values)]
    out = []
    for r in rows:
        d = dict(zip(header, r))
        out.append(TTFSample(
            specimen_id=int(d["specimen_id"]),
            tf_days=float(d["tf_days"]) if d["tf_days"] else None,
            violated=tuple(v for v in d.get("violated", "").split(";") if v),
            k0=float(d.get("k0") or "nan"), A0=float(d.get("A0") or "nan"),
            m=float(d.get("m") or "nan"), error=d.get("error") or None,
        ))
    return out


def _is_text(s: str) -> bool:
    try:
        float(s)
        return False
    except ValueError:
        return True


def write_weibull_plot_csv(samples: Sequence[TTFSample], path, fit: WeibullFit | None = None,
                           meta: dict | None = None) -> Path:
    """Probability-plot points (ln T against ln(-ln(1-F))) plus the fitted line."""
    tf = np.array([s.tf_days for s in samples if s.tf_days is not None])
    lt, ly = median_rank_points(tf)
    fitted = [fit.shape * (x - math.log(fit.scale)) if fit else None for x in lt]
    rows = zip(np.exp(lt), lt, ly, fitted)
    return write_csv(path, ["tf_days", "ln_tf", "ln_neg_ln_survival", "fitted_line"], rows, meta)


def fit_payload(fit: WeibullFit, mttf_days: float | None = None) -> dict:
    d = asdict(fit)
    if mttf_days is not None:
        d["mttf_days"] = mttf_days
    return {"fit": d}


def write_fit_json(fit: WeibullFit, path, mttf_days: float | None = None,
                   meta: dict | None = None) -> Path:
    return write_json(path, "weibull_fit", fit_payload(fit, mttf_days), meta)


def read_fit_json(path) -> WeibullFit:
    d = dict(read_json(path)["fit"])
    d.pop("mttf_days", None)
    return WeibullFit(**d)


def write_fragility_csv(fc: FragilityCurve, path, meta: dict | None = None) -> Path:
    return write_csv(path, ["T_days", "probability_of_failure"], zip(fc.T, fc.probability), meta)


def write_transmissibility_csv(tc: TransmissibilityCurve, path, meta: dict | None = None) -> Path:
    meta = {**(meta or {}), **{f"smoothing_{k}": v for k, v in tc.smoothing.items()}}
    rows = zip(tc.frequency, tc.ratio, tc.ground_psd)
    return write_csv(path, ["frequency_hz", "ratio", "ground_psd_m2_s3"], rows, meta)


def read_record_csv(path) -> SimulationRecord:
    meta, header, rows = read_csv(path)
    if header != record_header():
        raise ValueError(f"{path}: not a simulation record (unexpected header)")
    data = np.array([[float(v) for v in r] for r in rows]).reshape(-1, len(header))
    c = {name: data[:, j] for j, (name, _) in enumerate(CHANNELS)}
    return SimulationRecord(
        time=c["time"], x=np.column_stack([c["x_b"], c["x_1"], c["x_2"], c["x_3"]]),
        acc_abs=np.column_stack([c["acc_b"], c["acc_1"], c["acc_2"], c["acc_3"]]),
        ground_acc=c["ground_acc"], x_m=c["x_m"], R=c["R"], R_hat=c["R_hat"], F_lc=c["F_lc"],
        command=c["command"], R_hat_fed=c["R_hat_fed"], metadata=meta,
    )


def read_observations_csv(path) -> list[DegObservation]:
    """Rows of ``T_days, frac_increase``; header and ``#`` comments optional."""
    path = Path(path)
    obs = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(parts)}")
            if not obs and all(_is_text(p) for p in parts):
                continue
            try:
                obs.append(DegObservation(float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return obs
