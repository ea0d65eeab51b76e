"""Performance metrics, failure thresholds and transmissibility."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.signal

from .engine import SimulationRecord
from .structure import G, BuildingModel

METRIC_NAMES = (
    "drift_pct",
    "top_accel_g",
    "base_shear_N",
    "max_displacement_m",
    "max_base_displacement_m",
)


@dataclass(frozen=True)
class Thresholds:
    max_drift_pct: float = 0.80
    max_top_accel_g: float = 2.0
    max_base_shear_N: float = 6.5e4
    max_displacement_m: float = 0.14
    max_base_displacement_m: float = 0.35

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v > 0:
                raise ValueError(f"threshold {k} must be positive, got {v}")

    def limits(self) -> dict[str, float]:
        return dict(zip(METRIC_NAMES, asdict(self).values()))


@dataclass(frozen=True)
class MetricsReport:
    drift_pct: float
    top_accel_g: float
    base_shear_N: float
    max_displacement_m: float
    max_base_displacement_m: float
    violated: tuple[str, ...] = ()

    def values(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in METRIC_NAMES}


@dataclass(frozen=True)
class TransmissibilityCurve:
    frequency: np.ndarray
    ratio: np.ndarray
    ground_psd: np.ndarray
    smoothing: dict = field(default_factory=dict)

    def peak(
        self, fmin: float = 0.0, fmax: float = np.inf, min_psd_fraction: float = 0.01
    ) -> tuple[float, float]:
        """(frequency, ratio) of the largest ratio among excited frequencies.

        Bins where the ground PSD is below ``min_psd_fraction`` of its peak are
        skipped: there the ratio is a quotient of two near-zero estimates.
        """
        band = (self.frequency >= fmin) & (self.frequency <= fmax)
        band &= self.ground_psd >= min_psd_fraction * self.ground_psd.max()
        if not band.any():
            raise ValueError("no excited frequencies in the requested band")
        i = np.flatnonzero(band)[np.argmax(self.ratio[band])]
        return float(self.frequency[i]), float(self.ratio[i])

    def dominant_band(self, fraction: float = 0.5) -> tuple[float, float]:
        """Frequency span where the ground PSD is within ``fraction`` of its peak."""
        keep = np.flatnonzero(self.ground_psd >= fraction * self.ground_psd.max())
        return float(self.frequency[keep[0]]), float(self.frequency[keep[-1]])


def check_failure(m: MetricsReport, t: Thresholds) -> list[str]:
    """Names of the metrics strictly above their limits."""
    values = m.values()
    return [name for name, lim in t.limits().items() if values[name] > lim]


def compute_metrics(
    rec: SimulationRecord, model: BuildingModel, thresholds: Thresholds | None = None
) -> MetricsReport:
    """Peak response metrics of one run.

    Drift is measured between consecutive masses starting at the base
    (interstory only, the isolator layer excluded).  Base shear is the
    peak estimated isolator force.
    """
    if len(rec) == 0:
        raise ValueError("empty record")
    for name in ("x", "acc_abs", "R_hat", "x_m"):
        if getattr(rec, name, None) is None:
            raise ValueError(f"record is missing channel {name!r}")
    x = rec.x
    if x.shape[1] < 2:
        drift = 0.0
    else:
        drift = 100.0 * float(np.max(np.abs(np.diff(x, axis=1)))) / model.story_height
    report = MetricsReport(
        drift_pct=drift,
        top_accel_g=float(np.max(np.abs(rec.acc_abs[:, -1]))) / G,
        base_shear_N=float(np.max(np.abs(rec.R_hat))),
        max_displacement_m=float(np.max(np.abs(x))),
        max_base_displacement_m=float(np.max(np.abs(rec.x_m))),
    )
    if thresholds is None:
        return report
    return MetricsReport(**report.values(), violated=tuple(check_failure(report, thresholds)))


class ZeroGroundMotionError(ValueError):
    pass


def transmissibility_scalar(rec: SimulationRecord) -> float:
    """Peak first-floor absolute acceleration over peak ground acceleration."""
    g = float(np.max(np.abs(rec.ground_acc)))
    if g == 0:
        raise ZeroGroundMotionError("ground motion has zero peak")
    return float(np.max(np.abs(rec.acc_abs[:, 1]))) / g


def transmissibility_curve(
    rec: SimulationRecord, window: float = 8.0, overlap: float = 0.5, fmax: float | None = 25.0
) -> TransmissibilityCurve:
    """sqrt(PSD(first-floor acceleration) / PSD(ground)) on a Welch grid.

    ``window`` is the Welch segment length in seconds.
    """
    dt = float(rec.time[1] - rec.time[0])
    nperseg = int(round(window / dt))
    if nperseg < 8:
        raise ValueError(f"degenerate smoothing window of {nperseg} samples")
    if len(rec) < 2 * nperseg:
        raise ValueError(
            f"record of {len(rec)} samples is shorter than twice the {nperseg}-sample window"
        )
    noverlap = int(overlap * nperseg)
    f, p_g = scipy.signal.welch(rec.ground_acc, fs=1 / dt, nperseg=nperseg, noverlap=noverlap)
    _, p_1 = scipy.signal.welch(rec.acc_abs[:, 1], fs=1 / dt, nperseg=nperseg, noverlap=noverlap)
    keep = (f > 0) & (p_g > 0)
    if fmax is not None:
        keep &= f <= fmax
    ratio = np.sqrt(p_1[keep] / p_g[keep])
    return TransmissibilityCurve(
        frequency=f[keep], ratio=ratio, ground_psd=p_g[keep],
        smoothing={"method": "welch", "window_s": window, "nperseg": nperseg,
                   "noverlap": noverlap, "taper": "hann"},
    )
