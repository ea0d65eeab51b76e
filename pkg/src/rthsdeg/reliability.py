"""Time-to-failure campaigns, Weibull fitting, MTTF and fragility."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.optimize

from .control import ControllerConfig
from .degradation import DegradationModel, SpecimenSampler, sample_specimen
from .engine import EngineConfig, EngineInstability, GroundMotion, resample_motion, run_rths
from .metrics import Thresholds, check_failure, compute_metrics
from .motion import MotionSpec, generate_kanai_tajimi
from .plant import VirtualPlant
from .structure import BuildingModel


@dataclass(frozen=True)
class Scenario:
    """Everything one RTHS test needs apart from the exposure time."""

    structure: BuildingModel = BuildingModel()
    plant: VirtualPlant = field(default_factory=VirtualPlant)
    controller: ControllerConfig = ControllerConfig()
    motion: GroundMotion | None = None
    thresholds: Thresholds = Thresholds()
    engine: EngineConfig = EngineConfig()

    def __post_init__(self):
        motion = self.motion if self.motion is not None else generate_kanai_tajimi(MotionSpec())
        # resample once so repeated tests do not redo it
        object.__setattr__(self, "motion", resample_motion(motion, self.engine.dt))


@dataclass(frozen=True)
class CampaignConfig:
    """Monte-Carlo campaign over ``n_specimens`` sampled isolators.

    ``scan="exhaustive"`` tests every grid point ΔT, 2ΔT, ... until failure.
    ``scan="refine"`` first steps by ``coarse_factor * dT`` and then rescans
    the last coarse interval at ``dT``; it assumes failure is monotone in T.
    """

    n_specimens: int = 12
    dT: float = 1.0
    T_max: float = 200.0
    seed: int = 0
    scenario: Scenario = field(default_factory=Scenario)
    sampler: SpecimenSampler = SpecimenSampler()
    scan: str = "exhaustive"
    coarse_factor: int = 8
    workers: int = 1

    def __post_init__(self):
        if self.n_specimens < 1:
            raise ValueError("need at least one specimen")
        if not self.dT > 0:
            raise ValueError("dT must be positive")
        if not self.T_max >= self.dT:
            raise ValueError("T_max must be at least dT")
        if self.scan not in ("exhaustive", "refine"):
            raise ValueError(f"unknown scan mode {self.scan!r}")
        if self.coarse_factor < 1 or self.workers < 1:
            raise ValueError("coarse_factor and workers must be >= 1")

    def grid(self) -> np.ndarray:
        n = int(math.floor(self.T_max / self.dT + 1e-9))
        return self.dT * np.arange(1, n + 1)


@dataclass(frozen=True)
class TTFSample:
    specimen_id: int
    tf_days: float | None
    violated: tuple[str, ...] = ()
    k0: float = float("nan")
    A0: float = float("nan")
    m: float = float("nan")
    error: str | None = None

    @property
    def censored(self) -> bool:
        return self.tf_days is None and self.error is None


class SpecimenError(RuntimeError):
    def __init__(self, specimen_id: int, T: float, cause: Exception):
        super().__init__(f"specimen {specimen_id} at T={T} d: {cause}")
        self.specimen_id = specimen_id
        self.T = T
        self.cause = cause


def exposure_check(deg: DegradationModel, scenario: Scenario, T: float) -> tuple[str, ...]:
    """Violated metric names of one RTHS test after ``T`` days of exposure."""
    sc = scenario
    rec = run_rths(sc.structure, sc.plant.degraded(deg, T), sc.controller, sc.motion, sc.engine)
    return tuple(check_failure(compute_metrics(rec, sc.structure), sc.thresholds))


def time_to_failure(
    deg: DegradationModel, cfg: CampaignConfig, specimen_id: int = 0
) -> TTFSample:
    """First grid exposure at which some threshold is exceeded."""
    grid = cfg.grid()
    params = {"k0": deg.k0, "A0": deg.A0, "m": deg.m}

    def probe(T):
        try:
            return exposure_check(deg, cfg.scenario, float(T))
        except EngineInstability as exc:
            raise SpecimenError(specimen_id, float(T), exc) from exc

    start = 0
    if cfg.scan == "refine" and cfg.coarse_factor > 1:
        coarse = np.arange(cfg.coarse_factor - 1, len(grid), cfg.coarse_factor)
        if coarse[-1] != len(grid) - 1:
            coarse = np.append(coarse, len(grid) - 1)
        hit = None
        for i in coarse:
            if probe(grid[i]):
                hit = i
                break
            start = i + 1
        if hit is None:
            return TTFSample(specimen_id, None, **params)
    for T in grid[start:]:
        violated = probe(T)
        if violated:
            return TTFSample(specimen_id, float(T), violated, **params)
    return TTFSample(specimen_id, None, **params)


def specimen_model(cfg: CampaignConfig, specimen_id: int) -> DegradationModel:
    return sample_specimen(replace(cfg.sampler, seed=cfg.seed), specimen_id)


def _campaign_task(args) -> TTFSample:
    cfg, i = args
    deg = specimen_model(cfg, i)
    try:
        return time_to_failure(deg, cfg, i)
    except SpecimenError as exc:
        return TTFSample(i, None, k0=deg.k0, A0=deg.A0, m=deg.m, error=str(exc))


def run_campaign(cfg: CampaignConfig) -> list[TTFSample]:
    """TTF of every specimen, in specimen order.

    A specimen whose run goes unstable is reported with ``error`` set rather
    than aborting the batch.
    """
    tasks = [(cfg, i) for i in range(cfg.n_specimens)]
    if cfg.workers == 1:
        return [_campaign_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_campaign_task, tasks))


# --- Weibull analysis -------------------------------------------------------


class DegenerateDataError(ValueError):
    pass


class CensoredDataError(ValueError):
    pass


@dataclass(frozen=True)
class WeibullFit:
    shape: float
    scale: float
    log_likelihood: float
    n: int
    p_value: float | None = None
    ks_statistic: float | None = None

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("Weibull shape and scale must be positive")

    def cdf(self, T):
        T = np.asarray(T, dtype=float)
        return -np.expm1(-((np.maximum(T, 0.0) / self.scale) ** self.shape))


def failure_times(samples) -> np.ndarray:
    """Uncensored failure times as an array; rejects censored entries."""
    out = []
    for s in samples:
        if isinstance(s, TTFSample):
            if s.error is not None:
                raise CensoredDataError(f"specimen {s.specimen_id} has no result: {s.error}")
            if s.tf_days is None:
                raise CensoredDataError(
                    f"specimen {s.specimen_id} is censored; censored likelihood is not supported"
                )
            out.append(s.tf_days)
        else:
            v = float(s)
            if not math.isfinite(v):
                raise CensoredDataError("non-finite failure time (censored sample?)")
            out.append(v)
    x = np.asarray(out, dtype=float)
    if np.any(x <= 0):
        raise ValueError("failure times must be positive")
    return x


def _profile_equation(k: float, lx: np.ndarray) -> float:
    # d/dk of the profile log-likelihood, divided by n; increasing in k
    w = np.exp(k * (lx - lx.max()))
    return float(np.dot(w, lx) / w.sum() - 1.0 / k - lx.mean())


def _log_likelihood(x: np.ndarray, shape: float, scale: float) -> float:
    z = x / scale
    return float(np.sum(np.log(shape / scale) + (shape - 1) * np.log(z) - z**shape))


def weibull_mle(samples) -> WeibullFit:
    """Two-parameter maximum-likelihood fit.

    The shape solves the profile score equation (bracketed root, 1e-10
    relative); the scale then follows in closed form.
    """
    x = failure_times(samples)
    if x.size < 3:
        raise ValueError(f"need at least 3 failure times, got {x.size}")
    if np.ptp(x) == 0:
        raise DegenerateDataError("all failure times are equal")
    lx = np.log(x)
    lo, hi = 1e-3, 1.0
    while _profile_equation(lo, lx) > 0:
        lo /= 10
    while _profile_equation(hi, lx) < 0:
        hi *= 2
    shape = scipy.optimize.brentq(_profile_equation, lo, hi, args=(lx,), rtol=1e-10, xtol=1e-14)
    scale = float(np.exp(lx.max()) * np.mean(np.exp(shape * (lx - lx.max()))) ** (1 / shape))
    return WeibullFit(shape, scale, _log_likelihood(x, shape, scale), int(x.size))


def _batch_shape_mle(lx: np.ndarray, iters: int = 80) -> np.ndarray:
    """Row-wise shape MLE by bisection on log(shape); lx is (B, n)."""
    lx = lx - lx.max(axis=1, keepdims=True)
    mean = lx.mean(axis=1)
    lo = np.full(lx.shape[0], np.log(1e-3))
    hi = np.full(lx.shape[0], np.log(1e4))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        k = np.exp(mid)
        w = np.exp(k[:, None] * lx)
        g = np.sum(w * lx, axis=1) / w.sum(axis=1) - 1.0 / k - mean
        pos = g > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    return np.exp(0.5 * (lo + hi))


def ks_statistic(x: np.ndarray, shape, scale) -> np.ndarray:
    """Kolmogorov–Smirnov distance to a Weibull CDF along the last axis."""
    x = np.sort(np.asarray(x, dtype=float), axis=-1)
    shape = np.asarray(shape, dtype=float)[..., None]
    scale = np.asarray(scale, dtype=float)[..., None]
    F = -np.expm1(-((x / scale) ** shape))
    n = x.shape[-1]
    i = np.arange(1, n + 1)
    return np.maximum(np.max(i / n - F, axis=-1), np.max(F - (i - 1) / n, axis=-1))


@dataclass(frozen=True)
class GoodnessOfFit:
    statistic: float
    p_value: float
    n_boot: int


def goodness_of_fit(samples, fit: WeibullFit, n_boot: int = 2000, seed: int = 0) -> GoodnessOfFit:
    """KS test with a parametric-bootstrap p-value.

    Each replicate is drawn from ``fit``, refitted, and its KS distance to
    its own fit computed, so the null distribution accounts for the
    estimated parameters.
    """
    x = failure_times(samples)
    if x.size < 3 or np.ptp(x) == 0:
        raise DegenerateDataError("goodness of fit needs >= 3 distinct failure times")
    if n_boot < 1:
        raise ValueError("n_boot must be >= 1")
    D = float(ks_statistic(x, fit.shape, fit.scale))
    rng = np.random.default_rng(seed)
    boot = fit.scale * rng.weibull(fit.shape, size=(n_boot, x.size))
    lx = np.log(boot)
    k = _batch_shape_mle(lx)
    top = lx.max(axis=1)
    lam = np.exp(top) * np.mean(np.exp(k[:, None] * (lx - top[:, None])), axis=1) ** (1 / k)
    Db = ks_statistic(boot, k, lam)
    p = (1 + int(np.sum(Db >= D))) / (n_boot + 1)
    return GoodnessOfFit(D, p, n_boot)


def mttf(fit: WeibullFit) -> float:
    """Mean time to failure scale * Gamma(1 + 1/shape)."""
    return fit.scale * math.gamma(1.0 + 1.0 / fit.shape)


@dataclass(frozen=True)
class FragilityCurve:
    T: np.ndarray
    probability: np.ndarray


def fragility_curve(fit: WeibullFit, T: Sequence[float]) -> FragilityCurve:
    """Probability of failure by exposure ``T`` for each grid point."""
    T = np.asarray(T, dtype=float)
    if T.ndim != 1 or T.size == 0:
        raise ValueError("T grid must be a non-empty 1-D sequence")
    if np.any(np.diff(T) <= 0):
        raise ValueError("T grid must be strictly increasing")
    if np.any(T < 0):
        raise ValueError("exposure times must be non-negative")
    return FragilityCurve(T.copy(), fit.cdf(T))


def median_rank_points(tf: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weibull probability-plot coordinates (ln T, ln(-ln(1 - F))) with Benard ranks."""
    t = np.sort(np.asarray(tf, dtype=float))
    n = t.size
    F = (np.arange(1, n + 1) - 0.3) / (n + 0.4)
    return np.log(t), np.log(-np.log1p(-F))
