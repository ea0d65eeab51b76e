"""Power-law stiffening of the isolator under accelerated exposure.

k(T) = k0 * (1 + A0 * T**m), with T in days.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

K0_NOMINAL = 4.60e4
A0_NOMINAL = 3.39e-5
M_NOMINAL = 2.37


@dataclass(frozen=True)
class DegradationModel:
    k0: float = K0_NOMINAL
    A0: float = A0_NOMINAL
    m: float = M_NOMINAL

    def __post_init__(self):
        if not self.k0 > 0:
            raise ValueError(f"k0 must be positive, got {self.k0}")
        if not self.A0 >= 0:
            raise ValueError(f"A0 must be non-negative, got {self.A0}")
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")


@dataclass(frozen=True)
class DegObservation:
    T: float
    frac_increase: float

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"exposure T must be positive, got {self.T}")
        if not self.frac_increase > 0:
            raise ValueError(
                f"fractional increase must be positive for a log-space fit, "
                f"got {self.frac_increase}"
            )


@dataclass(frozen=True)
class SpecimenSampler:
    nominal: DegradationModel = DegradationModel()
    cov_k0: float = 0.10
    cov_A0: float = 0.05
    cov_m: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if min(self.cov_k0, self.cov_A0, self.cov_m) < 0:
            raise ValueError("coefficients of variation must be non-negative")


def stiffness_at(deg: DegradationModel, T):
    """Stiffness after ``T`` days of exposure; scalar or array ``T``."""
    T_arr = np.asarray(T, dtype=float)
    if np.any(T_arr < 0) or not np.all(np.isfinite(T_arr)):
        raise ValueError(f"exposure time must be finite and non-negative, got {T}")
    k = deg.k0 * (1.0 + deg.A0 * T_arr**deg.m)
    return float(k) if k.ndim == 0 else k


def fit_power_law(obs: Sequence[DegObservation]) -> tuple[float, float]:
    """Least squares of ln(frac) = ln(A0) + m ln(T); returns (A0, m).

    Two observations give the exact interpolating solution.
    """
    obs = list(obs)
    if len(obs) < 2:
        raise ValueError(f"need at least 2 observations, got {len(obs)}")
    T = np.array([o.T for o in obs], dtype=float)
    frac = np.array([o.frac_increase for o in obs], dtype=float)
    if len(np.unique(T)) != len(T):
        raise ValueError(f"duplicate exposure times in {T.tolist()}")
    if np.any(frac <= 0):
        raise ValueError("fractional increases must be positive")
    X = np.column_stack([np.ones_like(T), np.log(T)])
    (ln_A0, m), *_ = np.linalg.lstsq(X, np.log(frac), rcond=None)
    return float(np.exp(ln_A0)), float(m)


def lognormal_params(mean: float, cov: float) -> tuple[float, float]:
    """Underlying normal (mu, sigma) for a lognormal with given mean and CoV."""
    sigma2 = np.log1p(cov**2)
    return float(np.log(mean) - sigma2 / 2), float(np.sqrt(sigma2))


def specimen_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def sample_specimen(s: SpecimenSampler, index: int = 0) -> DegradationModel:
    """Draw specimen ``index``; the stream depends only on (seed, index)."""
    rng = specimen_rng(s.seed, index)
    draws = rng.standard_normal(3)
    values = []
    for mean, cov, eps in zip(
        (s.nominal.k0, s.nominal.A0, s.nominal.m), (s.cov_k0, s.cov_A0, s.cov_m), draws
    ):
        if cov == 0 or mean == 0:
            values.append(mean)
            continue
        mu, sigma = lognormal_params(mean, cov)
        values.append(float(np.exp(mu + sigma * eps)))
    return replace(s.nominal, k0=values[0], A0=values[1], m=values[2])
