"""Displacement tracking: PI feedback with a lead-lag feedforward path."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels


class UndefinedMetricError(ValueError):
    pass


@dataclass(frozen=True)
class ControllerConfig:
    """Gains for command = kp*e + ki*int(e) + F(s) x_b.

    F(s) = k_ff (1 + s/zero) / (1 + s/pole), discretised with the bilinear
    transform at ``sample_dt``.  The default zero makes the feedforward lead
    1/zero - 1/pole equal to the lag of the default actuator
    (see :func:`matched_ff_zero`).
    """

    kp: float = 2.5
    ki: float = 8.0
    k_ff: float = 1.0
    ff_zero: float = 45.97
    ff_pole: float = 2 * np.pi * 60.0
    sample_dt: float = 1.0 / 1024
    integral_limit: float = 0.5

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0:
            raise ValueError("kp and ki must be non-negative")
        if not self.ff_pole > 0 or not self.ff_zero > 0:
            raise ValueError("lead-lag zero and pole must be positive")
        if not self.sample_dt > 0:
            raise ValueError("sample_dt must be positive")

    def feedforward_coefficients(self) -> tuple[float, float, float]:
        """(b0, b1, a1) of y[n] = b0 u[n] + b1 u[n-1] - a1 y[n-1]."""
        c = 2.0 / self.sample_dt
        z, p = self.ff_zero, self.ff_pole
        g = self.k_ff * p / z
        den = c + p
        return g * (c + z) / den, g * (z - c) / den, (p - c) / den

    def params(self, dt: float | None = None) -> np.ndarray:
        cfg = self if dt is None or dt == self.sample_dt else replace(self, sample_dt=dt)
        b0, b1, a1 = cfg.feedforward_coefficients()
        # the clamp acts on ki * integral
        lim = cfg.integral_limit / cfg.ki if cfg.ki > 0 else np.inf
        return np.array([cfg.kp, cfg.ki, b0, b1, a1, lim, cfg.sample_dt])


def matched_ff_zero(lag_time: float, ff_pole: float) -> float:
    """Lead-lag zero whose low-frequency lead cancels a lag of ``lag_time`` seconds."""
    return 1.0 / (lag_time + 1.0 / ff_pole)


class Controller:
    """Stateful controller; call :meth:`step` once per sample."""

    def __init__(self, cfg: ControllerConfig):
        self.cfg = cfg
        self._params = cfg.params()
        self.state = np.zeros(4)

    def reset(self) -> None:
        self.state[:] = 0.0

    def step(self, x_b: float, x_m: float) -> float:
        return controller_step(self, x_b, x_m)


def controller_step(ctrl: Controller, x_b: float, x_m: float) -> float:
    if not (np.isfinite(x_b) and np.isfinite(x_m)):
        raise FloatingPointError(f"non-finite controller input x_b={x_b}, x_m={x_m}")
    return _kernels.ctrl_update(ctrl.state, ctrl._params, float(x_b), float(x_m))


@dataclass(frozen=True)
class TrackingReport:
    nrms_error_pct: float
    peak_error: float
    peak_error_pct: float


def nrms_tracking_error(x_b, x_m) -> float:
    """100 * sqrt(sum((x_b - x_m)**2) / sum(x_b**2))."""
    x_b = np.asarray(x_b, dtype=float)
    x_m = np.asarray(x_m, dtype=float)
    if x_b.shape != x_m.shape:
        raise ValueError(f"series lengths differ: {x_b.shape} vs {x_m.shape}")
    ref = np.sum(x_b**2)
    if ref == 0:
        raise UndefinedMetricError("reference signal has zero energy")
    return float(100.0 * np.sqrt(np.sum((x_b - x_m) ** 2) / ref))


def tracking_report(x_b, x_m) -> TrackingReport:
    x_b = np.asarray(x_b, dtype=float)
    e = x_b - np.asarray(x_m, dtype=float)
    peak = float(np.max(np.abs(e))) if e.size else 0.0
    ref_peak = float(np.max(np.abs(x_b))) if x_b.size else 0.0
    return TrackingReport(
        nrms_error_pct=nrms_tracking_error(x_b, x_m),
        peak_error=peak,
        peak_error_pct=100.0 * peak / ref_peak if ref_peak > 0 else 0.0,
    )


def rk4_propagator(A: np.ndarray, B: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """(Phi, Gamma) of one classical RK4 step of x' = A x + B u with u held."""
    n = A.shape[0]
    Ah = A * h
    Phi = np.eye(n)
    S = np.eye(n)
    term = np.eye(n)
    for k in range(1, 5):
        term = term @ Ah / k
        Phi = Phi + term
        if k < 4:
            S = S + term / (k + 1)
    return Phi, h * S @ B


def closed_loop_poles(cfg: ControllerConfig, actuator, dt: float | None = None) -> np.ndarray:
    """Eigenvalues of the sampled PI loop around the actuator.

    The state is [actuator states, integral, previous error].  Feedforward
    acts on the reference only and so does not move these poles; the
    integral clamp is ignored (small-signal analysis).
    """
    dt = cfg.sample_dt if dt is None else dt
    A, B = actuator.state_space()
    Phi, Gam = rk4_propagator(A, B[:, :1], dt)
    Gam = Gam[:, 0]
    n = A.shape[0]
    c = np.zeros(n)
    c[0] = 1.0
    kp, ki, h = cfg.kp, cfg.ki, 0.5 * dt
    M = np.zeros((n + 2, n + 2))
    # u_n = -(kp + ki h) c S_n + ki I_{n-1} + ki h e_{n-1}
    M[:n, :n] = Phi - np.outer(Gam, (kp + ki * h) * c)
    M[:n, n] = Gam * ki
    M[:n, n + 1] = Gam * ki * h
    M[n, :n] = -h * c
    M[n, n] = 1.0
    M[n, n + 1] = h
    M[n + 1, :n] = -c
    return np.linalg.eigvals(M)
