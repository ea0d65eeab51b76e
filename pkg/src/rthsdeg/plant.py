"""Virtual physical substructure: Bouc-Wen isolator, actuator, load cell."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .degradation import DegradationModel, K0_NOMINAL, stiffness_at


class PlantFault(RuntimeError):
    """Non-finite input or state inside the virtual plant."""


@dataclass(frozen=True)
class BoucWenIsolator:
    k: float = K0_NOMINAL
    alpha: float = 0.25 * K0_NOMINAL
    A_bw: float = 1.0
    beta: float = 50.0
    gamma: float = 50.0
    n: float = 1.0
    z: float = 0.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"isolator stiffness must be positive, got {self.k}")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if not self.beta + self.gamma > 0:
            raise ValueError("beta + gamma must be positive")
        if self.beta < abs(self.gamma):
            raise ValueError("beta >= |gamma| is required for a bounded hysteresis")
        if self.n < 1:
            raise ValueError("Bouc-Wen exponent n must be >= 1")

    @property
    def z_ultimate(self) -> float:
        """Bound on |z| reached under monotonic loading."""
        return (self.A_bw / (self.beta + self.gamma)) ** (1.0 / self.n)

    def params(self) -> np.ndarray:
        return np.array([self.k, self.alpha, self.A_bw, self.beta, self.gamma, self.n])


def bouc_wen_rate(iso: BoucWenIsolator, x_dot: float, z: float | None = None) -> float:
    """dz/dt for velocity ``x_dot``; uses ``iso.z`` unless ``z`` is given."""
    z = iso.z if z is None else z
    return _kernels.bw_rate(float(x_dot), float(z), iso.A_bw, iso.beta, iso.gamma, float(iso.n))


def restoring_force(iso: BoucWenIsolator, x, z=None):
    z = iso.z if z is None else z
    return iso.k * np.asarray(x) + iso.alpha * np.asarray(z)


def integrate_bouc_wen(iso: BoucWenIsolator, x: np.ndarray, dt: float) -> np.ndarray:
    """Hysteretic variable along a prescribed displacement history.

    The velocity is taken piecewise constant between samples, which makes the
    z update exact up to the RK4 error of the scalar evolution law.
    """
    x = np.asarray(x, dtype=float)
    z = np.empty_like(x)
    zi = iso.z
    z[0] = zi
    p = (iso.A_bw, iso.beta, iso.gamma, float(iso.n))
    for i in range(1, len(x)):
        v = (x[i] - x[i - 1]) / dt
        k1 = _kernels.bw_rate(v, zi, *p)
        k2 = _kernels.bw_rate(v, zi + 0.5 * dt * k1, *p)
        k3 = _kernels.bw_rate(v, zi + 0.5 * dt * k2, *p)
        k4 = _kernels.bw_rate(v, zi + dt * k3, *p)
        zi = zi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        z[i] = zi
    return z


def apply_degradation(iso: BoucWenIsolator, deg: DegradationModel, T: float) -> BoucWenIsolator:
    """Isolator after ``T`` days: only the elastic stiffness changes."""
    if T < 0:
        raise ValueError(f"exposure time must be non-negative, got {T}")
    return replace(iso, k=stiffness_at(deg, T))


@dataclass
class ActuatorModel:
    """Third-order servo-hydraulic transfer system.

    x''' + a2 x'' + a1 x' + a0 x = b0 u - c_f F

    with ``u`` the controller command and ``F`` the specimen reaction force.
    """

    a2: float
    a1: float
    a0: float
    b0: float
    c_f: float = 0.0
    state: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=float).copy()
        if not self.is_hurwitz():
            raise ValueError(
                f"actuator polynomial s^3 + {self.a2} s^2 + {self.a1} s + {self.a0} "
                "is not Hurwitz"
            )

    @classmethod
    def from_poles(cls, pole_hz: float = 20.0, damping: float = 0.7, c_f: float = 0.0):
        """Real pole and complex pair of modulus ``2*pi*pole_hz``, unit DC gain.

        The -3 dB bandwidth is about 0.65 * pole_hz (13 Hz for the default).
        """
        w = 2 * np.pi * pole_hz
        a2 = w + 2 * damping * w
        a1 = w**2 + 2 * damping * w**2
        a0 = w**3
        return cls(a2=a2, a1=a1, a0=a0, b0=a0, c_f=c_f)

    def is_hurwitz(self) -> bool:
        # Routh criterion for a cubic
        return self.a2 > 0 and self.a0 > 0 and self.a2 * self.a1 > self.a0

    @property
    def dc_gain(self) -> float:
        return self.b0 / self.a0

    @property
    def lag_time(self) -> float:
        """Low-frequency group delay a1/a0 of the command-to-plate response."""
        return self.a1 / self.a0

    def poles(self) -> np.ndarray:
        return np.roots([1.0, self.a2, self.a1, self.a0])

    def params(self) -> np.ndarray:
        return np.array([self.a2, self.a1, self.a0, self.b0, self.c_f])

    def state_space(self) -> tuple[np.ndarray, np.ndarray]:
        """(A, B) with inputs [command, reaction force]."""
        A = np.array([[0, 1, 0], [0, 0, 1], [-self.a0, -self.a1, -self.a2]], dtype=float)
        B = np.array([[0, 0], [0, 0], [self.b0, -self.c_f]], dtype=float)
        return A, B

    def reset(self) -> None:
        self.state = np.zeros(3)

    @property
    def x_m(self) -> float:
        return float(self.state[0])


def actuator_step(act: ActuatorModel, command: float, reaction_force: float, dt: float) -> float:
    """Advance the actuator one RK4 step with held inputs; returns x_m."""
    if not (np.isfinite(command) and np.isfinite(reaction_force)):
        raise PlantFault(f"non-finite actuator input: command={command}, force={reaction_force}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    pmax = np.max(np.abs(act.poles()))
    if dt * pmax >= 0.5:
        raise ValueError(f"dt={dt} too large for actuator poles up to {pmax:.1f} rad/s")
    _kernels.actuator_rk4(act.state, float(command), float(reaction_force), dt, act.params())
    if not np.all(np.isfinite(act.state)):
        raise PlantFault("actuator state became non-finite")
    return act.x_m


@dataclass(frozen=True)
class LoadCellModel:
    plate_mass: float = 50.0
    noise_std: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.plate_mass < 0:
            raise ValueError("plate mass must be non-negative")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")

    def noise(self, n: int) -> np.ndarray:
        if self.noise_std == 0:
            return np.zeros(n)
        return self.noise_std * np.random.default_rng(self.seed).standard_normal(n)


def load_cell_reading(lc: LoadCellModel, R, plate_accel, noise=None):
    """Measured force: restoring force plus plate inertia plus noise.

    ``noise`` overrides the sample; by default one is drawn from a generator
    seeded with ``lc.seed``.
    """
    R = np.asarray(R, dtype=float)
    if noise is None:
        noise = lc.noise(R.size).reshape(R.shape) if R.ndim else lc.noise(1)[0]
    return R + lc.plate_mass * np.asarray(plate_accel) + noise


def estimate_restoring_force(lc: LoadCellModel, F_lc, plate_accel_estimate):
    return np.asarray(F_lc) - lc.plate_mass * np.asarray(plate_accel_estimate)


def second_difference(x: np.ndarray, dt: float) -> np.ndarray:
    """Causal acceleration estimate (x[i] - 2 x[i-1] + x[i-2]) / dt**2, rest before start."""
    x = np.asarray(x, dtype=float)
    padded = np.concatenate([[0.0, 0.0], x])
    return (padded[2:] - 2 * padded[1:-1] + padded[:-2]) / dt**2


@dataclass(frozen=True)
class VirtualPlant:
    """Everything on the physical side of the loop.

    ``ideal_actuator`` makes the plate follow the commanded base displacement
    exactly.  ``accel_estimate`` is ``"second_difference"`` (from x_m samples)
    or ``"oracle"`` (the plant's own acceleration state).
    """

    isolator: BoucWenIsolator = BoucWenIsolator()
    actuator: ActuatorModel = field(default_factory=ActuatorModel.from_poles)
    load_cell: LoadCellModel = LoadCellModel()
    ideal_actuator: bool = False
    accel_estimate: str = "second_difference"
    stroke: float = 0.5

    def __post_init__(self):
        if self.accel_estimate not in ("second_difference", "oracle"):
            raise ValueError(f"unknown accel_estimate {self.accel_estimate!r}")
        if not self.stroke > 0:
            raise ValueError("stroke must be positive")

    def degraded(self, deg: DegradationModel, T: float) -> "VirtualPlant":
        return replace(self, isolator=apply_degradation(self.isolator, deg, T))
