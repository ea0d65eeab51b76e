"""Coupled RTHS loop and the monolithic reference run.

Per sample t:
  1. the numerical substructure holds Z(t) and emits the base command x_b(t);
  2. the controller turns (x_b, x_m) into an actuator command;
  3. the load cell reads the plate force and the restoring force R_hat(t) is
     estimated;
  4. R_hat(t) becomes available to the numerical side ``exchange_delay_steps``
     samples later, i.e. it drives the step that ends at t + delay*dt;
  5. numerical substructure and plant both advance one RK4 step.

With ``force_hold="linear"`` the force seen inside an RK4 step ramps with the
slope of the last two available samples instead of staying flat.  This only
removes the half-step lag of a zero-order hold; the configured exchange delay
is untouched.
"""
from __future__ import annotations

import hashlib
import json
import time as _time
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.signal

from . import _kernels
from .control import ControllerConfig, nrms_tracking_error
from .plant import VirtualPlant
from .structure import BuildingModel, assemble_fixed_base, assemble_isolated


class EngineInstability(RuntimeError):
    """The run diverged; ``channel`` and ``time`` name the first fault."""

    def __init__(self, channel: str, time: float, value: float):
        self.channel = channel
        self.time = time
        self.value = value
        super().__init__(f"instability in channel {channel!r} at t={time:.6f} s (value={value!r})")


@dataclass(frozen=True)
class GroundMotion:
    dt: float
    samples: np.ndarray
    label: str = ""

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", s)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if s.ndim != 1:
            raise ValueError("ground motion samples must be one-dimensional")
        if not np.all(np.isfinite(s)):
            bad = int(np.flatnonzero(~np.isfinite(s))[0])
            raise ValueError(f"non-finite ground acceleration at sample {bad}")

    @property
    def time(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dt

    @property
    def duration(self) -> float:
        return (len(self.samples) - 1) * self.dt

    def scaled(self, factor: float) -> "GroundMotion":
        return GroundMotion(self.dt, self.samples * factor, self.label)


@dataclass(frozen=True)
class EngineConfig:
    dt: float = 1.0 / 1024
    scheme: str = "rk4"
    exchange_delay_steps: int = 1
    force_hold: str = "linear"
    pace_realtime: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.scheme != "rk4":
            raise ValueError(f"unsupported integration scheme {self.scheme!r}")
        if int(self.exchange_delay_steps) != self.exchange_delay_steps or self.exchange_delay_steps < 1:
            raise ValueError("exchange_delay_steps must be an integer >= 1")
        if self.force_hold not in ("linear", "zoh"):
            raise ValueError(f"unknown force_hold {self.force_hold!r}")


CHANNELS = (
    ("time", "s"),
    ("x_b", "m"), ("x_1", "m"), ("x_2", "m"), ("x_3", "m"),
    ("acc_b", "m/s^2"), ("acc_1", "m/s^2"), ("acc_2", "m/s^2"), ("acc_3", "m/s^2"),
    ("ground_acc", "m/s^2"),
    ("x_m", "m"), ("R", "N"), ("R_hat", "N"), ("F_lc", "N"),
    ("e", "m"), ("command", "m"), ("R_hat_fed", "N"),
)


@dataclass
class SimulationRecord:
    time: np.ndarray
    x: np.ndarray
    acc_abs: np.ndarray
    ground_acc: np.ndarray
    x_m: np.ndarray
    R: np.ndarray
    R_hat: np.ndarray
    F_lc: np.ndarray
    command: np.ndarray
    R_hat_fed: np.ndarray
    velocity: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def x_b(self) -> np.ndarray:
        return self.x[:, 0]

    @property
    def e(self) -> np.ndarray:
        return self.x_b - self.x_m

    def __len__(self) -> int:
        return len(self.time)

    def columns(self) -> dict[str, np.ndarray]:
        cols = {"time": self.time}
        for j, name in enumerate(("x_b", "x_1", "x_2", "x_3")):
            cols[name] = self.x[:, j]
        for j, name in enumerate(("acc_b", "acc_1", "acc_2", "acc_3")):
            cols[name] = self.acc_abs[:, j]
        cols.update(
            ground_acc=self.ground_acc, x_m=self.x_m, R=self.R, R_hat=self.R_hat,
            F_lc=self.F_lc, e=self.e, command=self.command, R_hat_fed=self.R_hat_fed,
        )
        return cols

    def tracking_nrms_pct(self) -> float:
        return nrms_tracking_error(self.x_b, self.x_m)


def config_hash(*parts) -> str:
    """Stable short hash of dataclasses / plain data."""

    def norm(obj):
        if hasattr(obj, "__dataclass_fields__"):
            return {"__type__": type(obj).__name__, **{k: norm(v) for k, v in asdict(obj).items()}}
        if isinstance(obj, np.ndarray):
            return [norm(v) for v in obj.tolist()]
        if isinstance(obj, dict):
            return {str(k): norm(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [norm(v) for v in obj]
        if isinstance(obj, float):
            return repr(obj)
        return obj

    blob = json.dumps([norm(p) for p in parts], sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def resample_motion(motion: GroundMotion, target_dt: float) -> GroundMotion:
    """Linear interpolation onto a ``target_dt`` grid starting at 0.

    When coarsening, the record is low-pass filtered below the new Nyquist
    frequency first (zero-phase), so the result stays band-limited.
    """
    if not target_dt > 0:
        raise ValueError("target_dt must be positive")
    s = motion.samples
    if s.size == 0:
        raise ValueError("cannot resample an empty ground motion")
    if np.isclose(target_dt, motion.dt, rtol=1e-12, atol=0):
        return GroundMotion(motion.dt, s.copy(), motion.label)
    duration = motion.duration
    n_new = int(np.floor(duration / target_dt + 1e-9)) + 1
    if target_dt > motion.dt and s.size > 27:
        sos = scipy.signal.butter(8, 0.8 * motion.dt / target_dt, output="sos")
        s = scipy.signal.sosfiltfilt(sos, s)
    t_new = np.arange(n_new) * target_dt
    out = np.interp(t_new, motion.time, s)
    return GroundMotion(target_dt, out, motion.label)


def _validated_motion(motion: GroundMotion, cfg: EngineConfig) -> GroundMotion:
    if not np.isclose(motion.dt, cfg.dt, rtol=1e-12, atol=0):
        motion = resample_motion(motion, cfg.dt)
    return motion


_PLANT_CHANNELS = ("x_m", "v_m", "a_m", "z", "command", "R_hat")


def run_rths(
    structure: BuildingModel,
    plant: VirtualPlant,
    controller: ControllerConfig,
    motion: GroundMotion,
    cfg: EngineConfig = EngineConfig(),
    metadata: dict | None = None,
) -> SimulationRecord:
    """One coupled RTHS experiment in virtual time."""
    motion = _validated_motion(motion, cfg)
    ss = assemble_isolated(structure)
    ag = np.ascontiguousarray(motion.samples)
    N = ag.size
    m = ss.A.shape[0]
    n = m // 2
    d = int(cfg.exchange_delay_steps)

    Z = np.zeros(m)
    P = np.zeros(4)
    P[3] = plant.isolator.z
    cs = np.zeros(4)
    hist = np.zeros(3)
    Zout = np.zeros((N, m))
    acc = np.zeros((N, n))
    xb, xm, R, Rhat, Flc, cmd, fed = (np.zeros(N) for _ in range(7))
    noise = plant.load_cell.noise(N)
    ctrl = controller.params(cfg.dt)
    ctrl[5] = plant.stroke / controller.ki if controller.ki > 0 else np.inf

    args = (
        ss.A, ss.B, ag, cfg.dt, plant.isolator.params(), plant.actuator.params(),
        plant.ideal_actuator, plant.load_cell.plate_mass, noise,
        plant.accel_estimate == "oracle", ctrl, d, cfg.force_hold == "linear",
        Z, P, cs, hist,
    )
    outs = (Zout, acc, xb, xm, R, Rhat, Flc, cmd, fed)
    labels = list(ss.dof_labels) + [f"v_{lab[2:]}" for lab in ss.dof_labels] + list(_PLANT_CHANNELS)

    chunk = int(round(1.0 / cfg.dt)) if cfg.pace_realtime else N
    wall0 = _time.perf_counter()
    for t0 in range(0, N, chunk):
        t1 = min(N, t0 + chunk)
        step, ch = _kernels.rths_kernel(*args, t0, t1, *outs)
        if step >= 0:
            raise EngineInstability(labels[ch], step * cfg.dt, _fault_value(Zout, P, cmd, Rhat, step, ch, m))
        if cfg.pace_realtime:
            lag = t1 * cfg.dt - (_time.perf_counter() - wall0)
            if lag > 0:
                _time.sleep(lag)

    meta = {"mode": "rths", "exposure_days": 0.0, "seed": plant.load_cell.seed}
    meta["config_hash"] = config_hash(structure, plant, controller, cfg)
    if metadata:
        meta.update(metadata)
    return SimulationRecord(
        time=motion.time, x=Zout[:, :n], acc_abs=acc, ground_acc=ag.copy(),
        x_m=xm, R=R, R_hat=Rhat, F_lc=Flc, command=cmd, R_hat_fed=fed,
        velocity=Zout[:, n:], metadata=meta,
    )


def _fault_value(Zout, P, cmd, Rhat, step, ch, m):
    if ch < m:
        return float(Zout[step, ch])
    if ch < m + 4:
        return float(P[ch - m])
    return float(cmd[step] if ch == m + 4 else Rhat[step])


def _linear_run(ss, motion: GroundMotion, cfg: EngineConfig):
    ag = np.ascontiguousarray(motion.samples)
    N = ag.size
    m = ss.A.shape[0]
    Zout = np.zeros((N, m))
    acc = np.zeros((N, m // 2))
    step, ch = _kernels.linear_kernel(ss.A, ag, cfg.dt, Zout, acc)
    if step >= 0:
        labels = list(ss.dof_labels) + [f"v_{lab[2:]}" for lab in ss.dof_labels]
        raise EngineInstability(labels[ch], step * cfg.dt, float(Zout[step, ch]))
    return ag, Zout, acc


def run_monolithic_reference(
    structure: BuildingModel,
    isolator_stiffness: float,
    motion: GroundMotion,
    cfg: EngineConfig = EngineConfig(),
) -> SimulationRecord:
    """Whole isolated building as one linear system (isolator spring inside K)."""
    motion = _validated_motion(motion, cfg)
    ss = assemble_isolated(structure, isolator_stiffness=isolator_stiffness)
    ag, Zout, acc = _linear_run(ss, motion, cfg)
    n = ss.n_dof
    x_b = Zout[:, 0]
    R = isolator_stiffness * x_b
    fed = np.concatenate([[0.0], R[:-1]])
    return SimulationRecord(
        time=motion.time, x=Zout[:, :n], acc_abs=acc, ground_acc=ag.copy(),
        x_m=x_b.copy(), R=R, R_hat=R.copy(), F_lc=R.copy(), command=x_b.copy(),
        R_hat_fed=fed, velocity=Zout[:, n:],
        metadata={"mode": "monolithic", "isolator_stiffness": isolator_stiffness,
                  "config_hash": config_hash(structure, isolator_stiffness, cfg)},
    )


def simulate_fixed_base(
    structure: BuildingModel, motion: GroundMotion, cfg: EngineConfig = EngineConfig()
) -> SimulationRecord:
    """Fixed-base comparison run; the base channels are identically ground."""
    motion = _validated_motion(motion, cfg)
    ss = assemble_fixed_base(structure)
    ag, Zout, acc = _linear_run(ss, motion, cfg)
    N, ns = acc.shape
    x = np.zeros((N, ns + 1))
    x[:, 1:] = Zout[:, :ns]
    acc4 = np.zeros((N, ns + 1))
    acc4[:, 0] = ag
    acc4[:, 1:] = acc
    # base shear of a fixed-base building is the first story spring force
    shear = structure.story_stiffnesses[0] * x[:, 1]
    zeros = np.zeros(N)
    v = np.zeros((N, ns + 1))
    v[:, 1:] = Zout[:, ns:]
    return SimulationRecord(
        time=motion.time, x=x, acc_abs=acc4, ground_acc=ag.copy(), x_m=zeros,
        R=shear, R_hat=shear.copy(), F_lc=shear.copy(), command=zeros.copy(),
        R_hat_fed=zeros.copy(), velocity=v,
        metadata={"mode": "fixed_base", "config_hash": config_hash(structure, cfg)},
    )
