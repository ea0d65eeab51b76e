"""Ground-motion synthesis (Kanai-Tajimi filtered noise) and CSV records."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import GroundMotion
from .structure import G


class MotionFormatError(ValueError):
    pass


@dataclass(frozen=True)
class MotionSpec:
    """Either a CSV ``path`` or the parameters of a synthetic record.

    The synthetic record is white noise shaped by the Kanai-Tajimi spectrum
    S0 (1 + 4 zg^2 r^2) / ((1 - r^2)^2 + 4 zg^2 r^2), r = w / omega_g,
    optionally times a second-order high-pass (``highpass_omega`` > 0) that
    removes the unrealistic low-frequency plateau of the plain spectrum.
    ``pga`` (m/s^2) rescales the final record to that peak; ``None`` keeps
    the amplitude implied by S0.
    """

    path: str | None = None
    S0: float = 1.0e-3
    omega_g: float = 2 * math.pi * 2.5
    zeta_g: float = 0.35
    duration: float = 30.0
    dt: float = 0.005
    envelope: tuple[float, float, float] = (2.0, 20.0, 8.0)
    seed: int = 4
    highpass_omega: float = 2 * math.pi * 1.5
    highpass_zeta: float = 0.6
    pga: float | None = 0.85 * G

    def __post_init__(self):
        object.__setattr__(self, "envelope", tuple(float(v) for v in self.envelope))
        if self.path is not None:
            return
        if not self.duration > 0 or not self.dt > 0 or not self.omega_g > 0:
            raise ValueError("duration, dt and omega_g must be positive")
        if not 0 < self.zeta_g < 1:
            raise ValueError("zeta_g must lie in (0, 1)")
        if self.S0 < 0:
            raise ValueError("S0 must be non-negative")
        if len(self.envelope) != 3 or min(self.envelope) < 0:
            raise ValueError("envelope is (rise, plateau, decay) with non-negative durations")
        if self.highpass_omega < 0 or not 0 < self.highpass_zeta:
            raise ValueError("invalid high-pass parameters")
        if self.pga is not None and self.pga < 0:
            raise ValueError("pga must be non-negative")


def kanai_tajimi_psd(omega, S0: float, omega_g: float, zeta_g: float) -> np.ndarray:
    r2 = (np.asarray(omega, dtype=float) / omega_g) ** 2
    c = 4 * zeta_g**2 * r2
    return S0 * (1 + c) / ((1 - r2) ** 2 + c)


def highpass_gain(omega, omega_f: float, zeta_f: float) -> np.ndarray:
    """Squared magnitude of a second-order high-pass filter."""
    omega = np.asarray(omega, dtype=float)
    if omega_f == 0:
        return np.ones_like(omega)
    r2 = (omega / omega_f) ** 2
    return r2**2 / ((1 - r2) ** 2 + 4 * zeta_f**2 * r2)


def target_psd(spec: MotionSpec, omega) -> np.ndarray:
    return kanai_tajimi_psd(omega, spec.S0, spec.omega_g, spec.zeta_g) * highpass_gain(
        omega, spec.highpass_omega, spec.highpass_zeta
    )


def trapezoid_envelope(t: np.ndarray, rise: float, plateau: float, decay: float) -> np.ndarray:
    knots = [0.0, rise, rise + plateau, rise + plateau + decay]
    env = np.interp(t, knots, [0.0 if rise > 0 else 1.0, 1.0, 1.0, 0.0 if decay > 0 else 1.0])
    env[t > knots[-1]] = 0.0
    return env


def generate_kanai_tajimi(spec: MotionSpec) -> GroundMotion:
    if spec.path is not None:
        raise ValueError("MotionSpec.path is set; use load_ground_motion_csv")
    n = int(round(spec.duration / spec.dt)) + 1
    label = f"kanai-tajimi seed={spec.seed}"
    if spec.S0 == 0:
        return GroundMotion(spec.dt, np.zeros(n), label)
    rng = np.random.default_rng(spec.seed)
    # two-sided white noise of intensity S0 has variance 2*pi*S0/dt
    w = rng.standard_normal(n) * math.sqrt(2 * math.pi * spec.S0 / spec.dt)
    omega = 2 * math.pi * np.fft.rfftfreq(n, spec.dt)
    shape = target_psd(spec, omega) / spec.S0
    a = np.fft.irfft(np.fft.rfft(w) * np.sqrt(shape), n)
    a *= trapezoid_envelope(np.arange(n) * spec.dt, *spec.envelope)
    a -= a.mean()
    if spec.pga is not None:
        peak = np.max(np.abs(a))
        if peak > 0:
            a *= spec.pga / peak
    return GroundMotion(spec.dt, a, label)


def motion_from_spec(spec: MotionSpec) -> GroundMotion:
    if spec.path is not None:
        return load_ground_motion_csv(spec.path)
    return generate_kanai_tajimi(spec)


_DT_LINE = re.compile(r"^#?\s*dt\s*[=,:]\s*(\S+)\s*$", re.IGNORECASE)


def load_ground_motion_csv(path) -> GroundMotion:
    """Read ``time,acc`` rows, or single ``acc`` rows with a ``dt=`` header.

    Lines starting with ``#`` are comments; a non-numeric first row is taken
    as a column header.
    """
    path = Path(path)
    dt_header = None
    rows: list[tuple[int, list[float]]] = []
    label = path.stem
    with path.open() as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            m = _DT_LINE.match(line)
            if m:
                try:
                    dt_header = float(m.group(1))
                except ValueError:
                    raise MotionFormatError(f"{path}:{lineno}: bad dt value {m.group(1)!r}") from None
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("label="):
                    label = body[len("label="):]
                continue
            fields = [f.strip() for f in line.split(",")]
            values = []
            for col, f in enumerate(fields, 1):
                try:
                    values.append(float(f))
                except ValueError:
                    if not rows and any(ch.isalpha() for ch in line) and not values:
                        values = None
                        break
                    raise MotionFormatError(
                        f"{path}:{lineno}:{col}: cannot parse {f!r} as a number"
                    ) from None
            if values is None:
                continue
            for col, v in enumerate(values, 1):
                if not math.isfinite(v):
                    raise MotionFormatError(f"{path}:{lineno}:{col}: non-finite value {v}")
            rows.append((lineno, values))
    if not rows:
        raise MotionFormatError(f"{path}: no data rows")
    widths = {len(v) for _, v in rows}
    if len(widths) != 1 or widths.pop() not in (1, 2):
        bad = next(ln for ln, v in rows if len(v) != len(rows[0][1]) or len(v) > 2)
        raise MotionFormatError(f"{path}:{bad}: expected 1 or 2 columns consistently")
    if len(rows[0][1]) == 1:
        if dt_header is None or not dt_header > 0:
            raise MotionFormatError(f"{path}: single-column records need a positive dt header")
        return GroundMotion(dt_header, np.array([v[0] for _, v in rows]), label)
    t = np.array([v[0] for _, v in rows])
    a = np.array([v[1] for _, v in rows])
    linenos = [ln for ln, _ in rows]
    if len(t) == 1:
        if dt_header is None:
            raise MotionFormatError(f"{path}: cannot infer dt from a single row")
        return GroundMotion(dt_header, a, label)
    steps = np.diff(t)
    for i, s in enumerate(steps):
        if not s > 0:
            raise MotionFormatError(f"{path}:{linenos[i + 1]}: time is not strictly increasing")
    dt = dt_header if dt_header is not None else float(steps[0])
    expected = t[0] + np.arange(len(t)) * dt
    off = np.abs(t - expected) > 1e-6 * dt + 1e-12 * np.abs(t)
    if np.any(off):
        i = int(np.flatnonzero(off)[0])
        raise MotionFormatError(
            f"{path}:{linenos[i]}: non-uniform time spacing (t={t[i]!r}, expected {expected[i]!r})"
        )
    return GroundMotion(dt, a, label)


def write_motion_csv(motion: GroundMotion, path, header: dict | None = None) -> Path:
    path = Path(path)
    lines = [f"# dt={motion.dt!r}"]
    if motion.label:
        lines.append(f"# label={motion.label}")
    for k, v in (header or {}).items():
        lines.append(f"# {k}={v}")
    lines.append("time_s,acc_m_s2")
    for i, a in enumerate(motion.samples):
        lines.append(f"{i * motion.dt!r},{float(a)!r}")
    path.write_text("\n".join(lines) + "\n")
    return path
