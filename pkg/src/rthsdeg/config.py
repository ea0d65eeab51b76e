"""Run configuration: sectioned INI or JSON files mapped onto dataclasses.

Every section has a flat set of scalar or list-valued keys.  In INI files a
value is parsed as JSON when possible (numbers, ``true``, ``null``,
``[1, 2]``), a bare comma-separated list becomes a list, and anything else
is a string.
"""
from __future__ import annotations

import configparser
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .control import ControllerConfig
from .degradation import DegradationModel, SpecimenSampler
from .engine import EngineConfig, GroundMotion, config_hash
from .metrics import Thresholds
from .motion import MotionSpec, motion_from_spec
from .plant import ActuatorModel, BoucWenIsolator, LoadCellModel, VirtualPlant
from .reliability import CampaignConfig, Scenario
from .structure import BuildingModel, ModalDamping

OUTPUT_DIR_ENV = "RTHSDEG_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BuildingSection:
    masses: tuple[float, ...] = (600.0, 480.0, 480.0, 479.0)
    story_stiffnesses: tuple[float, ...] = (2.0e6, 2.0e6, 2.0e6)
    damping_ratios: tuple[float, ...] = (0.02, 0.02)
    damping_modes: tuple[int, ...] = (1, 3)
    damping_kind: str = "rayleigh"
    story_height: float = 3.0


@dataclass(frozen=True)
class IsolatorSection:
    """Hysteretic part of the isolator; its elastic stiffness is degradation.k0."""

    alpha: float = 0.25 * 4.6e4
    A_bw: float = 1.0
    beta: float = 50.0
    gamma: float = 50.0
    n: float = 1.0


@dataclass(frozen=True)
class ActuatorSection:
    pole_hz: float = 20.0
    damping: float = 0.7
    c_f: float = 0.0
    ideal: bool = False
    stroke: float = 0.5


@dataclass(frozen=True)
class LoadCellSection:
    plate_mass: float = 50.0
    noise_std: float = 1.0
    seed: int = 0
    accel_estimate: str = "second_difference"


@dataclass(frozen=True)
class DegradationSection:
    k0: float = 4.6e4
    A0: float = 3.39e-5
    m: float = 2.37
    cov_k0: float = 0.10
    cov_A0: float = 0.05
    cov_m: float = 0.05


@dataclass(frozen=True)
class CampaignSection:
    n_specimens: int = 12
    dT: float = 1.0
    T_max: float = 200.0
    scan: str = "exhaustive"
    coarse_factor: int = 8
    workers: int = 1


@dataclass(frozen=True)
class RunSection:
    seed: int = 0
    output_dir: str | None = None


@dataclass(frozen=True)
class RunConfig:
    building: BuildingSection = BuildingSection()
    isolator: IsolatorSection = IsolatorSection()
    actuator: ActuatorSection = ActuatorSection()
    load_cell: LoadCellSection = LoadCellSection()
    controller: ControllerConfig = ControllerConfig()
    engine: EngineConfig = EngineConfig()
    degradation: DegradationSection = DegradationSection()
    thresholds: Thresholds = Thresholds()
    campaign: CampaignSection = CampaignSection()
    motion: MotionSpec = MotionSpec()
    run: RunSection = RunSection()
    source: str | None = field(default=None, compare=False)

    # --- domain objects ---------------------------------------------------

    def structure(self) -> BuildingModel:
        b = self.building
        return BuildingModel(
            masses=b.masses,
            story_stiffnesses=b.story_stiffnesses,
            damping=ModalDamping(tuple(b.damping_ratios), tuple(b.damping_modes), b.damping_kind),
            story_height=b.story_height,
        )

    def degradation_model(self) -> DegradationModel:
        d = self.degradation
        return DegradationModel(d.k0, d.A0, d.m)

    def sampler(self) -> SpecimenSampler:
        d = self.degradation
        return SpecimenSampler(self.degradation_model(), d.cov_k0, d.cov_A0, d.cov_m, self.run.seed)

    def plant(self) -> VirtualPlant:
        iso = BoucWenIsolator(k=self.degradation.k0, **asdict(self.isolator))
        a = self.actuator
        return VirtualPlant(
            isolator=iso,
            actuator=ActuatorModel.from_poles(a.pole_hz, a.damping, a.c_f),
            load_cell=LoadCellModel(self.load_cell.plate_mass, self.load_cell.noise_std,
                                    self.load_cell.seed),
            ideal_actuator=a.ideal,
            accel_estimate=self.load_cell.accel_estimate,
            stroke=a.stroke,
        )

    def ground_motion(self) -> GroundMotion:
        return motion_from_spec(self.motion)

    def scenario(self) -> Scenario:
        return Scenario(self.structure(), self.plant(), self.controller, self.ground_motion(),
                        self.thresholds, self.engine)

    def campaign_config(self, **overrides) -> CampaignConfig:
        c = replace(self.campaign, **overrides)
        return CampaignConfig(
            n_specimens=c.n_specimens, dT=c.dT, T_max=c.T_max, seed=self.run.seed,
            scenario=self.scenario(), sampler=self.sampler(), scan=c.scan,
            coarse_factor=c.coarse_factor, workers=c.workers,
        )

    def output_dir(self, override: str | None = None) -> Path:
        for cand in (override, self.run.output_dir, os.environ.get(OUTPUT_DIR_ENV)):
            if cand:
                return Path(cand)
        return Path("rthsdeg-out")

    def validate(self) -> "RunConfig":
        """Build every domain object once so invalid values fail before any run."""
        try:
            self.structure()
            self.plant()
            self.sampler()
            if self.motion.path is not None and not Path(self.motion.path).is_file():
                raise ConfigError(f"motion file {self.motion.path!r} does not exist")
            c = self.campaign
            CampaignConfig(n_specimens=c.n_specimens, dT=c.dT, T_max=c.T_max, scan=c.scan,
                           coarse_factor=c.coarse_factor, workers=c.workers,
                           scenario=Scenario(motion=GroundMotion(self.engine.dt, [0.0, 0.0])))
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def as_dict(self) -> dict:
        return {f.name: _plain(asdict(getattr(self, f.name))) for f in fields(self) if f.name != "source"}

    def hash(self) -> str:
        """Hash of every parameter (output directory excluded)."""
        d = self.as_dict()
        d["run"] = {k: v for k, v in d["run"].items() if k != "output_dir"}
        return config_hash(d)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


_SECTIONS = {f.name: f for f in fields(RunConfig) if f.name != "source"}


def _parse_ini_value(raw: str):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        pass
    if raw.lower() in ("none", "null", ""):
        return None
    if raw.lower() in ("true", "false", "yes", "no", "on", "off"):
        return raw.lower() in ("true", "yes", "on")
    if "," in raw:
        return [_parse_ini_value(p) for p in raw.split(",")]
    return raw


def _coerce(section: str, key: str, value, default):
    where = f"[{section}] {key}"
    if value is None:
        return None
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(default, tuple):
        items = value if isinstance(value, (list, tuple)) else [value]
        kind = type(default[0]) if default else float
        return tuple(_coerce(section, key, v, kind(0)) for v in items)
    if isinstance(default, int) and not isinstance(value, bool):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float) or (default is None and isinstance(value, (int, float))):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{where}: value must be finite")
        return float(value)
    return value


def from_mapping(data: dict, source: str | None = None) -> RunConfig:
    """RunConfig from ``{section: {key: value}}``; unknown names are errors."""
    kwargs = {}
    for section, values in data.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"section [{section}] must be a table of keys")
        cls = _SECTIONS[section].default.__class__
        defaults = {f.name: getattr(_SECTIONS[section].default, f.name) for f in fields(cls)}
        parsed = {}
        for key, value in values.items():
            if key not in defaults:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            parsed[key] = _coerce(section, key, value, defaults[key])
        try:
            kwargs[section] = replace(_SECTIONS[section].default, **parsed)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[{section}]: {exc}") from exc
    return RunConfig(**kwargs, source=source).validate()


def load_config(path) -> RunConfig:
    """Read a ``.json`` file or an INI-style sectioned file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {str(path)!r} does not exist")
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    else:
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        try:
            cp.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from None
        data = {s: {k: _parse_ini_value(v) for k, v in cp.items(s)} for s in cp.sections()}
    return from_mapping(data, source=str(path))


def dump_ini(cfg: RunConfig) -> str:
    """INI text that :func:`load_config` reads back to an equal config."""
    lines = []
    for section, values in cfg.as_dict().items():
        lines.append(f"[{section}]")
        for k, v in values.items():
            lines.append(f"{k} = {json.dumps(v)}")
        lines.append("")
    return "\n".join(lines)
