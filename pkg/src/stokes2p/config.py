"""Strict YAML run configuration.

Every section maps to a dataclass; unknown keys, wrong types and violated
invariants raise :class:`ConfigError`, which the CLI turns into exit code 2.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields

import numpy as np
import yaml


class ConfigError(ValueError):
    """Invalid configuration."""


def _complex(v, where):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(c, (int, float)) for c in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{where}: expected a number or [re, im], got {v!r}")


@dataclass
class FluidSection:
    rho_plus: float = 1.0
    rho_minus: float = 2.0
    mu_plus: float = 1.0
    mu_minus: float = 2.0
    c_sigma: float = 1.0
    c_g: float = 1.0


@dataclass
class SectorSection:
    n: int = 3
    epsilon: float = float(np.pi / 4)
    eta: float = float(np.pi / 16)
    gamma0: float = 1.0
    n_radii: int = 8
    n_angles: int = 5
    n_xi_radii: int = 10
    n_xi_angles: int = 5
    n_xn: int = 5
    radius_range: list = field(default_factory=lambda: [1.0, 1e4])
    xi_range: list = field(default_factory=lambda: [1e-3, 1e3])
    xn_range: list = field(default_factory=lambda: [1e-3, 1e2])
    jitter: float = 0.1


@dataclass
class ToleranceSection:
    ceiling: float = 1e6
    floor: float = 1e-6
    residual: float = 1e-8
    round_trip: float = 1e-4
    causality: float = 1e-3
    slope: float = 0.05
    spread: float = 10.0


@dataclass
class GridSection:
    n: int = 2
    N: list = field(default_factory=lambda: [8])
    L: list = field(default_factory=lambda: [1.0])
    X: float = 30.0
    Nv: int = 128
    beta: float = 6.0
    Nz: int = 32


@dataclass
class ProblemSection:
    surface: bool = False
    lam: list = field(default_factory=lambda: [[1.0, 1.0]])
    q: float = 2.0
    extension: object = "adaptive"
    dump_fields: bool = False


@dataclass
class DataSection:
    modes: list = field(default_factory=lambda: [{"k": [1], "g1": 1.0, "h2": 1.0, "d": 0.5}])
    file: str | None = None
    force: list = field(default_factory=list)


@dataclass
class ContourSection:
    gamma: float = 1.0
    nodes: int = 2048
    tau_max: float = 536.0


@dataclass
class TimeSection:
    T: float = 6.0
    N_t: int = 8193


@dataclass
class ProfileSection:
    kind: str = "ramp"
    rate: float = 1.0


@dataclass
class SweepSection:
    rays: list = field(default_factory=lambda: [0.0, float(3 * np.pi / 8), float(-3 * np.pi / 8)])
    r_min: float = 1e-2
    r_max: float = 1e4
    count: int = 25
    Nv: int = 600
    beta: float = 14.0
    X: float = 40.0


@dataclass
class RunConfig:
    seed: int = 0
    fluid: FluidSection = field(default_factory=FluidSection)
    sector: SectorSection = field(default_factory=SectorSection)
    tolerances: ToleranceSection = field(default_factory=ToleranceSection)
    grid: GridSection = field(default_factory=GridSection)
    problem: ProblemSection = field(default_factory=ProblemSection)
    data: DataSection = field(default_factory=DataSection)
    contour: ContourSection = field(default_factory=ContourSection)
    time: TimeSection = field(default_factory=TimeSection)
    profile: ProfileSection = field(default_factory=ProfileSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _coerce(value, default, where):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected a boolean")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number")
        return float(value)
    if isinstance(default, list) and not isinstance(value, list):
        raise ConfigError(f"{where}: expected a list")
    return value


def _build(cls, raw, where):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    obj = cls()
    for k, v in raw.items():
        default = getattr(obj, k)
        if dataclasses.is_dataclass(default):
            setattr(obj, k, _build(type(default), v, f"{where}.{k}"))
        else:
            setattr(obj, k, _coerce(v, default, f"{where}.{k}"))
    return obj


def parse_config(raw: dict | None) -> RunConfig:
    cfg = _build(RunConfig, raw or {}, "config")
    validate(cfg)
    return cfg


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return parse_config({})
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(raw)


def validate(cfg: RunConfig) -> None:
    """Translate the invariants of every component into configuration errors."""
    from . import certifier, grid, symbols

    try:
        symbols.FluidParams(**dataclasses.asdict(cfg.fluid))
        certifier.SectorSampling(**sector_kwargs(cfg))
        grid.GridSpec(**grid_kwargs(cfg))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    for i, v in enumerate(cfg.problem.lam):
        lam = _complex(v, f"problem.lam[{i}]")
        if not symbols.in_sector(lam, cfg.sector.epsilon):
            raise ConfigError(f"problem.lam[{i}] = {lam} lies outside the resolvent sector")
    if cfg.problem.q < 1:
        raise ConfigError("problem.q must be >= 1")
    ext = cfg.problem.extension
    if ext not in ("adaptive", "tangential") and not (isinstance(ext, (int, float)) and ext > 0):
        raise ConfigError("problem.extension must be 'adaptive', 'tangential' or a positive rate")
    if cfg.contour.nodes < 2 or cfg.contour.nodes % 2 or cfg.contour.gamma <= 0 or cfg.contour.tau_max <= 0:
        raise ConfigError("contour needs an even node count and positive gamma, tau_max")
    if cfg.time.T <= 0 or cfg.time.N_t < 2:
        raise ConfigError("time needs T > 0 and N_t >= 2")
    if cfg.profile.kind not in ("step", "step_exp", "ramp", "bump"):
        raise ConfigError(f"profile.kind {cfg.profile.kind!r} not recognised")
    sw = cfg.sweep
    if not 0 < sw.r_min <= sw.r_max or sw.count < 1 or sw.Nv < 4 or sw.X <= 0:
        raise ConfigError("sweep needs 0 < r_min <= r_max, count >= 1, Nv >= 4 and X > 0")
    for a in sw.rays:
        if not isinstance(a, (int, float)) or abs(a) >= np.pi - cfg.sector.epsilon:
            raise ConfigError(f"sweep ray {a!r} outside the sector")
    for i, m in enumerate(cfg.data.modes):
        if not isinstance(m, dict) or "k" not in m:
            raise ConfigError(f"data.modes[{i}] needs a 'k' entry")
    for i, m in enumerate(cfg.data.force):
        if not isinstance(m, dict) or set(m) != {"k", "f"}:
            raise ConfigError(f"data.force[{i}] needs exactly 'k' and 'f'")


def sector_kwargs(cfg: RunConfig) -> dict:
    s = dataclasses.asdict(cfg.sector)
    for k in ("radius_range", "xi_range", "xn_range"):
        s[k] = tuple(s[k])
    return s


def grid_kwargs(cfg: RunConfig) -> dict:
    g = dataclasses.asdict(cfg.grid)
    g["N"], g["L"] = tuple(g["N"]), tuple(g["L"])
    return g


def lam_list(cfg: RunConfig) -> list:
    return [_complex(v, "problem.lam") for v in cfg.problem.lam]


def complex_entry(v, where):
    return _complex(v, where)
