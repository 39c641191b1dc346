"""Run configuration: a small YAML document with typed sections.

A run is described by seven sections: ``model`` (which chain and which
quench), ``coupling`` (the probe qubit), ``ladder`` (the clock
register), ``scan`` (grid axes to sweep), ``oracle`` (finite-size
check settings), ``mc`` (trajectory sampling) and ``output``.  Every
key has a default, so a config file only states what differs; command
line ``--set section.key=value`` assignments override file values.

:func:`parse_config` and :func:`emit_config` are exact inverses: the
emitted document always lists every key, so ``parse(emit(c)) == c``
for any config object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Any

import yaml

from .clock import LadderSpec
from .errors import ConfigError
from .rates import QubitCoupling
from .spectra import ModelKind, QuenchSpec

FORMATS = ("csv", "json")
MODEL_KINDS = ("ising", "xx_ring")


@dataclass(frozen=True)
class ModelConfig:
    """Chain kind and quench parameters; only the kind's own keys matter."""

    kind: str = "ising"
    h_i: float = 0.5
    h_f: float = 1.5
    kappa: float = 1.0
    v_i: float = -1.0
    v_f: float = 1.0
    t: float = 1.0


@dataclass(frozen=True)
class CouplingConfig:
    epsilon0: float = 2.5
    g_obs: float = 0.1
    L: int = 512


@dataclass(frozen=True)
class LadderConfig:
    """Register settings; ``gamma: null`` and ``epsilon_w: null`` defer to
    the fast-reset default and the probe gap respectively."""

    d: int = 10
    g: float = 0.01
    gamma: float | None = None
    epsilon_w: float | None = None


@dataclass(frozen=True)
class AxisSpec:
    """One scan axis: ``steps`` points from ``min`` to ``max`` inclusive."""

    name: str
    min: float
    max: float
    steps: int


@dataclass(frozen=True)
class OracleConfig:
    L_oracle: int = 4096
    eta: float = 1e-3
    kernel: str = "lorentzian"


@dataclass(frozen=True)
class McConfig:
    n_trajectories: int = 0
    seed: int = 1


@dataclass(frozen=True)
class OutputConfig:
    path: str | None = None
    format: str = "csv"
    precision: int = 12


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    coupling: CouplingConfig = field(default_factory=CouplingConfig)
    ladder: LadderConfig = field(default_factory=LadderConfig)
    scan: tuple[AxisSpec, ...] = ()
    oracle: OracleConfig = field(default_factory=OracleConfig)
    mc: McConfig = field(default_factory=McConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def quench(self) -> QuenchSpec:
        m = self.model
        if m.kind == "ising":
            return QuenchSpec.ising(h_i=m.h_i, h_f=m.h_f, kappa=m.kappa)
        return QuenchSpec.xx_ring(V_i=m.v_i, V_f=m.v_f, t=m.t)

    def probe(self) -> QubitCoupling:
        c = self.coupling
        return QubitCoupling(epsilon0=c.epsilon0, g_obs=c.g_obs, L=c.L)

    def ladder_spec(self) -> LadderSpec:
        lad = self.ladder
        eps_w = lad.epsilon_w if lad.epsilon_w is not None else self.coupling.epsilon0
        return LadderSpec(d=lad.d, epsilon_w=eps_w, g=lad.g, Gamma=lad.gamma)


# Sweepable / settable leaf parameters: name -> (section, field, type, kind).
# ``kind`` restricts model parameters to the matching chain.
SWEEPABLE: dict[str, tuple[str, str, type, str | None]] = {
    "h_i": ("model", "h_i", float, "ising"),
    "h_f": ("model", "h_f", float, "ising"),
    "kappa": ("model", "kappa", float, "ising"),
    "v_i": ("model", "v_i", float, "xx_ring"),
    "v_f": ("model", "v_f", float, "xx_ring"),
    "t": ("model", "t", float, "xx_ring"),
    "epsilon0": ("coupling", "epsilon0", float, None),
    "g_obs": ("coupling", "g_obs", float, None),
    "L": ("coupling", "L", int, None),
    "d": ("ladder", "d", int, None),
    "g": ("ladder", "g", float, None),
    "gamma": ("ladder", "gamma", float, None),
    "epsilon_w": ("ladder", "epsilon_w", float, None),
}

_SECTIONS = {
    "model": ModelConfig,
    "coupling": CouplingConfig,
    "ladder": LadderConfig,
    "oracle": OracleConfig,
    "mc": McConfig,
    "output": OutputConfig,
}


def _need_number(where: str, value: Any) -> float:
    # YAML booleans are ints in Python; reject them for numeric keys.
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{where}: expected a finite number, got {value!r}")
    return v


def _need_int(where: str, value: Any) -> int:
    v = _need_number(where, value)
    if v != int(v):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return int(v)


def _need_str(where: str, value: Any) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    return value


_OPTIONAL_FLOATS = {("ladder", "gamma"), ("ladder", "epsilon_w")}
_OPTIONAL_STRS = {("output", "path")}


def _build_section(name: str, cls: type, raw: Any) -> Any:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected a mapping, got {raw!r}")
    defaults = cls()
    valid = {f.name for f in fields(cls)}
    kwargs: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in valid:
            raise ConfigError(f"{name}.{key}: unknown key")
        where = f"{name}.{key}"
        if (name, key) in _OPTIONAL_FLOATS:
            kwargs[key] = None if value is None else _need_number(where, value)
        elif (name, key) in _OPTIONAL_STRS:
            kwargs[key] = None if value is None else _need_str(where, value)
        else:
            # The default value carries the target type (int before float:
            # bool is excluded inside the numeric checks).
            d = getattr(defaults, key)
            if isinstance(d, int):
                kwargs[key] = _need_int(where, value)
            elif isinstance(d, float):
                kwargs[key] = _need_number(where, value)
            else:
                kwargs[key] = _need_str(where, value)
    return cls(**kwargs)


def _build_axes(raw: Any) -> tuple[AxisSpec, ...]:
    if raw is None:
        return ()
    if isinstance(raw, dict):
        raw = raw.get("axes", [])
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise ConfigError(f"scan.axes: expected a list, got {raw!r}")
    axes = []
    for i, entry in enumerate(raw):
        where = f"scan.axes[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where}: expected a mapping, got {entry!r}")
        extra = set(entry) - {"name", "min", "max", "steps"}
        if extra:
            raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
        try:
            name = entry["name"]
            lo = entry["min"]
            hi = entry["max"]
            steps = entry["steps"]
        except KeyError as exc:
            raise ConfigError(f"{where}: missing key {exc.args[0]!r}") from None
        if not isinstance(name, str):
            raise ConfigError(f"{where}.name: expected a string, got {name!r}")
        axes.append(AxisSpec(name=name,
                             min=_need_number(f"{where}.min", lo),
                             max=_need_number(f"{where}.max", hi),
                             steps=_need_int(f"{where}.steps", steps)))
    return tuple(axes)


def _validate(config: RunConfig) -> RunConfig:
    if config.model.kind not in MODEL_KINDS:
        raise ConfigError(
            f"model.kind: must be one of {MODEL_KINDS}, got {config.model.kind!r}")
    if config.output.format not in FORMATS:
        raise ConfigError(
            f"output.format: must be one of {FORMATS}, got {config.output.format!r}")
    if not (6 <= config.output.precision <= 17):
        raise ConfigError(
            f"output.precision: must be in [6, 17], got {config.output.precision}")
    if not (0 <= config.mc.seed < 2**64):
        raise ConfigError(f"mc.seed: must fit in a u64, got {config.mc.seed}")
    if config.mc.n_trajectories < 0:
        raise ConfigError(
            f"mc.n_trajectories: must be >= 0, got {config.mc.n_trajectories}")
    for axis in config.scan:
        if axis.name not in SWEEPABLE:
            raise ConfigError(
                f"scan.axes: unknown parameter {axis.name!r}; "
                f"choose from {sorted(SWEEPABLE)}")
        kind = SWEEPABLE[axis.name][3]
        if kind is not None and kind != config.model.kind:
            raise ConfigError(
                f"scan.axes: parameter {axis.name!r} belongs to the "
                f"{kind!r} model, but model.kind is {config.model.kind!r}")
        if axis.steps < 1:
            raise ConfigError(
                f"scan.axes: steps must be >= 1 for {axis.name!r}, got {axis.steps}")
    return config


def parse_config(text: str) -> RunConfig:
    """Read a YAML document into a validated :class:`RunConfig`."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"top level: expected a mapping, got {raw!r}")
    unknown = set(raw) - set(_SECTIONS) - {"scan"}
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    sections = {name: _build_section(name, cls, raw.get(name))
                for name, cls in _SECTIONS.items()}
    return _validate(RunConfig(scan=_build_axes(raw.get("scan")), **sections))


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text)


def _to_raw(config: RunConfig) -> dict[str, Any]:
    raw: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        section = getattr(config, name)
        raw[name] = {f.name: getattr(section, f.name) for f in fields(cls)}
    raw["scan"] = {"axes": [
        {"name": a.name, "min": a.min, "max": a.max, "steps": a.steps}
        for a in config.scan]}
    return raw


def emit_config(config: RunConfig) -> str:
    """Serialize a config back to YAML, listing every key explicitly."""
    return yaml.safe_dump(_to_raw(config), sort_keys=False, default_flow_style=False)


def apply_overrides(config: RunConfig, assignments: list[str]) -> RunConfig:
    """Apply ``section.key=value`` assignments on top of a config.

    Values are parsed as YAML scalars, so ``gamma=null`` clears an
    optional and ``scan.axes=[{name: h_f, min: 0.1, max: 3, steps: 5}]``
    replaces the whole axis list.
    """
    raw = _to_raw(config)
    for item in assignments:
        path, sep, text = item.partition("=")
        if not sep:
            raise ConfigError(f"--set {item!r}: expected section.key=value")
        try:
            value = yaml.safe_load(text) if text != "" else None
        except yaml.YAMLError as exc:
            raise ConfigError(f"--set {item!r}: bad value: {exc}") from exc
        parts = path.strip().split(".")
        if parts == ["scan", "axes"] or parts == ["scan"]:
            raw["scan"] = {"axes": value} if parts == ["scan", "axes"] else value
            continue
        if len(parts) != 2:
            raise ConfigError(f"--set {item!r}: expected section.key=value")
        section, key = parts
        if section not in raw or not isinstance(raw[section], dict):
            raise ConfigError(f"--set {item!r}: unknown section {section!r}")
        if key not in raw[section]:
            raise ConfigError(f"--set {item!r}: unknown key {section}.{key}")
        raw[section][key] = value
    return parse_config(yaml.safe_dump(raw, sort_keys=False))
