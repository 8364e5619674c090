"""
Run configuration: an INI file with flat sections plus ``--set`` overrides.

Example::

    [params]
    preset = sun-jupiter
    q1 = 0.75
    a2 = 0.05
    mb = 0.4
    t_belt = 0.01

    [integrator]
    t_end = 3000

    [run]
    point = L1
    epsilon = 0.001
    phi = 45
    phi_units = deg

    [sweep]
    axes = q1, mb
    q1 = 0.5, 0.75, 1.0
    mb = 0.25:0.5:5
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import ConfigError, IntegratorConfig
from .equilibria import PointIndex
from .model import PRESETS, DomainError, State, SystemParams, make_params
from .stability import DEFAULT_T_END, SWEEP_AXES, Perturbation

SECTIONS = ("params", "integrator", "run", "sweep", "output")

KNOWN_KEYS = {
    "params": ("preset", "mu", "q1", "a2", "mb", "t_belt"),
    "integrator": ("t_end", "rel_tol", "abs_tol", "max_step", "escape_radius", "sample_interval"),
    "run": ("point", "epsilon", "phi", "phi_units", "x0", "y0", "vx0", "vy0", "recompute"),
    "sweep": ("axes",) + SWEEP_AXES,
    "output": ("plots",),
}

# Bare ``--set`` keys resolve to the first section that knows them.
_BARE = {}
for _section, _keys in KNOWN_KEYS.items():
    for _k in _keys:
        _BARE.setdefault(_k, _section)

DEFAULT_T_END_BY_COMMAND = {
    "trajectory": 100.0,
    "perturb": DEFAULT_T_END,
    "sweep": DEFAULT_T_END,
}


@dataclass
class RunConfig:
    """Raw string values by section, plus the objects they resolve to."""

    command: str
    raw: dict
    source: bytes = b""
    params: SystemParams | None = None
    integrator: IntegratorConfig | None = None
    point: PointIndex | None = None
    initial: State | None = None
    perturbation: Perturbation | None = None
    recompute: bool = True
    axes: dict = field(default_factory=dict)
    plots: bool = True

    def resolved(self) -> dict:
        """Fully expanded configuration, as recorded in the manifest."""
        out = {"command": self.command}
        if self.params is not None:
            out["params"] = self.params.as_dict()
        if self.integrator is not None:
            out["integrator"] = self.integrator.as_dict()
        run = {}
        if self.point is not None:
            run["point"] = self.point.value
        if self.initial is not None:
            run["initial"] = [self.initial.x, self.initial.y, self.initial.vx, self.initial.vy]
        if self.perturbation is not None:
            run["epsilon"] = self.perturbation.epsilon
            run["phi"] = self.perturbation.phi
        if self.command in ("perturb", "sweep"):
            run["recompute"] = self.recompute
        if run:
            out["run"] = run
        if self.axes:
            out["sweep"] = {"axes": list(self.axes), **{k: list(v) for k, v in self.axes.items()}}
        out["plots"] = self.plots
        return out


def read_config(path) -> tuple[dict, bytes]:
    if path is None:
        return {s: {} for s in SECTIONS}, b""
    path = Path(path)
    try:
        source = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(source.decode("utf-8"), source=str(path))
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    raw = {s: {} for s in SECTIONS}
    for section in parser.sections():
        if section not in KNOWN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in parser.items(section):
            if key not in KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            raw[section][key] = value
    return raw, source


def apply_overrides(raw: dict, overrides) -> dict:
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if "." in key:
            section, name = key.split(".", 1)
        else:
            section, name = _BARE.get(key), key
        if section not in KNOWN_KEYS or name not in KNOWN_KEYS[section]:
            raise ConfigError(f"unknown configuration key {key!r}")
        raw[section][name] = value.strip()
    return raw


def _float(raw, section, key, default=None):
    text = raw[section].get(key)
    if text is None:
        return default
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{section}.{key}={text!r} is not a number") from None
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key}={text!r} is not finite")
    return value


def _bool(raw, section, key, default):
    text = raw[section].get(key)
    if text is None:
        return default
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{section}.{key}={text!r} is not a boolean")


def parse_axis(name: str, text: str) -> list[float]:
    """``a, b, c`` or ``start:stop:num`` (inclusive linspace)."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
            if num < 1:
                raise ValueError
            return [float(v) for v in np.linspace(start, stop, num)]
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"sweep.{name}={text!r}: expected 'a, b, c' or 'start:stop:num'") from None
    if not values:
        raise ConfigError(f"sweep.{name} is empty")
    return values


def build(command: str, raw: dict, source: bytes = b"", plots: bool | None = None) -> RunConfig:
    """Validate everything the command needs; raises ``ConfigError``."""
    cfg = RunConfig(command=command, raw=raw, source=source)
    p = raw["params"]
    preset = p.get("preset")
    mu = _float(raw, "params", "mu")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; expected one of {sorted(PRESETS)}")
        if mu is not None and mu != PRESETS[preset]:
            raise ConfigError(f"params.mu={mu} conflicts with preset {preset!r}")
        mu = PRESETS[preset]
    if mu is None:
        mu = PRESETS["sun-earth"]
    try:
        cfg.params = make_params(
            mu,
            q1=_float(raw, "params", "q1", 1.0),
            a2=_float(raw, "params", "a2", 0.0),
            mb=_float(raw, "params", "mb", 0.0),
            t_belt=_float(raw, "params", "t_belt", 0.01),
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    cfg.plots = _bool(raw, "output", "plots", True) if plots is None else plots
    if command == "locate":
        return cfg

    integ = {
        k: _float(raw, "integrator", k)
        for k in KNOWN_KEYS["integrator"]
        if raw["integrator"].get(k) is not None
    }
    integ.setdefault("t_end", DEFAULT_T_END_BY_COMMAND[command])
    cfg.integrator = IntegratorConfig(**integ)

    run = raw["run"]
    try:
        cfg.point = PointIndex(run.get("point", "L1").strip().upper())
    except ValueError:
        raise ConfigError(f"run.point={run.get('point')!r}: expected L1..L5") from None

    explicit = [k for k in ("x0", "y0", "vx0", "vy0") if k in run]
    if explicit:
        if command != "trajectory":
            raise ConfigError("explicit initial state (run.x0 ...) is only valid for 'trajectory'")
        if "x0" not in run or "y0" not in run:
            raise ConfigError("explicit initial state needs at least run.x0 and run.y0")
        cfg.initial = State(
            0.0,
            _float(raw, "run", "x0"),
            _float(raw, "run", "y0"),
            _float(raw, "run", "vx0", 0.0),
            _float(raw, "run", "vy0", 0.0),
        )

    units = run.get("phi_units", "rad").strip().lower()
    if units not in ("rad", "deg"):
        raise ConfigError(f"run.phi_units={units!r}: expected 'rad' or 'deg'")
    if command in ("perturb", "sweep") or "epsilon" in run:
        eps = _float(raw, "run", "epsilon", 0.001)
        phi = _float(raw, "run", "phi")
        try:
            if phi is None:
                cfg.perturbation = Perturbation(eps, math.pi / 4)
            elif units == "deg":
                cfg.perturbation = Perturbation.from_degrees(eps, phi)
            else:
                cfg.perturbation = Perturbation(eps, phi)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
    cfg.recompute = _bool(raw, "run", "recompute", True)

    if command == "sweep":
        cfg.axes = _build_axes(raw, units)
    return cfg


def _build_axes(raw, phi_units) -> dict:
    s = raw["sweep"]
    names = [a.strip() for a in s.get("axes", "").split(",") if a.strip()]
    if not 1 <= len(names) <= 2:
        raise ConfigError("sweep.axes must name one or two of " + ", ".join(SWEEP_AXES))
    if len(set(names)) != len(names):
        raise ConfigError("sweep.axes repeats an axis")
    axes = {}
    for name in names:
        if name not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {name!r}")
        if name not in s:
            raise ConfigError(f"sweep.{name} values missing")
        values = parse_axis(name, s[name])
        if name == "phi" and phi_units == "deg":
            values = [math.radians(v) for v in values]
        for v in values:
            if name == "q1" and not 0.0 < v <= 1.0:
                raise ConfigError(f"sweep.q1 value {v} outside (0, 1]")
            if name in ("a2", "mb") and v < 0.0:
                raise ConfigError(f"sweep.{name} value {v} is negative")
            if name == "epsilon" and not 0.0 <= v < 1.0:
                raise ConfigError(f"sweep.epsilon value {v} outside [0, 1)")
        axes[name] = values
    return axes
