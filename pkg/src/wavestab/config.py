"""Scenario files: flat ``key = value`` text with dotted section prefixes.

Example::

    # decay sweep
    reproduction = true
    problem.a = 1.0
    problem.p = 0.5
    problem.horizon = 40
    problem.c.family = trig
    problem.c.t_freq = 1.0
    data.w0.family = random
    data.w0.seed = 7
    data.w1.family = random
    data.w1.seed = 8
    grid.N = 100
    run.epsilons = 0.1, 0.01, 0.001
    run.window = 3, 35

Every key is checked against a fixed schema before anything is computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coefficients import Constant, GaussianBump, SampledGrid, SeparableTrig, Zero
from .core import Orientation, ProblemSpec
from .errors import ConfigError, WavestabError
from .families import make_family

__all__ = ["ScenarioConfig", "parse_config", "load_config", "COMMAND_KEYS"]


def _float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _int(text):
    v = float(text)
    if v != int(v):
        raise ValueError("not an integer")
    return int(v)


def _bool(text):
    t = text.lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError("expected true or false")


def _floats(text):
    return [_float(s) for s in text.split(",") if s.strip()]


def _ints(text):
    return [_int(s) for s in text.split(",") if s.strip()]


def _pair(text):
    v = _floats(text)
    if len(v) != 2 or not v[0] < v[1]:
        raise ValueError("expected 'lo, hi' with lo < hi")
    return tuple(v)


def _choice(*options):
    def parse(text):
        if text.lower() not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text.lower()

    return parse


_COEF_KEYS = {
    "family": _choice("zero", "constant", "trig", "gaussian", "sampled"),
    "value": _float,
    "amplitude": _float,
    "wavenumber": _float,   # x frequency in units of pi
    "t_freq": _float,
    "center": _float,
    "width": _float,
    "file": str,
    "t_max": _float,
}

_DATA_KEYS = {
    "family": _choice("zero", "sine", "hat", "step", "random"),
    "k": _float,
    "center": _float,
    "width": _float,
    "edge": _float,
    "seed": _int,
    "smoothness": _float,
}

SCHEMA = {
    "reproduction": _bool,
    "problem.a": _float,
    "problem.p": _float,
    "problem.orientation": _choice("left", "right"),
    "problem.horizon": _float,
    **{f"problem.c.{k}": v for k, v in _COEF_KEYS.items()},
    **{f"problem.a1.{k}": v for k, v in _COEF_KEYS.items()},
    **{f"data.w0.{k}": v for k, v in _DATA_KEYS.items()},
    **{f"data.w1.{k}": v for k, v in _DATA_KEYS.items()},
    "data.mollify": _int,
    "grid.N": _int,
    "grid.record_every": _int,
    "run.snapshots": _ints,
    "run.tol": _float,
    "run.floor": _float,
    "run.window": _pair,
    "run.epsilons": _floats,
    "run.N_list": _ints,
    "run.times": _floats,
    "run.l_list": _ints,
    "run.t_start": _float,
    "run.T_end": _float,
    "run.max_iter": _int,
    "output.dir": str,
    "output.emit_plots": _bool,
    "output.figures": _bool,
    "forcing.manufactured": _bool,
}

_BASE = ("problem.a", "problem.horizon")
COMMAND_KEYS = {
    "solve": _BASE + ("grid.N",),
    "extinction": _BASE + ("grid.N",),
    "decay-sweep": _BASE + ("grid.N", "run.epsilons", "run.window"),
    "smoothing": _BASE + ("run.N_list", "run.times"),
    "verify": _BASE + ("run.N_list",),
    "mollify-study": _BASE + ("grid.N", "run.l_list"),
}


@dataclass
class ScenarioConfig:
    values: dict
    lines: dict = field(default_factory=dict)
    source: str = "<string>"

    def get(self, key, default=None):
        return self.values.get(key, default)

    def __contains__(self, key):
        return key in self.values

    def _fail(self, key, message):
        raise ConfigError(f"{key}: {message}", self.lines.get(key))

    def require(self, command):
        if command not in COMMAND_KEYS:
            raise ConfigError(f"unknown command {command!r}")
        for key in COMMAND_KEYS[command]:
            if key not in self.values:
                raise ConfigError(f"missing required key '{key}' for command {command}")
        if self.get("reproduction", False) and self.get("forcing.manufactured", False):
            self._fail("forcing.manufactured", "forcing is not allowed in a reproduction run")
        if command == "decay-sweep":
            eps = self.values["run.epsilons"]
            if len(set(eps)) != len(eps):
                self._fail("run.epsilons", "duplicate epsilon values")
            if any(e < 0 for e in eps):
                self._fail("run.epsilons", "epsilon must be >= 0")
        for key in ("run.N_list", "run.l_list"):
            v = self.values.get(key)
            if v is not None and any(b <= a for a, b in zip(v, v[1:])):
                self._fail(key, "must be strictly increasing")

    def coefficient(self, name, amplitude=None):
        prefix = f"problem.{name}."
        fam = self.get(prefix + "family", "zero")
        amp = self.get(prefix + "amplitude", 1.0) if amplitude is None else amplitude
        k = self.get(prefix + "wavenumber", 1.0)
        try:
            if fam == "zero":
                return Zero() if amplitude is None else Constant(amplitude)
            if fam == "constant":
                return Constant(self.get(prefix + "value", 0.0) if amplitude is None else amplitude)
            if fam == "trig":
                return SeparableTrig(amp, math.pi * k, self.get(prefix + "t_freq", 0.0))
            if fam == "gaussian":
                return GaussianBump(
                    amp,
                    self.get(prefix + "center", 0.5),
                    self.get(prefix + "width", 0.1),
                    self.get(prefix + "t_freq", 0.0),
                )
            path = self.get(prefix + "file")
            if path is None:
                self._fail(prefix + "file", "sampled coefficient needs a file")
            values = np.loadtxt(path, delimiter=",", ndmin=2)
            if amplitude is not None:
                values = values * amplitude
            return SampledGrid(values, self.get(prefix + "t_max", self.values["problem.horizon"]))
        except OSError as exc:
            self._fail(prefix + "file", str(exc))
        except WavestabError as exc:
            self._fail(prefix + "family", str(exc))

    def problem(self, c_amplitude=None, horizon=None):
        orient = Orientation(self.get("problem.orientation", "left"))
        try:
            return ProblemSpec(
                a=self.values["problem.a"],
                p=self.get("problem.p", 0.0),
                orientation=orient,
                c=self.coefficient("c", c_amplitude),
                a1=self.coefficient("a1"),
                horizon=self.values["problem.horizon"] if horizon is None else horizon,
            )
        except WavestabError as exc:
            raise ConfigError(str(exc), self.lines.get("problem.a")) from exc

    def family(self, which):
        prefix = f"data.{which}."
        name = self.get(prefix + "family", "zero")
        allowed = {
            "zero": (),
            "sine": ("k",),
            "hat": ("center", "width"),
            "step": ("edge",),
            "random": ("seed", "smoothness"),
        }[name]
        params = {}
        for key in _DATA_KEYS:
            full = prefix + key
            if key == "family" or full not in self.values:
                continue
            if key not in allowed:
                self._fail(full, f"not a parameter of the {name} family")
            params[key] = self.values[full]
        try:
            return make_family(name, **params)
        except WavestabError as exc:
            self._fail(prefix + "family", str(exc))


def parse_config(text, source="<string>"):
    values, lines = {}, {}
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", num)
        key, _, val = (s.strip() for s in line.partition("="))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key '{key}'", num)
        if key in values:
            raise ConfigError(f"duplicate key '{key}' (first set on line {lines[key]})", num)
        if not val:
            raise ConfigError(f"empty value for '{key}'", num)
        try:
            values[key] = SCHEMA[key](val)
        except ValueError as exc:
            raise ConfigError(f"bad value {val!r} for '{key}': {exc}", num) from None
        lines[key] = num
    return ScenarioConfig(values, lines, source)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))
