"""Declarative scenario configuration.

A scenario file is YAML with nested sections. It may start from a named
preset (``preset: harmonic`` or ``preset: flutter``) and override any subset
of keys. Unknown keys, wrong types and violated preconditions are rejected
at parse time with the line number of the offending entry.

Example::

    preset: flutter
    actuator:
      x_c: 0.9
    sysid:
      seed: 3
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import lti
from .closed_loop import DisturbanceSpec
from .fem import AeroParams, BeamProperties, FemError
from .lti import DiscreteTf
from .synthesis import WEIGHT_PRESETS, WeightPair, weight_preset

__all__ = [
    "ConfigError",
    "SamplingSettings",
    "SysidSettings",
    "SynthesisSettings",
    "SimulationSettings",
    "SweepSettings",
    "ScenarioConfig",
    "PRESETS",
    "preset_dict",
    "load_config",
    "parse_config",
    "config_from_dict",
]


class ConfigError(ValueError):
    """Invalid scenario configuration; ``line`` is 1-based when known."""

    def __init__(self, msg: str, line: int | None = None, source: str | None = None):
        where = ""
        if source is not None or line is not None:
            where = f"{source or '<config>'}" + (f":{line}" if line is not None else "") + ": "
        super().__init__(where + msg)
        self.line = line
        self.source = source


# ---------------------------------------------------------------------------
# presets

PRESETS: dict[str, dict] = {
    "harmonic": {
        "name": "harmonic",
        "beam": {"E": 1e9, "nu": 0.3, "rho": 1.0, "zeta": 0.05, "h": 0.002, "L": 1.0,
                 "n_elements": 20, "bending_model": "plate", "membrane": "flexural"},
        "aero": {"enabled": False, "mach": 8.0, "lam": 600.0, "mu": 0.1, "gamma": 1.4,
                 "p_inf": 1.88, "a_inf": None},
        "sampling": {"Ts": 5e-3, "substeps": 10, "rho_inf": 0.8},
        "actuator": {"x_c": 1.0},
        "disturbance": {"kind": "harmonic", "amplitude": 1e-3, "frequency": math.pi / 3,
                        "patch": [0.7, 0.8], "impulse": 0.0, "impulse_time": 0.0},
        "sysid": {"seed": 0, "amplitude": 1e-3, "n_samples": 5000, "N": None,
                  "n_range": [1, 12], "rtol": 0.01, "include_disturbance": False},
        "synthesis": {"weights": "harmonic", "control_weight": 2.5, "noise_weight": 0.008,
                      "performance": "filtered", "measurement": "raw", "rel_gap": 0.01},
        "simulation": {"t_end": 10.0, "metric_start": 7.0},
        "sweep": {"x_c": [0.9, 0.7, 0.5], "patches": [[0.2, 0.3], [0.5, 0.6]],
                  "retain_factor": 5.0, "workers": 1},
        "output": {"dir": "out/harmonic"},
    },
    "flutter": {
        "name": "flutter",
        "beam": {"E": 1e9, "nu": 0.3, "rho": 1.0, "zeta": 0.05, "h": 0.002, "L": 1.0,
                 "n_elements": 20, "bending_model": "plate", "membrane": "von_karman"},
        "aero": {"enabled": True, "mach": 8.0, "lam": 600.0, "mu": 0.1, "gamma": 1.4,
                 "p_inf": 9.4, "a_inf": None},
        "sampling": {"Ts": 1e-3, "substeps": 5, "rho_inf": 0.8},
        "actuator": {"x_c": 1.0},
        "disturbance": {"kind": "impulse", "amplitude": 0.0, "frequency": 0.0,
                        "patch": [0.7, 0.8], "impulse": 1e-4, "impulse_time": 0.0},
        "sysid": {"seed": 0, "amplitude": 1e-3, "n_samples": 5000, "N": None,
                  "n_range": [1, 12], "rtol": 0.01, "include_disturbance": False},
        "synthesis": {"weights": "flutter", "control_weight": 3e-5, "noise_weight": 0.01,
                      "performance": "filtered", "measurement": "raw", "rel_gap": 0.01},
        "simulation": {"t_end": 2.0, "metric_start": 1.0},
        "sweep": {"x_c": [0.9, 0.7, 0.5], "patches": [], "retain_factor": 10.0,
                  "workers": 1},
        "output": {"dir": "out/flutter"},
    },
}


def preset_dict(name: str) -> dict:
    """Deep copy of a named preset as plain data."""
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# ---------------------------------------------------------------------------
# typed sections


@dataclass(frozen=True)
class SamplingSettings:
    Ts: float
    substeps: int
    rho_inf: float = 0.8

    @property
    def dt(self) -> float:
        return self.Ts / self.substeps


@dataclass(frozen=True)
class SysidSettings:
    seed: int = 0
    amplitude: float = 1e-3
    n_samples: int = 5000
    N: int | None = None
    n_range: tuple = (1, 12)
    rtol: float = 0.01
    include_disturbance: bool = False

    @property
    def orders(self) -> list[int]:
        lo, hi = self.n_range
        return list(range(lo, hi + 1))


@dataclass(frozen=True)
class SynthesisSettings:
    weights: WeightPair
    weights_spec: object
    control_weight: float
    noise_weight: float
    performance: str = "filtered"
    measurement: str = "raw"
    rel_gap: float = 0.01


@dataclass(frozen=True)
class SimulationSettings:
    t_end: float
    metric_start: float


@dataclass(frozen=True)
class SweepSettings:
    x_c: tuple
    patches: tuple
    retain_factor: float
    workers: int = 1


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario; ``data`` is the canonical plain-data form."""

    name: str
    beam: BeamProperties
    aero: AeroParams | None
    sampling: SamplingSettings
    x_c: float
    disturbance: DisturbanceSpec
    sysid: SysidSettings
    synthesis: SynthesisSettings
    simulation: SimulationSettings
    sweep: SweepSettings
    output_dir: str
    data: dict

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    @property
    def hash(self) -> str:
        """SHA-256 of the canonical JSON form (stable across runs and hosts)."""
        blob = json.dumps(self.data, sort_keys=True, separators=(",", ":"), allow_nan=False)
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, **section_updates) -> "ScenarioConfig":
        """New config with ``section={key: value}`` updates applied."""
        d = self.to_dict()
        for section, upd in section_updates.items():
            if isinstance(upd, dict):
                d.setdefault(section, {}).update(upd)
            else:
                d[section] = upd
        return config_from_dict(d)


# ---------------------------------------------------------------------------
# YAML with line tracking


def _to_plain(node, lines: dict, path: tuple):
    """Convert a composed YAML node to plain data, recording 1-based lines."""
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for knode, vnode in node.value:
            key = _to_plain(knode, {}, ())
            if not isinstance(key, str):
                raise ConfigError(f"mapping keys must be strings, got {key!r}",
                                  knode.start_mark.line + 1)
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", knode.start_mark.line + 1)
            lines[path + (key,)] = knode.start_mark.line + 1
            out[key] = _to_plain(vnode, lines, path + (key,))
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_plain(v, lines, path + (i,)) for i, v in enumerate(node.value)]
    return _scalar(node)


def _scalar(node):
    loader = yaml.SafeLoader("")
    try:
        return loader.construct_object(node, deep=True)
    finally:
        loader.dispose()


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "weights":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


# ---------------------------------------------------------------------------
# schema and coercion

_FLOAT, _INT, _BOOL, _STR = "float", "int", "bool", "str"

_SCHEMA: dict = {
    "name": _STR,
    "beam": {"E": _FLOAT, "nu": _FLOAT, "rho": _FLOAT, "zeta": _FLOAT, "h": _FLOAT,
             "L": _FLOAT, "n_elements": _INT, "bending_model": _STR, "membrane": _STR},
    "aero": {"enabled": _BOOL, "mach": _FLOAT, "lam": _FLOAT, "mu": _FLOAT, "gamma": _FLOAT,
             "p_inf": "float?", "a_inf": "float?"},
    "sampling": {"Ts": _FLOAT, "substeps": _INT, "rho_inf": _FLOAT},
    "actuator": {"x_c": _FLOAT},
    "disturbance": {"kind": _STR, "amplitude": _FLOAT, "frequency": _FLOAT, "patch": "pair",
                    "impulse": _FLOAT, "impulse_time": _FLOAT},
    "sysid": {"seed": _INT, "amplitude": _FLOAT, "n_samples": _INT, "N": "int?",
              "n_range": "pair_int", "rtol": _FLOAT, "include_disturbance": _BOOL},
    "synthesis": {"weights": "weights", "control_weight": _FLOAT, "noise_weight": _FLOAT,
                  "performance": _STR, "measurement": _STR, "rel_gap": _FLOAT},
    "simulation": {"t_end": _FLOAT, "metric_start": _FLOAT},
    "sweep": {"x_c": "floats", "patches": "pairs", "retain_factor": _FLOAT, "workers": _INT},
    "output": {"dir": _STR},
}


class _Ctx:
    def __init__(self, lines: dict, source: str | None):
        self.lines = lines
        self.source = source

    def line(self, path) -> int | None:
        path = tuple(path)
        while path and path not in self.lines:
            path = path[:-1]
        return self.lines.get(path)

    def fail(self, msg, path):
        dotted = ".".join(str(p) for p in path)
        raise ConfigError(f"{dotted}: {msg}" if dotted else msg, self.line(path), self.source)


def _num(v, ctx, path, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        ctx.fail(f"expected a number, got {v!r}", path)
    if integer:
        if isinstance(v, float) and not v.is_integer():
            ctx.fail(f"expected an integer, got {v!r}", path)
        return int(v)
    v = float(v)
    if not math.isfinite(v):
        ctx.fail("must be finite", path)
    return v


def _coerce(kind, v, ctx, path):
    if kind.endswith("?"):
        return None if v is None else _coerce(kind[:-1], v, ctx, path)
    if kind == _FLOAT:
        return _num(v, ctx, path)
    if kind == _INT:
        return _num(v, ctx, path, integer=True)
    if kind == _BOOL:
        if not isinstance(v, bool):
            ctx.fail(f"expected true/false, got {v!r}", path)
        return v
    if kind == _STR:
        if not isinstance(v, str):
            ctx.fail(f"expected a string, got {v!r}", path)
        return v
    if kind in ("pair", "pair_int"):
        if not isinstance(v, (list, tuple)) or len(v) != 2:
            ctx.fail(f"expected a two-element list, got {v!r}", path)
        return [_num(x, ctx, path + (i,), integer=kind == "pair_int") for i, x in enumerate(v)]
    if kind == "floats":
        if not isinstance(v, (list, tuple)):
            ctx.fail(f"expected a list, got {v!r}", path)
        return [_num(x, ctx, path + (i,)) for i, x in enumerate(v)]
    if kind == "pairs":
        if not isinstance(v, (list, tuple)):
            ctx.fail(f"expected a list of pairs, got {v!r}", path)
        return [_coerce("pair", x, ctx, path + (i,)) for i, x in enumerate(v)]
    if kind == "weights":
        if isinstance(v, str):
            return v
        if not isinstance(v, dict):
            ctx.fail("expected a preset name or a mapping with Wy and Wu", path)
        out = {}
        for key in v:
            if key not in ("Wy", "Wu"):
                ctx.fail(f"unknown key {key!r} (expected Wy, Wu)", path + (key,))
        for key in ("Wy", "Wu"):
            if key not in v:
                ctx.fail(f"missing {key}", path)
            w = v[key]
            if not isinstance(w, dict) or set(w) != {"num", "den"}:
                ctx.fail("expected a mapping with exactly num and den", path + (key,))
            coeffs = {}
            for c in ("num", "den"):
                if not isinstance(w[c], list) or not w[c]:
                    ctx.fail("expected a nonempty list", path + (key, c))
                coeffs[c] = [_num(x, ctx, path + (key, c, i)) for i, x in enumerate(w[c])]
            out[key] = coeffs
        return out
    raise AssertionError(kind)  # pragma: no cover


def _normalize(raw: dict, ctx: _Ctx) -> dict:
    if not isinstance(raw, dict):
        ctx.fail("top level must be a mapping", ())
    raw = dict(raw)
    base_name = raw.pop("preset", None)
    if base_name is not None and not isinstance(base_name, str):
        ctx.fail("preset must be a name", ("preset",))
    for key, val in raw.items():
        if key not in _SCHEMA:
            ctx.fail(f"unknown key {key!r}", (key,))
        if isinstance(_SCHEMA[key], dict):
            if not isinstance(val, dict):
                ctx.fail("expected a mapping", (key,))
            for sub in val:
                if sub not in _SCHEMA[key]:
                    ctx.fail(f"unknown key {sub!r} (allowed: {', '.join(_SCHEMA[key])})",
                             (key, sub))
    if base_name is not None:
        if base_name not in PRESETS:
            ctx.fail(f"unknown preset {base_name!r}; choose from {sorted(PRESETS)}", ("preset",))
        merged = _merge(PRESETS[base_name], raw)
    else:
        merged = raw
    out = {}
    for key, kind in _SCHEMA.items():
        if key not in merged:
            ctx.fail(f"missing section {key!r}", ())
        if isinstance(kind, dict):
            sec = {}
            for sub, skind in kind.items():
                if sub not in merged[key]:
                    ctx.fail(f"missing key {sub!r}", (key,))
                sec[sub] = _coerce(skind, merged[key][sub], ctx, (key, sub))
            out[key] = sec
        else:
            out[key] = _coerce(kind, merged[key], ctx, (key,))
    return out


def _weights_from(spec, Ts, ctx) -> WeightPair:
    path = ("synthesis", "weights")
    try:
        if isinstance(spec, str):
            if spec not in WEIGHT_PRESETS:
                ctx.fail(f"unknown weight preset {spec!r}; choose from {sorted(WEIGHT_PRESETS)}",
                         path)
            W = weight_preset(spec)
        else:
            W = WeightPair(DiscreteTf(spec["Wy"]["num"], spec["Wy"]["den"], Ts),
                           DiscreteTf(spec["Wu"]["num"], spec["Wu"]["den"], Ts))
    except (lti.LtiError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        ctx.fail(str(exc), path)
    for name, w in (("Wy", W.Wy), ("Wu", W.Wu)):
        if w.num.size > w.den.size:
            ctx.fail(f"weight {name} is improper", path)
    if not np.isclose(W.dt, Ts, rtol=1e-12, atol=0):
        ctx.fail(f"weights are sampled at {W.dt} s but Ts = {Ts} s", path)
    return W


def _build(d: dict, ctx: _Ctx) -> ScenarioConfig:
    def guard(section, fn):
        try:
            return fn()
        except ConfigError:
            raise
        except (FemError, ValueError, TypeError) as exc:
            ctx.fail(str(exc), (section,))

    b = d["beam"]
    beam = guard("beam", lambda: BeamProperties(**b))
    a = d["aero"]
    aero_obj = guard("aero", lambda: AeroParams(**a))
    aero = aero_obj if a["enabled"] else None

    s = d["sampling"]
    if s["Ts"] <= 0:
        ctx.fail("must be positive", ("sampling", "Ts"))
    if s["substeps"] < 1:
        ctx.fail("must be at least 1", ("sampling", "substeps"))
    if not 0.0 <= s["rho_inf"] <= 1.0:
        ctx.fail("must lie in [0, 1]", ("sampling", "rho_inf"))
    sampling = SamplingSettings(**s)

    x_c = d["actuator"]["x_c"]
    if not 0.0 < x_c <= beam.L:
        ctx.fail(f"must lie in (0, L = {beam.L}]", ("actuator", "x_c"))

    dist = guard("disturbance", lambda: DisturbanceSpec(
        kind=d["disturbance"]["kind"], amplitude=d["disturbance"]["amplitude"],
        frequency=d["disturbance"]["frequency"], patch=tuple(d["disturbance"]["patch"]),
        impulse=d["disturbance"]["impulse"], impulse_time=d["disturbance"]["impulse_time"]))
    l1, l2 = dist.patch
    if not 0.0 <= l1 < l2 <= beam.L:
        ctx.fail(f"patch must satisfy 0 <= l1 < l2 <= L = {beam.L}", ("disturbance", "patch"))

    si = d["sysid"]
    lo, hi = si["n_range"]
    if not 1 <= lo <= hi:
        ctx.fail("n_range must satisfy 1 <= lo <= hi", ("sysid", "n_range"))
    if si["n_samples"] < 1:
        ctx.fail("must be positive", ("sysid", "n_samples"))
    N = si["N"]
    if N is not None and (N < 2 * hi or N + hi > si["n_samples"]):
        ctx.fail(f"need 2*{hi} <= N <= n_samples - {hi}", ("sysid", "N"))
    if N is None and si["n_samples"] - hi < 2 * hi:
        ctx.fail("too few samples for the largest order", ("sysid", "n_samples"))
    if si["amplitude"] < 0:
        ctx.fail("must be nonnegative", ("sysid", "amplitude"))
    if si["seed"] < 0:
        ctx.fail("must be nonnegative", ("sysid", "seed"))
    sysid = SysidSettings(si["seed"], si["amplitude"], si["n_samples"], N, (lo, hi), si["rtol"],
                          si["include_disturbance"])

    sy = d["synthesis"]
    W = _weights_from(sy["weights"], sampling.Ts, ctx)
    if sy["performance"] not in ("filtered", "output"):
        ctx.fail("must be 'filtered' or 'output'", ("synthesis", "performance"))
    if sy["measurement"] not in ("filtered", "raw"):
        ctx.fail("must be 'filtered' or 'raw'", ("synthesis", "measurement"))
    for k in ("control_weight", "noise_weight", "rel_gap"):
        if sy[k] <= 0:
            ctx.fail("must be positive", ("synthesis", k))
    synthesis = SynthesisSettings(W, sy["weights"], sy["control_weight"], sy["noise_weight"],
                                  sy["performance"], sy["measurement"], sy["rel_gap"])

    sim = d["simulation"]
    n_ticks = round(sim["t_end"] / sampling.Ts)
    if sim["t_end"] <= 0 or not np.isclose(n_ticks * sampling.Ts, sim["t_end"], rtol=1e-9):
        ctx.fail("must be a positive whole number of sample periods", ("simulation", "t_end"))
    if not 0.0 <= sim["metric_start"] < sim["t_end"]:
        ctx.fail("must lie in [0, t_end)", ("simulation", "metric_start"))
    simulation = SimulationSettings(sim["t_end"], sim["metric_start"])

    sw = d["sweep"]
    if not sw["x_c"] and not sw["patches"]:
        ctx.fail("sweep lists are empty", ("sweep",))
    for i, xc in enumerate(sw["x_c"]):
        if not 0.0 < xc <= beam.L:
            ctx.fail(f"must lie in (0, L = {beam.L}]", ("sweep", "x_c", i))
    for i, (p1, p2) in enumerate(sw["patches"]):
        if not 0.0 <= p1 < p2 <= beam.L:
            ctx.fail("patch must satisfy 0 <= l1 < l2 <= L", ("sweep", "patches", i))
    if sw["patches"] and dist.kind != "harmonic":
        ctx.fail("patch sweeps need a harmonic disturbance", ("sweep", "patches"))
    if sw["retain_factor"] <= 1:
        ctx.fail("must exceed 1", ("sweep", "retain_factor"))
    if sw["workers"] < 1:
        ctx.fail("must be at least 1", ("sweep", "workers"))
    sweep = SweepSettings(tuple(sw["x_c"]), tuple(tuple(p) for p in sw["patches"]),
                          sw["retain_factor"], sw["workers"])

    return ScenarioConfig(d["name"], beam, aero, sampling, x_c, dist, sysid, synthesis,
                          simulation, sweep, d["output"]["dir"], d)


def parse_config(text: str, source: str | None = None) -> ScenarioConfig:
    """Parse and validate YAML text."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark is not None else None, source) from None
    if node is None:
        raise ConfigError("empty configuration", 1, source)
    lines: dict = {}
    ctx = _Ctx(lines, source)
    try:
        raw = _to_plain(node, lines, ())
    except ConfigError as exc:
        raise ConfigError(str(exc), exc.line, source) from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid value: {exc}", None, source) from None
    return _build(_normalize(raw, ctx), ctx)


def config_from_dict(d: dict, source: str | None = None) -> ScenarioConfig:
    """Validate plain data (as produced by :meth:`ScenarioConfig.to_dict`)."""
    ctx = _Ctx({}, source)
    return _build(_normalize(copy.deepcopy(d), ctx), ctx)


def load_config(path_or_name) -> ScenarioConfig:
    """Load a YAML file, or a preset when given a bare preset name."""
    if isinstance(path_or_name, str) and path_or_name in PRESETS and not Path(path_or_name).exists():
        return config_from_dict(preset_dict(path_or_name), source=f"preset:{path_or_name}")
    path = Path(path_or_name)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc.strerror}", None, str(path)) from None
    return parse_config(text, source=str(path))
