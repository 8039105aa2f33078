"""Scenario files: TOML documents with sections state, noise, sweep, detect, scan and output.

A top-level ``preset = "<name>"`` pulls in a shipped scenario; any sections
given alongside it replace the matching preset keys one by one.
"""

from __future__ import annotations

import inspect
import math
import re
import sys
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path

import tomli_w

from . import registry

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_T_MAX = 5.0
DEFAULT_POINTS = 256
DEFAULT_TOL = 1e-8
FORMATS = ("csv", "json")
PLANES = ("zx", "xy", "yz")
OPT_BASES = PLANES + ("sphere", "auto")


class ScenarioError(ValueError):
    """Malformed scenario text or an unresolvable name."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class ComponentSpec:
    """A registry name plus its keyword parameters."""

    name: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepSpec:
    t_max: float = DEFAULT_T_MAX
    n_points: int = DEFAULT_POINTS
    workers: int = 1


@dataclass(frozen=True)
class BellSpec:
    family: str
    plane: str = "zx"
    theta_b: float = math.pi / 4
    theta_c: float = 0.0
    optimize: bool = False
    basis: str = "auto"


@dataclass(frozen=True)
class DetectSpec:
    measures: tuple[str, ...] = ()
    bell: tuple[BellSpec, ...] = ()
    tolerance: float = DEFAULT_TOL
    reduce: tuple[int, ...] | None = None
    exhaustive: bool = False


@dataclass(frozen=True)
class ScanSpec:
    """Repeat the death search while stepping one state parameter."""

    parameter: str
    start: float
    stop: float
    step: float


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "csv"


@dataclass(frozen=True)
class Scenario:
    name: str
    state: ComponentSpec
    noise: ComponentSpec
    sweep: SweepSpec = SweepSpec()
    detect: DetectSpec = DetectSpec()
    scan: ScanSpec | None = None
    output: OutputSpec = OutputSpec()
    description: str = ""


_TOP_KEYS = {"name", "description", "preset", "state", "noise", "sweep", "detect", "scan", "output"}
_SECTION_KEYS = {
    "sweep": {"t_max", "n_points", "workers"},
    "detect": {"measures", "bell", "tolerance", "reduce", "exhaustive"},
    "scan": {"parameter", "start", "stop", "step"},
    "output": {"path", "format"},
}
_BELL_KEYS = {"family", "plane", "theta_b", "theta_c", "optimize", "basis"}


class _Locator:
    """Maps (table path, key) to the 1-based line where the key is written."""

    _header = re.compile(r"^\s*\[\[?\s*([A-Za-z0-9_.\-\"]+)\s*\]\]?")
    _key = re.compile(r"^\s*([A-Za-z0-9_\-\"]+)\s*=")

    def __init__(self, text: str):
        self.lines: dict[tuple[str, str], int] = {}
        self.headers: dict[str, int] = {}
        table = ""
        for number, line in enumerate(text.splitlines(), start=1):
            if m := self._header.match(line):
                table = m.group(1).replace('"', "")
                self.headers.setdefault(table, number)
            elif m := self._key.match(line):
                self.lines.setdefault((table, m.group(1).replace('"', "")), number)

    def find(self, table: str, key: str | None = None) -> int | None:
        if key is not None and (table, key) in self.lines:
            return self.lines[(table, key)]
        return self.headers.get(table)


def _check_keys(table: Mapping, allowed: set[str], path: str, loc: _Locator) -> None:
    for key in table:
        if key not in allowed:
            raise ScenarioError(f"unknown key '{key}' in [{path}]" if path else f"unknown key '{key}'", loc.find(path, key))


def _bind(fn: Callable, params: dict, what: str, name: str, path: str, loc: _Locator, skip_first: bool) -> None:
    sig = inspect.signature(fn)
    names = list(sig.parameters)[1:] if skip_first else list(sig.parameters)
    for key in params:
        if key not in names:
            raise ScenarioError(f"{what} '{name}' has no parameter '{key}' (accepts: {', '.join(names) or 'none'})", loc.find(path, key))
    missing = [
        p for p in names if sig.parameters[p].default is inspect.Parameter.empty and p not in params
    ]
    if missing:
        raise ScenarioError(f"{what} '{name}' is missing parameter(s): {', '.join(missing)}", loc.find(path))


def _component(raw, path: str, registry_map: dict, what: str, loc: _Locator, skip_first: bool) -> ComponentSpec:
    if not isinstance(raw, Mapping):
        raise ScenarioError(f"[{path}] must be a table", loc.find(path))
    key = "factory" if path == "state" else "model"
    if key not in raw:
        raise ScenarioError(f"[{path}] needs '{key}'", loc.find(path))
    name = raw[key]
    if name not in registry_map:
        raise ScenarioError(f"unknown {what} '{name}' (known: {', '.join(registry_map)})", loc.find(path, key))
    params = {k: v for k, v in raw.items() if k != key}
    _bind(registry_map[name], params, what, name, path, loc, skip_first)
    return ComponentSpec(name, params)


def _number(value, path: str, key: str, loc: _Locator, kind=float, positive=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"'{key}' must be a number", loc.find(path, key))
    if kind is int and not isinstance(value, int):
        raise ScenarioError(f"'{key}' must be an integer", loc.find(path, key))
    if positive and not value > 0:
        raise ScenarioError(f"'{key}' must be positive, got {value}", loc.find(path, key))
    return kind(value)


def _sweep(raw: Mapping, loc: _Locator) -> SweepSpec:
    _check_keys(raw, _SECTION_KEYS["sweep"], "sweep", loc)
    out = SweepSpec()
    if "t_max" in raw:
        out = replace(out, t_max=_number(raw["t_max"], "sweep", "t_max", loc))
    if "n_points" in raw:
        n = _number(raw["n_points"], "sweep", "n_points", loc, int)
        if n < 2:
            raise ScenarioError("'n_points' must be at least 2", loc.find("sweep", "n_points"))
        out = replace(out, n_points=n)
    if "workers" in raw:
        out = replace(out, workers=_number(raw["workers"], "sweep", "workers", loc, int))
    return out


def _bell(raw: Mapping, index: int, loc: _Locator) -> BellSpec:
    path = "detect.bell"
    if not isinstance(raw, Mapping):
        raise ScenarioError("each [[detect.bell]] entry must be a table", loc.find(path))
    _check_keys(raw, _BELL_KEYS, path, loc)
    if "family" not in raw:
        raise ScenarioError(f"[[detect.bell]] entry {index + 1} needs 'family'", loc.find(path))
    try:
        fam = registry.bell_family_name(raw["family"])
    except KeyError as exc:
        raise ScenarioError(str(exc.args[0]), loc.find(path, "family")) from None
    spec = BellSpec(fam)
    if "plane" in raw:
        if raw["plane"] not in PLANES:
            raise ScenarioError(f"unknown plane '{raw['plane']}' (known: {', '.join(PLANES)})", loc.find(path, "plane"))
        spec = replace(spec, plane=raw["plane"])
    for key in ("theta_b", "theta_c"):
        if key in raw:
            spec = replace(spec, **{key: _number(raw[key], path, key, loc, positive=False)})
    if "optimize" in raw:
        if not isinstance(raw["optimize"], bool):
            raise ScenarioError("'optimize' must be true or false", loc.find(path, "optimize"))
        spec = replace(spec, optimize=raw["optimize"])
    if "basis" in raw:
        if raw["basis"] not in OPT_BASES:
            raise ScenarioError(f"unknown basis '{raw['basis']}' (known: {', '.join(OPT_BASES)})", loc.find(path, "basis"))
        spec = replace(spec, basis=raw["basis"])
    return spec


def _detect(raw: Mapping, loc: _Locator) -> DetectSpec:
    _check_keys(raw, _SECTION_KEYS["detect"], "detect", loc)
    measures = raw.get("measures", [])
    if isinstance(measures, str) or not isinstance(measures, list):
        raise ScenarioError("'measures' must be a list of names", loc.find("detect", "measures"))
    for m in measures:
        if m not in registry.MEASURES:
            raise ScenarioError(
                f"unknown measure '{m}' in 'measures' (known: {', '.join(registry.MEASURES)})",
                loc.find("detect", "measures"),
            )
    if len(set(measures)) != len(measures):
        raise ScenarioError("'measures' lists a name twice", loc.find("detect", "measures"))
    bell_raw = raw.get("bell", [])
    if not isinstance(bell_raw, list):
        raise ScenarioError("'bell' must be an array of tables", loc.find("detect.bell"))
    bell = tuple(_bell(b, k, loc) for k, b in enumerate(bell_raw))
    out = DetectSpec(tuple(measures), bell)
    if "tolerance" in raw:
        out = replace(out, tolerance=_number(raw["tolerance"], "detect", "tolerance", loc))
    if "reduce" in raw:
        red = raw["reduce"]
        if not isinstance(red, list) or not red or not all(isinstance(k, int) and k >= 0 for k in red):
            raise ScenarioError("'reduce' must be a nonempty list of party indices", loc.find("detect", "reduce"))
        out = replace(out, reduce=tuple(red))
    if "exhaustive" in raw:
        if not isinstance(raw["exhaustive"], bool):
            raise ScenarioError("'exhaustive' must be true or false", loc.find("detect", "exhaustive"))
        out = replace(out, exhaustive=raw["exhaustive"])
    if not out.measures and not out.bell:
        raise ScenarioError("[detect] requests no measures and no Bell families", loc.find("detect"))
    return out


def _scan(raw: Mapping, state: ComponentSpec, loc: _Locator) -> ScanSpec:
    _check_keys(raw, _SECTION_KEYS["scan"], "scan", loc)
    for key in ("parameter", "start", "stop", "step"):
        if key not in raw:
            raise ScenarioError(f"[scan] needs '{key}'", loc.find("scan"))
    param = raw["parameter"]
    names = list(inspect.signature(registry.STATES[state.name]).parameters)
    if param not in names:
        raise ScenarioError(f"state '{state.name}' has no parameter '{param}'", loc.find("scan", "parameter"))
    start = _number(raw["start"], "scan", "start", loc, positive=False)
    stop = _number(raw["stop"], "scan", "stop", loc, positive=False)
    step = _number(raw["step"], "scan", "step", loc)
    if stop < start:
        raise ScenarioError("[scan] needs stop >= start", loc.find("scan", "stop"))
    return ScanSpec(param, start, stop, step)


def _output(raw: Mapping, loc: _Locator) -> OutputSpec:
    _check_keys(raw, _SECTION_KEYS["output"], "output", loc)
    fmt = raw.get("format", "csv")
    if fmt not in FORMATS:
        raise ScenarioError(f"unknown output format '{fmt}' (known: {', '.join(FORMATS)})", loc.find("output", "format"))
    path = raw.get("path")
    if path is not None and not isinstance(path, str):
        raise ScenarioError("'path' must be a string", loc.find("output", "path"))
    return OutputSpec(path, fmt)


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def from_dict(data: Mapping, text: str = "") -> Scenario:
    loc = _Locator(text)
    _check_keys(data, _TOP_KEYS, "", loc)
    if "preset" in data:
        from .presets import preset_text

        try:
            base_text = preset_text(data["preset"])
        except KeyError as exc:
            raise ScenarioError(str(exc.args[0]), loc.find("", "preset")) from None
        base = tomllib.loads(base_text)
        merged = _merge(base, {k: v for k, v in data.items() if k != "preset"})
        try:
            return from_dict(merged, text if any(k != "preset" for k in data) else base_text)
        except ScenarioError as exc:
            raise ScenarioError(f"in preset '{data['preset']}': {exc}") from None
    for section in ("state", "noise", "detect"):
        if section not in data:
            raise ScenarioError(f"missing [{section}] section")
    state = _component(data["state"], "state", registry.STATES, "state factory", loc, skip_first=False)
    noise = _component(data["noise"], "noise", registry.NOISES, "noise model", loc, skip_first=True)
    for section in ("sweep", "detect", "scan", "output"):
        if section in data and not isinstance(data[section], Mapping):
            raise ScenarioError(f"[{section}] must be a table", loc.find("", section))
    return Scenario(
        name=str(data.get("name", state.name)),
        description=str(data.get("description", "")),
        state=state,
        noise=noise,
        sweep=_sweep(data.get("sweep", {}), loc),
        detect=_detect(data["detect"], loc),
        scan=_scan(data["scan"], state, loc) if "scan" in data else None,
        output=_output(data.get("output", {}), loc),
    )


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from None
    return from_dict(data, text)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(text)


def to_dict(s: Scenario) -> dict:
    out: dict = {"name": s.name}
    if s.description:
        out["description"] = s.description
    out["state"] = {"factory": s.state.name, **s.state.params}
    out["noise"] = {"model": s.noise.name, **s.noise.params}
    out["sweep"] = {"t_max": s.sweep.t_max, "n_points": s.sweep.n_points, "workers": s.sweep.workers}
    detect: dict = {"measures": list(s.detect.measures), "tolerance": s.detect.tolerance}
    if s.detect.reduce is not None:
        detect["reduce"] = list(s.detect.reduce)
    if s.detect.exhaustive:
        detect["exhaustive"] = True
    if s.detect.bell:
        detect["bell"] = [
            {
                "family": b.family,
                "plane": b.plane,
                "theta_b": b.theta_b,
                "theta_c": b.theta_c,
                "optimize": b.optimize,
                "basis": b.basis,
            }
            for b in s.detect.bell
        ]
    out["detect"] = detect
    if s.scan is not None:
        out["scan"] = {"parameter": s.scan.parameter, "start": s.scan.start, "stop": s.scan.stop, "step": s.scan.step}
    output: dict = {"format": s.output.format}
    if s.output.path is not None:
        output["path"] = s.output.path
    out["output"] = output
    return out


def dump_scenario(s: Scenario) -> str:
    """Scenario text that parses back to an equal Scenario."""
    return tomli_w.dumps(to_dict(s))
