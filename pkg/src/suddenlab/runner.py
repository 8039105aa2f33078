"""Execute scenarios: build the state and dynamics, sweep, detect deaths, write outputs."""

from __future__ import annotations

import json
import math
import os
import re
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import nonlocality as nl
from . import registry
from .scenario import BellSpec, Scenario, ScenarioError, to_dict
from .states import DensityMatrix, coerce_state
from .sudden_death import (
    FINITE_DEATH,
    DeathTimeResult,
    Trajectory,
    detect_death_time,
    sweep,
)

ENV_OUT = "SUDDENLAB_OUT"
DEFAULT_OUT = "suddenlab-out"
MODES = ("evolve", "deathtime", "bell")


class RunError(RuntimeError):
    """A numeric failure while executing a valid scenario, tagged with the stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class Quantity:
    """One requested trajectory: a measure or a Bell functional."""

    label: str
    kind: str  # "measure" or "bell"
    value: Callable[[DensityMatrix], float]
    margin: Callable[[DensityMatrix], float] | None


@dataclass
class RunReport:
    scenario: Scenario
    mode: str
    results: dict[str, DeathTimeResult | None] = field(default_factory=dict)
    trajectories: dict[str, Trajectory] = field(default_factory=dict)
    controls: dict[str, dict[str, float]] = field(default_factory=dict)
    settings: dict[str, list] = field(default_factory=dict)
    scan: dict | None = None
    files: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "scenario": to_dict(self.scenario),
            "mode": self.mode,
            "results": {k: (v.as_dict() if v is not None else None) for k, v in self.results.items()},
            "controls_at_death": self.controls,
            "bell_settings": self.settings,
            "scan": self.scan,
            "files": self.files,
            "wall_time": self.wall_time,
        }


def resolve_out_dir(cli_out: str | None, scenario: Scenario | None = None) -> Path:
    """--out wins, then the scenario's own path, then SUDDENLAB_OUT, then the default."""
    if cli_out:
        return Path(cli_out)
    if scenario is not None and scenario.output.path:
        return Path(scenario.output.path)
    return Path(os.environ.get(ENV_OUT) or DEFAULT_OUT)


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text).strip("_")


def build_state(scenario: Scenario, overrides: dict | None = None) -> DensityMatrix:
    params = dict(scenario.state.params)
    params.update(overrides or {})
    try:
        return coerce_state(registry.STATES[scenario.state.name](**params))
    except (ValueError, OSError) as exc:
        raise ScenarioError(f"state '{scenario.state.name}': {exc}") from None


def build_noise(scenario: Scenario, dims) -> registry.NoiseModel:
    try:
        return registry.NOISES[scenario.noise.name](dims, **scenario.noise.params)
    except ValueError as exc:
        raise ScenarioError(f"noise '{scenario.noise.name}': {exc}") from None


def _reducer(keep: Sequence[int] | None):
    if keep is None:
        return lambda rho: rho
    keep = list(keep)

    def reduce(rho: DensityMatrix) -> DensityMatrix:
        if max(keep) >= rho.n_parties:
            raise ScenarioError(f"'reduce' index {max(keep)} out of range for {rho.n_parties} parties")
        return rho.reduce(keep)

    return reduce


def _setting_for(spec: BellSpec, rho0: DensityMatrix) -> nl.DichotomicSetting:
    n = registry.bell_parties(spec.family)
    if spec.optimize:
        if spec.family == registry.WWZB:
            raise ScenarioError("angle optimization is per family; list the WWZB classes P1..P5 individually")
        return nl.optimize_angles(rho0, spec.family, basis=spec.basis).setting
    if n == 3:
        return nl.tripartite_settings(spec.theta_b, spec.theta_c, spec.plane)
    if n == 2:
        return nl.bipartite_settings(spec.theta_b, spec.plane)
    raise ScenarioError(f"no setting builder for {n}-party family {spec.family}")


def _quantities(scenario: Scenario, mode: str, rho0: DensityMatrix, exhaustive: bool) -> tuple[list[Quantity], dict]:
    out: list[Quantity] = []
    settings: dict[str, list] = {}
    if mode in ("evolve", "deathtime"):
        for name in scenario.detect.measures:
            spec = registry.MEASURES[name]
            margin = None
            if spec.threshold is not None:
                margin = (lambda s: lambda rho: max(0.0, s.value(rho) - s.threshold(rho)))(spec)
            out.append(Quantity(f"measure:{name}", "measure", spec.value, margin))
    if mode in ("bell", "deathtime"):
        seen: dict[str, int] = {}
        for b in scenario.detect.bell:
            label = f"bell:{b.family}"
            seen[label] = seen.get(label, 0) + 1
            if seen[label] > 1:
                label = f"{label}#{seen[label]}"
            if rho0.n_parties != registry.bell_parties(b.family) or any(d != 2 for d in rho0.dims):
                raise ScenarioError(f"{b.family} needs {registry.bell_parties(b.family)} qubits, state has dims {rho0.dims}")
            setting = _setting_for(b, rho0)
            settings[label] = [list(pair) for pair in (setting.angles or ())]
            evaluate = registry.bell_evaluator(b.family, setting, exhaustive)

            def value(rho, ev=evaluate):
                return ev(rho)[0]

            def margin(rho, ev=evaluate):
                val, bound = ev(rho)
                return max(0.0, abs(val) - bound)

            out.append(Quantity(label, "bell", value, margin))
    return out, settings


def _scan_values(start: float, stop: float, step: float) -> list[float]:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def run(
    scenario: Scenario,
    mode: str = "deathtime",
    *,
    out_dir=None,
    t_max: float | None = None,
    n_points: int | None = None,
    tol: float | None = None,
    workers: int | None = None,
    fmt: str | None = None,
    exhaustive: bool | None = None,
    write: bool = True,
) -> RunReport:
    """Run ``scenario``. Overrides mirror the CLI flags and take precedence over the file."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    started = time.perf_counter()
    sweep_spec = scenario.sweep
    sweep_spec = replace(
        sweep_spec,
        t_max=t_max if t_max is not None else sweep_spec.t_max,
        n_points=n_points if n_points is not None else sweep_spec.n_points,
        workers=workers if workers is not None else sweep_spec.workers,
    )
    if sweep_spec.t_max <= 0 or sweep_spec.n_points < 2 or sweep_spec.workers < 1:
        raise ScenarioError("need t_max > 0, at least 2 points and at least 1 worker")
    tolerance = tol if tol is not None else scenario.detect.tolerance
    if tolerance <= 0:
        raise ScenarioError(f"tolerance must be positive, got {tolerance}")
    detect = replace(scenario.detect, tolerance=tolerance, exhaustive=scenario.detect.exhaustive or bool(exhaustive))
    output = replace(scenario.output, format=fmt or scenario.output.format)
    scenario = replace(scenario, sweep=sweep_spec, detect=detect, output=output)

    if mode == "bell" and not scenario.detect.bell:
        raise ScenarioError("scenario lists no Bell families under [[detect.bell]]")
    if mode == "evolve" and not scenario.detect.measures:
        raise ScenarioError("scenario lists no measures to evolve")

    report = RunReport(scenario, mode)
    rho_raw = build_state(scenario)
    noise = build_noise(scenario, rho_raw.dims)
    try:
        prepared = noise.prepare(rho_raw)
    except ValueError as exc:
        raise ScenarioError(f"noise '{scenario.noise.name}' cannot act on this state: {exc}") from None
    reduce = _reducer(scenario.detect.reduce)
    observed0 = reduce(prepared)
    quantities, report.settings = _quantities(scenario, mode, observed0, scenario.detect.exhaustive)

    @lru_cache(maxsize=8192)
    def observed(t: float) -> DensityMatrix:
        return reduce(noise.evolve(prepared, t))

    grid = np.linspace(0.0, sweep_spec.t_max, sweep_spec.n_points)
    for q in quantities:
        try:
            report.trajectories[q.label] = sweep(observed, q.value, grid, workers=sweep_spec.workers)
        except Exception as exc:
            raise RunError(f"sweep of {q.label}", exc) from exc
        if mode == "evolve":
            report.results[q.label] = None
            continue
        if q.margin is None:
            report.results[q.label] = None
            continue
        try:
            res = detect_death_time(lambda t, m=q.margin: m(observed(float(t))), sweep_spec.t_max, tolerance)
        except Exception as exc:
            raise RunError(f"death-time search for {q.label}", exc) from exc
        report.results[q.label] = res
        if noise.control is not None and res.t_death is not None:
            name, fn = noise.control
            report.controls[q.label] = {name: fn(res.t_death)}

    if scenario.scan is not None and mode == "deathtime":
        report.scan = _run_scan(scenario, quantities, reduce, tolerance)

    report.wall_time = time.perf_counter() - started
    if write:
        _write(report, resolve_out_dir(out_dir, scenario))
    return report


def _run_scan(scenario: Scenario, quantities: list[Quantity], reduce, tolerance: float) -> dict:
    target = next((q for q in quantities if q.margin is not None), None)
    if target is None:
        raise ScenarioError("[scan] needs a measure with a death threshold")
    scan = scenario.scan
    rows = []

    def one(value: float):
        rho = build_state(scenario, {scan.parameter: value})
        noise = build_noise(scenario, rho.dims)
        prepared = noise.prepare(rho)
        f = lambda t: target.margin(reduce(noise.evolve(prepared, float(t))))  # noqa: E731
        try:
            return detect_death_time(f, scenario.sweep.t_max, tolerance)
        except Exception as exc:
            raise RunError(f"scan of {scan.parameter}={value}", exc) from exc

    values = _scan_values(scan.start, scan.stop, scan.step)
    if scenario.sweep.workers > 1:
        with ThreadPoolExecutor(max_workers=scenario.sweep.workers) as pool:
            results = list(pool.map(one, values))
    else:
        results = [one(v) for v in values]
    for v, res in zip(values, results):
        rows.append({"value": v, "status": res.status, "t_death": res.t_death})
    dying = [r["value"] for r in rows if r["status"] == FINITE_DEATH]
    return {
        "parameter": scan.parameter,
        "measure": target.label,
        "largest_finite_death": max(dying) if dying else None,
        "rows": rows,
    }


def _write(report: RunReport, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = _slug(report.scenario.name)
    files = []
    if report.scenario.output.format == "csv":
        for label, traj in report.trajectories.items():
            path = out_dir / f"{stem}__{_slug(label.replace(':', '-'))}.csv"
            path.write_text(traj.to_csv(), encoding="utf-8")
            files.append(str(path))
    else:
        path = out_dir / f"{stem}.trajectories.json"
        payload = {
            label: {"t": [float(x) for x in traj.times], "value": [float(x) for x in traj.values]}
            for label, traj in report.trajectories.items()
        }
        path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
        files.append(str(path))
    report.files = files
    report_path = out_dir / f"{stem}.report.json"
    report.files.append(str(report_path))
    report_path.write_text(json.dumps(report.as_dict(), indent=2) + "\n", encoding="utf-8")


def run_many(scenarios: Sequence[Scenario], workers: int = 1, **kwargs) -> list[RunReport]:
    """Run independent scenarios concurrently; results keep the input order."""
    if workers > 1 and len(scenarios) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda s: run(s, **kwargs), scenarios))
    return [run(s, **kwargs) for s in scenarios]
