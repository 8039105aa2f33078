"""Trajectory sweeps, death-time detection and the closed-form death times.

A "measure" here is any nonnegative functional that is exactly zero once
entanglement or Bell violation is gone (concurrence, negativity, violation
margin, ...). Values at or below :data:`ZERO` count as zero.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

ZERO = 1e-12
DEFAULT_TOL = 1e-8
SCAN_POINTS = 256
DENSIFY = 4
FIT_R2 = 0.999

FINITE_DEATH = "finite_death"
ASYMPTOTIC = "asymptotic"
NEVER_POSITIVE = "never_positive"
REVIVAL = "revival"
UNDETERMINED = "undetermined"
STATUSES = (FINITE_DEATH, ASYMPTOTIC, NEVER_POSITIVE, REVIVAL, UNDETERMINED)


class NumericError(ArithmeticError):
    """A measure produced a non-finite value."""


class SweepError(RuntimeError):
    """An evolver or measure failed at a particular time."""

    def __init__(self, t: float, cause: Exception):
        super().__init__(f"evaluation failed at t={t!r}: {cause}")
        self.t = t
        self.cause = cause


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).copy()
        values = np.asarray(self.values, dtype=float).copy()
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError(f"times and values must be 1-D of equal length, got {times.shape} and {values.shape}")
        if times.size == 0:
            raise ValueError("trajectory is empty")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.times.size

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,value\n")
        for t, v in zip(self.times, self.values):
            buf.write(f"{t:.17g},{v:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> Trajectory:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["t", "value"]:
            raise ValueError("trajectory CSV must start with the header 't,value'")
        data = [(float(r[0]), float(r[1])) for r in rows[1:] if r]
        return cls(np.array([d[0] for d in data]), np.array([d[1] for d in data]))


@dataclass(frozen=True)
class DeathTimeResult:
    status: str
    t_death: float | None
    bracket: tuple[float, float]
    tolerance: float

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "t_death": self.t_death,
            "bracket": list(self.bracket),
            "tolerance": self.tolerance,
        }


def _checked(f: Callable[[float], float], t: float) -> float:
    try:
        v = float(f(t))
    except SweepError:
        raise
    except Exception as exc:  # annotate with the offending time
        raise SweepError(t, exc) from exc
    if not math.isfinite(v):
        raise NumericError(f"non-finite value {v!r} at t={t!r}")
    return v


def sweep(
    evolver: Callable[[float], object],
    measure: Callable[[object], float],
    t_grid: Sequence[float],
    workers: int = 1,
) -> Trajectory:
    """Evaluate ``measure(evolver(t))`` at each grid time, in order."""
    grid = np.asarray(t_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("time grid is empty")

    def point(t: float) -> float:
        return _checked(lambda s: measure(evolver(s)), float(t))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(point, grid))
    else:
        values = [point(t) for t in grid]
    return Trajectory(grid, np.array(values))


def _log_linear_r2(times: np.ndarray, values: np.ndarray) -> float:
    """R^2 of a straight-line fit to log(values)."""
    y = np.log(values)
    if np.ptp(y) <= 1e-12 * max(1.0, float(np.abs(y).max())):
        return 1.0  # flat positive floor
    slope, intercept = np.polyfit(times, y, 1)
    resid = y - (slope * times + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - float(np.sum(resid**2)) / ss_tot


def _bisect(f, lo: float, hi: float, tol: float, zero: float) -> tuple[float, float]:
    """Shrink [lo, hi] with f(lo) > zero >= f(hi) to width <= tol."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _checked(f, mid) > zero:
            lo = mid
        else:
            hi = mid
    return lo, hi


def detect_death_time(
    f: Callable[[float], float],
    t_max: float,
    tol: float = DEFAULT_TOL,
    n_points: int = SCAN_POINTS,
    zero: float = ZERO,
) -> DeathTimeResult:
    """Locate the first time ``f`` drops to zero on [0, t_max].

    Scans a linear grid, refines the first bracketing interval with a 4x
    denser grid and bisects it to ``tol``. If ``f`` comes back above zero
    later on the scan grid the status is ``revival`` (``t_death`` is still the
    first death). Without a zero, the tail is classified by a log-linear fit
    over the last tenth of the grid.
    """
    if t_max <= 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    f0 = _checked(f, 0.0)
    if f0 <= zero:
        return DeathTimeResult(NEVER_POSITIVE, None, (0.0, 0.0), tol)
    grid = np.linspace(0.0, t_max, n_points)
    vals = np.array([f0] + [_checked(f, t) for t in grid[1:]])
    dead = np.flatnonzero(vals <= zero)
    if dead.size == 0:
        tail = max(3, n_points // 10)
        r2 = _log_linear_r2(grid[-tail:], vals[-tail:])
        status = ASYMPTOTIC if r2 > FIT_R2 else UNDETERMINED
        return DeathTimeResult(status, None, (float(grid[-1]), float(grid[-1])), tol)
    k = int(dead[0])
    lo, hi = float(grid[k - 1]), float(grid[k])
    fine = np.linspace(lo, hi, DENSIFY + 1)
    for a, b in zip(fine[:-1], fine[1:]):
        if _checked(f, float(b)) <= zero:
            lo, hi = float(a), float(b)
            break
    lo, hi = _bisect(f, lo, hi, tol, zero)
    revived = bool(np.any(vals[k:] > zero))
    return DeathTimeResult(REVIVAL if revived else FINITE_DEATH, hi, (lo, hi), tol)


def detect_revivals(traj: Trajectory, zero: float = ZERO) -> list[tuple[float, float | None]]:
    """Maximal zero runs as (death, rebirth) pairs; rebirth is None for a run reaching the end.

    A monotone decay that stays positive gives an empty list; a decay that
    dies and never returns gives one interval with no rebirth.
    """
    alive = traj.values > zero
    intervals = []
    k = 0
    n = len(traj)
    while k < n:
        if alive[k]:
            k += 1
            continue
        start = k
        while k < n and not alive[k]:
            k += 1
        rebirth = float(traj.times[k]) if k < n else None
        intervals.append((float(traj.times[start]), rebirth))
    return intervals


# ---------------------------------------------------------------------------
# Closed-form death times
# ---------------------------------------------------------------------------


def _positive(name: str, value: float) -> None:
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


def _diosi(tau: float) -> float:
    _positive("tau", tau)
    return tau * math.log(3)


def _ye04(rate: float) -> float:
    """Root when the squared damping amplitude decays as exp(-rate t)."""
    _positive("rate", rate)
    return math.log((2 + math.sqrt(2)) / 2) / rate


def _ye04_derived(rate: float) -> float:
    """Root when the damping amplitude itself is exp(-rate t), so populations go as exp(-2 rate t)."""
    _positive("rate", rate)
    return math.log((2 + math.sqrt(2)) / 2) / (2 * rate)


def _global_dephasing(rate: float, w: complex, b: float, c: float) -> float:
    _positive("rate", rate)
    if b <= 0 or c <= 0:
        raise ValueError("b and c must be positive")
    if abs(w) <= math.sqrt(b * c):
        raise ValueError("needs |w| > sqrt(bc)")
    return math.log(abs(w) / math.sqrt(b * c)) / (2 * rate)


def _qubit_qutrit(rate: float, x: float) -> float:
    _positive("rate", rate)
    if not 1 / 8 < x <= 1 / 4:
        raise ValueError(f"needs 1/8 < x <= 1/4, got {x}")
    return math.log(8 * x) / rate


def _qubit_qutrit_printed(rate: float, x: float) -> float:
    _positive("rate", rate)
    if not 1 / 8 < x <= 1 / 4:
        raise ValueError(f"needs 1/8 < x <= 1/4, got {x}")
    return 8 * x / rate


def _bnsd_w(rate: float) -> float:
    _positive("rate", rate)
    return math.log(2) / (2 * rate)


def _svetlichny_ghz(rate: float) -> float:
    _positive("rate", rate)
    return math.log(math.sqrt(2)) / (3 * rate)


def _wwzb_ghz(rate: float) -> float:
    _positive("rate", rate)
    return math.log(2) / (3 * rate)


def _g_concurrence_level(d: int, k: int, rate: float) -> float:
    _positive("rate", rate)
    if d < 2 or not 2 <= k <= d:
        raise ValueError(f"needs d >= 2 and 2 <= k <= d, got d={d}, k={k}")
    return math.log((d * d - 1) / (d * k - d - 1)) / (2 * d * rate)


def _adh_damping(alpha: float, beta: float) -> float:
    """Damping probability p at which the two-photon concurrence vanishes."""
    if abs(beta) <= abs(alpha):
        raise ValueError("finite-p death needs |beta| > |alpha|")
    return abs(alpha) / abs(beta)


CLOSED_FORMS: dict[str, Callable[..., float]] = {
    "diosi": _diosi,
    "ye04": _ye04,
    "ye04_derived": _ye04_derived,
    "global_dephasing": _global_dephasing,
    "qubit_qutrit": _qubit_qutrit,
    "qubit_qutrit_printed": _qubit_qutrit_printed,
    "bnsd_w": _bnsd_w,
    "svetlichny_ghz": _svetlichny_ghz,
    "wwzb_ghz": _wwzb_ghz,
    "g_concurrence_level": _g_concurrence_level,
    "adh_damping": _adh_damping,
}


def closed_form_times(case_id: str, **params) -> float:
    """Reference death time for ``case_id``; see :data:`CLOSED_FORMS` for the cases."""
    try:
        fn = CLOSED_FORMS[case_id]
    except KeyError:
        raise KeyError(f"unknown closed-form case {case_id!r}; known: {', '.join(CLOSED_FORMS)}") from None
    return fn(**params)
