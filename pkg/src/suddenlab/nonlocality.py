"""Bell functionals (CHSH, the five WWZB classes, Svetlichny) and angle search.

Each party measures one of two dichotomic observables, ``M`` (choice 0) or
``M'`` (choice 1). A Bell family is a list of ``(coefficient, choices)``
terms; its operator is the sum of coefficient times the tensor product of the
chosen observables.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .states import DensityMatrix, coerce_state
from .tensor_core import HERMITIAN_TOL, SIGMA_X, SIGMA_Y, SIGMA_Z, DimensionError, kron

VIOLATION_EPS = 1e-12

PLANES = {
    "zx": (SIGMA_Z, SIGMA_X),
    "xy": (SIGMA_X, SIGMA_Y),
    "yz": (SIGMA_Y, SIGMA_Z),
}
SPHERE_BASIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class BellFamily:
    name: str
    n_parties: int
    terms: tuple[tuple[float, tuple[int, ...]], ...]
    bound: float
    quantum_max: float


def _terms(spec: str, coef: float = 1.0) -> tuple[tuple[float, tuple[int, ...]], ...]:
    """Parse '+000 -011 ...' (0 = M, 1 = M') into term tuples."""
    out = []
    for tok in spec.split():
        sign = -1.0 if tok[0] == "-" else 1.0
        out.append((coef * sign, tuple(int(ch) for ch in tok[1:])))
    return tuple(out)


FAMILIES: dict[str, BellFamily] = {
    "CHSH": BellFamily("CHSH", 2, _terms("+00 +01 +10 -11"), 2.0, 2 * math.sqrt(2)),
    "P1": BellFamily("P1", 3, _terms("+000", 2.0), 2.0, 2.0),
    "P2": BellFamily("P2", 3, _terms("-000 +001 +010 +011 +100 +101 +110 +111", 0.5), 2.0, 4.0),
    "P3": BellFamily("P3", 3, _terms("+000 +010 +100 -110"), 2.0, 4.0),
    "P4": BellFamily("P4", 3, _terms("+000 +001 -110 +111"), 2.0, 4.0),
    "P5": BellFamily("P5", 3, _terms("+001 +010 +100 -111"), 2.0, 4.0),
    "Svetlichny": BellFamily("Svetlichny", 3, _terms("+000 +001 +010 +100 -111 -110 -101 -011"), 4.0, 4 * math.sqrt(2)),
}
WWZB_CLASSES = ("P1", "P2", "P3", "P4", "P5")
_ALIASES = {name.lower(): name for name in FAMILIES}
_ALIASES.update({"s": "Svetlichny", "svet": "Svetlichny"})


def family(name: str) -> BellFamily:
    key = _ALIASES.get(str(name).lower())
    if key is None:
        raise KeyError(f"unknown Bell family {name!r}; known: {', '.join(FAMILIES)}")
    return FAMILIES[key]


@dataclass(frozen=True, eq=False)
class DichotomicSetting:
    """Per-party observable pairs (M, M'); ``directions`` holds their Bloch vectors when known."""

    observables: tuple[tuple[np.ndarray, np.ndarray], ...]
    angles: tuple[tuple[float, float], ...] | None = None
    directions: tuple[tuple[np.ndarray, np.ndarray], ...] | None = None
    basis: str = ""

    def __post_init__(self):
        obs = tuple((np.asarray(m, dtype=complex), np.asarray(mp, dtype=complex)) for m, mp in self.observables)
        for k, pair in enumerate(obs):
            for j, op in enumerate(pair):
                if op.shape != (2, 2):
                    raise DimensionError(f"party {k} observable {j} must be 2x2, got {op.shape}")
                if np.abs(op - op.conj().T).max() > HERMITIAN_TOL:
                    raise ValueError(f"party {k} observable {j} is not Hermitian")
                if np.abs(op @ op - np.eye(2)).max() > 1e-10:
                    raise ValueError(f"party {k} observable {j} does not square to the identity")
        object.__setattr__(self, "observables", obs)

    @property
    def n_parties(self) -> int:
        return len(self.observables)


def plane_observable(theta: float, plane: str = "zx") -> np.ndarray:
    """cos(theta) P + sin(theta) Q for the plane's Pauli pair (P, Q)."""
    p, q = PLANES[plane]
    return math.cos(theta) * p + math.sin(theta) * q


def observable_from_direction(u: Sequence[float], basis: str = "zx") -> np.ndarray:
    """sum_i u_i B_i for a unit vector ``u`` over the basis of a plane or the full sphere."""
    ops = SPHERE_BASIS if basis == "sphere" else PLANES[basis]
    u = np.asarray(u, dtype=float)
    if u.shape != (len(ops),):
        raise ValueError(f"direction needs {len(ops)} components for basis {basis!r}")
    u = u / np.linalg.norm(u)
    return sum(c * op for c, op in zip(u, ops))


def settings_from_angles(angles: Sequence[tuple[float, float]], plane: str = "zx") -> DichotomicSetting:
    """Each party measures in-plane directions theta (M) and theta' (M')."""
    pairs = tuple((plane_observable(a, plane), plane_observable(b, plane)) for a, b in angles)
    dirs = tuple(
        (np.array([math.cos(a), math.sin(a)]), np.array([math.cos(b), math.sin(b)])) for a, b in angles
    )
    return DichotomicSetting(pairs, tuple((float(a), float(b)) for a, b in angles), dirs, plane)


def _rotated_pair(theta: float, plane: str) -> tuple[np.ndarray, np.ndarray]:
    p, q = PLANES[plane]
    return (
        math.cos(theta) * p - math.sin(theta) * q,
        math.sin(theta) * p + math.cos(theta) * q,
    )


def tripartite_settings(theta_b: float = math.pi / 6, theta_c: float = math.pi / 3, plane: str = "zx") -> DichotomicSetting:
    """Party A measures (P, Q); B and C measure (cos t P - sin t Q, sin t P + cos t Q).

    With the default plane (P, Q) = (sigma_z, sigma_x) these are the standard
    rotated-observable block with the given angles. Other planes substitute
    another Pauli pair.
    """
    p, q = PLANES[plane]
    pairs = ((p, q), _rotated_pair(theta_b, plane), _rotated_pair(theta_c, plane))
    # In direction form, cos t P - sin t Q points at -t and sin t P + cos t Q at pi/2 - t.
    angles = ((0.0, math.pi / 2), (-theta_b, math.pi / 2 - theta_b), (-theta_c, math.pi / 2 - theta_c))
    dirs = tuple((np.array([math.cos(a), math.sin(a)]), np.array([math.cos(b), math.sin(b)])) for a, b in angles)
    return DichotomicSetting(pairs, angles, dirs, plane)


def bipartite_settings(theta_b: float = math.pi / 4, plane: str = "zx") -> DichotomicSetting:
    """Two-party analogue of :func:`tripartite_settings`."""
    p, q = PLANES[plane]
    angles = ((0.0, math.pi / 2), (-theta_b, math.pi / 2 - theta_b))
    dirs = tuple((np.array([math.cos(a), math.sin(a)]), np.array([math.cos(b), math.sin(b)])) for a, b in angles)
    return DichotomicSetting(((p, q), _rotated_pair(theta_b, plane)), angles, dirs, plane)


@dataclass(frozen=True)
class BellReport:
    operator_id: str
    expectation: float
    bound: float
    violated: bool

    @property
    def margin(self) -> float:
        """Amount by which |<B>| exceeds the local bound, clamped at zero."""
        return max(0.0, abs(self.expectation) - self.bound)


def _report(name: str, value: float, bound: float) -> BellReport:
    return BellReport(name, float(value), bound, abs(value) > bound + VIOLATION_EPS)


def bell_operator(fam: BellFamily, setting: DichotomicSetting) -> np.ndarray:
    if setting.n_parties != fam.n_parties:
        raise DimensionError(f"{fam.name} needs {fam.n_parties} parties, setting has {setting.n_parties}")
    side = 2**fam.n_parties
    op = np.zeros((side, side), dtype=complex)
    for coef, choices in fam.terms:
        op += coef * kron(*(setting.observables[k][c] for k, c in enumerate(choices)))
    return op


def expectation(rho, fam: BellFamily | str, setting: DichotomicSetting) -> float:
    """Re tr(rho B); the imaginary part is checked to be round-off."""
    fam = family(fam) if isinstance(fam, str) else fam
    rho = coerce_state(rho)
    if rho.dim != 2**fam.n_parties:
        raise DimensionError(f"{fam.name} needs a {fam.n_parties}-qubit state, got side {rho.dim}")
    val = np.trace(rho.mat @ bell_operator(fam, setting))
    if abs(val.imag) > 1e-10:
        raise ArithmeticError(f"Bell expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def bell_value(rho, fam: BellFamily | str, setting: DichotomicSetting) -> BellReport:
    fam = family(fam) if isinstance(fam, str) else fam
    return _report(fam.name, expectation(rho, fam, setting), fam.bound)


def chsh_value(rho, setting: DichotomicSetting) -> BellReport:
    return bell_value(rho, FAMILIES["CHSH"], setting)


def svetlichny_value(rho, setting: DichotomicSetting) -> BellReport:
    return bell_value(rho, FAMILIES["Svetlichny"], setting)


def correlation_matrix(rho) -> np.ndarray:
    """T_ij = tr(rho sigma_i (x) sigma_j) for i, j over x, y, z."""
    rho = coerce_state(rho)
    if rho.dim != 4:
        raise DimensionError("correlation matrix needs a two-qubit state")
    return np.array([[np.trace(rho.mat @ kron(a, b)).real for b in SPHERE_BASIS] for a in SPHERE_BASIS])


def chsh_max(rho) -> float:
    """Largest CHSH value over all settings: 2 sqrt(s1^2 + s2^2) from T's singular values."""
    s = np.linalg.svd(correlation_matrix(rho), compute_uv=False)
    return 2 * math.sqrt(s[0] ** 2 + s[1] ** 2)


# ---------------------------------------------------------------------------
# WWZB symmetry closure
# ---------------------------------------------------------------------------


def _coefficient_table(fam: BellFamily) -> dict[tuple[int, ...], float]:
    table: dict[tuple[int, ...], float] = {}
    for coef, choices in fam.terms:
        table[choices] = table.get(choices, 0.0) + coef
    return table


def symmetry_variants(fam: BellFamily) -> list[dict[tuple[int, ...], float]]:
    """All distinct coefficient tables reachable by party permutations,
    per-party relabeling M <-> M', and sign flips of individual observables."""
    base = _coefficient_table(fam)
    n = fam.n_parties
    seen = set()
    variants = []
    for perm in itertools.permutations(range(n)):
        for swaps in itertools.product((0, 1), repeat=n):
            for flips in itertools.product((1, -1), repeat=2 * n):
                table = {}
                for choices, coef in base.items():
                    new = tuple(choices[perm[k]] ^ swaps[k] for k in range(n))
                    sign = math.prod(flips[2 * k + new[k]] for k in range(n))
                    table[new] = coef * sign
                key = tuple(sorted(table.items()))
                if key not in seen:
                    seen.add(key)
                    variants.append(table)
    return variants


def wwzb_values(rho, setting: DichotomicSetting, exhaustive: bool = False) -> list[BellReport]:
    """The five WWZB class expectations (bound 2 each).

    With ``exhaustive`` each class reports the variant of largest magnitude
    over its symmetry closure.
    """
    rho = coerce_state(rho)
    if rho.dim != 8:
        raise DimensionError("WWZB inequalities need a three-qubit state")
    if not exhaustive:
        return [bell_value(rho, FAMILIES[name], setting) for name in WWZB_CLASSES]
    corr = {
        choices: float(np.trace(rho.mat @ kron(*(setting.observables[k][c] for k, c in enumerate(choices)))).real)
        for choices in itertools.product((0, 1), repeat=3)
    }
    reports = []
    for name in WWZB_CLASSES:
        best = None
        for table in symmetry_variants(FAMILIES[name]):
            val = sum(coef * corr[ch] for ch, coef in table.items())
            if best is None or abs(val) > abs(best) + 1e-15:
                best = val
        reports.append(_report(name, best, 2.0))
    return reports


def local_classical(reports: Sequence[BellReport]) -> bool:
    """True when no WWZB class is violated."""
    return not any(r.violated for r in reports)


# ---------------------------------------------------------------------------
# Angle optimization
# ---------------------------------------------------------------------------


def correlation_tensor(rho, basis: str) -> np.ndarray:
    """Re tr(rho B_i1 (x) ... (x) B_in) over the basis operators of ``basis``."""
    rho = coerce_state(rho)
    n = rho.n_parties
    ops = SPHERE_BASIS if basis == "sphere" else PLANES[basis]
    m = len(ops)
    tensor = np.empty((m,) * n)
    for idx in itertools.product(range(m), repeat=n):
        tensor[idx] = np.trace(rho.mat @ kron(*(ops[i] for i in idx))).real
    return tensor


def _contract(tensor: np.ndarray, vecs: Sequence[np.ndarray | None]) -> np.ndarray | float:
    """Contract every axis whose vector is given; a None leaves that axis open."""
    out = tensor
    for k in reversed(range(len(vecs))):
        if vecs[k] is not None:
            out = np.tensordot(out, vecs[k], axes=([k], [0]))
    return out


def _value(tensor, fam: BellFamily, dirs) -> float:
    return float(sum(coef * _contract(tensor, [dirs[k][c] for k, c in enumerate(ch)]) for coef, ch in fam.terms))


def _linear_form(tensor, fam: BellFamily, dirs, party: int, choice: int) -> tuple[np.ndarray, float]:
    """Write the family value as g . u + const in the direction u of one observable."""
    g = np.zeros(tensor.shape[party])
    const = 0.0
    for coef, ch in fam.terms:
        if ch[party] == choice:
            vecs = [None if k == party else dirs[k][c] for k, c in enumerate(ch)]
            g = g + coef * _contract(tensor, vecs)
        else:
            const += coef * _contract(tensor, [dirs[k][c] for k, c in enumerate(ch)])
    return g, float(const)


def _direction(theta: float, basis: str) -> np.ndarray:
    if basis == "sphere":
        # Coarse grid for the sphere explores the x-z great circle.
        return np.array([math.sin(theta), 0.0, math.cos(theta)])
    return np.array([math.cos(theta), math.sin(theta)])


def _angle_of(u: np.ndarray, basis: str) -> tuple[float, ...]:
    if basis == "sphere":
        return (math.acos(max(-1.0, min(1.0, u[2]))), math.atan2(u[1], u[0]))
    return (math.atan2(u[1], u[0]),)


@dataclass(frozen=True)
class OptimizationResult:
    setting: DichotomicSetting
    value: float
    family: str
    basis: str
    history: tuple[float, ...]


def _ascend(tensor, fam, dirs, iters: int) -> tuple[list, float, list[float]]:
    """Exact coordinate ascent on |value|: each observable is set to the unit
    vector maximizing the (linear) dependence on it. Monotone by construction."""
    n = fam.n_parties
    current = abs(_value(tensor, fam, dirs))
    history = [current]
    for _ in range(iters):
        before = current
        for party in range(n):
            for choice in (0, 1):
                g, const = _linear_form(tensor, fam, dirs, party, choice)
                norm = float(np.linalg.norm(g))
                if norm < 1e-15:
                    continue
                sign = 1.0 if const >= 0 else -1.0
                candidate = sign * g / norm
                trial = [list(p) for p in dirs]
                trial[party][choice] = candidate
                val = abs(_value(tensor, fam, trial))
                if val > current:
                    dirs = [tuple(p) for p in trial]
                    current = val
        history.append(current)
        if current - before <= 1e-15:
            break
    return dirs, current, history


def _polish(tensor, fam, dirs) -> tuple[list, float]:
    """Quasi-Newton refinement of |value| over unnormalized direction vectors.

    Coordinate ascent crawls when the optimum is poorly conditioned; a final
    L-BFGS pass closes the remaining gap. Kept only if it improves the value.
    """
    n = fam.n_parties
    m = tensor.shape[0]

    def unpack(x):
        vecs = x.reshape(n, 2, m)
        return [tuple(v / np.linalg.norm(v) for v in pair) for pair in vecs]

    def objective(x):
        if np.any(np.linalg.norm(x.reshape(-1, m), axis=1) < 1e-12):
            return 0.0
        return -abs(_value(tensor, fam, unpack(x)))

    x0 = np.concatenate([np.concatenate(pair) for pair in dirs])
    res = minimize(objective, x0, method="L-BFGS-B")
    start = abs(_value(tensor, fam, dirs))
    if np.all(np.isfinite(res.x)) and -res.fun > start:
        return unpack(res.x), float(-res.fun)
    return dirs, start


def _grid_starts(tensor, fam: BellFamily, basis: str, resolution: int, n_starts: int):
    """Evaluate a joint coarse grid and return the best start points.

    The joint grid halves ``resolution`` until it has at most 2^16 points;
    ties resolve to the lexicographically smallest angle-index tuple.
    """
    n = fam.n_parties
    n_obs = 2 * n
    per_axis = resolution
    while per_axis > 2 and per_axis**n_obs > 65536:
        per_axis //= 2
    thetas = np.arange(per_axis) * math.pi / per_axis
    grid = np.array([_direction(t, basis) for t in thetas])  # (r, m)
    letters = "abcdef"[:n]
    spec = letters + "," + ",".join(f"{chr(ord('p') + k)}{letters[k]}" for k in range(n))
    spec += "->" + "".join(chr(ord("p") + k) for k in range(n))
    # Correlator for every tuple of grid directions, one axis per party.
    corr = np.einsum(spec, tensor, *([grid] * n))
    values = np.zeros((per_axis,) * n_obs)
    for coef, ch in fam.terms:
        # Party k's grid axis goes to observable slot 2k + choice; slots increase with k.
        shape = [1] * n_obs
        for k, c in enumerate(ch):
            shape[2 * k + c] = per_axis
        values = values + coef * corr.reshape(shape)
    flat = np.abs(values).reshape(-1)
    order = np.lexsort((np.arange(flat.size), -flat))
    starts = []
    for pos in order[:n_starts]:
        idx = np.unravel_index(pos, values.shape)
        starts.append([(grid[idx[2 * k]], grid[idx[2 * k + 1]]) for k in range(n)])
    return starts


def _block_grid_pass(tensor, fam, dirs, resolution: int, basis: str):
    """Per-party (theta, theta') grid sweep holding the other parties fixed."""
    thetas = np.arange(resolution) * math.pi / resolution
    grid = np.array([_direction(t, basis) for t in thetas])
    current = abs(_value(tensor, fam, dirs))
    for party in range(fam.n_parties):
        # Every term holds exactly one of M, M' for this party, so the value
        # is g0 . u + g1 . u' with no remainder.
        g0 = _linear_form(tensor, fam, dirs, party, 0)[0]
        g1 = _linear_form(tensor, fam, dirs, party, 1)[0]
        vals = np.abs((grid @ g0)[:, None] + (grid @ g1)[None, :])
        i, j = divmod(int(np.argmax(vals)), resolution)
        if vals[i, j] > current:
            dirs = [tuple(p) for p in dirs]
            dirs[party] = (grid[i], grid[j])
            current = float(vals[i, j])
    return dirs, current


def optimize_angles(
    rho,
    operator_family: str,
    grid_resolution: int = 16,
    refinement_iters: int = 20,
    basis: str = "zx",
    n_starts: int = 8,
) -> OptimizationResult:
    """Maximize |<B>| over measurement settings.

    ``basis`` is a Pauli plane ("zx", "xy", "yz"), "sphere" for arbitrary
    Bloch directions, or "auto" to try the three planes and keep the best.
    Search: a deterministic coarse grid over all observables picks start
    points, a per-party (theta, theta') grid sweep at ``grid_resolution``
    follows, then exact coordinate ascent for ``refinement_iters`` sweeps and
    a closing L-BFGS polish.
    """
    fam = family(operator_family)
    if grid_resolution < 8:
        raise ValueError(f"grid_resolution must be >= 8, got {grid_resolution}")
    rho = coerce_state(rho)
    if rho.dim != 2**fam.n_parties:
        raise DimensionError(f"{fam.name} needs a {fam.n_parties}-qubit state")
    if basis == "auto":
        results = [optimize_angles(rho, fam.name, grid_resolution, refinement_iters, b, n_starts) for b in PLANES]
        best = results[0]
        for res in results[1:]:
            if res.value > best.value + 1e-15:
                best = res
        return best
    if basis not in PLANES and basis != "sphere":
        raise ValueError(f"unknown basis {basis!r}")
    tensor = correlation_tensor(rho, basis)
    best_dirs, best_val, best_hist = None, -1.0, ()
    for start in _grid_starts(tensor, fam, basis, grid_resolution, n_starts):
        dirs, val = _block_grid_pass(tensor, fam, start, grid_resolution, basis)
        dirs, val, hist = _ascend(tensor, fam, dirs, refinement_iters)
        dirs, val = _polish(tensor, fam, dirs)
        hist = hist + [val] if val > hist[-1] else hist
        if val > best_val + 1e-15:
            best_dirs, best_val, best_hist = dirs, val, tuple(hist)
    pairs = tuple((observable_from_direction(u, basis), observable_from_direction(v, basis)) for u, v in best_dirs)
    angles = tuple((_angle_of(u, basis)[0], _angle_of(v, basis)[0]) for u, v in best_dirs)
    setting = DichotomicSetting(pairs, angles, tuple((np.array(u), np.array(v)) for u, v in best_dirs), basis)
    return OptimizationResult(setting, best_val, fam.name, basis, best_hist)
