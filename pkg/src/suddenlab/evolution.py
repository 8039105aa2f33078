"""Continuous-time dynamics: Lindblad generators, thermal rates, unitary and
Jaynes-Cummings evolution.

Density matrices are vectorized row-major, so ``vec(A rho B) = (A kron B^T) vec(rho)``.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .states import DensityMatrix, coerce_state
from .tensor_core import (
    HERMITIAN_TOL,
    SIGMA_MINUS,
    DimensionError,
    NotHermitianError,
    as_matrix,
    clamp_psd,
    embed,
    expm,
    hermiticity_error,
    kron,
)

EXPM_MAX_SIDE = 1024  # d^2 above this switches to fixed-step RK4
LEAKAGE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class LindbladSpec:
    """Hamiltonian plus (jump operator, rate) pairs on a space with dims ``dims``."""

    hamiltonian: np.ndarray
    jumps: tuple[tuple[np.ndarray, float], ...] = ()
    dims: tuple[int, ...] | None = None

    def __post_init__(self):
        h = as_matrix(self.hamiltonian)
        if h.shape[0] != h.shape[1]:
            raise DimensionError(f"Hamiltonian must be square, got {h.shape}")
        if hermiticity_error(h) > HERMITIAN_TOL:
            raise NotHermitianError("Hamiltonian is not Hermitian")
        jumps = []
        for op, rate in self.jumps:
            op = as_matrix(op)
            if op.shape != h.shape:
                raise DimensionError(f"jump operator shape {op.shape} differs from Hamiltonian {h.shape}")
            if rate < 0:
                raise ValueError(f"jump rates must be nonnegative, got {rate}")
            jumps.append((op, float(rate)))
        dims = tuple(self.dims) if self.dims is not None else (h.shape[0],)
        if int(np.prod(dims)) != h.shape[0]:
            raise DimensionError(f"dims {dims} do not match side {h.shape[0]}")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(jumps))
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def max_rate(self) -> float:
        return max((r for _, r in self.jumps), default=0.0)


def thermal_occupation(omega0: float, beta: float) -> float:
    """Bose-Einstein mean occupation 1/(exp(beta*omega0) - 1); zero at beta = inf."""
    if omega0 <= 0:
        raise ValueError(f"transition frequency must be positive, got {omega0}")
    if math.isinf(beta) and beta > 0:
        return 0.0
    if beta <= 0:
        raise ValueError(f"inverse temperature must be positive, got {beta}")
    return 1.0 / math.expm1(beta * omega0)


def thermal_rates(gamma0: float, omega0: float, beta: float) -> tuple[float, float]:
    """Absorption and emission rates (up, down) for a two-level system in a thermal bath."""
    if gamma0 < 0:
        raise ValueError(f"base rate must be nonnegative, got {gamma0}")
    n = thermal_occupation(omega0, beta)
    return gamma0 * n, gamma0 * (1 + n)


def liouvillian(spec: LindbladSpec) -> np.ndarray:
    """Superoperator matrix L with d vec(rho)/dt = L vec(rho)."""
    d = spec.dim
    eye = np.eye(d, dtype=complex)
    h = spec.hamiltonian
    gen = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for op, rate in spec.jumps:
        if rate == 0.0:
            continue
        ldl = op.conj().T @ op
        gen += rate * (np.kron(op, op.conj()) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T))
    return gen


def _rk4(gen: np.ndarray, vec: np.ndarray, t: float, dt: float) -> np.ndarray:
    steps = max(1, math.ceil(t / dt))
    h = t / steps
    for _ in range(steps):
        k1 = gen @ vec
        k2 = gen @ (vec + 0.5 * h * k1)
        k3 = gen @ (vec + 0.5 * h * k2)
        k4 = gen @ (vec + h * k3)
        vec = vec + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return vec


def _finish(mat: np.ndarray, dims) -> DensityMatrix:
    mat = 0.5 * (mat + mat.conj().T)
    mat = mat / np.trace(mat).real
    return DensityMatrix(clamp_psd(mat), dims)


def lindblad_evolve(spec: LindbladSpec, rho0, t: float) -> DensityMatrix:
    """Solve the Lindblad equation from ``rho0`` for time ``t``."""
    rho0 = coerce_state(rho0, spec.dims)
    if rho0.dim != spec.dim:
        raise DimensionError(f"state dimension {rho0.dim} does not match generator dimension {spec.dim}")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    d = spec.dim
    gen = liouvillian(spec)
    vec = rho0.mat.reshape(-1)
    if d * d <= EXPM_MAX_SIDE:
        out = expm(gen * t) @ vec
    else:
        scale = max(spec.max_rate, float(np.abs(spec.hamiltonian).max()), 1.0)
        out = _rk4(gen, vec, t, 1e-3 / scale)
    return _finish(out.reshape(d, d), rho0.dims)


def unitary_evolve(hamiltonian, rho0, t: float) -> DensityMatrix:
    """exp(-iHt) rho0 exp(iHt)."""
    h = as_matrix(hamiltonian)
    if hermiticity_error(h) > HERMITIAN_TOL:
        raise NotHermitianError("Hamiltonian is not Hermitian")
    rho0 = coerce_state(rho0)
    if h.shape[0] != rho0.dim:
        raise DimensionError(f"Hamiltonian side {h.shape[0]} does not match state dimension {rho0.dim}")
    u = expm(-1j * h * t)
    out = u @ rho0.mat @ u.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T), rho0.dims)


def multi_local_lindblad(
    local_jumps: Sequence[tuple[np.ndarray, float]],
    n: int,
    local_dim: int = 2,
    hamiltonian=None,
) -> LindbladSpec:
    """Embed the same local jump set on each of ``n`` identical subsystems."""
    if n < 1:
        raise ValueError("need at least one subsystem")
    dims = (local_dim,) * n
    jumps = tuple((embed(op, k, dims), rate) for k in range(n) for op, rate in local_jumps)
    side = local_dim**n
    h = np.zeros((side, side), dtype=complex) if hamiltonian is None else as_matrix(hamiltonian)
    return LindbladSpec(h, jumps, dims)


def thermal_qubits_spec(n: int, gamma0: float, omega0: float, beta: float) -> LindbladSpec:
    """Independent qubits exchanging quanta with thermal baths (interaction picture, H = 0)."""
    up, down = thermal_rates(gamma0, omega0, beta)
    return multi_local_lindblad([(SIGMA_MINUS, down), (SIGMA_MINUS.conj().T, up)], n)


def atomic_inversion() -> np.ndarray:
    """|e><e| - |g><g| with |0> = ground."""
    return np.diag([-1.0, 1.0]).astype(complex)


def two_qubit_coupled_hamiltonian(omega: float, g: float) -> np.ndarray:
    """(omega/2)(s_z (x) I + I (x) s_z) + (g/2) s_x (x) s_x, with s_z the atomic inversion."""
    sz = atomic_inversion()
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    eye = np.eye(2, dtype=complex)
    return 0.5 * omega * (kron(sz, eye) + kron(eye, sz)) + 0.5 * g * kron(sx, sx)


@dataclass(frozen=True)
class CavityModel:
    """Atoms each coupled to their own single-mode cavity."""

    n_atoms: int = 2
    omega0: float = 1.0
    omega: float = 1.0
    g: float = 1.0
    truncation: int = 1
    dims: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.n_atoms not in (1, 2, 3):
            raise ValueError(f"n_atoms must be 1, 2 or 3, got {self.n_atoms}")
        if self.truncation < 1:
            raise ValueError(f"photon truncation must be >= 1, got {self.truncation}")
        for name in ("omega0", "omega", "g"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "dims", (2, self.truncation + 1) * self.n_atoms)


def annihilation(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels)), k=1).astype(complex)


def jaynes_cummings_hamiltonian(model: CavityModel) -> tuple[np.ndarray, tuple[int, ...]]:
    """Sum of independent atom-cavity Hamiltonians, ordered atom1, cavity1, atom2, ...

    Each pair contributes (omega0/2) s_z + omega a^dag a + g (a^dag s_- + s_+ a).
    """
    dims = model.dims
    levels = model.truncation + 1
    sz = atomic_inversion()
    a = annihilation(levels)
    side = int(np.prod(dims))
    h = np.zeros((side, side), dtype=complex)
    for k in range(model.n_atoms):
        atom, cav = 2 * k, 2 * k + 1
        h += 0.5 * model.omega0 * embed(sz, atom, dims)
        h += model.omega * embed(a.conj().T @ a, cav, dims)
        lower = embed(SIGMA_MINUS, atom, dims)
        a_full = embed(a, cav, dims)
        h += model.g * (a_full.conj().T @ lower + lower.conj().T @ a_full)
    return h, dims


def excitation_number(model: CavityModel) -> np.ndarray:
    """Total number of atomic excitations plus photons."""
    dims = model.dims
    a = annihilation(model.truncation + 1)
    side = int(np.prod(dims))
    n_op = np.zeros((side, side), dtype=complex)
    for k in range(model.n_atoms):
        n_op += embed(SIGMA_MINUS.conj().T @ SIGMA_MINUS, 2 * k, dims)
        n_op += embed(a.conj().T @ a, 2 * k + 1, dims)
    return n_op


def fock_leakage(rho: DensityMatrix, model: CavityModel) -> float:
    """Largest population of |excited, top Fock level> over the atom-cavity pairs.

    Only that component is coupled by a^dag s_- to a photon number beyond the
    truncation, so it measures how much the truncated dynamics is in error.
    """
    top = model.truncation
    worst = 0.0
    for k in range(model.n_atoms):
        pair = rho.reduce([2 * k, 2 * k + 1]).mat
        idx = 1 * (top + 1) + top
        worst = max(worst, float(pair[idx, idx].real))
    return worst


def cavity_evolve(model: CavityModel, rho0, t: float) -> DensityMatrix:
    """Unitary Jaynes-Cummings evolution, warning when the photon truncation leaks."""
    h, _ = jaynes_cummings_hamiltonian(model)
    rho = unitary_evolve(h, rho0, t)
    leak = max(fock_leakage(coerce_state(rho0, model.dims), model), fock_leakage(rho, model))
    if leak > LEAKAGE_TOL:
        warnings.warn(f"population {leak:.2e} at the top Fock level couples beyond the truncation; raise it", stacklevel=2)
    return rho


def atoms_with_vacuum(atomic_ket, model: CavityModel) -> DensityMatrix:
    """Atomic pure state (ordered atom1, atom2, ...) with every cavity in vacuum."""
    levels = model.truncation + 1
    psi_atoms = np.asarray(atomic_ket, dtype=complex).reshape((2,) * model.n_atoms)
    vac = np.zeros(levels, dtype=complex)
    vac[0] = 1.0
    psi = psi_atoms
    # Interleave: insert a vacuum cavity axis after each atom axis.
    for k in range(model.n_atoms):
        psi = np.tensordot(psi, vac, axes=0)
        psi = np.moveaxis(psi, -1, 2 * k + 1)
    psi = psi.reshape(-1)
    return DensityMatrix(np.outer(psi, psi.conj()), model.dims)
