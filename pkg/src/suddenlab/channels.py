"""Kraus-operator channels: construction, CPTP checks, application, composition.

All qubit channels use ``|0>`` = ground, ``|1>`` = excited. A decay factor
``gamma`` is the amplitude multiplying the affected coherence (dephasing) or
the excited-state amplitude (damping), so populations decay as ``gamma**2``.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .states import DensityMatrix, coerce_state, max_entangled_ket
from .tensor_core import (
    HERMITIAN_TOL,
    I2,
    PAULIS,
    DimensionError,
    as_matrix,
    check_dims,
    clamp_psd,
    eig_hermitian,
    kron,
)

CPTP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A list of Kraus operators acting on a space with subsystem dims ``dims``.

    Trace preservation is not enforced here so that :func:`verify_cptp` can
    report on arbitrary operator sets; every named constructor in this module
    does produce a CPTP set.
    """

    ops: tuple[np.ndarray, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        ops = tuple(as_matrix(op) for op in self.ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        side = ops[0].shape
        for k, op in enumerate(ops):
            if op.shape != side:
                raise DimensionError(f"Kraus operator {k} has shape {op.shape}, expected {side}")
        dims = check_dims(ops[0], self.dims)
        for op in ops:
            op.setflags(write=False)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def __len__(self) -> int:
        return len(self.ops)


class CPTPReport(NamedTuple):
    ok: bool
    deviation: float


def verify_cptp(channel: KrausChannel, tol: float = CPTP_TOL) -> CPTPReport:
    """Check sum_k E_k^dag E_k = I; report the max-norm deviation."""
    total = sum(op.conj().T @ op for op in channel.ops)
    dev = float(np.abs(total - np.eye(channel.dim)).max())
    return CPTPReport(dev <= tol, dev)


def _check_factor(gamma: float, name: str = "gamma") -> float:
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {gamma}")
    return gamma


def decay_factor(rate: float, t: float) -> float:
    """exp(-rate * t) with the usual domain checks."""
    if rate < 0 or t < 0:
        raise ValueError(f"rate and time must be nonnegative, got rate={rate}, t={t}")
    return math.exp(-rate * t)


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel((np.eye(d, dtype=complex),), (d,))


def unitary_channel(u, dims: Sequence[int] | None = None) -> KrausChannel:
    u = as_matrix(u)
    return KrausChannel((u,), tuple(dims) if dims is not None else (u.shape[0],))


def dephasing_qubit(gamma: float) -> KrausChannel:
    """Phase damping: populations fixed, rho_01 -> gamma * rho_01."""
    gamma = _check_factor(gamma)
    e0 = np.diag([1.0, gamma]).astype(complex)
    e1 = np.diag([0.0, math.sqrt(1 - gamma**2)]).astype(complex)
    return KrausChannel((e0, e1), (2,))


def amplitude_damping_qubit(gamma: float) -> KrausChannel:
    """Spontaneous decay |1> -> |0>: excited population -> gamma**2 * population."""
    gamma = _check_factor(gamma)
    e0 = np.diag([1.0, gamma]).astype(complex)
    e1 = np.array([[0.0, math.sqrt(1 - gamma**2)], [0.0, 0.0]], dtype=complex)
    return KrausChannel((e0, e1), (2,))


def depolarizing_from_contraction(eta: float) -> KrausChannel:
    """Qubit depolarizing channel that scales the Bloch vector by ``eta``."""
    eta = _check_factor(eta, "eta")
    p0 = (1 + 3 * eta) / 4
    p1 = (1 - eta) / 4
    ops = [math.sqrt(p0) * I2] + [math.sqrt(p1) * s for s in PAULIS]
    return KrausChannel(tuple(ops), (2,))


def depolarizing_qubit(tau: float, t: float) -> KrausChannel:
    """Bloch-vector contraction by exp(-t/tau)."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return depolarizing_from_contraction(math.exp(-t / tau))


def weyl_operators(d: int) -> list[np.ndarray]:
    """Clock-and-shift unitaries X^j Z^k, j,k in 0..d-1 (an orthogonal operator basis)."""
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    clock = np.diag(omega ** np.arange(d))
    return [np.linalg.matrix_power(shift, j) @ np.linalg.matrix_power(clock, k) for j in range(d) for k in range(d)]


def depolarizing_qudit(d: int, eta: float) -> KrausChannel:
    """rho -> eta * rho + (1 - eta) * tr(rho) I/d on a d-level system.

    Uses the twirl identity (1/d^2) sum_U U rho U^dag = tr(rho) I/d over the
    Weyl basis, so the Kraus weights are ``eta + (1-eta)/d^2`` on the identity
    and ``(1-eta)/d^2`` on the other d^2-1 unitaries.
    """
    if d < 2:
        raise ValueError("local dimension must be >= 2")
    eta = _check_factor(eta, "eta")
    units = weyl_operators(d)
    w_rest = (1 - eta) / d**2
    weights = [eta + w_rest] + [w_rest] * (len(units) - 1)
    ops = tuple(math.sqrt(w) * u for w, u in zip(weights, units) if w > 0)
    return KrausChannel(ops, (d,))


def qutrit_amplitude_damping(a1: float, a2: float, t: float) -> KrausChannel:
    """Three-level decay of levels 1 and 2 into level 0 at rates a1 and a2."""
    if a1 < 0 or a2 < 0 or t < 0:
        raise ValueError(f"rates and time must be nonnegative, got a1={a1}, a2={a2}, t={t}")
    k0 = np.diag([1.0, math.exp(-a1 * t / 2), math.exp(-a2 * t / 2)]).astype(complex)
    k1 = np.zeros((3, 3), dtype=complex)
    k1[0, 1] = math.sqrt(-math.expm1(-a1 * t))
    k2 = np.zeros((3, 3), dtype=complex)
    k2[0, 2] = math.sqrt(-math.expm1(-a2 * t))
    return KrausChannel((k0, k1, k2), (3,))


def schur_channel(factors) -> KrausChannel:
    """Channel rho -> factors * rho (elementwise) for a PSD unit-diagonal matrix.

    Kraus operators are diagonal matrices built from the eigenvectors of
    ``factors``; this covers any pure-dephasing map in a fixed basis.
    """
    c = as_matrix(factors)
    if np.abs(np.diag(c) - 1).max() > 1e-12:
        raise ValueError("coherence-factor matrix must have unit diagonal")
    vals, vecs = eig_hermitian(c)
    if vals[-1] < -1e-10:
        raise ValueError(f"coherence-factor matrix is not PSD (eigenvalue {vals[-1]:.3e})")
    ops = tuple(np.diag(math.sqrt(v) * vecs[:, k]) for k, v in enumerate(vals) if v > 1e-15)
    return KrausChannel(ops, (c.shape[0],))


def global_dephasing(n_qubits: int, gamma_t: float) -> KrausChannel:
    """Dephasing by one classical field shared by all qubits.

    The random common phase couples to the total ``sum_k sigma_z``; averaging a
    Gaussian phase of variance ``gamma_t`` multiplies element (i, j) by
    exp(-gamma_t * (M_i - M_j)^2 / 8), with M the total-sigma_z eigenvalue.
    For two qubits this gives rho[0,3] -> exp(-2 gamma_t) rho[0,3] and leaves
    rho[1,2] untouched.
    """
    if gamma_t < 0:
        raise ValueError(f"gamma_t must be nonnegative, got {gamma_t}")
    n = 2**n_qubits
    mag = np.array([n_qubits - 2 * bin(i).count("1") for i in range(n)], dtype=float)
    factors = np.exp(-gamma_t * (mag[:, None] - mag[None, :]) ** 2 / 8)
    ch = schur_channel(factors)
    return KrausChannel(ch.ops, (2,) * n_qubits)


def multi_local(channels: Sequence[KrausChannel]) -> KrausChannel:
    """Independent channels on each subsystem, combined as a tensor product."""
    if not channels:
        raise ValueError("multi_local needs at least one channel")
    dims = tuple(d for ch in channels for d in ch.dims)
    ops = tuple(kron(*combo) for combo in itertools.product(*(ch.ops for ch in channels)))
    return KrausChannel(ops, dims)


def local(channel: KrausChannel, position: int, dims: Sequence[int]) -> KrausChannel:
    """Act with ``channel`` on the subsystem(s) starting at ``position``; identity elsewhere."""
    dims = tuple(dims)
    width = len(channel.dims)
    if dims[position : position + width] != channel.dims:
        raise DimensionError(f"channel dims {channel.dims} do not match subsystems {position}.. of {dims}")
    parts = [identity_channel(d) for d in dims[:position]] + [channel] + [identity_channel(d) for d in dims[position + width :]]
    return multi_local(parts)


def on_subsystems(local_channels: dict[int, KrausChannel], dims: Sequence[int]) -> KrausChannel:
    """Tensor product with the given channel at each listed subsystem, identity elsewhere."""
    parts = []
    for k, d in enumerate(dims):
        ch = local_channels.get(k, identity_channel(d))
        if ch.dims != (d,):
            raise DimensionError(f"channel for subsystem {k} has dims {ch.dims}, expected ({d},)")
        parts.append(ch)
    return multi_local(parts)


def apply(channel: KrausChannel, rho) -> DensityMatrix:
    """rho -> sum_k E_k rho E_k^dag, returned as a validated state."""
    rho = coerce_state(rho, channel.dims)
    if rho.dim != channel.dim:
        raise DimensionError(f"channel acts on dimension {channel.dim}, state has {rho.dim}")
    out = sum(op @ rho.mat @ op.conj().T for op in channel.ops)
    out = 0.5 * (out + out.conj().T)
    if float(eig_hermitian(out)[0][-1]) < 0.0:
        out = clamp_psd(out)
    return DensityMatrix(out, rho.dims)


def compose(first: KrausChannel, second: KrausChannel) -> KrausChannel:
    """Apply ``first`` then ``second``; Kraus set {B_j A_i}."""
    if first.dim != second.dim:
        raise DimensionError(f"cannot compose channels on dimensions {first.dim} and {second.dim}")
    ops = tuple(b @ a for a in first.ops for b in second.ops)
    return KrausChannel(ops, first.dims)


def choi_state(channel: KrausChannel) -> DensityMatrix:
    """(channel (x) id) applied to the maximally entangled projector."""
    if len(channel.dims) != 1:
        raise DimensionError("Choi state is defined here for single-system channels")
    d = channel.dim
    psi = max_entangled_ket(d)
    phi = DensityMatrix(np.outer(psi, psi.conj()), (d, d))
    return apply(local(channel, 0, (d, d)), phi)


def isometry_kraus(v, env_dim: int) -> tuple[np.ndarray, ...]:
    """Kraus operators of rho -> tr_env(V rho V^dag) for an isometry V: sys -> sys (x) env."""
    v = as_matrix(v)
    d_in = v.shape[1]
    if v.shape[0] != d_in * env_dim:
        raise DimensionError(f"isometry shape {v.shape} does not match env dimension {env_dim}")
    if np.abs(v.conj().T @ v - np.eye(d_in)).max() > HERMITIAN_TOL:
        raise ValueError("matrix is not an isometry")
    blocks = v.reshape(d_in, env_dim, d_in)
    return tuple(blocks[:, k, :].copy() for k in range(env_dim))


def mode_damping_isometry(p: float) -> np.ndarray:
    """Polarization-plus-path isometry for the interferometric damping map.

    Input polarization H=|0>, V=|1>; the path mode starts in ``|a>`` = |0>.
    |H>|a> -> |H>|a>, |V>|a> -> sqrt(1-p)|V>|a> + sqrt(p)|H>|b>.
    Output ordering is polarization (x) path.
    """
    p = _check_factor(p, "p")
    v = np.zeros((4, 2), dtype=complex)
    v[0, 0] = 1.0  # |H a>
    v[2, 1] = math.sqrt(1 - p)  # |V a>
    v[1, 1] = math.sqrt(p)  # |H b>
    return v


def mode_dephasing_isometry(p: float) -> np.ndarray:
    """|H>|a> -> |H>|a>, |V>|a> -> sqrt(1-p)|V>|a> + sqrt(p)|V>|b>."""
    p = _check_factor(p, "p")
    v = np.zeros((4, 2), dtype=complex)
    v[0, 0] = 1.0
    v[2, 1] = math.sqrt(1 - p)
    v[3, 1] = math.sqrt(p)
    return v


def mode_damping_channel(p: float) -> KrausChannel:
    return KrausChannel(isometry_kraus(mode_damping_isometry(p), 2), (2,))


def mode_dephasing_channel(p: float) -> KrausChannel:
    return KrausChannel(isometry_kraus(mode_dephasing_isometry(p), 2), (2,))


def intrinsic_dephase(rho0, hamiltonian, t: float, tau: float = 1.0, gamma_t: float | None = None) -> DensityMatrix:
    """Energy-basis solution of the intrinsic-decoherence master equation.

    Element (n, m) in the eigenbasis of ``hamiltonian`` picks up
    exp(-i (E_n - E_m) t) * exp(-gamma_t (E_n - E_m)^2). ``gamma_t`` defaults to
    ``tau * t`` (constant-rate case).
    """
    rho0 = coerce_state(rho0)
    energies, vecs = eig_hermitian(hamiltonian)
    if vecs.shape[0] != rho0.dim:
        raise DimensionError(f"Hamiltonian side {vecs.shape[0]} does not match state dimension {rho0.dim}")
    if gamma_t is None:
        gamma_t = tau * t
    if gamma_t < 0:
        raise ValueError(f"gamma_t must be nonnegative, got {gamma_t}")
    gaps = energies[:, None] - energies[None, :]
    in_energy = vecs.conj().T @ rho0.mat @ vecs
    evolved = in_energy * np.exp(-1j * gaps * t) * np.exp(-gamma_t * gaps**2)
    out = vecs @ evolved @ vecs.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T), rho0.dims)
