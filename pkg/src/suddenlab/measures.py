"""Coherence, entanglement and separability functionals.

Entropies use base-2 logarithms throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .states import DensityMatrix, InvalidStateError, XStateParams, coerce_state, max_entangled_ket
from .tensor_core import SIGMA_Y, DimensionError, eig_hermitian, kron, partial_transpose

# Eigenvalues of a density matrix below this are treated as exact zeros when
# factoring rho = W W^dag, so that pure and low-rank states are handled
# without square roots of round-off.
RANK_TOL = 1e-14
_YY = kron(SIGMA_Y, SIGMA_Y)


@dataclass(frozen=True)
class MeasureResult:
    """A cutoff-defined measure: ``value = max(0, argument)``."""

    value: float
    argument: float
    measure_id: str


def _factor(rho: DensityMatrix) -> np.ndarray:
    """W with rho = W W^dag, one column per numerically nonzero eigenvalue."""
    vals, vecs = eig_hermitian(rho.mat)
    keep = vals > RANK_TOL
    return vecs[:, keep] * np.sqrt(vals[keep])


def purity(rho) -> float:
    rho = coerce_state(rho)
    return float(np.vdot(rho.mat, rho.mat).real)


def fidelity(rho1, rho2) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(r2) r1 sqrt(r2)))^2.

    Evaluated as the squared nuclear norm of W1^dag W2, which equals
    tr sqrt(sqrt(r2) r1 sqrt(r2)) for any factorizations r = W W^dag.
    """
    rho1, rho2 = coerce_state(rho1), coerce_state(rho2)
    if rho1.dim != rho2.dim:
        raise DimensionError(f"fidelity needs equal dimensions, got {rho1.dim} and {rho2.dim}")
    overlap = _factor(rho1).conj().T @ _factor(rho2)
    if overlap.size == 0:
        return 0.0
    nuclear = float(np.linalg.svd(overlap, compute_uv=False).sum())
    return min(1.0, nuclear**2)


def wootters_roots(rho) -> np.ndarray:
    """sqrt of the eigenvalues of rho * rho_tilde, descending.

    These are the singular values of W^T (s_y x s_y) W for rho = W W^dag, i.e.
    the square roots of the spectrum of sqrt(rho) rho_tilde sqrt(rho).
    """
    rho = coerce_state(rho)
    if rho.dim != 4:
        raise DimensionError(f"concurrence needs a two-qubit (4x4) state, got side {rho.dim}")
    w = _factor(rho)
    roots = np.linalg.svd(w.T @ _YY @ w, compute_uv=False) if w.size else np.zeros(0)
    out = np.zeros(4)
    out[: roots.size] = np.sort(roots)[::-1][:4]
    return out


def concurrence(rho) -> MeasureResult:
    """Wootters concurrence with the pre-cutoff argument Lambda."""
    r = wootters_roots(rho)
    lam = float(r[0] - r[1] - r[2] - r[3])
    return MeasureResult(max(0.0, lam), lam, "concurrence")


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument must lie in [0, 1], got {x}")
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def entanglement_of_formation(c: float) -> float:
    """Two-qubit entanglement of formation from the concurrence."""
    if not -1e-12 <= c <= 1 + 1e-12:
        raise ValueError(f"concurrence must lie in [0, 1], got {c}")
    c = min(max(c, 0.0), 1.0)
    return binary_entropy((1 + math.sqrt(1 - c * c)) / 2)


def negativity(rho, dims=None, party: int = 0) -> float:
    """Sum of |negative eigenvalues| of the partial transpose on ``party``."""
    rho = coerce_state(rho, dims)
    dims = rho.dims if dims is None else tuple(dims)
    if len(dims) != 2:
        raise DimensionError(f"negativity needs a bipartite state, got dims {dims}")
    vals = eig_hermitian(partial_transpose(rho.mat, dims, party))[0]
    return float(-vals[vals < 0].sum())


def isotropic_eof(fidelity_value: float, d: int) -> float:
    """Entanglement of formation of a d x d isotropic state (base-2 logs), d >= 3."""
    if d < 3:
        raise ValueError(f"isotropic EoF formula needs d >= 3, got {d}")
    f = float(fidelity_value)
    if not -1e-12 <= f <= 1 + 1e-12:
        raise ValueError(f"fidelity must lie in [0, 1], got {f}")
    f = min(max(f, 0.0), 1.0)
    if f <= 1 / d:
        return 0.0
    knot = 4 * (d - 1) / d**2
    if f <= knot:
        xi = (math.sqrt(f) + math.sqrt((d - 1) * (1 - f))) ** 2 / d
        xi = min(xi, 1.0)
        return binary_entropy(xi) + (1 - xi) * math.log2(d - 1)
    return d * math.log2(d - 1) / (d - 2) * (f - 1) + math.log2(d)


def isotropic_fidelity(rho, d: int) -> float:
    """Overlap <Psi(d)|rho|Psi(d)> with the maximally entangled ket."""
    rho = coerce_state(rho, (d, d))
    psi = max_entangled_ket(d)
    return float(np.vdot(psi, rho.mat @ psi).real)


def isotropic_esd_check(d: int, f0: float, rate: float, t: float) -> tuple[float, bool]:
    """Evolve an isotropic state under depolarizing noise on both sides.

    Each side contracts by eta = exp(-rate t). Returns the fidelity at ``t`` and
    whether it still exceeds the separability threshold 1/d.
    """
    # Imported here to keep measures free of a module-level dependency cycle.
    from .channels import apply, decay_factor, depolarizing_qudit, multi_local
    from .states import isotropic_state

    eta = decay_factor(rate, t)
    noise = depolarizing_qudit(d, eta)
    rho_t = apply(multi_local([noise, noise]), isotropic_state(d, f0))
    f_t = isotropic_fidelity(rho_t, d)
    return f_t, f_t > 1 / d


def caves_milburn_s(eps: float, a1: float, a2: float, t: float) -> tuple[float, bool]:
    """Separability parameter s(t) for the damped two-qutrit Werner-like state.

    s = (eps/8)(2 e^{-a1 t/2} + 2 e^{-a2 t/2} + 2 e^{-(a1+a2) t/2} + e^{-a1 t} + e^{-a2 t});
    separable iff s <= 1/4.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {eps}")
    if a1 < 0 or a2 < 0 or t < 0:
        raise ValueError("rates and time must be nonnegative")
    e1, e2 = math.exp(-a1 * t / 2), math.exp(-a2 * t / 2)
    s = eps / 8 * (2 * e1 + 2 * e2 + 2 * e1 * e2 + e1 * e1 + e2 * e2)
    return s, s <= 0.25


def caves_milburn_s_of_state(rho) -> float:
    """(9 F - 1)/8 with F the overlap on the maximally entangled two-qutrit ket.

    Equals epsilon for the undamped mixture and tracks s(t) along damping.
    """
    return (9 * isotropic_fidelity(rho, 3) - 1) / 8


def _reduction_purity(psi: np.ndarray, n: int, keep: tuple[int, ...]) -> float:
    t = psi.reshape((2,) * n)
    rest = [k for k in range(n) if k not in keep]
    m = np.transpose(t, list(keep) + rest).reshape(2 ** len(keep), -1)
    red = m @ m.conj().T
    return float(np.vdot(red, red).real)


def _pure_ket(rho, n_expected: int | None = None) -> tuple[np.ndarray, int]:
    if isinstance(rho, DensityMatrix):
        if not rho.is_pure():
            raise InvalidStateError("measure is defined for pure states only")
        vals, vecs = eig_hermitian(rho.mat)
        psi = vecs[:, 0]
    else:
        psi = np.asarray(rho, dtype=complex)
        if psi.ndim == 2:
            return _pure_ket(coerce_state(psi), n_expected)
        psi = psi / np.linalg.norm(psi)
    n = int(round(math.log2(psi.size)))
    if 2**n != psi.size or n < 2:
        raise DimensionError(f"expected an N-qubit state with N >= 2, got dimension {psi.size}")
    if n_expected is not None and n != n_expected:
        raise DimensionError(f"expected {n_expected} qubits, got {n}")
    return psi, n


def multipartite_concurrence(psi) -> float:
    """N-qubit pure-state concurrence from all 2^N - 2 nontrivial reductions."""
    psi, n = _pure_ket(psi)
    total = sum(
        _reduction_purity(psi, n, keep)
        for size in range(1, n)
        for keep in itertools.combinations(range(n), size)
    )
    return 2 ** (1 - n / 2) * math.sqrt(max(0.0, (2**n - 2) - total))


def three_tangle(psi) -> float:
    """C_A[BC]^2 - C_AB^2 - C_AC^2 for a pure three-qubit state."""
    psi, _ = _pure_ket(psi, 3)
    rho = DensityMatrix(np.outer(psi, psi.conj()), (2, 2, 2))
    rho_a = rho.reduce([0]).mat
    c_a_bc_sq = 4 * max(0.0, float(np.linalg.det(rho_a).real))
    c_ab = concurrence(rho.reduce([0, 1])).value
    c_ac = concurrence(rho.reduce([0, 2])).value
    tau = c_a_bc_sq - c_ab**2 - c_ac**2
    return min(1.0, max(0.0, tau)) if tau > -1e-12 else tau


def pairwise_concurrences(rho) -> dict[tuple[int, int], float]:
    """Concurrence of every qubit pair of a multi-qubit state."""
    rho = coerce_state(rho)
    out = {}
    for i, j in itertools.combinations(range(rho.n_parties), 2):
        if rho.dims[i] != 2 or rho.dims[j] != 2:
            raise DimensionError("pairwise concurrence needs qubit subsystems")
        out[(i, j)] = concurrence(rho.reduce([i, j])).value
    return out


def x_state_concurrence(params: XStateParams) -> float:
    """2 max(0, |w| - sqrt(bc), |z| - sqrt(ad))."""
    return 2 * max(
        0.0,
        abs(params.w) - math.sqrt(params.b * params.c),
        abs(params.z) - math.sqrt(params.a * params.d),
    )


def phase_correlation(params: XStateParams) -> float:
    """2(|w| + |z|), the two-qubit phase-correlation magnitude of an X-state."""
    return 2 * (abs(params.w) + abs(params.z))


def adh_concurrence(alpha: complex, beta: complex, p: float) -> float:
    """max(0, 2(1-p)|beta|(|alpha| - p|beta|)) for |alpha||HH> + |beta|e^{i d}|VV> damped on both photons."""
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1) > 1e-10:
        raise ValueError(f"|alpha|^2 + |beta|^2 = {norm:.12g}, expected 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return max(0.0, 2 * (1 - p) * abs(beta) * (abs(alpha) - p * abs(beta)))


def energy_transfer_bound(level_splitting: float, nbar: float) -> float:
    """Upper bound on the energy exchanged before disentanglement in a thermal bath."""
    if level_splitting <= 0:
        raise ValueError(f"level splitting must be positive, got {level_splitting}")
    if nbar < 0:
        raise ValueError(f"mean thermal occupation must be nonnegative, got {nbar}")
    m = 2 * nbar + 1
    return level_splitting * m / (2 * (m * m + 2 * nbar * (nbar + 1)))
