"""Validated density matrices and the state families used by the scenarios.

Qubit convention throughout: ``|0>`` is the ground state and ``|1>`` the
excited state. Some literature writes two-qubit matrices in the reversed
order (excited first); :func:`x_state_from_excited_first` converts such
parameters to this package's ordering.
"""

from __future__ import annotations

import math
import re
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .tensor_core import (
    HERMITIAN_TOL,
    PSD_TOL,
    DimensionError,
    as_matrix,
    check_dims,
    eig_hermitian,
    hermiticity_error,
    partial_trace,
)

TRACE_TOL = 1e-10
PURE_TOL = 1e-8


class InvalidStateError(ValueError):
    """Matrix fails the density-matrix conditions or a factory got bad parameters."""


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated state: Hermitian, unit trace, positive semidefinite."""

    mat: np.ndarray
    dims: tuple[int, ...]
    min_eigenvalue: float = field(init=False, repr=False)

    def __post_init__(self):
        mat = as_matrix(self.mat).copy()
        try:
            dims = check_dims(mat, self.dims)
        except DimensionError as exc:
            raise InvalidStateError(str(exc)) from exc
        herm = hermiticity_error(mat)
        if herm > HERMITIAN_TOL:
            raise InvalidStateError(f"not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(mat)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace {tr.real:.12g} differs from 1")
        lowest = float(eig_hermitian(mat)[0][-1])
        if lowest < -PSD_TOL:
            raise InvalidStateError(f"negative eigenvalue {lowest:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "min_eigenvalue", lowest)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def reduce(self, keep: Sequence[int]) -> DensityMatrix:
        """Reduced state on the subsystems in ``keep``."""
        keep = sorted(set(keep))
        return DensityMatrix(partial_trace(self.mat, self.dims, keep), tuple(self.dims[k] for k in keep))

    def is_pure(self, tol: float = PURE_TOL) -> bool:
        return abs(np.vdot(self.mat, self.mat).real - 1.0) <= tol

    def allclose(self, other: DensityMatrix, atol: float = 1e-10) -> bool:
        return self.dims == other.dims and float(np.abs(self.mat - other.mat).max()) <= atol


def coerce_state(rho, dims: Sequence[int] | None = None) -> DensityMatrix:
    """Accept a DensityMatrix or a raw matrix (qubit dims inferred when possible)."""
    if isinstance(rho, DensityMatrix):
        return rho
    m = as_matrix(rho)
    if dims is None:
        n = m.shape[0]
        k = int(round(math.log2(n))) if n > 1 else 0
        if n < 2 or 2**k != n:
            raise DimensionError(f"cannot infer subsystem dims for side {n}; pass dims explicitly")
        dims = (2,) * k
    return DensityMatrix(m, tuple(dims))


def pure_state(ket, dims: Sequence[int]) -> DensityMatrix:
    """Projector onto a normalized ket."""
    psi = np.asarray(ket, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise InvalidStateError(f"ket norm {norm:.12g} is not 1")
    return DensityMatrix(np.outer(psi, psi.conj()), tuple(dims))


def basis_ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


_BELL_ALIASES = {
    "phi+": "phi+", "Φ⁺": "phi+", "phi_plus": "phi+",
    "phi-": "phi-", "Φ⁻": "phi-", "phi_minus": "phi-",
    "psi+": "psi+", "Ψ⁺": "psi+", "psi_plus": "psi+",
    "psi-": "psi-", "Ψ⁻": "psi-", "psi_minus": "psi-",
}


def bell_ket(which: str) -> np.ndarray:
    key = _BELL_ALIASES.get(which, _BELL_ALIASES.get(str(which).lower()))
    if key is None:
        raise InvalidStateError(f"unknown Bell state {which!r}; use phi+, phi-, psi+ or psi-")
    s = 1 / math.sqrt(2)
    return {
        "phi+": np.array([s, 0, 0, s], dtype=complex),
        "phi-": np.array([s, 0, 0, -s], dtype=complex),
        "psi+": np.array([0, s, s, 0], dtype=complex),
        "psi-": np.array([0, s, -s, 0], dtype=complex),
    }[key]


def bell_state(which: str) -> DensityMatrix:
    return pure_state(bell_ket(which), (2, 2))


def ghz_ket(n: int) -> np.ndarray:
    if n < 2:
        raise InvalidStateError("GHZ state needs at least 2 qubits")
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1 / math.sqrt(2)
    return psi


def ghz_state(n: int) -> DensityMatrix:
    return pure_state(ghz_ket(n), (2,) * n)


def w_ket(n: int) -> np.ndarray:
    if n < 2:
        raise InvalidStateError("W state needs at least 2 qubits")
    psi = np.zeros(2**n, dtype=complex)
    for k in range(n):
        psi[1 << k] = 1 / math.sqrt(n)
    return psi


def w_state(n: int) -> DensityMatrix:
    return pure_state(w_ket(n), (2,) * n)


def generic_tripartite(a0: complex, a4: complex, a5: complex, a6: complex, a7: complex) -> DensityMatrix:
    """Pure three-qubit state a0|000> + a4|100> + a5|101> + a6|110> + a7|111>."""
    coeffs = np.array([a0, a4, a5, a6, a7], dtype=complex)
    norm2 = float(np.sum(np.abs(coeffs) ** 2))
    if abs(norm2 - 1.0) > 1e-10:
        raise InvalidStateError(f"coefficients have squared norm {norm2:.12g}, expected 1")
    psi = np.zeros(8, dtype=complex)
    psi[[0, 4, 5, 6, 7]] = coeffs
    return pure_state(psi, (2, 2, 2))


def werner2(fidelity: float) -> DensityMatrix:
    """Two-qubit Werner state with singlet fraction ``fidelity``."""
    if not 0.25 <= fidelity <= 1.0:
        raise InvalidStateError(f"Werner fidelity must lie in [1/4, 1], got {fidelity}")
    singlet = np.outer(bell_ket("psi-"), bell_ket("psi-").conj())
    mat = (1 - fidelity) / 3 * np.eye(4) + (4 * fidelity - 1) / 3 * singlet
    return DensityMatrix(mat, (2, 2))


def werner3(p: float) -> DensityMatrix:
    """(p/8) I + (1-p) |GHZ><GHZ| on three qubits."""
    if not 0.0 <= p <= 1.0:
        raise InvalidStateError(f"mixing weight must lie in [0, 1], got {p}")
    g = ghz_ket(3)
    return DensityMatrix(p / 8 * np.eye(8) + (1 - p) * np.outer(g, g.conj()), (2, 2, 2))


def max_entangled_ket(d: int) -> np.ndarray:
    """(1/sqrt d) sum_k |k>|k>."""
    if d < 2:
        raise InvalidStateError("local dimension must be >= 2")
    psi = np.zeros(d * d, dtype=complex)
    psi[:: d + 1] = 1 / math.sqrt(d)
    return psi


def isotropic_state(d: int, fidelity: float) -> DensityMatrix:
    """U (x) U* invariant state with overlap ``fidelity`` on the maximally entangled ket."""
    if d < 2:
        raise InvalidStateError("local dimension must be >= 2")
    if not 0.0 <= fidelity <= 1.0:
        raise InvalidStateError(f"fidelity must lie in [0, 1], got {fidelity}")
    psi = max_entangled_ket(d)
    n = d * d
    mat = (1 - fidelity) / (n - 1) * np.eye(n) + (fidelity * n - 1) / (n - 1) * np.outer(psi, psi.conj())
    # Eigenvalues are (1-F)/(d^2-1) (multiplicity d^2-1) and F; both are
    # nonnegative on [0, 1], so the DensityMatrix check is the only gate.
    return DensityMatrix(mat, (d, d))


def caves_milburn_state(eps: float) -> DensityMatrix:
    """Two-qutrit mixture (1-eps)/9 I + eps |Psi><Psi| with Psi maximally entangled."""
    if not 0.0 <= eps <= 1.0:
        raise InvalidStateError(f"epsilon must lie in [0, 1], got {eps}")
    psi = max_entangled_ket(3)
    return DensityMatrix((1 - eps) / 9 * np.eye(9) + eps * np.outer(psi, psi.conj()), (3, 3))


@dataclass(frozen=True)
class XStateParams:
    """Entries of a two-qubit X-state in the |00>,|01>,|10>,|11> basis.

    ``a, b, c, d`` are the populations, ``w`` = rho[0,3], ``z`` = rho[1,2].
    """

    a: float
    b: float
    c: float
    d: float
    w: complex = 0.0
    z: complex = 0.0

    def __post_init__(self):
        for name in "abcd":
            if getattr(self, name) < -1e-12:
                raise InvalidStateError(f"population {name}={getattr(self, name)} is negative")
        total = self.a + self.b + self.c + self.d
        if abs(total - 1.0) > 1e-12:
            raise InvalidStateError(f"populations sum to {total:.15g}, expected 1")
        if abs(self.w) ** 2 > self.a * self.d + 1e-12:
            raise InvalidStateError(f"|w|^2={abs(self.w) ** 2:.6g} exceeds a*d={self.a * self.d:.6g}")
        if abs(self.z) ** 2 > self.b * self.c + 1e-12:
            raise InvalidStateError(f"|z|^2={abs(self.z) ** 2:.6g} exceeds b*c={self.b * self.c:.6g}")

    def matrix(self) -> np.ndarray:
        w, z = complex(self.w), complex(self.z)
        return np.array(
            [
                [self.a, 0, 0, w],
                [0, self.b, z, 0],
                [0, z.conjugate(), self.c, 0],
                [w.conjugate(), 0, 0, self.d],
            ],
            dtype=complex,
        )

    @classmethod
    def from_matrix(cls, rho) -> XStateParams:
        """Read X-state entries from a 4x4 matrix, ignoring anything off the X pattern."""
        m = rho.mat if isinstance(rho, DensityMatrix) else as_matrix(rho)
        if m.shape != (4, 4):
            raise DimensionError(f"X-state needs a 4x4 matrix, got {m.shape}")
        diag = m.diagonal().real
        # Tiny drift from channel round-off would trip the strict sum check.
        diag = diag / diag.sum()
        return cls(diag[0], diag[1], diag[2], diag[3], complex(m[0, 3]), complex(m[1, 2]))


def x_state(params: XStateParams | None = None, **kwargs) -> DensityMatrix:
    """Build an X-state from :class:`XStateParams` or keyword entries a..z."""
    if params is None:
        params = XStateParams(**kwargs)
    elif kwargs:
        raise TypeError("pass either XStateParams or keyword entries, not both")
    return DensityMatrix(params.matrix(), (2, 2))


def x_state_from_excited_first(a, b, c, d, w=0.0, z=0.0) -> XStateParams:
    """Convert X-state entries written with the doubly excited level first.

    Relabeling ground and excited on both qubits is the local unitary X (x) X,
    which reverses the basis order: populations reverse and both coherences
    are conjugated.
    """
    return XStateParams(d, c, b, a, complex(w).conjugate(), complex(z).conjugate())


def lambda_state(lam: float) -> XStateParams:
    """Populations 1/9 (doubly excited), 4/9, 4/9 and zero ground-ground, coherence lam/9.

    Valid for 0 <= lam <= 4.
    """
    if not 0.0 <= lam <= 4.0:
        raise InvalidStateError(f"lambda must lie in [0, 4], got {lam}")
    return x_state_from_excited_first(1 / 9, 4 / 9, 4 / 9, 0.0, 0.0, lam / 9)


def ye04_state(a: float) -> XStateParams:
    """One-parameter family (1/3)[a, 1, 1, 1-a] with unit coherence between the single-excitation levels.

    ``a`` is the doubly excited population (times 3).
    """
    if not 0.0 <= a <= 1.0:
        raise InvalidStateError(f"a must lie in [0, 1], got {a}")
    return x_state_from_excited_first(a / 3, 1 / 3, 1 / 3, (1 - a) / 3, 0.0, 1 / 3)


def qubit_qutrit_ansatz(x: float, gamma: float) -> DensityMatrix:
    """6x6 qubit (x) qutrit state with corner coherence x*gamma, dims (2, 3)."""
    if not 0.0 <= x <= 0.25:
        raise InvalidStateError(f"x must lie in [0, 1/4], got {x}")
    if not 0.0 <= gamma <= 1.0:
        raise InvalidStateError(f"gamma must lie in [0, 1], got {gamma}")
    mat = np.diag([0.25, 0.125, 0.125, 0.125, 0.125, 0.25]).astype(complex)
    mat[0, 5] = mat[5, 0] = x * gamma
    return DensityMatrix(mat, (2, 3))


def photon_xstate(p00: float, p01: float, p10: float, p11: float, z: complex) -> DensityMatrix:
    """Photon-number X-state (1/P)[p00, p01, p10, p11] with single-photon coherence z."""
    probs = (p00, p01, p10, p11)
    if min(probs) < 0:
        raise InvalidStateError("photon-number probabilities must be nonnegative")
    total = sum(probs)
    if total <= 0:
        raise InvalidStateError("photon-number probabilities sum to zero")
    if abs(z) ** 2 > p01 * p10 + 1e-15:
        raise InvalidStateError(f"|z|^2={abs(z) ** 2:.6g} exceeds p01*p10={p01 * p10:.6g}")
    params = XStateParams(p00 / total, p01 / total, p10 / total, p11 / total, 0.0, complex(z) / total)
    return x_state(params)


def haar_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly (Haar) distributed unit vector."""
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_state(dims: Sequence[int], rng: np.random.Generator, env_dim: int | None = None) -> DensityMatrix:
    """Reduction of a Haar-random pure state on system (x) environment.

    ``env_dim`` defaults to the system dimension; ``env_dim=1`` gives a pure state.
    """
    dims = tuple(dims)
    n = int(np.prod(dims))
    k = n if env_dim is None else int(env_dim)
    psi = haar_ket(n * k, rng).reshape(n, k)
    rho = psi @ psi.conj().T
    return DensityMatrix(0.5 * (rho + rho.conj().T) / np.trace(rho).real, dims)


# ---------------------------------------------------------------------------
# Plain-text matrix file format
# ---------------------------------------------------------------------------

_DIMS_LINE = re.compile(r"^dims:\s*(\d+(?:\s+\d+)*)\s*$")


def _format_entry(value: complex) -> str:
    return f"{value.real:.17g}{value.imag:+.17g}j"


def to_text(rho: DensityMatrix) -> str:
    """Serialize as ``dims: ...`` followed by one whitespace-separated row per line."""
    lines = ["dims: " + " ".join(str(d) for d in rho.dims)]
    for row in rho.mat:
        lines.append(" ".join(_format_entry(complex(v)) for v in row))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> DensityMatrix:
    """Inverse of :func:`to_text`; validates the parsed matrix."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise InvalidStateError("empty matrix file")
    header = _DIMS_LINE.match(lines[0])
    if header is None:
        raise InvalidStateError(f"line 1: expected 'dims: d1 d2 ...', got {lines[0]!r}")
    dims = tuple(int(tok) for tok in header.group(1).split())
    side = int(np.prod(dims))
    if len(lines) - 1 != side:
        raise InvalidStateError(f"expected {side} matrix rows for dims {dims}, found {len(lines) - 1}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if len(tokens) != side:
            raise InvalidStateError(f"line {lineno}: expected {side} entries, found {len(tokens)}")
        try:
            rows.append([complex(tok) for tok in tokens])
        except ValueError as exc:
            raise InvalidStateError(f"line {lineno}: {exc}") from exc
    return DensityMatrix(np.array(rows, dtype=complex), dims)


def save(rho: DensityMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_text(rho))


def load(path) -> DensityMatrix:
    with open(path, encoding="utf-8") as fh:
        return from_text(fh.read())
