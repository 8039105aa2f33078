"""Dense complex linear algebra over multipartite Hilbert spaces.

Matrices are plain ``numpy`` complex arrays. Subsystem structure is carried
separately as a tuple of dimensions, with party 0 as the slowest-varying
index of the computational basis.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from functools import reduce

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-10
CLAMP_TOL = 1e-10
PSD_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |0> = ground, |1> = excited, so lowering maps |1> to |0>.
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T.copy()
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class DimensionError(ValueError):
    """Matrix shape disagrees with the declared subsystem dimensions."""


class NotHermitianError(ValueError):
    """Input expected to be Hermitian is not, within tolerance."""


class NotPSDError(ValueError):
    """Input expected to be positive semidefinite has a negative eigenvalue."""


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-D complex array without copying when possible."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    return arr


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T


def check_dims(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    """Validate that square ``m`` factorizes as ``dims`` and return dims as a tuple."""
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 2 for d in dims):
        raise DimensionError(f"subsystem dimensions must each be >= 2, got {dims}")
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix must be square, got {m.shape}")
    if int(np.prod(dims)) != m.shape[0]:
        raise DimensionError(f"dims {dims} (product {int(np.prod(dims))}) do not match side {m.shape[0]}")
    return dims


def kron(*factors) -> np.ndarray:
    """Kronecker product; the leftmost factor is the slowest index."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    return reduce(np.kron, (as_matrix(f) for f in factors))


def embed(op, position: int, dims: Sequence[int]) -> np.ndarray:
    """Place a local operator at ``position``, identities elsewhere."""
    op = as_matrix(op)
    if op.shape != (dims[position], dims[position]):
        raise DimensionError(f"operator shape {op.shape} does not fit subsystem {position} of {tuple(dims)}")
    parts = [op if k == position else np.eye(d, dtype=complex) for k, d in enumerate(dims)]
    return kron(*parts)


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Kept subsystems stay in their original relative order.
    """
    m = as_matrix(m)
    dims = check_dims(m, dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must be non-empty")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    traced = [k for k in range(n) if k not in keep]
    t = m.reshape(dims + dims)
    # Contract matching row/column axes from the highest index down so the
    # remaining axis numbers stay valid.
    for k in sorted(traced, reverse=True):
        width = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + width)
    side = int(np.prod([dims[k] for k in keep]))
    return t.reshape(side, side)


def partial_transpose(m, dims: Sequence[int], party: int) -> np.ndarray:
    """Transpose only the indices of subsystem ``party``."""
    m = as_matrix(m)
    dims = check_dims(m, dims)
    n = len(dims)
    if not 0 <= party < n:
        raise DimensionError(f"party {party} out of range for {n} subsystems")
    axes = list(range(2 * n))
    axes[party], axes[n + party] = axes[n + party], axes[party]
    return m.reshape(dims + dims).transpose(axes).reshape(m.shape)


def hermiticity_error(m) -> float:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return float("inf")
    return float(np.abs(m - m.conj().T).max())


def eig_hermitian(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(values, vectors)`` with ``vectors[:, k]`` the eigenvector of
    ``values[k]``.
    """
    m = as_matrix(m)
    err = hermiticity_error(m)
    if err > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {err:.3e})")
    herm = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    order = np.argsort(vals, kind="stable")[::-1]
    return vals[order], vecs[:, order]


def sqrt_psd(m, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Small negative eigenvalues (round-off) are clamped to zero; anything below
    ``-psd_tol`` is rejected.
    """
    vals, vecs = eig_hermitian(m)
    if vals.size and vals[-1] < -psd_tol:
        raise NotPSDError(f"matrix has eigenvalue {vals[-1]:.3e} below -{psd_tol:g}")
    roots = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * roots) @ vecs.conj().T


def clamp_psd(m, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Project round-off negative eigenvalues to zero and restore unit trace."""
    m = as_matrix(m)
    vals, vecs = eig_hermitian(m, tol=max(HERMITIAN_TOL, psd_tol))
    if vals.size and vals[-1] < -psd_tol:
        raise NotPSDError(f"eigenvalue {vals[-1]:.3e} exceeds the clamping window")
    if vals[-1] >= 0.0:
        return 0.5 * (m + m.conj().T)
    vals = np.clip(vals, 0.0, None)
    out = (vecs * vals) @ vecs.conj().T
    return out / np.trace(out).real


def expm(m) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    return scipy.linalg.expm(as_matrix(m))
