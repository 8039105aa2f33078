import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hs

from conftest import random_hermitian, random_psd
from suddenlab import tensor_core as tc
from suddenlab.states import bell_state, random_state

seeds = hs.integers(min_value=0, max_value=2**32 - 1)


def test_kron_identities():
    assert np.allclose(tc.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(tc.kron(tc.SIGMA_Z, tc.SIGMA_Z), np.diag([1, -1, -1, 1]))


def test_kron_matches_index_formula(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    out = tc.kron(a, b)
    for i in range(6):
        for j in range(6):
            assert out[i, j] == pytest.approx(a[i // 3, j // 3] * b[i % 3, j % 3])


def test_partial_trace_product_factorizes(rng):
    ra = random_state((2,), rng).mat
    rb = random_state((3,), rng).mat
    assert np.allclose(tc.partial_trace(np.kron(ra, rb), (2, 3), [0]), ra)
    assert np.allclose(tc.partial_trace(np.kron(ra, rb), (2, 3), [1]), rb)


def test_partial_trace_bell_is_maximally_mixed():
    assert np.allclose(tc.partial_trace(bell_state("phi+").mat, (2, 2), [0]), np.eye(2) / 2)


def test_partial_trace_matches_explicit_index_sum(rng):
    rho = random_state((2, 3), rng).mat
    expected = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            expected[i, j] = sum(rho[3 * i + k, 3 * j + k] for k in range(3))
    assert np.abs(tc.partial_trace(rho, (2, 3), [0]) - expected).max() <= 1e-12


def test_partial_trace_rejects_bad_dims():
    with pytest.raises(tc.DimensionError):
        tc.partial_trace(np.eye(4), (2, 3), [0])


@given(seeds)
def test_partial_transpose_is_an_involution(seed):
    m = random_state((2, 3), np.random.default_rng(seed)).mat
    for party in (0, 1):
        twice = tc.partial_transpose(tc.partial_transpose(m, (2, 3), party), (2, 3), party)
        assert np.allclose(twice, m)


@given(seeds)
def test_partial_transpose_of_product_is_psd(seed):
    rng = np.random.default_rng(seed)
    m = np.kron(random_state((2,), rng).mat, random_state((2,), rng).mat)
    assert np.linalg.eigvalsh(tc.partial_transpose(m, (2, 2), 1)).min() >= -1e-12


def test_partial_transpose_of_bell_has_negative_half():
    pt = tc.partial_transpose(bell_state("phi+").mat, (2, 2), 0)
    assert np.linalg.eigvalsh(pt).min() == pytest.approx(-0.5, abs=1e-12)


def test_eig_hermitian_descending():
    vals, _ = tc.eig_hermitian(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(vals, [3, 2, 1])
    vals, _ = tc.eig_hermitian(tc.SIGMA_X)
    assert np.allclose(vals, [1, -1])


def test_eig_hermitian_trace_identity(rng):
    h = random_hermitian(rng, 8)
    vals, vecs = tc.eig_hermitian(h)
    assert abs(vals.sum() - np.trace(h).real) <= 1e-10
    assert np.allclose(vecs @ np.diag(vals) @ vecs.conj().T, h)


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(tc.NotHermitianError):
        tc.eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_sqrt_psd_cases(rng):
    assert np.allclose(tc.sqrt_psd(np.eye(3)), np.eye(3))
    assert np.allclose(tc.sqrt_psd(np.diag([4.0, 9.0])), np.diag([2, 3]))
    m = random_psd(rng, 5)
    root = tc.sqrt_psd(m)
    assert np.abs(root @ root - m).max() <= 1e-9


def test_sqrt_psd_rejects_negative():
    with pytest.raises(tc.NotPSDError):
        tc.sqrt_psd(np.diag([1.0, -0.5]))


def test_expm_cases(rng):
    assert np.allclose(tc.expm(np.zeros((3, 3))), np.eye(3))
    theta = 0.731
    assert np.allclose(tc.expm(1j * theta * tc.SIGMA_Z), np.diag([np.exp(1j * theta), np.exp(-1j * theta)]))
    u = tc.expm(-1j * random_hermitian(rng, 6) * 1.7)
    assert np.abs(u.conj().T @ u - np.eye(6)).max() <= 1e-10


def test_embed_places_operator():
    op = tc.embed(tc.SIGMA_X, 1, (2, 2, 2))
    assert np.allclose(op, np.kron(np.kron(np.eye(2), tc.SIGMA_X), np.eye(2)))


def test_clamp_psd_keeps_trace_and_removes_negatives():
    m = np.diag([0.6, 0.4, -1e-13]).astype(complex)
    out = tc.clamp_psd(m)
    assert np.linalg.eigvalsh(out).min() >= 0
    assert math.isclose(np.trace(out).real, 1.0, abs_tol=1e-12)
