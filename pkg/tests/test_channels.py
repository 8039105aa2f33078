import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hs

from conftest import random_hermitian
from suddenlab import channels as ch
from suddenlab import states as st
from suddenlab.measures import caves_milburn_s, caves_milburn_s_of_state, fidelity, negativity, purity

seeds = hs.integers(min_value=0, max_value=2**32 - 1)
unit = hs.floats(0.0, 1.0)


def test_verify_cptp():
    u = np.array([[0, 1], [1, 0]], dtype=complex)
    report = ch.verify_cptp(ch.unitary_channel(u))
    assert report.ok and report.deviation == 0.0
    assert ch.verify_cptp(ch.dephasing_qubit(0.5)).ok
    doubled = ch.KrausChannel((np.eye(2), np.eye(2)), (2,))
    report = ch.verify_cptp(doubled)
    assert not report.ok and report.deviation == pytest.approx(1.0)


def test_dephasing_qubit(rng):
    rho = st.random_state((2,), rng)
    assert ch.apply(ch.dephasing_qubit(1.0), rho).allclose(rho)
    out = ch.apply(ch.dephasing_qubit(0.0), rho).mat
    assert abs(out[0, 1]) < 1e-15
    gamma = 0.37
    phi = ch.apply(ch.multi_local([ch.dephasing_qubit(gamma)] * 2), st.bell_state("phi+"))
    assert phi.mat[0, 3] == pytest.approx(gamma**2 * 0.5)


@given(unit, seeds)
def test_amplitude_damping_population_transfer(gamma, seed):
    rho = st.random_state((2,), np.random.default_rng(seed)).mat
    out = ch.apply(ch.amplitude_damping_qubit(gamma), rho).mat
    omega_sq = 1 - gamma**2
    assert out[0, 0].real == pytest.approx(rho[0, 0].real + omega_sq * rho[1, 1].real, abs=1e-12)
    assert out[0, 1] == pytest.approx(gamma * rho[0, 1], abs=1e-12)


def test_amplitude_damping_limits():
    excited = np.diag([0.0, 1.0])
    assert np.allclose(ch.apply(ch.amplitude_damping_qubit(0.0), excited).mat, np.diag([1, 0]))
    assert np.allclose(ch.apply(ch.amplitude_damping_qubit(1.0), excited).mat, excited)
    with pytest.raises(ValueError):
        ch.amplitude_damping_qubit(1.5)


def test_depolarizing_qubit(rng):
    rho = st.random_state((2,), rng)
    assert ch.apply(ch.depolarizing_qubit(1.0, 0.0), rho).allclose(rho)
    assert np.allclose(ch.apply(ch.depolarizing_qubit(1.0, 60.0), rho).mat, np.eye(2) / 2)
    tau = 0.8
    choi = ch.choi_state(ch.depolarizing_qubit(tau, tau * math.log(3)))
    assert negativity(choi) == pytest.approx(0.0, abs=1e-12)
    assert negativity(ch.choi_state(ch.depolarizing_qubit(tau, tau * math.log(3) * 0.99))) > 0


@given(hs.floats(0.1, 5.0), hs.floats(0.0, 5.0))
def test_depolarizing_choi_fidelity(tau, t):
    choi = ch.choi_state(ch.depolarizing_qubit(tau, t))
    expected = (1 + 3 * math.exp(-t / tau)) / 4
    assert fidelity(choi, st.bell_state("phi+")) == pytest.approx(expected, abs=1e-10)


def test_choi_limits():
    assert ch.choi_state(ch.identity_channel(2)).allclose(st.bell_state("phi+"))
    assert np.allclose(ch.choi_state(ch.depolarizing_from_contraction(0.0)).mat, np.eye(4) / 4)


@given(hs.floats(0.0, 3.0), hs.floats(0.0, 3.0), hs.floats(0.0, 4.0))
def test_qutrit_damping_is_cptp(a1, a2, t):
    assert ch.verify_cptp(ch.qutrit_amplitude_damping(a1, a2, t)).ok


def test_qutrit_damping_identity_at_zero():
    assert np.allclose(ch.qutrit_amplitude_damping(1.0, 2.0, 0.0).ops[0], np.eye(3))


@pytest.mark.parametrize("t", [0.0, 0.3, 1.1, 2.5])
def test_separability_parameter_matches_direct_overlap(t):
    noise = ch.qutrit_amplitude_damping(0.7, 1.3, t)
    rho = ch.apply(ch.multi_local([noise, noise]), st.caves_milburn_state(1.0))
    psi = st.max_entangled_ket(3)
    direct = sum(psi[i].conjugate() * rho.mat[i, j] * psi[j] for i in range(9) for j in range(9)).real
    assert (9 * direct - 1) / 8 == pytest.approx(caves_milburn_s_of_state(rho), abs=1e-12)


@pytest.mark.parametrize("t", [0.0, 0.4, 1.3, 3.0])
def test_one_sided_qutrit_damping_matches_s_formula(t):
    a1, a2 = 0.9, 1.6
    noise = ch.qutrit_amplitude_damping(a1, a2, t)
    rho = ch.apply(ch.local(noise, 0, (3, 3)), st.caves_milburn_state(1.0))
    s_formula, _ = caves_milburn_s(1.0, a1, a2, t)
    assert caves_milburn_s_of_state(rho) == pytest.approx(s_formula, abs=1e-12)


def test_multi_local_counts_and_ghz_coherence():
    assert len(ch.multi_local([ch.dephasing_qubit(0.3), ch.amplitude_damping_qubit(0.5)])) == 4
    both = ch.multi_local([ch.identity_channel(2), ch.identity_channel(2)])
    assert np.allclose(both.ops[0], np.eye(4))
    gamma = math.exp(-0.41)
    rho = ch.apply(ch.multi_local([ch.dephasing_qubit(gamma)] * 3), st.ghz_state(3))
    assert rho.mat[0, 7] == pytest.approx(0.5 * gamma**3, abs=1e-14)


def test_apply_identity_and_full_dephasing(rng):
    rho = st.random_state((2, 2), rng)
    assert ch.apply(ch.identity_channel(4), rho).allclose(rho)
    out = ch.apply(ch.multi_local([ch.dephasing_qubit(0.0)] * 2), st.bell_state("phi+"))
    assert np.allclose(out.mat, np.diag([0.5, 0, 0, 0.5]))


@given(unit, unit, seeds)
def test_compose_dephasing_multiplies_factors(g1, g2, seed):
    rho = st.random_state((2,), np.random.default_rng(seed))
    composed = ch.compose(ch.dephasing_qubit(g1), ch.dephasing_qubit(g2))
    assert ch.apply(composed, rho).allclose(ch.apply(ch.dephasing_qubit(g1 * g2), rho), atol=1e-12)
    assert ch.verify_cptp(composed).ok


def test_compose_with_identity(rng):
    rho = st.random_state((2,), rng)
    c = ch.amplitude_damping_qubit(0.6)
    assert ch.apply(ch.compose(ch.identity_channel(2), c), rho).allclose(ch.apply(c, rho))


@given(hs.floats(0.0, 1.0), seeds)
def test_mode_damping_matches_amplitude_damping(p, seed):
    rho = st.random_state((2,), np.random.default_rng(seed))
    via_isometry = ch.apply(ch.mode_damping_channel(p), rho)
    direct = ch.apply(ch.amplitude_damping_qubit(math.sqrt(1 - p)), rho)
    assert via_isometry.allclose(direct, atol=1e-12)


def test_global_dephasing_two_qubits():
    gamma_t = 0.35
    rho = st.x_state(a=0.3, b=0.2, c=0.2, d=0.3, w=0.2, z=0.1)
    out = ch.apply(ch.global_dephasing(2, gamma_t), rho).mat
    assert out[0, 3] == pytest.approx(0.2 * math.exp(-2 * gamma_t))
    assert out[1, 2] == pytest.approx(0.1)


def test_intrinsic_dephase(rng):
    h = np.diag([0.0, 1.0])
    diagonal = np.diag([0.3, 0.7])
    assert np.allclose(ch.intrinsic_dephase(diagonal, h, 2.0).mat, diagonal)
    plus = np.full((2, 2), 0.5)
    assert abs(ch.intrinsic_dephase(plus, h, 1.0, gamma_t=80.0).mat[0, 1]) < 1e-30

    ham = random_hermitian(rng, 4)
    rho0 = st.random_state((2, 2), rng)
    energies, vecs = np.linalg.eigh(ham)
    in_energy = vecs.conj().T @ rho0.mat @ vecs
    for gamma_t in (0.0, 0.2, 1.5):
        gaps = energies[:, None] - energies[None, :]
        expected = float(np.sum(np.abs(in_energy) ** 2 * np.exp(-2 * gamma_t * gaps**2)))
        out = ch.intrinsic_dephase(rho0, ham, 0.9, gamma_t=gamma_t)
        assert purity(out) == pytest.approx(expected, abs=1e-12)


def test_local_rejects_mismatched_dims():
    with pytest.raises(ch.DimensionError):
        ch.local(ch.qutrit_amplitude_damping(1, 1, 0.1), 0, (2, 3))
