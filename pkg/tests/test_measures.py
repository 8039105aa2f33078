import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hs
from mpmath import mp
from scipy.linalg import sqrtm
from scipy.optimize import brentq

from suddenlab import channels as ch
from suddenlab import measures as ms
from suddenlab import states as st

seeds = hs.integers(min_value=0, max_value=2**32 - 1)


def test_purity(rng):
    assert ms.purity(st.bell_state("psi-")) == pytest.approx(1.0)
    for d in (2, 3, 4):
        assert ms.purity(st.DensityMatrix(np.eye(d) / d, (d,))) == pytest.approx(1 / d)
    rho = st.werner2(0.6).mat
    assert ms.purity(rho) == pytest.approx(np.trace(rho @ rho).real, abs=1e-12)


def test_fidelity(rng):
    rho = st.random_state((2, 2), rng)
    assert ms.fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)
    assert ms.fidelity(st.bell_state("phi+"), st.bell_state("psi-")) == pytest.approx(0.0, abs=1e-14)
    for d, f in ((3, 0.2), (3, 0.8), (4, 0.5)):
        psi = st.max_entangled_ket(d)
        proj = np.outer(psi, psi.conj())
        assert ms.fidelity(st.isotropic_state(d, f), st.DensityMatrix(proj, (d, d))) == pytest.approx(f, abs=1e-10)


@given(seeds)
def test_fidelity_matches_sqrt_definition(seed):
    rng = np.random.default_rng(seed)
    r1, r2 = st.random_state((2,), rng).mat, st.random_state((2,), rng).mat
    root = sqrtm(r2)
    expected = np.trace(sqrtm(root @ r1 @ root)).real ** 2
    assert ms.fidelity(r1, r2) == pytest.approx(expected, abs=1e-8)


def test_concurrence_cases():
    assert ms.concurrence(st.bell_state("phi+")).value == pytest.approx(1.0)
    product = np.kron(np.diag([1.0, 0.0]), np.full((2, 2), 0.5))
    assert ms.concurrence(product).value == pytest.approx(0.0, abs=1e-12)
    r = ms.concurrence(st.werner2(0.3))
    assert r.value == 0.0 and r.argument < 0


def test_entanglement_of_formation():
    assert ms.entanglement_of_formation(0.0) == 0.0
    assert ms.entanglement_of_formation(1.0) == pytest.approx(1.0)
    mp.dps = 40
    x = (1 + mp.sqrt(1 - mp.mpf(1) / 4)) / 2
    reference = -x * mp.log(x, 2) - (1 - x) * mp.log(1 - x, 2)
    assert ms.entanglement_of_formation(0.5) == pytest.approx(float(reference), abs=1e-14)


def test_negativity():
    product = np.kron(np.diag([0.3, 0.7]), np.diag([0.5, 0.5]))
    assert ms.negativity(product) == pytest.approx(0.0, abs=1e-14)
    assert ms.negativity(st.bell_state("phi+")) == pytest.approx(0.5)


@given(hs.floats(0, 0.25), hs.floats(0, 1))
def test_qubit_qutrit_negativity_formula(x, gamma):
    expected = max(0.0, x * gamma - 1 / 8)
    assert ms.negativity(st.qubit_qutrit_ansatz(x, gamma)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_isotropic_eof(d):
    assert ms.isotropic_eof(1 / d, d) == 0.0
    assert ms.isotropic_eof(1.0, d) == pytest.approx(math.log2(d), abs=1e-12)
    knot = 4 * (d - 1) / d**2
    xi = (math.sqrt(knot) + math.sqrt((d - 1) * (1 - knot))) ** 2 / d
    left = ms.binary_entropy(min(xi, 1.0)) + (1 - min(xi, 1.0)) * math.log2(d - 1)
    right = d * math.log2(d - 1) / (d - 2) * (knot - 1) + math.log2(d)
    assert left == pytest.approx(right, abs=1e-9)
    assert ms.isotropic_eof(knot, d) == pytest.approx(right, abs=1e-9)


@given(hs.integers(3, 6), hs.floats(0, 1), hs.floats(0, 1))
def test_isotropic_eof_is_monotone(d, f1, f2):
    lo, hi = sorted((f1, f2))
    assert ms.isotropic_eof(lo, d) <= ms.isotropic_eof(hi, d) + 1e-12


def test_isotropic_esd_check():
    f, entangled = ms.isotropic_esd_check(3, 0.9, 1.0, 0.0)
    assert f == pytest.approx(0.9) and entangled
    f, entangled = ms.isotropic_esd_check(3, 1.0, 1.0, 5.0)
    assert not entangled
    f, _ = ms.isotropic_esd_check(4, 0.7, 0.0, 3.0)
    assert f == pytest.approx(0.7, abs=1e-12)


def test_isotropic_fidelity_law_under_depolarizing():
    # Each side contracts the traceless part by eta, so F - 1/d^2 scales by eta^2.
    for d in (3, 4):
        for t in (0.1, 0.5, 1.0):
            eta = math.exp(-t)
            f, _ = ms.isotropic_esd_check(d, 1.0, 1.0, t)
            assert f == pytest.approx(1 / d**2 + (1 - 1 / d**2) * eta**2, abs=1e-12)


def test_caves_milburn_s():
    s, separable = ms.caves_milburn_s(0.2, 1.0, 1.0, 0.0)
    assert s == pytest.approx(0.2) and separable
    assert ms.caves_milburn_s(0.25, 1.0, 2.0, 0.0)[1]
    assert not ms.caves_milburn_s(1.0, 1.0, 1.0, 0.0)[1]
    root = brentq(lambda t: ms.caves_milburn_s(1.0, 1.0, 1.0, t)[0] - 0.25, 0.0, 20.0)
    assert 0 < root < 20
    assert ms.caves_milburn_s(1.0, 1.0, 1.0, root * 1.01)[1]


def test_three_tangle():
    assert ms.three_tangle(st.ghz_ket(3)) == pytest.approx(1.0, abs=1e-12)
    assert ms.three_tangle(st.w_ket(3)) == pytest.approx(0.0, abs=1e-12)
    product = np.zeros(8)
    product[0] = 1
    assert ms.three_tangle(product) == pytest.approx(0.0, abs=1e-12)
    # W: C_A[BC]^2 = 8/9 and C_AB^2 + C_AC^2 = 4/9 + 4/9.
    rho_a = st.w_state(3).reduce([0]).mat
    assert 4 * np.linalg.det(rho_a).real == pytest.approx(8 / 9)


def test_multipartite_concurrence():
    product = np.zeros(8)
    product[0] = 1
    assert ms.multipartite_concurrence(product) == pytest.approx(0.0, abs=1e-12)
    assert ms.multipartite_concurrence(st.bell_ket("psi-")) == pytest.approx(1.0)
    # GHZ: every one- and two-qubit reduction has purity 1/2, six reductions in all.
    expected = 2 ** (1 - 3 / 2) * math.sqrt(6 - 6 * 0.5)
    assert ms.multipartite_concurrence(st.ghz_ket(3)) == pytest.approx(expected)


def test_multipartite_concurrence_rejects_mixed():
    with pytest.raises(st.InvalidStateError):
        ms.multipartite_concurrence(st.werner3(0.5))


@given(seeds)
def test_pure_two_qubit_concurrence_agrees(seed):
    psi = st.haar_ket(4, np.random.default_rng(seed))
    expected = 2 * abs(psi[0] * psi[3] - psi[1] * psi[2])
    assert ms.multipartite_concurrence(psi) == pytest.approx(expected, abs=1e-10)
    assert ms.concurrence(np.outer(psi, psi.conj())).value == pytest.approx(expected, abs=1e-8)


def _random_x(rng):
    pops = rng.dirichlet(np.ones(4))
    a, b, c, d = pops
    w = math.sqrt(a * d) * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    z = math.sqrt(b * c) * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    return st.XStateParams(a, b, c, d, w, z)


def test_x_state_concurrence_matches_wootters():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        params = _random_x(rng)
        worst = max(worst, abs(ms.x_state_concurrence(params) - ms.concurrence(st.x_state(params)).value))
    assert worst <= 1e-10


def test_x_state_concurrence_zero_coherence():
    assert ms.x_state_concurrence(st.XStateParams(0.25, 0.25, 0.25, 0.25, 0, 0)) == 0.0


def test_global_dephasing_critical_time():
    rate, w, b, c = 0.7, 0.16, 0.1, 0.1
    t_crit = math.log(abs(w) / math.sqrt(b * c)) / (2 * rate)
    for t, alive in ((0.99 * t_crit, True), (1.01 * t_crit, False)):
        rho = ch.apply(ch.global_dephasing(2, rate * t), st.x_state(a=0.4, b=b, c=c, d=0.4, w=w))
        assert (ms.concurrence(rho).value > 0) == alive


def test_phase_correlation():
    assert ms.phase_correlation(st.XStateParams(0.5, 0, 0, 0.5, 0, 0)) == 0.0
    assert ms.phase_correlation(st.XStateParams.from_matrix(st.bell_state("phi+").mat)) == pytest.approx(1.0)
    params = st.XStateParams(0.05, 0.45, 0.45, 0.05, 0, 0.4)
    for t in np.linspace(0, 1.0, 11):
        gamma = math.exp(-t)
        rho = ch.apply(ch.multi_local([ch.dephasing_qubit(gamma)] * 2), st.x_state(params))
        p = st.XStateParams.from_matrix(rho.mat)
        if ms.concurrence(rho).value > 0:
            assert ms.concurrence(rho).value < ms.phase_correlation(p)


def test_adh_concurrence():
    alpha, beta = math.sqrt(0.25), math.sqrt(0.75)
    assert ms.adh_concurrence(alpha, beta, 0.0) == pytest.approx(2 * alpha * beta)
    assert ms.adh_concurrence(alpha, beta, alpha / beta) == pytest.approx(0.0, abs=1e-15)
    assert ms.adh_concurrence(alpha, beta, 1.0) == 0.0


@given(hs.floats(0.05, 0.95), hs.floats(0.0, 1.0))
def test_adh_concurrence_matches_simulation(weight, p):
    alpha, beta = math.sqrt(weight), math.sqrt(1 - weight)
    ket = np.array([alpha, 0, 0, beta])
    noise = ch.mode_damping_channel(p)
    rho = ch.apply(ch.multi_local([noise, noise]), np.outer(ket, ket))
    assert ms.concurrence(rho).value == pytest.approx(ms.adh_concurrence(alpha, beta, p), abs=1e-9)


def test_energy_transfer_bound():
    assert ms.energy_transfer_bound(3.0, 0.0) == pytest.approx(1.5)
    values = [ms.energy_transfer_bound(1.0, n) for n in np.linspace(0, 10, 50)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert ms.energy_transfer_bound(2.0, 0.7) == pytest.approx(2 * ms.energy_transfer_bound(1.0, 0.7))


def test_binary_entropy_exact_points():
    assert ms.binary_entropy(0.5) == 1.0
    assert ms.binary_entropy(float(Fraction(1, 4))) == pytest.approx(0.8112781244591328)
