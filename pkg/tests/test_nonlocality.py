import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hs

from suddenlab import channels as ch
from suddenlab import nonlocality as nl
from suddenlab import states as st
from suddenlab.tensor_core import SIGMA_X, SIGMA_Z

seeds = hs.integers(min_value=0, max_value=2**32 - 1)
angles = hs.floats(-math.pi, math.pi)


def _product_state(rng, n):
    rho = st.random_state((2,), rng).mat
    for _ in range(n - 1):
        rho = np.kron(rho, st.random_state((2,), rng).mat)
    return rho


def _dephased_ghz(gamma):
    return ch.apply(ch.multi_local([ch.dephasing_qubit(gamma)] * 3), st.ghz_state(3))


def test_tripartite_settings_zero_angle_and_involution():
    s = nl.tripartite_settings(0.0, 0.0)
    for pair in s.observables:
        assert np.allclose(pair[0], SIGMA_Z) and np.allclose(pair[1], SIGMA_X)
    for theta_b, theta_c in ((math.pi / 6, math.pi / 3), (0.3, -1.2)):
        for pair in nl.tripartite_settings(theta_b, theta_c).observables:
            for op in pair:
                assert np.abs(op @ op - np.eye(2)).max() <= 1e-12


def test_default_settings_angles():
    s = nl.tripartite_settings()
    assert s.angles[1][0] == pytest.approx(-math.pi / 6)
    assert s.angles[2][0] == pytest.approx(-math.pi / 3)


def test_setting_rejects_non_involution():
    with pytest.raises(ValueError):
        nl.DichotomicSetting(((2 * SIGMA_Z, SIGMA_X),))


def test_chsh_tsirelson_for_singlet():
    res = nl.optimize_angles(st.bell_state("psi-"), "CHSH", basis="zx")
    report = nl.chsh_value(st.bell_state("psi-"), res.setting)
    assert abs(report.expectation) == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    assert report.violated and report.margin == pytest.approx(2 * math.sqrt(2) - 2, abs=1e-9)
    assert nl.chsh_max(st.bell_state("psi-")) == pytest.approx(2 * math.sqrt(2))
    assert nl.chsh_max(np.eye(4) / 4) == 0.0


@given(seeds, angles, angles, angles, angles)
def test_product_states_satisfy_chsh(seed, a0, a1, b0, b1):
    rho = _product_state(np.random.default_rng(seed), 2)
    s = nl.settings_from_angles([(a0, a1), (b0, b1)])
    assert abs(nl.chsh_value(rho, s).expectation) <= 2 + 1e-12


@pytest.mark.parametrize("f", [0.25, 0.5, 0.7, 0.78, 0.9, 1.0])
def test_werner_chsh_max(f):
    # Singlet-Werner correlation matrix is -(4F-1)/3 times the identity.
    expected = 2 * math.sqrt(2) * (4 * f - 1) / 3
    assert nl.chsh_max(st.werner2(f)) == pytest.approx(expected, abs=1e-12)
    opt = nl.optimize_angles(st.werner2(f), "CHSH", basis="sphere")
    assert opt.value == pytest.approx(expected, abs=1e-6)


def test_optimizer_agrees_with_chsh_max_on_random_states():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        rho = st.random_state((2, 2), rng)
        worst = max(worst, abs(nl.optimize_angles(rho, "CHSH", basis="sphere").value - nl.chsh_max(rho)))
    assert worst <= 1e-3


@given(seeds, angles, angles)
def test_fully_dephased_ghz_is_classical(seed, theta_b, theta_c):
    diag = _dephased_ghz(0.0)
    for plane in ("zx", "xy"):
        for report in nl.wwzb_values(diag, nl.tripartite_settings(theta_b, theta_c, plane)):
            assert abs(report.expectation) <= 2 + 1e-12


@given(seeds, angles, angles)
def test_product_states_satisfy_three_party_bounds(seed, theta_b, theta_c):
    rho = _product_state(np.random.default_rng(seed), 3)
    s = nl.tripartite_settings(theta_b, theta_c)
    assert nl.local_classical(nl.wwzb_values(rho, s))
    assert abs(nl.svetlichny_value(rho, s).expectation) <= 4 + 1e-12


@pytest.mark.parametrize("rate_t", [0.0, 0.1, 0.25, 0.6])
def test_dephased_ghz_svetlichny_law(rate_t):
    s = nl.tripartite_settings(math.pi / 4, 0.0, "xy")
    value = nl.svetlichny_value(_dephased_ghz(math.exp(-rate_t)), s).expectation
    a0 = a7 = 1 / math.sqrt(2)
    assert abs(value) == pytest.approx(8 * math.sqrt(2) * a0 * a7 * math.exp(-3 * rate_t), abs=1e-12)


@pytest.mark.parametrize("rate_t", [0.0, 0.1, 0.25, 0.6])
def test_dephased_ghz_p5_law(rate_t):
    s = nl.tripartite_settings(math.pi / 6, math.pi / 3, "xy")
    p5 = nl.wwzb_values(_dephased_ghz(math.exp(-rate_t)), s)[4]
    assert p5.operator_id == "P5"
    a0 = a7 = 1 / math.sqrt(2)
    assert abs(p5.expectation) == pytest.approx(8 * a0 * a7 * math.exp(-3 * rate_t), abs=1e-12)


def test_svetlichny_maximum_for_ghz():
    res = nl.optimize_angles(st.ghz_state(3), "Svetlichny", basis="auto")
    assert res.value == pytest.approx(4 * math.sqrt(2), abs=1e-6)


def test_exhaustive_wwzb_dominates_canonical(rng):
    rho = st.random_state((2, 2, 2), rng)
    s = nl.tripartite_settings(0.4, 1.1, "xy")
    plain = nl.wwzb_values(rho, s)
    full = nl.wwzb_values(rho, s, exhaustive=True)
    for a, b in zip(plain, full):
        assert abs(b.expectation) >= abs(a.expectation) - 1e-12


def test_symmetry_closure_contains_base_table():
    fam = nl.family("P3")
    base = dict((choices, coef) for coef, choices in fam.terms)
    variants = nl.symmetry_variants(fam)
    assert any(v == base for v in variants)
    assert len({tuple(sorted(v.items())) for v in variants}) == len(variants)


def test_family_lookup():
    assert nl.family("svetlichny").bound == 4.0
    assert nl.family("chsh").n_parties == 2
    with pytest.raises(KeyError):
        nl.family("P9")


def test_expectation_dimension_check():
    with pytest.raises(nl.DimensionError):
        nl.expectation(st.bell_state("phi+"), "P5", nl.tripartite_settings())
