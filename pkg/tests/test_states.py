import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hs

from suddenlab import states as st
from suddenlab.measures import concurrence, negativity, purity, three_tangle

seeds = hs.integers(min_value=0, max_value=2**32 - 1)


def wootters_by_definition(rho):
    """Concurrence from the eigenvalues of rho (sy sy) rho* (sy sy), computed directly."""
    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(r).real)[::-1], 0, None))
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def test_density_matrix_validates():
    with pytest.raises(st.InvalidStateError):
        st.DensityMatrix(np.diag([0.7, 0.7]), (2,))
    with pytest.raises(st.InvalidStateError):
        st.DensityMatrix(np.diag([1.2, -0.2]), (2,))
    with pytest.raises(ValueError):
        st.DensityMatrix(np.array([[0.5, 0.5], [0, 0.5]]), (2,))


def test_bell_states():
    psi_minus = st.bell_state("psi-")
    assert purity(psi_minus) == pytest.approx(1.0)
    assert np.allclose(st.bell_state("phi+").reduce([0]).mat, np.eye(2) / 2)
    assert concurrence(psi_minus).value == pytest.approx(1.0)
    with pytest.raises(st.InvalidStateError):
        st.bell_state("chi")


def test_ghz_and_w_reductions():
    ghz = st.ghz_state(3)
    for keep in ([0, 1], [0, 2], [1, 2]):
        assert concurrence(ghz.reduce(keep)).value == pytest.approx(0.0, abs=1e-12)
    reduced = st.w_state(3).reduce([0, 1]).mat
    assert concurrence(reduced).value == pytest.approx(2 / 3, abs=1e-12)
    assert wootters_by_definition(reduced) == pytest.approx(2 / 3, abs=1e-9)
    assert st.ghz_state(2).allclose(st.bell_state("phi+"))


def test_generic_tripartite_corners():
    s = 1 / math.sqrt(2)
    assert st.generic_tripartite(s, 0, 0, 0, s).allclose(st.ghz_state(3))
    product = st.generic_tripartite(1, 0, 0, 0, 0)
    assert product.mat[0, 0] == pytest.approx(1.0)
    assert three_tangle(st.generic_tripartite(s, 0, 0, 0, s)) == pytest.approx(1.0, abs=1e-12)


def test_werner_family():
    assert st.werner2(1.0).allclose(st.bell_state("psi-"))
    assert np.allclose(st.werner2(0.25).mat, np.eye(4) / 4)
    for f in np.linspace(0.25, 1.0, 13):
        rho = st.werner2(f).mat
        assert concurrence(rho).value == pytest.approx(max(0.0, 2 * f - 1), abs=1e-10)
        assert wootters_by_definition(rho) == pytest.approx(max(0.0, 2 * f - 1), abs=1e-7)
    with pytest.raises(ValueError):
        st.werner2(0.1)


def test_werner3():
    assert st.werner3(0.0).allclose(st.ghz_state(3))
    assert np.allclose(st.werner3(1.0).mat, np.eye(8) / 8)
    m = st.werner3(0.5).mat
    direct = sum(m[i, j] * m[j, i] for i in range(8) for j in range(8)).real
    assert purity(st.werner3(0.5)) == pytest.approx(direct, abs=1e-12)


def test_isotropic_and_caves_milburn_limits():
    for d in (2, 3, 4):
        psi = st.max_entangled_ket(d)
        assert np.allclose(st.isotropic_state(d, 1.0).mat, np.outer(psi, psi.conj()))
        assert np.allclose(st.isotropic_state(d, 1 / d**2).mat, np.eye(d * d) / d**2)
    # Separability boundary F = 1/d: partial transpose just becomes PSD.
    assert negativity(st.isotropic_state(3, 1 / 3)) == pytest.approx(0.0, abs=1e-12)
    assert negativity(st.isotropic_state(3, 1 / 3 + 1e-3)) > 0
    assert np.allclose(st.caves_milburn_state(0.0).mat, np.eye(9) / 9)
    assert st.caves_milburn_state(1.0).is_pure()
    assert negativity(st.caves_milburn_state(0.25)) == pytest.approx(0.0, abs=1e-12)
    assert negativity(st.caves_milburn_state(0.26)) > 0


def test_x_state_corners():
    phi = st.x_state(a=0.5, d=0.5, w=0.5, b=0.0, c=0.0, z=0.0)
    assert phi.allclose(st.bell_state("phi+"))
    psi = st.x_state(a=0.0, d=0.0, w=0.0, b=0.5, c=0.5, z=0.5)
    assert psi.allclose(st.bell_state("psi+"))
    with pytest.raises(ValueError):
        st.XStateParams(a=0.1, b=0.4, c=0.4, d=0.1, w=0.2, z=0.0)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 4.0])
def test_lambda_state_initial_concurrence(lam):
    rho = st.x_state(st.lambda_state(lam))
    assert concurrence(rho).value == pytest.approx(2 * lam / 9, abs=1e-12)


def test_qubit_qutrit_ansatz_negativity():
    assert negativity(st.qubit_qutrit_ansatz(0.25, 1.0)) == pytest.approx(1 / 8, abs=1e-12)
    assert negativity(st.qubit_qutrit_ansatz(0.125, 1.0)) == pytest.approx(0.0, abs=1e-12)
    assert negativity(st.qubit_qutrit_ansatz(0.25, 0.0)) == pytest.approx(0.0, abs=1e-12)
    for x in np.linspace(0, 0.25, 6):
        for gamma in np.linspace(0, 1, 5):
            expected = max(0.0, x * gamma - 1 / 8)
            assert negativity(st.qubit_qutrit_ansatz(x, gamma)) == pytest.approx(expected, abs=1e-12)


def test_photon_xstate():
    assert concurrence(st.photon_xstate(0, 0.5, 0.5, 0, 0.5)).value == pytest.approx(1.0)
    assert concurrence(st.photon_xstate(0.1, 0.4, 0.4, 0.1, 0.0)).value == pytest.approx(0.0)


@given(
    hs.floats(0.01, 1), hs.floats(0.01, 1), hs.floats(0.01, 1), hs.floats(0.01, 1),
    hs.floats(0, 1), hs.floats(-math.pi, math.pi),
)
def test_photon_xstate_closed_form(p00, p01, p10, p11, scale, phase):
    total = p00 + p01 + p10 + p11
    p00, p01, p10, p11 = (p / total for p in (p00, p01, p10, p11))
    z = scale * math.sqrt(p01 * p10) * complex(math.cos(phase), math.sin(phase))
    rho = st.photon_xstate(p00, p01, p10, p11, z)
    expected = max(0.0, 2 * abs(z) - 2 * math.sqrt(p00 * p11))
    assert concurrence(rho).value == pytest.approx(expected, abs=1e-10)


@given(seeds, hs.sampled_from([(2,), (2, 2), (2, 3), (3, 3)]))
def test_random_states_are_valid(seed, dims):
    rho = st.random_state(dims, np.random.default_rng(seed))
    assert np.trace(rho.mat).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(rho.mat).min() >= -1e-12
    assert st.random_state(dims, np.random.default_rng(seed), env_dim=1).is_pure()


@given(seeds)
def test_text_round_trip_is_exact(seed):
    rho = st.random_state((2, 3), np.random.default_rng(seed))
    back = st.from_text(st.to_text(rho))
    assert back.dims == rho.dims
    assert np.array_equal(back.mat, rho.mat)


def test_file_round_trip_and_errors(tmp_path):
    path = tmp_path / "rho.txt"
    st.save(st.w_state(3), path)
    assert np.array_equal(st.load(path).mat, st.w_state(3).mat)
    with pytest.raises(st.InvalidStateError, match="line 1"):
        st.from_text("2 2\n1 0\n0 0\n")
    with pytest.raises(st.InvalidStateError, match="line 3"):
        st.from_text("dims: 2\n1 0\n0\n")
