"""Named state factories, noise models, measures and Bell families used by scenarios.

Every entry is a plain function; its keyword parameters are the scenario keys
it accepts, so scenario validation can bind them with ``inspect.signature``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import channels as ch
from . import measures as ms
from . import nonlocality as nl
from . import states as st
from .evolution import (
    CavityModel,
    cavity_evolve,
    lindblad_evolve,
    thermal_qubits_spec,
    two_qubit_coupled_hamiltonian,
)
from .tensor_core import DimensionError, eig_hermitian, partial_transpose

# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


def _complex(value) -> complex:
    """Scenario files carry complex numbers as [re, im] pairs."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex value must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _bell(which: str = "psi-"):
    return st.bell_state(which)


def _ghz(n: int = 3):
    return st.ghz_state(n)


def _w(n: int = 3):
    return st.w_state(n)


def _generic_tripartite(a0=0.0, a4=0.0, a5=0.0, a6=0.0, a7=0.0):
    return st.generic_tripartite(*(_complex(v) for v in (a0, a4, a5, a6, a7)))


def _werner(fidelity: float):
    return st.werner2(fidelity)


def _werner3(p: float):
    return st.werner3(p)


def _isotropic(d: int, fidelity: float = 1.0):
    return st.isotropic_state(d, fidelity)


def _caves_milburn(eps: float):
    return st.caves_milburn_state(eps)


def _x_state(a: float, b: float, c: float, d: float, w=0.0, z=0.0):
    return st.x_state(st.XStateParams(a, b, c, d, _complex(w), _complex(z)))


def _lambda(lam: float):
    return st.x_state(st.lambda_state(lam))


def _ye04(a: float):
    return st.x_state(st.ye04_state(a))


def _qubit_qutrit(x: float, gamma: float = 1.0):
    return st.qubit_qutrit_ansatz(x, gamma)


def _photon_x(p00: float, p01: float, p10: float, p11: float, z=0.0):
    return st.photon_xstate(p00, p01, p10, p11, _complex(z))


def _phi_angle(angle: float):
    """cos(angle)|00> + sin(angle)|11>."""
    ket = np.zeros(4, dtype=complex)
    ket[0], ket[3] = math.cos(angle), math.sin(angle)
    return st.pure_state(ket, (2, 2))


def _adh(ratio: float, phase: float = 0.0):
    """|alpha||HH> + |beta| e^{i phase}|VV> with |beta|^2 = ratio |alpha|^2 (H = |0>, V = |1>)."""
    if ratio <= 0:
        raise ValueError(f"ratio |beta|^2/|alpha|^2 must be positive, got {ratio}")
    alpha = 1 / math.sqrt(1 + ratio)
    beta = math.sqrt(ratio) * alpha
    ket = np.zeros(4, dtype=complex)
    ket[0], ket[3] = alpha, beta * np.exp(1j * phase)
    return st.pure_state(ket, (2, 2))


def _from_file(path: str):
    return st.load(path)


STATES: dict[str, Callable[..., st.DensityMatrix]] = {
    "bell": _bell,
    "ghz": _ghz,
    "w": _w,
    "generic_tripartite": _generic_tripartite,
    "werner": _werner,
    "werner3": _werner3,
    "isotropic": _isotropic,
    "caves_milburn": _caves_milburn,
    "x_state": _x_state,
    "lambda": _lambda,
    "ye04": _ye04,
    "qubit_qutrit": _qubit_qutrit,
    "photon_x": _photon_x,
    "phi_angle": _phi_angle,
    "adh": _adh,
    "file": _from_file,
}

# ---------------------------------------------------------------------------
# Noise models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseModel:
    """Time evolution of a prepared state.

    ``prepare`` maps the scenario state onto the space the dynamics acts on
    (e.g. attaching cavities). ``control`` optionally names a channel parameter
    that is a function of time, reported at the death time.
    """

    evolve: Callable[[st.DensityMatrix, float], st.DensityMatrix]
    prepare: Callable[[st.DensityMatrix], st.DensityMatrix] = field(default=lambda rho: rho)
    control: tuple[str, Callable[[float], float]] | None = None


def _parties(dims: Sequence[int], parties, local_dim: int | None = None) -> list[int]:
    chosen = list(range(len(dims))) if parties is None else [int(k) for k in parties]
    for k in chosen:
        if not 0 <= k < len(dims):
            raise DimensionError(f"party {k} out of range for dims {tuple(dims)}")
        if local_dim is not None and dims[k] != local_dim:
            raise DimensionError(f"party {k} has dimension {dims[k]}, this noise needs {local_dim}")
    return chosen


def _local_family(dims, parties, local_dim, make: Callable[[float], ch.KrausChannel]) -> NoiseModel:
    chosen = _parties(dims, parties, local_dim)
    dims = tuple(dims)

    def evolve(rho, t):
        one = make(t)
        return ch.apply(ch.on_subsystems({k: one for k in chosen}, dims), rho)

    return NoiseModel(evolve)


def _no_noise(dims):
    return NoiseModel(lambda rho, t: rho)


def _dephasing(dims, rate: float, parties=None):
    """Qubit phase damping with coherence factor exp(-rate t) per qubit."""
    return _local_family(dims, parties, 2, lambda t: ch.dephasing_qubit(ch.decay_factor(rate, t)))


def _amplitude_damping(dims, rate: float, parties=None):
    """Qubit amplitude damping with amplitude exp(-rate t) (populations decay as exp(-2 rate t))."""
    return _local_family(dims, parties, 2, lambda t: ch.amplitude_damping_qubit(ch.decay_factor(rate, t)))


def _dephasing_damping(dims, dephasing_rate: float, damping_rate: float, parties=None):
    """Phase damping followed by amplitude damping on each chosen qubit.

    The two phase-covariant qubit channels commute, so the order is immaterial.
    """

    def both(t):
        return ch.compose(
            ch.dephasing_qubit(ch.decay_factor(dephasing_rate, t)),
            ch.amplitude_damping_qubit(ch.decay_factor(damping_rate, t)),
        )

    return _local_family(dims, parties, 2, both)


def _depolarizing(dims, rate: float | None = None, tau: float | None = None, parties=None):
    """Contraction exp(-rate t) toward the maximally mixed state; ``tau`` = 1/rate."""
    if (rate is None) == (tau is None):
        raise ValueError("depolarizing noise takes exactly one of 'rate' or 'tau'")
    if tau is not None:
        if tau <= 0:
            raise ValueError(f"tau must be positive, got {tau}")
        rate = 1.0 / tau
    chosen = _parties(dims, parties)
    dims = tuple(dims)

    def evolve(rho, t):
        eta = ch.decay_factor(rate, t)
        parts = {k: ch.depolarizing_qudit(dims[k], eta) for k in chosen}
        return ch.apply(ch.on_subsystems(parts, dims), rho)

    return NoiseModel(evolve)


def _global_dephasing(dims, rate: float):
    n = len(dims)
    if any(d != 2 for d in dims):
        raise DimensionError("global dephasing acts on qubits")
    return NoiseModel(lambda rho, t: ch.apply(ch.global_dephasing(n, rate * t), rho))


def _qutrit_damping(dims, a1: float, a2: float, parties=None):
    return _local_family(dims, parties, 3, lambda t: ch.qutrit_amplitude_damping(a1, a2, t))


def _thermal(dims, gamma0: float, omega0: float, beta: float):
    if any(d != 2 for d in dims):
        raise DimensionError("thermal bath model acts on qubits")
    spec = thermal_qubits_spec(len(dims), gamma0, omega0, beta)
    return NoiseModel(lambda rho, t: lindblad_evolve(spec, rho, t))


def _embed_vacuum(rho: st.DensityMatrix, model: CavityModel) -> st.DensityMatrix:
    """rho on the atoms, each followed by its own vacuum cavity."""
    n = model.n_atoms
    levels = model.truncation + 1
    vac = np.zeros((levels, levels), dtype=complex)
    vac[0, 0] = 1.0
    full = np.kron(rho.mat, np.kron(*(vac,) * n) if n > 1 else vac)
    # Axes are (atoms..., cavities...) for rows then columns; interleave them.
    shape = (2,) * n + (levels,) * n
    order = [x for k in range(n) for x in (k, n + k)]
    tensor = full.reshape(shape + shape)
    tensor = tensor.transpose(order + [2 * n + k for k in order])
    side = full.shape[0]
    return st.DensityMatrix(tensor.reshape(side, side), model.dims)


def _jaynes_cummings(dims, g: float, omega0: float = 1.0, omega: float = 1.0, truncation: int = 1):
    if any(d != 2 for d in dims):
        raise DimensionError("Jaynes-Cummings model needs qubit atoms")
    model = CavityModel(len(dims), omega0, omega, g, truncation)
    return NoiseModel(lambda rho, t: cavity_evolve(model, rho, t), prepare=lambda rho: _embed_vacuum(rho, model))


def _mode_damping(dims, rate: float, parties=None):
    """Interferometric photon damping with p = 1 - exp(-rate t)."""
    noise = _local_family(dims, parties, 2, lambda t: ch.mode_damping_channel(-math.expm1(-rate * t)))
    return NoiseModel(noise.evolve, control=("p", lambda t: -math.expm1(-rate * t)))


def _mode_dephasing(dims, rate: float, parties=None):
    noise = _local_family(dims, parties, 2, lambda t: ch.mode_dephasing_channel(-math.expm1(-rate * t)))
    return NoiseModel(noise.evolve, control=("p", lambda t: -math.expm1(-rate * t)))


def _intrinsic(dims, omega: float, g: float, tau: float = 1.0):
    """Intrinsic decoherence under the coupled two-qubit Hamiltonian."""
    if tuple(dims) != (2, 2):
        raise DimensionError("intrinsic decoherence model is defined for two qubits")
    h = two_qubit_coupled_hamiltonian(omega, g)
    return NoiseModel(lambda rho, t: ch.intrinsic_dephase(rho, h, t, tau=tau))


NOISES: dict[str, Callable[..., NoiseModel]] = {
    "none": _no_noise,
    "dephasing": _dephasing,
    "amplitude_damping": _amplitude_damping,
    "dephasing_damping": _dephasing_damping,
    "depolarizing": _depolarizing,
    "global_dephasing": _global_dephasing,
    "qutrit_damping": _qutrit_damping,
    "thermal": _thermal,
    "jaynes_cummings": _jaynes_cummings,
    "mode_damping": _mode_damping,
    "mode_dephasing": _mode_dephasing,
    "intrinsic": _intrinsic,
}

# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasureSpec:
    """``value(rho)``; death means ``value`` at or below ``threshold(rho)``.

    A ``None`` threshold marks a purely descriptive trajectory.
    """

    value: Callable[[st.DensityMatrix], float]
    threshold: Callable[[st.DensityMatrix], float] | None = None


def _zero(rho) -> float:
    return 0.0


def _min_cut_negativity(rho: st.DensityMatrix) -> float:
    """Smallest one-party-versus-rest negativity."""
    worst = math.inf
    for k in range(rho.n_parties):
        vals = eig_hermitian(partial_transpose(rho.mat, rho.dims, k))[0]
        worst = min(worst, float(-vals[vals < 0].sum()))
    return worst


def _local_dim(rho: st.DensityMatrix) -> int:
    if len(rho.dims) != 2 or rho.dims[0] != rho.dims[1]:
        raise DimensionError(f"isotropic measures need a d x d state, got dims {rho.dims}")
    return rho.dims[0]


MEASURES: dict[str, MeasureSpec] = {
    "concurrence": MeasureSpec(lambda rho: ms.concurrence(rho).value, _zero),
    "eof": MeasureSpec(lambda rho: ms.entanglement_of_formation(ms.concurrence(rho).value), _zero),
    "negativity": MeasureSpec(lambda rho: ms.negativity(rho), _zero),
    "negativity_min_cut": MeasureSpec(_min_cut_negativity, _zero),
    "purity": MeasureSpec(ms.purity),
    "chsh_max": MeasureSpec(nl.chsh_max, lambda rho: 2.0),
    "isotropic_fidelity": MeasureSpec(
        lambda rho: ms.isotropic_fidelity(rho, _local_dim(rho)), lambda rho: 1.0 / _local_dim(rho)
    ),
    "isotropic_eof": MeasureSpec(
        lambda rho: ms.isotropic_eof(ms.isotropic_fidelity(rho, _local_dim(rho)), _local_dim(rho)), _zero
    ),
    "caves_milburn_s": MeasureSpec(ms.caves_milburn_s_of_state, lambda rho: 0.25),
    "phase_correlation": MeasureSpec(lambda rho: ms.phase_correlation(st.XStateParams.from_matrix(rho))),
}

# ---------------------------------------------------------------------------
# Bell families
# ---------------------------------------------------------------------------

WWZB = "wwzb"
BELL_FAMILIES = tuple(nl.FAMILIES) + (WWZB,)


def bell_family_name(name: str) -> str:
    """Canonical family name, or ``wwzb`` for the five-class WWZB set."""
    if name.lower() == WWZB:
        return WWZB
    return nl.family(name).name


def bell_parties(name: str) -> int:
    return 3 if name == WWZB else nl.family(name).n_parties


def bell_evaluator(name: str, setting: nl.DichotomicSetting, exhaustive: bool = False):
    """(expectation, bound) for ``rho``; the WWZB set reports its largest-magnitude class."""
    if name == WWZB:

        def evaluate(rho):
            reports = nl.wwzb_values(rho, setting, exhaustive=exhaustive)
            top = max(reports, key=lambda r: abs(r.expectation))
            return top.expectation, top.bound

        return evaluate
    fam = nl.family(name)
    return lambda rho: (nl.expectation(rho, fam, setting), fam.bound)
