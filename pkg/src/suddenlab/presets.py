"""Shipped reproduction scenarios, one per in-scope result.

Rates follow the registry conventions: ``dephasing`` multiplies each qubit
coherence by exp(-rate t); ``amplitude_damping`` uses amplitude exp(-rate t).
Where a result is stated with populations decaying as exp(-G t) the preset
halves the rate, and says so.
"""

from __future__ import annotations

PRESETS: dict[str, str] = {}

PRESETS["diosi"] = """\
name = "diosi"
description = "Choi state of qubit depolarizing noise (tau = 1); negativity vanishes at tau ln 3"

[state]
factory = "bell"
which = "phi+"

[noise]
model = "depolarizing"
tau = 1.0
parties = [1]

[sweep]
t_max = 3.0

[detect]
measures = ["negativity"]
"""

PRESETS["ye04"] = """\
name = "ye04"
description = "X-state family with a = 1 under amplitude damping on both qubits"

[state]
factory = "ye04"
a = 1.0

[noise]
model = "amplitude_damping"
rate = 1.0

[sweep]
t_max = 2.0

[detect]
measures = ["concurrence", "eof"]
"""

PRESETS["global-dephasing"] = """\
name = "global-dephasing"
description = "X-state with |w|/sqrt(bc) = 1.6 under collective dephasing (rate 1)"

[state]
factory = "x_state"
a = 0.4
b = 0.1
c = 0.1
d = 0.4
w = 0.16

[noise]
model = "global_dephasing"
rate = 1.0

[sweep]
t_max = 2.0

[detect]
measures = ["concurrence", "phase_correlation"]
"""

PRESETS["nonadditive-lambda"] = """\
name = "nonadditive-lambda"
description = "lambda = 1 X-state under simultaneous dephasing and damping; G1 = G2 = 1 (coherence rates halved per qubit)"

[state]
factory = "lambda"
lam = 1.0

[noise]
model = "dephasing_damping"
dephasing_rate = 0.5
damping_rate = 0.5

[sweep]
t_max = 10.0

[detect]
measures = ["concurrence"]
"""

PRESETS["qubit-qutrit"] = """\
name = "qubit-qutrit"
description = "Qubit-qutrit ansatz with x = 0.2, qubit dephasing at rate 1; negativity root ln(8x)"

[state]
factory = "qubit_qutrit"
x = 0.2

[noise]
model = "dephasing"
rate = 1.0
parties = [0]

[sweep]
t_max = 3.0

[detect]
measures = ["negativity"]
"""

PRESETS["caves-milburn"] = """\
name = "caves-milburn"
description = "Two-qutrit Werner-like state (eps = 1), three-level decay on the first qutrit (A1 = A2 = 1)"

[state]
factory = "caves_milburn"
eps = 1.0

[noise]
model = "qutrit_damping"
a1 = 1.0
a2 = 1.0
parties = [0]

[sweep]
t_max = 5.0

[detect]
measures = ["caves_milburn_s"]
"""

PRESETS["isotropic-d3"] = """\
name = "isotropic-d3"
description = "Maximally entangled 3x3 state, depolarizing on both sides (rate 1)"

[state]
factory = "isotropic"
d = 3
fidelity = 1.0

[noise]
model = "depolarizing"
rate = 1.0

[sweep]
t_max = 2.0

[detect]
measures = ["isotropic_fidelity", "isotropic_eof"]
"""

PRESETS["isotropic-d4"] = """\
name = "isotropic-d4"
description = "Maximally entangled 4x4 state, depolarizing on both sides (rate 1)"

[state]
factory = "isotropic"
d = 4
fidelity = 1.0

[noise]
model = "depolarizing"
rate = 1.0

[sweep]
t_max = 2.0

[detect]
measures = ["isotropic_fidelity", "isotropic_eof"]
"""

PRESETS["werner-adc-critical"] = """\
name = "werner-adc-critical"
description = "Werner fidelity scan under amplitude damping on both qubits; largest F with finite-time death"

[state]
factory = "werner"
fidelity = 0.7

[noise]
model = "amplitude_damping"
rate = 1.0

[sweep]
t_max = 6.0

[detect]
measures = ["concurrence"]

[scan]
parameter = "fidelity"
start = 0.6
stop = 0.8
step = 0.001
"""

PRESETS["thermal-jj04"] = """\
name = "thermal-jj04"
description = "Bell state in a finite-temperature bath (gamma0 = 1, omega0 = 1, beta = 1)"

[state]
factory = "bell"
which = "phi+"

[noise]
model = "thermal"
gamma0 = 1.0
omega0 = 1.0
beta = 1.0

[sweep]
t_max = 3.0

[detect]
measures = ["concurrence", "chsh_max"]
"""

PRESETS["double-jc"] = """\
name = "double-jc"
description = "Two atoms in separate resonant cavities, atomic state cos(pi/3)|00> + sin(pi/3)|11>; atom-atom concurrence"

[state]
factory = "phi_angle"
angle = 1.0471975511965976

[noise]
model = "jaynes_cummings"
g = 1.0

[sweep]
t_max = 10.0
n_points = 512

[detect]
measures = ["concurrence"]
reduce = [0, 2]
"""

PRESETS["bnsd-w"] = """\
name = "bnsd-w"
description = "Three-qubit W state under dephasing (rate 1); P5 with the rotated zx observable block"

[state]
factory = "w"
n = 3

[noise]
model = "dephasing"
rate = 1.0

[sweep]
t_max = 2.0

[detect]

[[detect.bell]]
family = "P5"
plane = "zx"
theta_b = 0.5235987755982988
theta_c = 1.0471975511965976
"""

PRESETS["bnsd-ghz"] = """\
name = "bnsd-ghz"
description = "GHZ under dephasing (rate 1); Svetlichny and WWZB with observables in the xy plane"

[state]
factory = "ghz"
n = 3

[noise]
model = "dephasing"
rate = 1.0

[sweep]
t_max = 1.0

[detect]

[[detect.bell]]
family = "svetlichny"
plane = "xy"
theta_b = 0.7853981633974483
theta_c = 0.0

[[detect.bell]]
family = "wwzb"
plane = "xy"
theta_b = 0.5235987755982988
theta_c = 1.0471975511965976
"""

PRESETS["adh07-psi1"] = """\
name = "adh07-psi1"
description = "Photon pair with |beta|^2 = |alpha|^2/3 under interferometric damping, p = 1 - exp(-t)"

[state]
factory = "adh"
ratio = 0.3333333333333333

[noise]
model = "mode_damping"
rate = 1.0

[sweep]
t_max = 10.0

[detect]
measures = ["concurrence"]
"""

PRESETS["adh07-psi2"] = """\
name = "adh07-psi2"
description = "Photon pair with |beta|^2 = 3|alpha|^2 under interferometric damping, p = 1 - exp(-t)"

[state]
factory = "adh"
ratio = 3.0

[noise]
model = "mode_damping"
rate = 1.0

[sweep]
t_max = 3.0

[detect]
measures = ["concurrence"]
"""

PRESETS["lcd07"] = """\
name = "lcd07"
description = "Photon-number X-state (0.05, 0.45, 0.45, 0.05; z = 0.4) under dephasing (rate 1)"

[state]
factory = "photon_x"
p00 = 0.05
p01 = 0.45
p10 = 0.45
p11 = 0.05
z = 0.4

[noise]
model = "dephasing"
rate = 1.0

[sweep]
t_max = 3.0

[detect]
measures = ["concurrence"]
"""


def preset_names() -> list[str]:
    return list(PRESETS)


def preset_text(name: str) -> str:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset '{name}' (known: {', '.join(PRESETS)})") from None


def load_preset(name: str):
    from .scenario import parse_scenario

    return parse_scenario(preset_text(name))
