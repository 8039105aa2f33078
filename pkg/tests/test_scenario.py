import math

import pytest

from suddenlab.runner import run
from suddenlab.presets import PRESETS, load_preset, preset_names, preset_text
from suddenlab.scenario import ScenarioError, dump_scenario, load_scenario, parse_scenario

MINIMAL = """\
name = "minimal"

[state]
factory = "bell"
which = "psi-"

[noise]
model = "dephasing"
rate = 1.0

[sweep]
t_max = 5.0
n_points = 256

[detect]
measures = ["concurrence"]
"""

EXPECTED_PRESETS = {
    "diosi", "ye04", "global-dephasing", "nonadditive-lambda", "qubit-qutrit", "caves-milburn",
    "isotropic-d3", "isotropic-d4", "werner-adc-critical", "thermal-jj04", "double-jc",
    "bnsd-w", "bnsd-ghz", "adh07-psi1", "adh07-psi2", "lcd07",
}


def test_minimal_scenario_parses():
    s = parse_scenario(MINIMAL)
    assert s.state.name == "bell" and s.state.params == {"which": "psi-"}
    assert s.noise.name == "dephasing"
    assert (s.sweep.t_max, s.sweep.n_points) == (5.0, 256)
    assert list(s.detect.measures) == ["concurrence"]


def test_misspelled_measure_names_key_and_line():
    text = MINIMAL.replace('"concurrence"', '"concurence"')
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    message = str(info.value)
    assert "concurence" in message and "line 16" in message


@pytest.mark.parametrize(
    "needle, replacement, line",
    [
        ("rate = 1.0", "rat = 1.0", 9),
        ('which = "psi-"', 'which = "psi-"\ncolour = "red"', 6),
        ("t_max = 5.0", "t_max = 5.0\nspeed = 2", 13),
    ],
)
def test_unknown_keys_report_line(needle, replacement, line):
    with pytest.raises(ScenarioError, match=f"line {line}"):
        parse_scenario(MINIMAL.replace(needle, replacement))


def test_unknown_factory_and_model():
    with pytest.raises(ScenarioError, match="line 4"):
        parse_scenario(MINIMAL.replace('factory = "bell"', 'factory = "belll"'))
    with pytest.raises(ScenarioError, match="line 8"):
        parse_scenario(MINIMAL.replace('model = "dephasing"', 'model = "dephase"'))


def test_missing_required_parameter():
    with pytest.raises(ScenarioError):
        parse_scenario(MINIMAL.replace("rate = 1.0\n", ""))


def test_malformed_toml():
    with pytest.raises(ScenarioError, match="malformed"):
        parse_scenario("name = \n")


def test_bad_numbers_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario(MINIMAL.replace("t_max = 5.0", "t_max = -1.0"))
    with pytest.raises(ScenarioError):
        parse_scenario(MINIMAL.replace("n_points = 256", "n_points = 1"))


def test_bell_family_arity_checked_against_state():
    scenario = parse_scenario(MINIMAL + '\n[[detect.bell]]\nfamily = "svetlichny"\n')
    with pytest.raises(ScenarioError, match="3 qubits"):
        run(scenario, "bell", write=False)


def test_preset_reference_expands():
    s = parse_scenario('preset = "bnsd-ghz"\n')
    full = load_preset("bnsd-ghz")
    assert s == full
    families = [b.family.lower() for b in s.detect.bell]
    assert families == ["svetlichny", "wwzb"]
    assert s.detect.bell[0].theta_b == pytest.approx(math.pi / 4)


def test_preset_reference_with_override():
    s = parse_scenario('preset = "diosi"\n\n[sweep]\nt_max = 4.0\n')
    assert s.sweep.t_max == 4.0
    assert s.noise.params == load_preset("diosi").noise.params


def test_unknown_preset_reference():
    with pytest.raises(ScenarioError):
        parse_scenario('preset = "nope"\n')
    with pytest.raises(KeyError):
        preset_text("nope")


def test_all_presets_shipped():
    assert set(preset_names()) == EXPECTED_PRESETS


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_preset_round_trip(name):
    parsed = parse_scenario(preset_text(name))
    assert parse_scenario(dump_scenario(parsed)) == parsed


def test_complex_parameters_round_trip():
    text = MINIMAL.replace(
        'factory = "bell"\nwhich = "psi-"',
        'factory = "x_state"\na = 0.4\nb = 0.1\nc = 0.1\nd = 0.4\nw = [0.1, 0.05]',
    )
    parsed = parse_scenario(text)
    assert parse_scenario(dump_scenario(parsed)) == parsed


def test_load_scenario_from_file(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text(MINIMAL, encoding="utf-8")
    assert load_scenario(path) == parse_scenario(MINIMAL)
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "missing.toml")
