import pytest

from polariton_qubits.config import EXPERIMENTS, load_preset, parse_config, preset_names
from polariton_qubits.errors import ConfigurationError

TRAP = """
[experiment]
name = trapspec

[trap]
R = 0.5 µm
D = 0.3 µm
depth = 7 meV
dx = 0.05 µm
padding = 1 µm
"""


def _err(text):
    with pytest.raises(ConfigurationError) as info:
        parse_config(text)
    return info.value


def test_minimal_config_fills_defaults():
    cfg = parse_config(TRAP)
    t = cfg.section("trap")
    assert cfg.experiment == "trapspec"
    assert t["R"] == 0.5 and t["m_eff"] == 4e-5 and t["levels"] == 2
    assert cfg.format == "csv"


def test_unit_aliases_accepted():
    assert parse_config(TRAP.replace("0.5 µm", "0.5 um")).section("trap")["R"] == 0.5


def test_wrong_unit_names_key():
    assert _err(TRAP.replace("7 meV", "7 µeV")).key == "trap.depth"


def test_missing_required_key():
    assert _err(TRAP.replace("depth = 7 meV\n", "")).key == "trap.depth"


def test_unknown_key_and_section():
    assert _err(TRAP + "colour = 3\n").key == "trap.colour"
    assert _err(TRAP + "[extra]\nx = 1\n").key == "extra"


def test_missing_and_unknown_experiment():
    assert _err("[trap]\nR = 1\n").key == "experiment.name"
    assert _err(TRAP.replace("trapspec", "teleport")).key == "experiment.name"


def test_out_of_range_values():
    assert _err(TRAP.replace("R = 0.5 µm", "R = -0.5 µm")).key == "trap.R"
    assert _err(TRAP.replace("0.05 µm", "0.2 µm")).key == "trap.dx"
    assert _err(TRAP.replace("depth = 7 meV", "depth = nan meV")).key == "trap.depth"


def test_ranges_only_in_sweeps():
    with pytest.raises(ConfigurationError):
        parse_config(TRAP.replace("D = 0.3 µm", "D = [0.2, 0.3] µm"))


def _sweep(lines):
    body = TRAP.replace("name = trapspec", "name = sweep")
    body = body.replace("[trap]", "[sweep]\nexperiment = trapspec\nmetrics = U\n\n[trap]")
    for old, new in lines:
        body = body.replace(old, new)
    return body


def test_sweep_ranges_parsed():
    cfg = parse_config(_sweep([("D = 0.3 µm", "D = linspace(0.2, 0.4, 3) µm"),
                               ("depth = 7 meV", "depth = [7, 6] meV")]))
    assert cfg.sweep_target == "trapspec" and cfg.metrics == ("U",)
    assert cfg.ranges[("trap", "D")] == pytest.approx((0.2, 0.3, 0.4))
    assert cfg.ranges[("trap", "depth")] == (7.0, 6.0)


def test_more_than_two_ranges_rejected():
    text = _sweep([("D = 0.3 µm", "D = [0.2, 0.3] µm"), ("depth = 7 meV", "depth = [7, 6] meV"),
                   ("R = 0.5 µm", "R = [0.5, 0.6] µm")])
    assert "at most 2" in str(_err(text))


def test_all_presets_load():
    names = preset_names()
    assert len(names) == 8
    for n in names:
        assert load_preset(n).experiment in EXPERIMENTS


def test_unknown_preset():
    with pytest.raises(ConfigurationError):
        load_preset("nope")
