import csv
import json

import pytest

from polariton_qubits import acceptance, cli
from polariton_qubits.acceptance import Criterion

TRAP = """[experiment]
name = {name}
{sweep}
[trap]
R = 0.5 µm
D = {D}
depth = 7 meV
dx = 0.05 µm
padding = 1 µm
"""

QND_UNREACHABLE = """[experiment]
name = qnd

[readout]
sidedness = single_sided
delta = 0.1 meV
V_ex = 2 µeV
gamma = 0.027 meV
F_T = 0.001 ps^-1/2

[numerics]
tau_cap = 100 ps
"""


def _write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def _sweep_text(D="linspace(0.2, 0.4, 3) µm", depth=None):
    text = TRAP.format(name="sweep", sweep="\n[sweep]\nexperiment = trapspec\nmetrics = U, residual\n",
                       D=D)
    if depth:
        text = text.replace("depth = 7 meV", f"depth = {depth}")
    return text


def test_trapspec_run_writes_csv_and_manifest(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["trapspec", "--config", _write(tmp_path, TRAP.format(name="trapspec", sweep="",
                                                                           D="0.3 µm")),
                     "--out", str(out)])
    assert code == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["levels.csv", "manifest.json", "summary.csv"]
    raw = (out / "summary.csv").read_bytes()
    assert b"\r\n" not in raw
    keys = [r[0] for r in csv.reader(raw.decode().splitlines())][1:]
    assert keys == sorted(keys)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["experiment"] == "trapspec" and "summary.csv" in manifest["files"]


def test_json_format_override(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, TRAP.format(name="trapspec", sweep="", D="0.3 µm"))
    assert cli.main(["trapspec", "--config", cfg, "--out", str(out), "--format", "json"]) == 0
    doc = json.loads((out / "result.json").read_text())
    assert doc["summary"]["U"] > 0
    assert doc["tables"]["levels"]["columns"] == ["level", "energy_meV"]


def test_config_error_exits_1_without_output(tmp_path, capsys):
    out = tmp_path / "out"
    bad = TRAP.format(name="trapspec", sweep="", D="0.3 µm").replace("7 meV", "7 T")
    assert cli.main(["trapspec", "--config", _write(tmp_path, bad), "--out", str(out)]) == 1
    assert "trap.depth" in capsys.readouterr().err
    assert not out.exists()


def test_experiment_mismatch_exits_1(tmp_path):
    cfg = _write(tmp_path, TRAP.format(name="trapspec", sweep="", D="0.3 µm"))
    assert cli.main(["qnd", "--config", cfg, "--out", str(tmp_path / "o")]) == 1


def test_missing_config_exits_1(tmp_path):
    assert cli.main(["trapspec", "--out", str(tmp_path / "o")]) == 1


def test_search_failure_exits_2_without_output(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["qnd", "--config", _write(tmp_path, QND_UNREACHABLE), "--out", str(out)]) == 2
    assert not out.exists()


def _sweep_rows(tmp_path, text, jobs=1):
    out = tmp_path / f"sweep{jobs}"
    assert cli.main(["sweep", "--config", _write(tmp_path, text, f"s{jobs}.ini"), "--out", str(out),
                     "--jobs", str(jobs)]) == 0
    return (out / "sweep.csv").read_text()


def test_sweep_rows_lexicographic(tmp_path):
    text = _sweep_text(D="[0.4, 0.2] µm", depth="[7, 6] meV")
    rows = list(csv.reader(_sweep_rows(tmp_path, text).splitlines()))
    assert rows[0] == ["trap.D", "trap.depth", "U", "residual"]
    keys = [(float(r[0]), float(r[1])) for r in rows[1:]]
    assert keys == sorted(keys) and len(keys) == 4


def test_empty_sweep_is_header_only(tmp_path):
    text = _sweep_rows(tmp_path, _sweep_text(D="[] µm"))
    assert text == "trap.D,U,residual\n"


def test_parallel_sweep_matches_serial(tmp_path):
    text = _sweep_text()
    assert _sweep_rows(tmp_path, text, jobs=2) == _sweep_rows(tmp_path, text, jobs=1)


def test_unknown_sweep_metric_exits_1(tmp_path):
    text = _sweep_text().replace("metrics = U, residual", "metrics = bogus")
    assert cli.main(["sweep", "--config", _write(tmp_path, text), "--out", str(tmp_path / "o")]) == 1


def test_verify_exit_3_on_failure(tmp_path, monkeypatch, capsys):
    good = Criterion(1, "ok one")
    good.true("always", True)
    bad = Criterion(2, "bad one")
    bad.below("value", 2.0, 1.0)
    monkeypatch.setattr(acceptance, "run_all", lambda: [good, bad])
    assert cli.main(["verify", "--out", str(tmp_path / "v")]) == 3
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("PASS criterion 1") and lines[1].startswith("FAIL criterion 2")


def test_verify_exit_0_when_all_pass(tmp_path, monkeypatch):
    good = Criterion(1, "ok one")
    good.true("always", True)
    monkeypatch.setattr(acceptance, "run_all", lambda: [good])
    assert cli.main(["verify", "--out", str(tmp_path / "v"), "--format", "json"]) == 0


def test_bad_jobs_exits_1(tmp_path):
    assert cli.main(["verify", "--jobs", "0", "--out", str(tmp_path / "v")]) == 1


@pytest.mark.parametrize("preset", ["fig9_pi_rotation", "table2_single_sided_d03"])
def test_preset_runs_are_byte_identical(preset):
    a = cli.execute(cli.load_preset(preset))
    b = cli.execute(cli.load_preset(preset))
    strip = lambda f: {k: v for k, v in f.items() if k != "manifest.json"}  # noqa: E731
    assert strip(a) == strip(b)
    ma, mb = (json.loads(f["manifest.json"]) for f in (a, b))
    ma.pop("wall_time_s"), mb.pop("wall_time_s")
    assert ma == mb
