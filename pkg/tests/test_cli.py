import json

import pytest

from qwsearch.circuit import count_two_qubit_gates, parse, serialize
from qwsearch.cli import main


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_simulate_rows(tmp_path):
    assert run(tmp_path, "simulate", "--family", "hypercube", "--n", "5", "--tmax", "40") == 0
    lines = (tmp_path / "curve.csv").read_text().splitlines()
    assert len(lines) == 1 + 41
    peak = json.loads((tmp_path / "peak.json").read_text())
    assert peak["t_star"] == 6 and peak["baseline"] == 1 / 32


def test_simulate_toroid(tmp_path):
    assert run(tmp_path, "simulate", "--family", "twisted_toroid", "--n", "3", "--m", "3", "--tmax", "60") == 0
    assert json.loads((tmp_path / "peak.json").read_text())["p_star"] > 1 / 64


def test_simulate_json(tmp_path):
    assert run(tmp_path, "simulate", "--family", "complete", "--n", "2", "--tmax", "5", "--format", "json") == 0
    data = json.loads((tmp_path / "curve.json").read_text())
    assert len(data["curve"]) == 6


def test_missing_n_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--family", "hypercube"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args",
    [
        ["simulate", "--family", "twisted_toroid", "--n", "2"],
        ["simulate", "--family", "hypercube", "--n", "3", "--marked", "8"],
        ["simulate", "--family", "hypercube", "--n", "0"],
        ["scan", "--family", "hypercube", "--sizes", "16", "32"],
    ],
)
def test_invalid_config(tmp_path, args):
    assert run(tmp_path, *args) == 2


def test_size_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("QWALK_MAX_AMPS", "1000")
    assert run(tmp_path, "simulate", "--family", "hypercube", "--n", "8") == 3


def test_compile(tmp_path):
    assert run(tmp_path, "compile", "--family", "hypercube", "--n", "4", "--marked", "3") == 0
    text = (tmp_path / "step.qc").read_text()
    c = parse(text)
    assert serialize(c) == text
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["lowered_two_qubit_count"] == count_two_qubit_gates(c)
    assert manifest["registers"] == c.layout.to_dict()


def test_compile_composite_round_trips(tmp_path):
    assert run(tmp_path, "compile", "--family", "twisted_toroid", "--n", "2", "--m", "2", "--level", "composite") == 0
    text = (tmp_path / "step.qc").read_text()
    assert serialize(parse(text)) == text


def test_compile_not_compilable(tmp_path):
    assert run(tmp_path, "compile", "--family", "hypercube", "--n", "5") == 4


@pytest.mark.parametrize("fam", [["hypercube", "--n", "2"], ["twisted_toroid", "--n", "2", "--m", "2"]])
def test_verify_ok(tmp_path, capsys, fam):
    assert run(tmp_path, "verify", "--family", *fam) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["deviation"] <= 1e-10
    assert "max deviation" in capsys.readouterr().out


def test_verify_trajectory_mode(tmp_path):
    assert run(tmp_path, "verify", "--family", "complete", "--n", "2", "--steps", "5") == 0
    assert json.loads((tmp_path / "verify.json").read_text())["mode"] == "trajectory"


def test_verify_corrupted_circuit(tmp_path):
    assert run(tmp_path, "compile", "--family", "hypercube", "--n", "2", "--marked", "1") == 0
    path = tmp_path / "step.qc"
    lines = path.read_text().splitlines()
    # the last cx belongs to the shift, so dropping it must break the step
    i = max(k for k, ln in enumerate(lines) if ln.startswith("cx "))
    del lines[i]
    path.write_text("\n".join(lines) + "\n")
    assert main(["verify", "--family", "hypercube", "--n", "2", "--marked", "1", "--circuit", str(path)]) == 5
    path.write_text("register q 2\nnot a gate\n")
    assert main(["verify", "--family", "hypercube", "--n", "2", "--marked", "1", "--circuit", str(path)]) == 5


def test_scan_steps(tmp_path):
    assert run(tmp_path, "scan", "--family", "twisted_toroid") == 0
    rows = (tmp_path / "scan.csv").read_text().splitlines()
    assert len(rows) == 1 + 5
    fit = json.loads((tmp_path / "fit.json").read_text())["fit"]
    assert set(fit) == {"c", "alpha", "r2"}
    assert 0.4 <= fit["alpha"] <= 0.6


def test_scan_gates(tmp_path):
    assert run(tmp_path, "scan", "--family", "complete", "--metric", "gates", "--sizes", "2", "3", "4") == 0
    assert (tmp_path / "gates.csv").read_text().splitlines()[0] == "N,two_qubit_gates"
    assert not (tmp_path / "scan.csv").exists()


def test_outputs_are_deterministic(tmp_path):
    for sub in ("a", "b"):
        assert run(tmp_path / sub, "simulate", "--family", "twisted_toroid", "--n", "2", "--m", "3") == 0
    for name in ("curve.csv", "peak.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
