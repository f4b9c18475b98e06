import csv
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from mlab import cli, oracle
from mlab.analysis import resolution
from mlab.interaction import gram
from mlab.runner import build_interaction, prepare
from mlab.scenario import Scenario

BUNDLED = cli.BUNDLED
ONE_MINUS_COS_QUARTER_PI = 1 - math.cos(math.pi / 4)


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def bundled(name):
    return json.loads((BUNDLED / f"{name}.json").read_text())


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_steering_demo(tmp_path, capsys):
    code, out, _ = run(["run", "steering-demo", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "violation=True" in out
    rep = json.loads((tmp_path / "steering.json").read_text())["reports"][0]
    assert rep["resolutionR"] == pytest.approx(ONE_MINUS_COS_QUARTER_PI, abs=1e-10)
    assert abs(rep["irreversibleC"]) <= 1e-10
    assert rep["violation"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    for name in manifest["files"]:
        assert (tmp_path / name).exists()


def test_run_cnot_partial(tmp_path, capsys):
    assert run(["run", "cnot-partial", "--out", str(tmp_path), "--quiet"], capsys)[0] == 0
    res = json.loads((tmp_path / "resolution.json").read_text())["readouts"]
    assert res["computational"]["values"][0][1] == pytest.approx(
        ONE_MINUS_COS_QUARTER_PI, abs=1e-9)
    fb = json.loads((tmp_path / "feedback.json").read_text())
    assert fb["traceDistance"] <= 1e-9


def test_run_eraser_demo(tmp_path, capsys):
    assert run(["run", "eraser-demo", "--out", str(tmp_path), "--quiet"], capsys)[0] == 0
    files = json.loads((tmp_path / "manifest.json").read_text())["files"]
    assert "factorizations.json" in files and "pairs.csv" in files
    irr = json.loads((tmp_path / "irreversible.json").read_text())["readouts"]
    assert abs(irr["eraser"]["values"][0][1]) <= 1e-12


def test_pairs_csv_layout(tmp_path, capsys):
    run(["run", "steering-demo", "--out", str(tmp_path), "--quiet"], capsys)
    raw = (tmp_path / "pairs.csv").read_bytes()
    assert raw.count(b"\r\n") == raw.count(b"\n")
    rows = read_csv(tmp_path / "pairs.csv")
    assert rows[0] == ["analysis", "readout", "a1_label", "a2_label", "value"]
    dec = [r for r in rows if r[0] == "decoherence"]
    assert float(dec[0][4]) == pytest.approx(ONE_MINUS_COS_QUARTER_PI, abs=1e-15)


def test_run_is_byte_identical(tmp_path, capsys):
    for sub in ("a", "b"):
        run(["run", "eraser-demo", "--out", str(tmp_path / sub), "--quiet"], capsys)
    for name in ("pairs.csv", "resolution.json", "factorizations.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_json_round_trip(tmp_path, capsys):
    run(["run", "steering-demo", "--out", str(tmp_path), "--quiet"], capsys)
    scenario = Scenario.model_validate(bundled("steering-demo"))
    mi = build_interaction(scenario.interaction)
    stored = np.array(json.loads((tmp_path / "gram.json").read_text())["gram"])
    np.testing.assert_array_equal(stored[..., 0] + 1j * stored[..., 1], gram(mi).g)
    prep = prepare(scenario)
    stored = json.loads((tmp_path / "resolution.json").read_text())["readouts"]["yBasis"]
    np.testing.assert_array_equal(np.array(stored["values"]),
                                  resolution(prep.cond_probs("yBasis")).values)


def test_zero_analyses_give_empty_manifest(tmp_path, capsys):
    raw = bundled("steering-demo")
    raw["analyses"] = []
    raw.pop("steering")
    path = write_json(tmp_path / "s.json", raw)
    assert run(["run", path, "--out", str(tmp_path / "o"), "--quiet"], capsys)[0] == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["files"] == []
    assert sorted(p.name for p in (tmp_path / "o").iterdir()) == ["manifest.json"]


def test_malformed_json_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1,\n  "name": }')
    code, _, err = run(["run", str(bad), "--out", str(tmp_path / "o")], capsys)
    assert code == 2
    payload = json.loads(err)
    assert payload["error"] == "ParseError"
    assert payload["line"] == 2
    assert not (tmp_path / "o").exists()


def test_validation_error_exit_2(tmp_path, capsys):
    raw = bundled("steering-demo")
    raw["steering"]["r"] = "missing"
    code, _, err = run(["run", write_json(tmp_path / "s.json", raw)], capsys)
    assert code == 2
    assert json.loads(err)["error"] == "ValidationError"


def test_missing_file_exit_2(capsys):
    assert run(["run", "no-such-scenario"], capsys)[0] == 2


def test_analysis_error_exit_3(tmp_path, capsys):
    raw = bundled("steering-demo")
    raw["interaction"] = {"type": "conditional-unitaries",
                          "unitaries": [[[1, 0], [0, 1]], [[0, 1], [1, 0]], [[1, 0], [0, -1]]],
                          "initialMeter": [1, 0]}
    raw["readouts"] = {"eraser": {"type": "eraser"}}
    raw["analyses"] = ["resolution"]
    raw.pop("steering")
    raw.pop("input")
    code, _, err = run(["run", write_json(tmp_path / "s.json", raw),
                        "--out", str(tmp_path / "o")], capsys)
    assert code == 3
    assert json.loads(err)["error"] == "NoEraserFound"
    assert not (tmp_path / "o").exists()


def test_sweep_theta(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(["sweep", "eraser-demo", "qubit-theta-sweep", str(out), "--quiet"], capsys)
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == ["theta", "D", "R_optimal", "Dirr_eraser"]
    thetas = [float(r[0]) for r in rows[1:]]
    assert thetas == bundled("qubit-theta-sweep")["values"]
    for theta, d, r, dirr in ([float(x) for x in row] for row in rows[1:]):
        assert d == pytest.approx(1 - math.cos(2 * theta), abs=1e-12)
        assert abs(r - d) <= 1e-6
        assert abs(dirr) <= 1e-12


def test_sweep_is_byte_identical_across_threads(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MLAB_THREADS", "1")
    run(["sweep", "eraser-demo", "qubit-theta-sweep", str(tmp_path / "a.csv"), "--quiet"], capsys)
    monkeypatch.setenv("MLAB_THREADS", "4")
    run(["sweep", "eraser-demo", "qubit-theta-sweep", str(tmp_path / "b.csv"), "--quiet"], capsys)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_single_value_sweep_matches_run(tmp_path, capsys):
    theta = bundled("steering-demo")["interaction"]["effectiveTime"]
    sweep = {"version": 1, "parameter": "interaction.effectiveTime", "values": [theta],
             "outputs": [{"quantity": "D"}, {"quantity": "R", "readout": "yBasis"},
                         {"quantity": "Dirr", "readout": "bBasis"}]}
    out = tmp_path / "s.csv"
    assert run(["sweep", "steering-demo", write_json(tmp_path / "sw.json", sweep), str(out),
                "--quiet"], capsys)[0] == 0
    row = [float(x) for x in read_csv(out)[1]]
    run(["run", "steering-demo", "--out", str(tmp_path / "o"), "--quiet"], capsys)
    dec = json.loads((tmp_path / "o" / "decoherence.json").read_text())["values"][0][1]
    res = json.loads((tmp_path / "o" / "resolution.json").read_text())["readouts"]
    irr = json.loads((tmp_path / "o" / "irreversible.json").read_text())["readouts"]
    assert row == [theta, dec, res["yBasis"]["values"][0][1], irr["bBasis"]["values"][0][1]]


def test_sweep_empty_outputs_exit_2(tmp_path, capsys):
    sweep = {"version": 1, "parameter": "interaction.effectiveTime", "values": [0.1],
             "outputs": []}
    code, _, err = run(["sweep", "steering-demo", write_json(tmp_path / "sw.json", sweep),
                        str(tmp_path / "o.csv")], capsys)
    assert code == 2
    assert not (tmp_path / "o.csv").exists()


def test_sweep_unknown_parameter_exit_2(tmp_path, capsys):
    sweep = {"version": 1, "parameter": "interaction.duration", "values": [0.1],
             "outputs": [{"quantity": "D"}]}
    code, _, _ = run(["sweep", "steering-demo", write_json(tmp_path / "sw.json", sweep),
                      str(tmp_path / "o.csv")], capsys)
    assert code == 2


def test_verify_small_config(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"version": 1, "seed": 3, "trials": 20})
    code, out, _ = run(["verify", cfg, "--out", str(tmp_path / "report.json")], capsys)
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] and report["boundCheck"]["rng"] == oracle.RNG_ALGORITHM


def test_verify_zero_trials_exit_2(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"version": 1, "trials": 0})
    assert run(["verify", cfg], capsys)[0] == 2


def test_verify_injected_fault_exit_4(tmp_path, capsys, monkeypatch):
    real = oracle.analysis.resolution

    def inflated(p, name=""):
        out = real(p, name)
        return type(out)(out.values * 1.5 + 1e-3, out.kind, out.labels, out.name)

    monkeypatch.setattr(oracle.analysis, "resolution", inflated)
    cfg = write_json(tmp_path / "c.json", {"version": 1, "trials": 5})
    code, _, err = run(["verify", cfg], capsys)
    assert code == 4
    payload = json.loads(err)
    assert payload["error"] == "BoundViolated"
    assert payload["report"]["boundCheck"]["worst_case"] is not None


def test_factorize_gram_file(tmp_path, capsys):
    c = math.cos(math.pi / 4)
    path = write_json(tmp_path / "g.json", {"version": 1, "gram": [[1, c], [c, 1]]})
    code, out, _ = run(["factorize", path], capsys)
    assert code == 0
    fact = json.loads(out)
    f = np.array(fact["f"])
    assert np.all(f >= 0)
    assert np.linalg.norm(f.T @ f - [[1, c], [c, 1]]) == pytest.approx(fact["residual"],
                                                                        abs=1e-15)


def test_factorize_scenario(tmp_path, capsys):
    out = tmp_path / "f.json"
    assert run(["factorize", "eraser-demo", "--out", str(out), "--quiet"], capsys)[0] == 0
    assert json.loads(out.read_text())["residual"] <= 1e-8


def test_factorize_complex_gram_exit_3(tmp_path, capsys):
    path = write_json(tmp_path / "g.json", {"version": 1, "gram": [[1, [0, 0.5]], [[0, -0.5], 1]]})
    code, _, err = run(["factorize", path], capsys)
    assert code == 3
    assert json.loads(err)["error"] == "GramNotNonnegative"


def test_cold_start_steering_demo(tmp_path):
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "mlab.cli", "run", "steering-demo",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    elapsed = time.perf_counter() - start
    assert proc.returncode == 0, proc.stderr
    assert elapsed < 5
    rep = json.loads((tmp_path / "steering.json").read_text())["reports"][0]
    assert rep["violation"]
