import json

import pytest

import main
from tests.conftest import CORPUS


@pytest.fixture
def run(config_dir, logs_dir, capsys):
    def invoke(*argv):
        code = main.main([*argv, "--logs-dir", str(logs_dir), "--config-dir", str(config_dir)])
        out = capsys.readouterr().out
        return code, (json.loads(out) if out.strip() else None)

    return invoke


def test_analyze_writes_json_and_run_files(run, logs_dir):
    code, data = run("analyze", str(CORPUS / "two_step.json"))
    assert code == 0
    assert data["exit_code"] == 0
    assert [s["name"] for s in data["stages"]][0] == "validate"
    [run_dir] = list((logs_dir / "runs").iterdir())
    manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "analyze"
    assert manifest["exit_code"] == 0
    assert (run_dir / "report.md").read_text(encoding="utf-8").startswith("# Analyze report")
    assert "stage validate" in (run_dir / f"{run_dir.name}.log").read_text(encoding="utf-8")
    notes = (logs_dir / "notes.log").read_text(encoding="utf-8").splitlines()
    assert json.loads(notes[-1])["command"] == "analyze"


def test_malformed_input_exits_with_one(run, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    code, data = run("analyze", str(bad))
    assert code == 1
    assert data is None


def test_missing_input_exits_with_one(run, tmp_path):
    code, _ = run("analyze", str(tmp_path / "absent.json"))
    assert code == 1


def test_four_dimensional_object_is_certified(run, tmp_path):
    e21 = [[0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
    doc = {"field": "Q", "objects": [{"name": "a", "dim": 4}], "rad": [{"from": "a", "to": "a", "matrices": [e21]}]}
    path = tmp_path / "wide.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    code, data = run("analyze", str(path))
    assert code == 2
    triangular = next(s for s in data["stages"] if s["name"] == "triangular")
    assert triangular["certificates"][0]["check"] == "dimension_bound"


def test_field_override(run):
    code, data = run("analyze", str(CORPUS / "one_double.json"), "--field", "F5")
    assert code == 0
    assert data["field"] == "F5"


def test_certify_lists_weight_functions(run):
    code, data = run("certify", str(CORPUS / "three_doubles.json"))
    assert code == 0
    assert data["final"]["weight_functions"] == []


def test_normalize_then_verify(run, tmp_path):
    out = tmp_path / "normalized.json"
    code, data = run("normalize", str(CORPUS / "one_double.json"), "--output", str(out))
    assert code == 0
    assert data is None
    assert json.loads(out.read_text(encoding="utf-8"))["final"]["rank"] == 2
    code, verdict = run("verify", str(out))
    assert code == 0
    assert verdict["accepted"] is True


def test_verify_rejects_an_analyze_result(run, tmp_path):
    out = tmp_path / "analyzed.json"
    run("analyze", str(CORPUS / "singleton.json"), "--output", str(out))
    code, _ = run("verify", str(out))
    assert code == 1


def test_witness_family(run):
    code, data = run("witness", "--family", "two_step_pair", "--params", "0,1")
    assert code == 0
    assert data["all_distinct"] is True
    assert [s["parameter"] for s in data["spaces"]] == ["0", "1"]


def test_witness_argument_errors(run):
    code, _ = run("witness", "--family", "incomparable_layers", "--params", "0", "--layers", "x")
    assert code == 1
    code, _ = run("witness", "--family", "two_step_pair", "--params", ",")
    assert code == 1
    code, _ = run("witness", "--family", "two_step_pair", "--params", "0", "--objects", "a,z")
    assert code == 1


def test_missing_configuration_exits_with_one(tmp_path, logs_dir):
    empty = tmp_path / "empty"
    empty.mkdir()
    code = main.main(["analyze", str(CORPUS / "singleton.json"), "--config-dir", str(empty), "--logs-dir", str(logs_dir)])
    assert code == 1


def test_unknown_family_is_rejected_by_the_parser(run):
    with pytest.raises(SystemExit):
        run("witness", "--family", "nope", "--params", "0")
