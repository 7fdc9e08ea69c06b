import copy

import pytest

from src.algebra.scalars import FieldSpec
from src.pipeline.runner import COMMAND_STAGES, run_pipeline, verify_normalized
from tests.conftest import CORPUS_ENTRIES, load_corpus, presentation, strictly_lower, units

RANKS = {"singleton": 1, "double": 1, "triple": 1, "two_step": 2, "one_double": 2, "three_doubles": 2}


@pytest.mark.parametrize("name", CORPUS_ENTRIES)
def test_corpus_passes_every_check(name):
    report = run_pipeline(load_corpus(name), "analyze")
    assert [s.name for s in report.stages] == list(COMMAND_STAGES["analyze"])
    assert report.certificates == []
    assert report.exit_code == 0


@pytest.mark.parametrize("name", CORPUS_ENTRIES)
def test_corpus_normalizes(name):
    report = run_pipeline(load_corpus(name), "normalize")
    assert report.exit_code == 0
    assert report.stage("rescaling").status == "ok"
    assert report.final["rank"] == RANKS[name]
    assert report.mode == "numeric"


def test_certify_reports_the_obstruction(obstruction_square):
    report = run_pipeline(obstruction_square, "certify")
    assert report.exit_code == 2
    weights = report.stage("weights")
    assert weights.status == "certified-violation"
    assert [w["residual"] for w in report.final["weight_functions"]] == ["+2"]
    assert report.final["obstructions"][0]["check"] == "weight_obstruction"


def test_normalize_halts_on_violations(obstruction_square):
    report = run_pipeline(obstruction_square, "normalize")
    assert report.exit_code == 2
    assert report.stage("rescaling").status == "skipped"
    assert report.final is None
    checks = {c.check for c in report.certificates}
    assert {"crossed_incomparability", "connected_endpoints", "vertex_degree", "weight_obstruction"} <= checks


def test_invalid_presentation_stops_after_validation():
    a_to_b = [units(3, 3, (1, 1, 1))]
    p = presentation(
        {"a": 3, "b": 3, "c": 3},
        {("a", "a"): strictly_lower(3), ("a", "b"): a_to_b, ("b", "c"): a_to_b},
        close=False,
    )
    report = run_pipeline(p, "normalize")
    assert report.exit_code == 1
    assert report.stage("validate").status == "error"
    assert all(s.status == "skipped" for s in report.stages[1:])
    assert len(report.stages) == len(COMMAND_STAGES["normalize"])


def test_prime_field_run_uses_prime_mode():
    report = run_pipeline(load_corpus("one_double", FieldSpec.from_label("F5")), "normalize")
    assert report.exit_code == 0
    assert report.mode == "prime"
    assert report.field == "F5"


def test_symbolic_normalize():
    report = run_pipeline(load_corpus("three_doubles"), "normalize", mode="symbolic")
    assert report.exit_code == 0
    assert report.mode == "symbolic"
    assert report.stage("weights").payload["system"]["rhs"] == ["+λ_1", "+λ_2", "+λ_3"]


def test_verify_accepts_a_normalized_basis():
    document = run_pipeline(load_corpus("one_double"), "normalize").model_dump(mode="json")
    result = verify_normalized(document)
    assert result.multiplicative
    assert result.exact
    assert result.in_radical
    assert result.accepted
    assert result.rank == 2


def test_verify_rejects_a_tampered_coefficient():
    document = run_pipeline(load_corpus("one_double"), "normalize").model_dump(mode="json")
    tampered = copy.deepcopy(document)
    double = next(m for m in tampered["final"]["basis"]["morphisms"] if m["kind"] == "double")
    double["entries"][1][2] = "+2"
    result = verify_normalized(tampered)
    assert not result.multiplicative
    assert not result.accepted
    assert any("coefficient +2" in problem for problem in result.problems)


def test_verify_needs_a_normalized_document():
    report = run_pipeline(load_corpus("singleton"), "analyze").model_dump(mode="json")
    with pytest.raises(ValueError):
        verify_normalized(report)
