import json
import random

import pytest

from src.algebra import linalg
from src.algebra.scalars import FieldSpec
from src.pipeline.presentation import (
    PresentationFormatError,
    canonicalize,
    change_field,
    conjugate,
    parse,
    serialize,
    validate,
)
from tests.conftest import CORPUS_ENTRIES, as_matrix, load_corpus, presentation, strictly_lower, units


@pytest.mark.parametrize("name", CORPUS_ENTRIES)
def test_corpus_entries_are_valid(name):
    p = load_corpus(name)
    report = validate(p)
    assert report.valid, report.issues


def test_serialize_is_canonical():
    p = load_corpus("two_step")
    text = serialize(p)
    assert text.endswith("\n")
    again = parse(text)
    assert serialize(again) == text
    assert again.rad_space("a", "b") == p.rad_space("a", "b")


def test_syntax_errors_carry_position():
    with pytest.raises(PresentationFormatError) as info:
        parse('{"objects": [\n  {"name": "a", "dim": 1},\n]}')
    assert info.value.line == 3
    assert info.value.column is not None


def test_schema_and_shape_errors():
    with pytest.raises(PresentationFormatError):
        parse(json.dumps({"objects": [{"name": "a", "dim": 1, "extra": 0}]}))
    with pytest.raises(PresentationFormatError):
        parse(json.dumps({"objects": [{"name": "a", "dim": 0}]}))
    with pytest.raises(PresentationFormatError) as info:
        parse(
            json.dumps(
                {
                    "objects": [{"name": "a", "dim": 2}, {"name": "b", "dim": 1}],
                    "rad": [{"from": "a", "to": "b", "matrices": [[[1], [0]]]}],
                }
            )
        )
    assert "dimension mismatch" in str(info.value)
    assert info.value.path.startswith("rad[0] a->b")
    with pytest.raises(PresentationFormatError):
        parse(b"\xff\xfe")
    with pytest.raises(PresentationFormatError):
        parse(json.dumps({"objects": [{"name": "a", "dim": 1}], "rad": [{"from": "a", "to": "z", "matrices": []}]}))


def test_closure_violation_names_the_triple():
    e = units(1, 1, (1, 1, 1))
    p = presentation(
        {"a": 1, "b": 1, "c": 1},
        {("a", "b"): [e], ("b", "c"): [e]},
        close=False,
    )
    report = validate(p)
    assert [i.kind for i in report.issues] == ["closure"]
    assert report.issues[0].objects == ["a", "b", "c"]
    closed = presentation({"a": 1, "b": 1, "c": 1}, {("a", "b"): [e], ("b", "c"): [e]})
    assert validate(closed).valid
    assert closed.rad_space("a", "c").dim == 1


def test_dependent_and_non_nilpotent_generators():
    e21 = units(2, 2, (2, 1, 1))
    p = presentation({"a": 2}, {("a", "a"): [e21, units(2, 2, (2, 1, 2))]}, close=False)
    assert [i.kind for i in validate(p).issues] == ["independence"]
    q = presentation({"a": 2}, {("a", "a"): [units(2, 2, (1, 1, 1))]}, close=False)
    assert "nilpotency" in [i.kind for i in validate(q).issues]


def test_reading_over_a_prime_field():
    p = load_corpus("one_double")
    f2 = change_field(p, FieldSpec.prime(2))
    assert f2.field.label == "F2"
    # e11 + 2 e22 collapses onto e11, which is then independent of e33
    assert f2.rad_space("a", "b").dim == 5


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_span_dimensions_survive_base_change(seed):
    rng = random.Random(seed)
    p = load_corpus("three_doubles")
    changes = {}
    for o in p.objects:
        d = p.dim(o)
        while True:
            rows = [[rng.randint(-3, 3) for _ in range(d)] for _ in range(d)]
            t = as_matrix(p, rows)
            if linalg.rank(t) == d:
                break
        changes[o.name] = t
    q = conjugate(p, changes)
    assert validate(q).valid
    for a, b in p.pairs():
        assert q.rad_space(a, b).dim == p.rad_space(a, b).dim


def test_conjugate_rejects_singular_changes():
    p = presentation({"a": 2}, {("a", "a"): [units(2, 2, (2, 1, 1))]})
    with pytest.raises(ValueError):
        conjugate(p, {"a": as_matrix(p, [[1, 1], [1, 1]])})


def test_canonicalize_keeps_spans():
    p = presentation({"a": 3}, {("a", "a"): strictly_lower(3)}, close=False)
    q = canonicalize(p)
    assert q.rad_space("a", "a") == p.rad_space("a", "a")
