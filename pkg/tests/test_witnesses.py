import json

import pytest

from src.algebra.scalars import FieldSpec
from src.pipeline.witnesses import (
    FAMILIES,
    ContextMismatch,
    IsoWitness,
    NotIsomorphic,
    ScaleExceeded,
    build_family,
    family_context,
    run_family,
    space_record,
    spaces_isomorphic,
)
from tests.conftest import GOLDEN


def golden(name):
    return json.loads((GOLDEN / f"{name}.json").read_text(encoding="utf-8"))


GOLDEN_FAMILIES = [
    "two_step_pair",
    "diagonal_pencil",
    "crossed_two",
    "crossed_three",
    "e7_two_doubles",
    "e7_one_double",
]


@pytest.mark.parametrize("name", GOLDEN_FAMILIES)
def test_members_match_golden_matrices(name):
    data = golden(name)
    p = family_context(data["family"])
    for member in data["members"]:
        space = build_family(data["family"], p, member["parameter"], data["objects"], data.get("layers"))
        record = space_record(p, member["parameter"], space)
        assert record.parameter == member["parameter"]
        assert record.rows == member["rows"]
        assert record.h == member["h"]


def test_every_family_has_a_context():
    for kind, fam in FAMILIES.items():
        p = family_context(kind)
        assert tuple(p.dims) == fam.dims
        space = build_family(kind, p, 1)
        assert space.v_dim >= 1


def test_two_step_pair_members_are_pairwise_distinct():
    report = run_family("two_step_pair", ["0", "1", "2"])
    assert [(c.left, c.right) for c in report.comparisons] == [("0", "1"), ("0", "2"), ("1", "2")]
    assert report.all_distinct
    assert report.objects == ["a", "b"]
    assert [s.parameter for s in report.spaces] == ["0", "1", "2"]


def test_e7_members_are_distinct():
    report = run_family("e7_two_doubles", ["0", "1"])
    assert report.all_distinct
    assert report.comparisons[0].reason


def test_a_member_is_isomorphic_to_itself():
    p = family_context("two_step_pair")
    h = build_family("two_step_pair", p, 2)
    result = spaces_isomorphic(h, h, p)
    assert isinstance(result, IsoWitness)
    assert result.verify(h, h)


def test_different_summands_are_not_isomorphic():
    p = family_context("two_step_pair")
    squares = build_family("two_step_pair", p, 2)
    pencil = build_family("diagonal_pencil", p, 2)
    assert squares.target_counts() == {"a": 2, "b": 2}
    assert pencil.target_counts() == {"a": 1, "b": 1}
    result = spaces_isomorphic(squares, pencil, p)
    assert isinstance(result, NotIsomorphic)
    assert result.reason == "different summands"


def test_same_summands_different_shapes_are_not_isomorphic():
    p = family_context("diagonal_pencil")
    pencil = build_family("diagonal_pencil", p, 1)
    crossed = build_family("crossed_two", family_context("crossed_two"), 1)
    assert pencil.target_counts() == crossed.target_counts()
    result = spaces_isomorphic(pencil, crossed, p)
    assert isinstance(result, NotIsomorphic)
    assert result.reason == "different shapes"


def test_prime_field_context():
    report = run_family("crossed_two", ["0", "3"], family_context("crossed_two", FieldSpec.from_label("F5")))
    assert report.field == "F5"
    assert [s.parameter for s in report.spaces] == ["0 mod 5", "3 mod 5"]
    assert report.layers == [1, 2, 1, 2]


def test_scale_bounds():
    p = family_context("two_step_pair")
    h = build_family("two_step_pair", p, 0)
    with pytest.raises(ScaleExceeded):
        spaces_isomorphic(h, h, p, max_space_dim=1)
    with pytest.raises(ScaleExceeded):
        spaces_isomorphic(h, h, p, max_target_dim=4)


def test_context_mismatch():
    with pytest.raises(ContextMismatch):
        build_family("two_step_pair", family_context("crossed_two"), 0)
    with pytest.raises(ContextMismatch):
        build_family("two_step_pair", family_context("two_step_pair"), 0, objects=["a", "z"])
    with pytest.raises(ContextMismatch):
        family_context("no_such_family")


@pytest.mark.parametrize("kind", sorted(FAMILIES))
def test_every_family_is_pairwise_distinct(kind):
    report = run_family(kind, ["0", "1", "2", "3", "5"])
    assert len(report.comparisons) == 10
    assert report.all_distinct


@pytest.mark.parametrize("kind", sorted(FAMILIES))
@pytest.mark.parametrize("parameter", ["0", "1", "2", "3", "5"])
def test_every_member_is_isomorphic_to_itself(kind, parameter):
    p = family_context(kind)
    h = build_family(kind, p, parameter)
    result = spaces_isomorphic(h, h, p)
    assert isinstance(result, IsoWitness)
    assert result.verify(h, h)
