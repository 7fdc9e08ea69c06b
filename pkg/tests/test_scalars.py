from fractions import Fraction

import pytest

from src.algebra.scalars import ExactScalar, FieldMismatchError, FieldSpec, ScalarFormatError

Q = FieldSpec.rational()
F5 = FieldSpec.prime(5)


def test_field_labels():
    assert FieldSpec.from_label("Q") == Q
    for label in ("F5", "GF5", "Fp:5", "GF(5)"):
        assert FieldSpec.from_label(label) == F5
    assert F5.label == "F5"
    assert F5.to_json() == {"Fp": 5}
    assert FieldSpec.from_json({"Fp": 7}).characteristic == 7
    with pytest.raises(ScalarFormatError):
        FieldSpec.from_label("R")


def test_rationals_stay_reduced():
    x = ExactScalar.parse("6/4")
    assert (x.numerator, x.denominator) == (3, 2)
    assert str(x) == "3/2"
    assert x.to_json() == "3/2"
    assert (x * 2).to_json() == 3
    assert (x - Fraction(3, 2)).is_zero
    assert (x / x).is_one


def test_prime_field_arithmetic():
    x = ExactScalar.parse("7", F5)
    assert str(x) == "2 mod 5"
    assert (x * 3).is_one
    assert x.inverse() == F5.scalar(3)
    assert ExactScalar.parse("1/2", F5) == F5.scalar(3)
    assert ExactScalar.parse("4 mod 5") == F5.scalar(-1)
    assert F5.scalar(10).is_zero and not F5.scalar(10)


def test_mixed_fields_are_rejected():
    with pytest.raises(FieldMismatchError):
        Q.scalar(1) + F5.scalar(1)
    with pytest.raises(FieldMismatchError):
        ExactScalar.parse("2 mod 7", F5)


def test_bad_literals():
    for text in ("", "1/0", "x", "2 mod"):
        with pytest.raises(ScalarFormatError):
            ExactScalar.parse(text)
    with pytest.raises(ScalarFormatError):
        ExactScalar.parse("1/5", F5)
    with pytest.raises(ScalarFormatError):
        Q.scalar(True)


def test_domain_elements_round_trip():
    assert Q.scalar(Q.element("-2/3")) == ExactScalar.parse("-2/3")
    assert F5.scalar(F5.element(8)) == F5.scalar(3)
