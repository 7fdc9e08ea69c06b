from fractions import Fraction

import pytest

from src.algebra.monomials import (
    MonomialFormatError,
    NegativeBaseFractionalPower,
    PrimeFieldLogs,
    RadMonomial,
    UnsolvableRoot,
    monomial_mul,
    monomial_pow,
    monomial_product,
)
from src.algebra.scalars import FieldSpec


def test_rational_embedding():
    m = RadMonomial.from_rational(Fraction(-12, 5))
    assert str(m) == "-2^{2}*3*5^{-1}"
    assert m.to_rational() == Fraction(-12, 5)
    assert RadMonomial.from_rational(1).is_one
    with pytest.raises(ZeroDivisionError):
        RadMonomial.from_rational(0)


def test_parse_round_trip_and_canonical_order():
    m = RadMonomial.parse("+λ_1*3^{1/2}*2")
    assert str(m) == "+2*3^{1/2}*λ_1"
    assert RadMonomial.parse(str(m)) == m
    assert RadMonomial.parse("-1") == RadMonomial(-1)
    for text in ("2", "+4", "+2^{x}"):
        with pytest.raises(MonomialFormatError):
            RadMonomial.parse(text)


def test_group_operations():
    two = RadMonomial.from_rational(2)
    root = two ** Fraction(1, 2)
    assert (root * root) == two
    assert root.to_rational() is None
    assert (two / two).is_one
    lam = RadMonomial.symbol("λ_1")
    assert (lam * lam.inverse()).is_one
    assert monomial_product([two, two, two.inverse()]) == two


def test_negative_bases():
    minus_two = RadMonomial.from_rational(-2)
    assert (minus_two ** 3).to_rational() == -8
    assert (minus_two ** Fraction(1, 3)).sign == -1
    with pytest.raises(NegativeBaseFractionalPower):
        minus_two ** Fraction(1, 2)


def test_prime_field_logs():
    logs = PrimeFieldLogs(7)
    assert logs.root == 3
    for r in range(1, 7):
        x = FieldSpec.prime(7).scalar(r)
        assert logs.exp(logs.log(x)) == x
    with pytest.raises(UnsolvableRoot) as info:
        logs.solve_linear(2, 3)
    assert "mod 6" in info.value.congruence
    z = logs.solve_linear(2, 4)
    assert (2 * z - 4) % 6 == 0


def test_characteristic_two_logs():
    logs = PrimeFieldLogs(2)
    one = FieldSpec.prime(2).scalar(1)
    assert logs.log(one) == 0
    assert logs.solve_linear(3, 5) == 0


def test_free_function_forms():
    two, three = RadMonomial.from_rational(2), RadMonomial.from_rational(3)
    assert monomial_mul(two, three) == RadMonomial.from_rational(6)
    assert monomial_pow(RadMonomial.from_rational(4), Fraction(1, 2)) == two
