"""
Formal radical monomials and prime-field logarithms.

A ``RadMonomial`` is ``±∏ g^{e}`` where each generator ``g`` is a prime
integer or a named symbol (``"λ_3"``) and each exponent ``e`` is a rational
number. These form an abelian group that is closed under the rational powers
needed when rescaling coefficients are solved by integer elimination, so the
rescaler never has to leave exact arithmetic.

Over a prime field the same role is played by residues; ``PrimeFieldLogs``
turns the multiplicative problem into congruences modulo ``p - 1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Tuple, Union

from sympy import discrete_log, factorint, isprime, primitive_root

from .scalars import ExactScalar, FieldSpec

Generator = Union[int, str]
Rational = Union[int, Fraction]

_FACTOR_RE = re.compile(r"^(?P<gen>[^\s*^{}]+)(?:\^\{(?P<exp>-?\d+(?:/\d+)?)\})?$")


class NegativeBaseFractionalPower(ArithmeticError):
    """A negative monomial was raised to a power with even denominator."""


class UnsolvableRoot(ArithmeticError):
    """A root required by the rescaling system does not exist in F_p."""

    def __init__(self, congruence: str) -> None:
        super().__init__(f"no solution for {congruence}")
        self.congruence = congruence


class MonomialFormatError(ValueError):
    """Raised when a monomial string cannot be parsed."""


def _generator_key(gen: Generator) -> Tuple[int, Union[int, str]]:
    return (0, gen) if isinstance(gen, int) else (1, gen)


def _format_exponent(exp: Fraction) -> str:
    if exp.denominator == 1:
        return str(exp.numerator)
    return f"{exp.numerator}/{exp.denominator}"


@dataclass(frozen=True)
class RadMonomial:
    """
    Canonical formal monomial ``sign * ∏ generator^exponent``.

    ``factors`` is a sorted tuple of ``(generator, exponent)`` with no zero
    exponents; integer generators sort before symbols. Two monomials are equal
    exactly when their canonical forms agree.
    """

    sign: int = 1
    factors: Tuple[Tuple[Generator, Fraction], ...] = ()

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        merged: Dict[Generator, Fraction] = {}
        for gen, exp in self.factors:
            if isinstance(gen, bool) or not isinstance(gen, (int, str)):
                raise TypeError(f"unsupported generator {gen!r}")
            if isinstance(gen, int) and not isprime(gen):
                raise ValueError(f"integer generators must be prime, got {gen}")
            merged[gen] = merged.get(gen, Fraction(0)) + Fraction(exp)
        canonical = tuple(
            (g, e) for g, e in sorted(merged.items(), key=lambda kv: _generator_key(kv[0])) if e != 0
        )
        object.__setattr__(self, "factors", canonical)

    # construction -------------------------------------------------------

    @classmethod
    def one(cls) -> "RadMonomial":
        return cls()

    @classmethod
    def symbol(cls, name: str) -> "RadMonomial":
        return cls(1, ((name, Fraction(1)),))

    @classmethod
    def from_rational(cls, value: Union[Rational, ExactScalar]) -> "RadMonomial":
        """Embed a nonzero rational via its prime factorisation."""
        if isinstance(value, ExactScalar):
            value = value.as_fraction()
        q = Fraction(value)
        if q == 0:
            raise ZeroDivisionError("zero is not a unit")
        sign = 1 if q > 0 else -1
        factors = [(p, Fraction(e)) for p, e in factorint(abs(q.numerator)).items()]
        factors += [(p, Fraction(-e)) for p, e in factorint(q.denominator).items()]
        return cls(sign, tuple(factors))

    @classmethod
    def parse(cls, text: str) -> "RadMonomial":
        raw = text.strip()
        if not raw or raw[0] not in "+-":
            raise MonomialFormatError(f"monomial must start with a sign: {text!r}")
        sign = 1 if raw[0] == "+" else -1
        body = raw[1:]
        if body == "1":
            return cls(sign)
        factors = []
        for part in body.split("*"):
            match = _FACTOR_RE.match(part)
            if match is None:
                raise MonomialFormatError(f"bad factor {part!r} in {text!r}")
            gen: Generator = match.group("gen")
            if gen.isdigit():
                gen = int(gen)
            exp = Fraction(match.group("exp")) if match.group("exp") else Fraction(1)
            factors.append((gen, exp))
        try:
            return cls(sign, tuple(factors))
        except (TypeError, ValueError) as exc:
            raise MonomialFormatError(str(exc)) from exc

    # group structure ----------------------------------------------------

    def mul(self, other: "RadMonomial") -> "RadMonomial":
        return RadMonomial(self.sign * other.sign, self.factors + other.factors)

    def inverse(self) -> "RadMonomial":
        return RadMonomial(self.sign, tuple((g, -e) for g, e in self.factors))

    def pow(self, q: Rational) -> "RadMonomial":
        q = Fraction(q)
        if self.sign == -1:
            if q.denominator % 2 == 0:
                raise NegativeBaseFractionalPower(f"({self})^({q}) has no real value")
            sign = -1 if q.numerator % 2 else 1
        else:
            sign = 1
        return RadMonomial(sign, tuple((g, e * q) for g, e in self.factors))

    def __mul__(self, other: "RadMonomial") -> "RadMonomial":
        if not isinstance(other, RadMonomial):
            return NotImplemented
        return self.mul(other)

    def __truediv__(self, other: "RadMonomial") -> "RadMonomial":
        if not isinstance(other, RadMonomial):
            return NotImplemented
        return self.mul(other.inverse())

    def __pow__(self, q: Rational) -> "RadMonomial":
        return self.pow(q)

    @property
    def is_one(self) -> bool:
        return self.sign == 1 and not self.factors

    @property
    def generators(self) -> Dict[Generator, Fraction]:
        return dict(self.factors)

    def to_rational(self) -> Union[Fraction, None]:
        """The rational value, or ``None`` when symbols or roots remain."""
        value = Fraction(self.sign)
        for gen, exp in self.factors:
            if isinstance(gen, str) or exp.denominator != 1:
                return None
            value *= Fraction(gen) ** exp.numerator
        return value

    def __str__(self) -> str:
        head = "+" if self.sign == 1 else "-"
        if not self.factors:
            return head + "1"
        parts = []
        for gen, exp in self.factors:
            parts.append(str(gen) if exp == 1 else f"{gen}^{{{_format_exponent(exp)}}}")
        return head + "*".join(parts)


def monomial_mul(a: RadMonomial, b: RadMonomial) -> RadMonomial:
    return a.mul(b)


def monomial_pow(a: RadMonomial, q: Rational) -> RadMonomial:
    return a.pow(q)


def monomial_product(items: Iterable[RadMonomial]) -> RadMonomial:
    result = RadMonomial.one()
    for item in items:
        result = result.mul(item)
    return result


class PrimeFieldLogs:
    """
    Discrete logarithms in F_p* with respect to the smallest primitive root.

    Parameters
    ----------
    p : int
        Prime modulus.
    """

    def __init__(self, p: int) -> None:
        self.field = FieldSpec.prime(p)
        self.p = int(p)
        self.order = self.p - 1
        self.root = 1 if self.p == 2 else int(primitive_root(self.p))

    def log(self, value: ExactScalar) -> int:
        if value.field != self.field:
            raise ValueError(f"{value} is not an element of {self.field.label}")
        if value.is_zero:
            raise ZeroDivisionError("zero has no logarithm")
        if self.p == 2:
            return 0
        return int(discrete_log(self.p, value.residue, self.root))

    def exp(self, exponent: int) -> ExactScalar:
        return ExactScalar(self.field, pow(self.root, exponent % self.order if self.order else 0, self.p))

    def solve_linear(self, d: int, c: int) -> int:
        """
        Solve ``d * z ≡ c (mod p - 1)`` for one residue ``z``.

        Raises
        ------
        UnsolvableRoot
            If ``gcd(d, p - 1)`` does not divide ``c``.
        """
        n = self.order
        if n == 1:
            return 0
        g = gcd(d % n, n) if d % n else n
        if c % g:
            raise UnsolvableRoot(f"{d}*z = {c % n} (mod {n})")
        m = n // g
        if m == 1:
            return 0
        return ((c // g) * pow((d // g) % m, -1, m)) % m


__all__ = [
    "MonomialFormatError",
    "NegativeBaseFractionalPower",
    "PrimeFieldLogs",
    "RadMonomial",
    "UnsolvableRoot",
    "monomial_mul",
    "monomial_pow",
    "monomial_product",
]
