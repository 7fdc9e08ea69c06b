"""
Exact field scalars over the rationals and over prime fields.

Every matrix entry of a presentation lives in one ground field, described
by a ``FieldSpec``. Matrices themselves are sympy ``DomainMatrix`` values
over ``QQ`` or ``GF(p)``; ``ExactScalar`` is the boundary type used for
parameters, reports and serialization.

Serialized forms are ``"a/b"`` (or ``"a"`` for integers) over the rationals
and ``"r mod p"`` over a prime field.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Optional, Union

from sympy import isprime
from sympy.polys.domains import GF, QQ


class FieldMismatchError(ValueError):
    """Raised when scalars from different fields are combined."""


class ScalarFormatError(ValueError):
    """Raised when a scalar literal cannot be parsed."""


@lru_cache(maxsize=None)
def _prime_domain(p: int):
    return GF(p, symmetric=False)


@dataclass(frozen=True)
class FieldSpec:
    """
    Ground field descriptor.

    Attributes
    ----------
    kind : str
        ``"Q"`` for the rationals or ``"Fp"`` for a prime field.
    p : int, optional
        The prime modulus when ``kind == "Fp"``.
    """

    kind: str
    p: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind == "Q":
            if self.p is not None:
                raise ScalarFormatError("the rational field takes no modulus")
        elif self.kind == "Fp":
            if self.p is None or not isprime(int(self.p)):
                raise ScalarFormatError(f"prime field modulus must be prime, got {self.p}")
        else:
            raise ScalarFormatError(f"unknown field kind {self.kind!r}")

    @classmethod
    def rational(cls) -> "FieldSpec":
        return cls("Q")

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls("Fp", int(p))

    @classmethod
    def from_json(cls, value: Any) -> "FieldSpec":
        """Accept ``"Q"``, ``{"Fp": p}`` or a label such as ``"F5"``."""
        if isinstance(value, dict):
            if set(value) != {"Fp"}:
                raise ScalarFormatError(f"unsupported field descriptor {value!r}")
            return cls.prime(int(value["Fp"]))
        if isinstance(value, str):
            return cls.from_label(value)
        raise ScalarFormatError(f"unsupported field descriptor {value!r}")

    @classmethod
    def from_label(cls, label: str) -> "FieldSpec":
        text = label.strip()
        if text in {"Q", "QQ"}:
            return cls.rational()
        for prefix in ("Fp:", "GF", "F"):
            if text.startswith(prefix):
                digits = text[len(prefix):].strip("()")
                if digits.isdigit():
                    return cls.prime(int(digits))
        raise ScalarFormatError(f"unsupported field label {label!r}")

    def to_json(self) -> Union[str, dict]:
        return "Q" if self.kind == "Q" else {"Fp": self.p}

    @property
    def label(self) -> str:
        return "Q" if self.kind == "Q" else f"F{self.p}"

    @property
    def is_prime_field(self) -> bool:
        return self.kind == "Fp"

    @property
    def characteristic(self) -> int:
        return 0 if self.kind == "Q" else int(self.p)

    @property
    def domain(self):
        """The sympy domain (``QQ`` or ``GF(p)``) matrices are built over."""
        return QQ if self.kind == "Q" else _prime_domain(int(self.p))

    def scalar(self, value: Any) -> "ExactScalar":
        """Coerce an int, Fraction, literal, ExactScalar or domain element."""
        if isinstance(value, ExactScalar):
            if value.field != self:
                raise FieldMismatchError(f"{value} is not an element of {self.label}")
            return value
        if isinstance(value, bool):
            raise ScalarFormatError("booleans are not scalars")
        if isinstance(value, int):
            return ExactScalar(self, value, 1)
        if isinstance(value, Fraction):
            return ExactScalar(self, value.numerator, value.denominator)
        if isinstance(value, str):
            return ExactScalar.parse(value, self)
        # sympy domain element
        if self.kind == "Q":
            return ExactScalar(self, int(QQ.numer(value)), int(QQ.denom(value)))
        return ExactScalar(self, int(self.domain.to_int(value)), 1)

    def element(self, value: Any):
        """Domain element for ``value`` (see :meth:`scalar`)."""
        s = self.scalar(value)
        if self.kind == "Q":
            return QQ(s.numerator, s.denominator)
        return self.domain(s.numerator)


@dataclass(frozen=True)
class ExactScalar:
    """
    Element of the rationals or of a prime field.

    Rationals are kept in lowest terms with a positive denominator; prime
    field elements are stored as a residue in ``[0, p)`` with denominator 1.
    """

    field: FieldSpec
    numerator: int
    denominator: int = 1

    def __post_init__(self) -> None:
        num, den = int(self.numerator), int(self.denominator)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if self.field.kind == "Q":
            frac = Fraction(num, den)
            num, den = frac.numerator, frac.denominator
        else:
            p = int(self.field.p)
            if den % p == 0:
                raise ZeroDivisionError(f"denominator {den} vanishes mod {p}")
            num, den = (num * pow(den, -1, p)) % p, 1
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @classmethod
    def parse(cls, text: str, field: Optional[FieldSpec] = None) -> "ExactScalar":
        """
        Parse ``"a/b"``, ``"a"`` or ``"r mod p"``.

        A bare rational literal is reduced into ``field`` when one is given,
        so ``"7"`` over F_5 reads as ``2 mod 5``.
        """
        raw = str(text).strip()
        if " mod " in raw:
            residue, modulus = raw.split(" mod ", 1)
            spec = FieldSpec.prime(int(modulus))
            if field is not None and field != spec:
                raise FieldMismatchError(f"{raw!r} is not an element of {field.label}")
            try:
                return cls(spec, int(residue), 1)
            except ValueError as exc:
                raise ScalarFormatError(f"bad residue literal {raw!r}") from exc
        try:
            if "/" in raw:
                num, den = raw.split("/", 1)
                num_i, den_i = int(num), int(den)
            else:
                num_i, den_i = int(raw), 1
        except ValueError as exc:
            raise ScalarFormatError(f"bad scalar literal {raw!r}") from exc
        if den_i == 0:
            raise ScalarFormatError(f"zero denominator in {raw!r}")
        try:
            return cls(field or FieldSpec.rational(), num_i, den_i)
        except ZeroDivisionError as exc:
            raise ScalarFormatError(str(exc)) from exc

    def _coerce(self, other: Any) -> "ExactScalar":
        if isinstance(other, ExactScalar):
            if other.field != self.field:
                raise FieldMismatchError(
                    f"cannot combine {self.field.label} and {other.field.label} scalars"
                )
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.field.scalar(other)
        raise TypeError(f"unsupported operand {other!r}")

    def __add__(self, other: Any) -> "ExactScalar":
        o = self._coerce(other)
        return ExactScalar(
            self.field,
            self.numerator * o.denominator + o.numerator * self.denominator,
            self.denominator * o.denominator,
        )

    __radd__ = __add__

    def __neg__(self) -> "ExactScalar":
        return ExactScalar(self.field, -self.numerator, self.denominator)

    def __sub__(self, other: Any) -> "ExactScalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "ExactScalar":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "ExactScalar":
        o = self._coerce(other)
        return ExactScalar(
            self.field, self.numerator * o.numerator, self.denominator * o.denominator
        )

    __rmul__ = __mul__

    def inverse(self) -> "ExactScalar":
        if self.is_zero:
            raise ZeroDivisionError("zero has no inverse")
        return ExactScalar(self.field, self.denominator, self.numerator)

    def __truediv__(self, other: Any) -> "ExactScalar":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other: Any) -> "ExactScalar":
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "ExactScalar":
        if n < 0:
            return self.inverse() ** (-n)
        return ExactScalar(self.field, self.numerator**n, self.denominator**n)

    def __bool__(self) -> bool:
        return self.numerator != 0

    @property
    def is_zero(self) -> bool:
        return self.numerator == 0

    @property
    def is_one(self) -> bool:
        return self.numerator == 1 and self.denominator == 1

    @property
    def residue(self) -> int:
        if not self.field.is_prime_field:
            raise FieldMismatchError("rational scalars have no residue")
        return self.numerator

    def as_fraction(self) -> Fraction:
        if self.field.is_prime_field:
            raise FieldMismatchError("prime field scalars are not rationals")
        return Fraction(self.numerator, self.denominator)

    def to_json(self) -> Union[int, str]:
        """Document entry form: a JSON integer when possible, else ``"a/b"``."""
        if self.denominator == 1:
            return self.numerator
        return f"{self.numerator}/{self.denominator}"

    def __str__(self) -> str:
        if self.field.is_prime_field:
            return f"{self.numerator} mod {self.field.p}"
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"


__all__ = [
    "ExactScalar",
    "FieldMismatchError",
    "FieldSpec",
    "ScalarFormatError",
]
