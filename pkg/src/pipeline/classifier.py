"""
Step analysis of hom-spaces and construction of a reduced normed basis.

Works on a presentation already rebased to triangular coordinates, so that
matrix units ``e_ij`` (row ``i`` in the target, column ``j`` in the source)
are the candidate prime morphisms. Positions are ordered by
``(i, j) >= (l, r)`` iff ``i <= l`` and ``j >= r``; the steps of a space are
the maximal positions of its support.

Every hom-space ``M(a, b)`` is split as ``S(a, b)`` plus the projection ``W``
of the space onto its step coordinates. The shape of ``W`` decides the case:

* ``saturated``: ``W`` is everything, the space is ``S̄(a, b)``;
* ``two_step``: two steps and a one-dimensional ``W``;
* ``diag_one_double`` / ``diag_two_double``: steps ``(1,1), (2,2), (3,3)``
  with a two-dimensional ``W``.

Anything else is certified instead of processed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any, Dict, List, Mapping, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, Field
from sympy.polys.matrices import DomainMatrix

from src.algebra import linalg
from src.algebra.linalg import MatrixSpace, Position
from src.algebra.scalars import ExactScalar
from src.common.certificates import Certificate, Outcome, certificate, flag, ok
from src.pipeline.presentation import ObjectId, SpacedModulePresentation
from src.pipeline.triangular import TriangularBasis

logger = logging.getLogger(__name__)

PairName = Tuple[str, str]

DIAGONAL_STEPS = [(1, 1), (2, 2), (3, 3)]
TWO_STEP_SHIFT = [(1, 2), (2, 3)]


# ---------------------------------------------------------------------------
# order relation
# ---------------------------------------------------------------------------


def position_greater(s: Position, t: Position) -> bool:
    """Strict order: ``s > t`` iff ``s`` lies weakly up-right of ``t``."""
    return s != t and s[0] <= t[0] and s[1] >= t[1]


def _maximal(support: Set[Position]) -> List[Position]:
    return sorted(t for t in support if not any(position_greater(s, t) for s in support))


def steps_of_map(phi: DomainMatrix) -> List[Position]:
    return _maximal(linalg.support(phi))


def steps_of_space(space: MatrixSpace) -> List[Position]:
    """Steps of a span, read off the union of the supports of its basis."""
    return _maximal(space.support())


def lower_sets(steps: Sequence[Position], shape: Tuple[int, int]) -> Tuple[List[Position], List[Position]]:
    """
    Positions of ``S`` (strictly below a step) and ``S̄`` (at or below one).

    Both lists are sorted.
    """
    rows, cols = shape
    strict, closed = [], []
    for i in range(1, rows + 1):
        for j in range(1, cols + 1):
            if any(position_greater(s, (i, j)) for s in steps):
                strict.append((i, j))
                closed.append((i, j))
            elif (i, j) in steps:
                closed.append((i, j))
    return strict, closed


def _unit(shape: Tuple[int, int], pos: Position, domain) -> DomainMatrix:
    return linalg.unit(shape[0], shape[1], pos, domain)


def _label_positions(positions: Sequence[Position]) -> str:
    return "+".join(f"e{i}{j}" for i, j in positions)


# ---------------------------------------------------------------------------
# endomorphisms
# ---------------------------------------------------------------------------


class EndoType(str, Enum):
    """
    Form of the radical of ``M(a)`` in triangular coordinates.

    ``D3_CHAIN`` is the full strictly lower 3x3 space; a closed radical
    containing ``e21`` and ``e32`` also contains their product ``e31``.
    """

    D1 = "d1"
    D2 = "d2"
    D3_CHAIN = "d3_chain"
    D3_DOUBLE = "d3_double"


@dataclass(frozen=True)
class EndoClassification:
    object: str
    type: EndoType
    parameter: Optional[ExactScalar] = None

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"object": self.object, "type": self.type.value}
        if self.parameter is not None:
            data["lambda"] = str(self.parameter)
        return data


def classify_endo(p: SpacedModulePresentation, a: ObjectId) -> Outcome:
    """Match ``M(R(a, a))`` against the admissible endomorphism radicals."""
    d = p.dim(a)
    domain = p.domain
    space = p.rad_space(a, a)
    shape = (d, d)

    def mismatch() -> Outcome:
        cert = certificate(
            "endomorphism_form",
            [a.name],
            f"rad({a.name},{a.name}) of dimension {space.dim} matches no admissible form for d = {d}",
            dimension=d,
        )
        return flag("endomorphism_form", cert)

    if d == 1:
        return ok(EndoClassification(a.name, EndoType.D1)) if space.dim == 0 else mismatch()
    if d == 2:
        target = MatrixSpace(2, 2, domain, [_unit(shape, (2, 1), domain)])
        return ok(EndoClassification(a.name, EndoType.D2)) if space == target else mismatch()
    if d == 3:
        units = {pos: _unit(shape, pos, domain) for pos in [(2, 1), (3, 1), (3, 2)]}
        if space == MatrixSpace(3, 3, domain, units.values()):
            return ok(EndoClassification(a.name, EndoType.D3_CHAIN))
        if space.dim == 2 and space.contains(units[(3, 1)]):
            for m in space.basis:
                entries = {(i, j): x for i, j, x in linalg.nonzero_entries(m)}
                lam = entries.get((3, 2))
                if entries.get((2, 1)) == domain.one and lam is not None and set(entries) == {(2, 1), (3, 2)}:
                    return ok(EndoClassification(a.name, EndoType.D3_DOUBLE, p.field.scalar(lam)))
        return mismatch()
    return mismatch()


# ---------------------------------------------------------------------------
# hom-spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DoubleDirection:
    first: Position
    second: Position
    parameter: ExactScalar


@dataclass
class HomClassification:
    source: str
    target: str
    shape: Tuple[int, int]
    steps: List[Position]
    lower: List[Position]
    closed_lower: List[Position]
    case: str
    parameters: Dict[str, ExactScalar] = field(default_factory=dict)
    variant: Optional[str] = None
    primes: List[Position] = field(default_factory=list)
    doubles: List[DoubleDirection] = field(default_factory=list)
    certificates: List[Certificate] = field(default_factory=list)

    @property
    def classified(self) -> bool:
        return self.case != "unclassified"

    def to_json(self) -> Dict[str, Any]:
        return {
            "from": self.source,
            "to": self.target,
            "case": self.case,
            "variant": self.variant,
            "steps": [list(s) for s in self.steps],
            "parameters": {k: str(v) for k, v in self.parameters.items()},
            "primes": [_label_positions([s]) for s in self.primes],
            "doubles": [
                f"{_label_positions([d.first])}+({d.parameter}){_label_positions([d.second])}"
                for d in self.doubles
            ],
        }


def _double_directions(
    steps: Sequence[Position], constraints: Sequence[Sequence[Any]], domain
) -> List[Tuple[Position, Position, Any]]:
    """
    Pairs of steps ``P, Q`` with ``e_P`` outside the space and
    ``e_P + λ e_Q`` inside it, judged on the step projection ``W``.

    ``constraints`` spans the annihilator of ``W``.
    """
    zero = domain.zero
    found = []
    for ip, iq in combinations(range(len(steps)), 2):
        if all(c[ip] == zero for c in constraints):
            continue
        lam = None
        for c in constraints:
            if c[iq] != zero:
                lam = -c[ip] / c[iq]
                break
        if lam is None:
            continue
        if all(c[ip] + lam * c[iq] == zero for c in constraints):
            found.append((steps[ip], steps[iq], lam))
    return found


def classify_space(p: SpacedModulePresentation, a: ObjectId, b: ObjectId) -> HomClassification:
    """
    Case analysis of ``M(R(a, b))`` by its steps.

    Used for ``a == b`` as well, where it yields the prime and double
    structure of the endomorphism radical.
    """
    domain = p.domain
    space = p.rad_space(a, b)
    shape = (p.dim(b), p.dim(a))
    steps = steps_of_space(space)
    strict, closed = lower_sets(steps, shape)
    units = {pos: _unit(shape, pos, domain) for pos in closed}
    missing = [s for s in strict if not space.contains(units[s])]
    padded = space + MatrixSpace(shape[0], shape[1], domain, [units[s] for s in strict])
    projection = padded.project(steps)
    t, r = len(steps), len(projection)
    if r:
        constraints = linalg.nullspace(linalg.matrix(projection, r, t, domain))
    else:
        constraints = linalg.identity(t, domain).to_list() if t else []

    result = HomClassification(a.name, b.name, shape, steps, strict, closed, case="unclassified")
    result.primes = [s for s in closed if space.contains(units[s])]
    for first, second, lam in _double_directions(steps, constraints, domain):
        candidate = units[first] + linalg.scale(units[second], lam)
        if padded.contains(candidate):
            result.doubles.append(DoubleDirection(first, second, p.field.scalar(lam)))

    if missing and a != b:
        result.certificates.append(
            certificate(
                "lower_set_containment",
                [a.name, b.name] + [_label_positions([s]) for s in missing],
                f"S({a.name},{b.name}) is not contained in M({a.name},{b.name})",
                missing=[list(s) for s in missing],
            )
        )
        return result

    if t == 0 or r == t:
        result.case = "saturated"
    elif t == 2 and r == 1 and result.doubles:
        result.case = "two_step"
        result.parameters["lambda"] = result.doubles[0].parameter
    elif t == 3 and steps == DIAGONAL_STEPS and r == 2:
        c = constraints[0]
        nonzero = [k for k in range(3) if c[k] != domain.zero]
        if len(nonzero) == 2:
            x, y = nonzero
            result.case = "diag_one_double"
            result.variant = f"{x + 1}{y + 1}"
            result.parameters["lambda"] = p.field.scalar(-c[x] / c[y])
        else:
            result.case = "diag_two_double"
            result.parameters["lambda"] = p.field.scalar(-c[0] / c[1])
            result.parameters["mu"] = p.field.scalar(-c[0] / c[2])
    elif t == 3 and steps == DIAGONAL_STEPS and r == 1:
        result.certificates.append(
            certificate(
                "single_direction_diagonal",
                [a.name, b.name],
                f"M({a.name},{b.name}) has the diagonal steps but only one direction above S",
                family="diagonal_pencil",
                objects=[a.name, b.name],
            )
        )
    else:
        result.certificates.append(
            certificate(
                "hom_form",
                [a.name, b.name],
                f"M({a.name},{b.name}) with steps {steps} matches no admissible form",
                steps=[list(s) for s in steps],
            )
        )
    return result


def classify_hom(p: SpacedModulePresentation, a: ObjectId, b: ObjectId) -> HomClassification:
    """
    Classify ``M(a, b)`` for ``a != b`` and check the two-step constraints.

    When ``M(a, b)`` has the steps ``(1,2), (2,3)`` between two triples, the
    reverse space must be ``k e_31`` and ``rad(a, a)`` must be the full
    strictly lower triangular space.
    """
    result = classify_space(p, a, b)
    if a == b:
        return result
    domain = p.domain
    if p.dim(a) == 3 and p.dim(b) == 3 and result.steps == TWO_STEP_SHIFT:
        back = p.rad_space(b, a)
        e31 = MatrixSpace(3, 3, domain, [_unit((3, 3), (3, 1), domain)])
        if back.dim == 0:
            result.certificates.append(
                certificate(
                    "two_step_back_map",
                    [a.name, b.name],
                    f"M({b.name},{a.name}) = 0 although M({a.name},{b.name}) has steps (1,2), (2,3)",
                    family="two_step_pair",
                    objects=[a.name, b.name],
                )
            )
        elif back != e31:
            result.certificates.append(
                certificate(
                    "two_step_back_map",
                    [a.name, b.name],
                    f"M({b.name},{a.name}) is not k e31",
                    dimension=back.dim,
                )
            )
        full = MatrixSpace(3, 3, domain, [_unit((3, 3), s, domain) for s in [(2, 1), (3, 1), (3, 2)]])
        if p.rad_space(a, a) != full:
            result.certificates.append(
                certificate(
                    "full_endomorphism_radical",
                    [a.name, b.name],
                    f"rad({a.name},{a.name}) must be strictly lower triangular in full",
                )
            )
    return result


# ---------------------------------------------------------------------------
# basis morphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BasisMorphism:
    source: str
    target: str
    matrix: DomainMatrix
    kind: str
    positions: Tuple[Position, ...]
    parameter: Optional[ExactScalar] = None
    short: bool = True

    @property
    def label(self) -> str:
        return f"{self.source}->{self.target}:{_label_positions(self.positions)}"

    @property
    def rank(self) -> int:
        return linalg.rank(self.matrix)

    def products(self) -> List[Tuple[int, int, Any]]:
        """Nonzero ``(row, col, coefficient)`` entries: ``f m_col = c m_row``."""
        return sorted(linalg.nonzero_entries(self.matrix), key=lambda e: (e[1], e[0]))

    def to_json(self, field_spec) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "label": self.label,
            "from": self.source,
            "to": self.target,
            "kind": self.kind,
            "positions": [list(s) for s in self.positions],
            "short": self.short,
        }
        if self.parameter is not None:
            data["parameter"] = str(field_spec.scalar(self.parameter))
        return data


class CompositeSpans:
    """Lazily computed ``span{N K : K in rad(a, c), N in rad(c, b)}``."""

    def __init__(self, p: SpacedModulePresentation) -> None:
        self.p = p
        self._cache: Dict[PairName, MatrixSpace] = {}

    def get(self, a: str, b: str) -> MatrixSpace:
        key = (a, b)
        if key not in self._cache:
            p = self.p
            products = []
            for c in p.objects:
                for k in p.rad_matrices(a, c):
                    for n in p.rad_matrices(c, b):
                        products.append(n * k)
            self._cache[key] = MatrixSpace(p.dim(b), p.dim(a), p.domain, products)
        return self._cache[key]


def is_short(matrix: DomainMatrix, a: str, b: str, composites: CompositeSpans) -> bool:
    return not composites.get(a, b).contains(matrix)


def make_basis_morphism(
    p: SpacedModulePresentation,
    a: str,
    b: str,
    matrix: DomainMatrix,
    composites: Optional[CompositeSpans] = None,
) -> BasisMorphism:
    """Wrap an arbitrary matrix, inferring its kind from the support."""
    entries = sorted(linalg.nonzero_entries(matrix), key=lambda e: (e[1], e[0]))
    positions = tuple((i, j) for i, j, _ in entries)
    kind, parameter = "other", None
    if len(entries) == 1:
        kind = "prime"
    elif len(entries) == 2:
        (i1, j1, _), (i2, j2, c2) = entries
        if i1 < i2 and j1 < j2:
            kind, parameter = "double", p.field.scalar(c2)
    short = is_short(matrix, a, b, composites or CompositeSpans(p))
    return BasisMorphism(a, b, matrix, kind, positions, parameter, short)


def enumerate_basis_morphisms(
    p: SpacedModulePresentation,
    hc: HomClassification,
    composites: CompositeSpans,
) -> Tuple[List[BasisMorphism], List[BasisMorphism]]:
    """
    Primes and double directions of one classified pair.

    Doubles come normed: the coefficient at the smaller column is 1.
    """
    shape = hc.shape
    domain = p.domain
    primes = []
    for pos in hc.primes:
        m = _unit(shape, pos, domain)
        primes.append(BasisMorphism(hc.source, hc.target, m, "prime", (pos,), None, is_short(m, hc.source, hc.target, composites)))
    doubles = []
    for d in hc.doubles:
        m = _unit(shape, d.first, domain) + linalg.scale(_unit(shape, d.second, domain), p.field.element(d.parameter))
        doubles.append(
            BasisMorphism(
                hc.source,
                hc.target,
                m,
                "double",
                (d.first, d.second),
                d.parameter,
                is_short(m, hc.source, hc.target, composites),
            )
        )
    return primes, doubles


# ---------------------------------------------------------------------------
# basis conditions
# ---------------------------------------------------------------------------


class ConditionResult(BaseModel):
    passed: bool
    witness: Optional[Dict[str, Any]] = None


class ConditionReport(BaseModel):
    """One entry per basis condition plus the accepted verdict."""

    a: ConditionResult
    b: ConditionResult
    c: ConditionResult
    d: ConditionResult
    e: ConditionResult
    long_doubles_in_basis: bool = True
    char2_exemption: bool = False
    thinness_divergence: List[str] = Field(default_factory=list)
    normed: bool = False
    reduced: bool = False
    accepted: bool = False


@dataclass
class ClassifiedBasis:
    presentation: SpacedModulePresentation
    bases: Dict[str, TriangularBasis]
    morphisms: List[BasisMorphism]
    endo: Dict[str, EndoClassification] = field(default_factory=dict)
    classifications: Dict[PairName, HomClassification] = field(default_factory=dict)
    excluded: List[BasisMorphism] = field(default_factory=list)
    double_counts: Dict[PairName, int] = field(default_factory=dict)
    certificates: List[Certificate] = field(default_factory=list)
    long_double_factors: Dict[str, Tuple[str, str]] = field(default_factory=dict)
    unfactored_long_doubles: List[str] = field(default_factory=list)
    conditions: Optional[ConditionReport] = None
    normed: bool = False
    reduced: bool = False

    @property
    def field_spec(self):
        return self.presentation.field

    @property
    def rank(self) -> int:
        return max((m.rank for m in self.morphisms), default=0)

    def between(self, a: str, b: str) -> List[BasisMorphism]:
        return [m for m in self.morphisms if m.source == a and m.target == b]

    def by_label(self, label: str) -> BasisMorphism:
        for m in self.morphisms:
            if m.label == label:
                return m
        raise KeyError(label)


def _perturbations(units: Sequence[DomainMatrix]) -> List[DomainMatrix]:
    singles = list(units)
    return singles + [x + y for x, y in combinations(singles, 2)]


def _is_multiple(m: DomainMatrix, of: DomainMatrix) -> bool:
    return linalg.rank(DomainMatrix([linalg.vectorize(m), linalg.vectorize(of)], (2, of.shape[0] * of.shape[1]), of.domain)) <= 1


def _check_thinness(b: ClassifiedBasis) -> ConditionResult:
    p = b.presentation
    domain = p.domain
    for f in b.morphisms:
        hc = b.classifications.get((f.source, f.target))
        if hc is None:
            hc = classify_space(p, p.obj(f.source), p.obj(f.target))
        units = [_unit(hc.shape, s, domain) for s in hc.lower]
        base = f.rank
        for s in _perturbations(units):
            if _is_multiple(s, f.matrix):
                continue
            if linalg.rank(f.matrix + s) < base:
                return ConditionResult(
                    passed=False,
                    witness={"morphism": f.label, "perturbation": [list(x) for x in sorted(linalg.support(s))]},
                )
    return ConditionResult(passed=True)


def _check_columns(b: ClassifiedBasis) -> ConditionResult:
    for f in b.morphisms:
        cols: Dict[int, int] = {}
        for _, j, _ in f.products():
            cols[j] = cols.get(j, 0) + 1
        bad = [j for j, n in cols.items() if n > 1]
        if bad:
            return ConditionResult(passed=False, witness={"morphism": f.label, "vector": bad[0]})
    return ConditionResult(passed=True)


def _check_rows(b: ClassifiedBasis) -> ConditionResult:
    for f in b.morphisms:
        rows: Dict[int, int] = {}
        for i, _, _ in f.products():
            rows[i] = rows.get(i, 0) + 1
        bad = [i for i, n in rows.items() if n > 1]
        if bad:
            return ConditionResult(passed=False, witness={"morphism": f.label, "target_vector": bad[0]})
    return ConditionResult(passed=True)


def _check_normed(b: ClassifiedBasis) -> ConditionResult:
    domain = b.presentation.domain
    for f in b.morphisms:
        prods = f.products()
        for i, j, coef in prods:
            if coef in (domain.zero, domain.one):
                continue
            if not any(j2 < j for _, j2, _ in prods):
                return ConditionResult(
                    passed=False,
                    witness={"morphism": f.label, "position": [i, j], "coefficient": str(b.field_spec.scalar(coef))},
                )
    return ConditionResult(passed=True)


def _products_up_to(b: ClassifiedBasis, max_length: int) -> List[Tuple[str, str, DomainMatrix, List[str]]]:
    """Distinct nonzero products of 2..max_length composable basis morphisms."""
    level = [(f.source, f.target, f.matrix, [f.label]) for f in b.morphisms]
    seen: Set[Tuple[str, str, Tuple[Any, ...]]] = set()
    found = []
    for _ in range(2, max_length + 1):
        nxt = []
        for src, tgt, m, chain in level:
            for g in b.morphisms:
                if g.source != tgt:
                    continue
                prod = g.matrix * m
                if linalg.is_zero(prod):
                    continue
                key = (src, g.target, tuple(linalg.vectorize(prod)))
                if key in seen:
                    continue
                seen.add(key)
                item = (src, g.target, prod, chain + [g.label])
                nxt.append(item)
                found.append(item)
        level = nxt
        if not level:
            break
    return found


def _is_char2_pattern(m: DomainMatrix, characteristic: int) -> bool:
    if characteristic != 2:
        return False
    supp = linalg.support(m)
    return len(supp) == 2 and all(i == j for i, j in supp)


def _check_rank_additivity(b: ClassifiedBasis, max_length: int) -> Tuple[ConditionResult, bool]:
    p = b.presentation
    domain = p.domain
    failures = []
    for src, tgt, prod, chain in _products_up_to(b, max_length):
        pair = b.between(src, tgt)
        basis_vecs = [linalg.vectorize(f.matrix) for f in pair]
        coords = linalg.coordinates(linalg.vectorize(prod), basis_vecs, domain)
        if coords is None:
            failures.append((prod, {"product": chain, "reason": "outside the span of the basis"}))
            continue
        expected = sum(f.rank for f, c in zip(pair, coords) if c != domain.zero)
        actual = linalg.rank(prod)
        if actual != expected:
            failures.append(
                (
                    prod,
                    {
                        "product": chain,
                        "rank": actual,
                        "rank_sum": expected,
                        "support": [list(s) for s in sorted(linalg.support(prod))],
                    },
                )
            )
    if not failures:
        return ConditionResult(passed=True), False
    exempt = all(_is_char2_pattern(m, p.field.characteristic) for m, _ in failures)
    return ConditionResult(passed=False, witness=failures[0][1]), exempt


def _long_doubles_in_basis(b: ClassifiedBasis, composites: CompositeSpans) -> bool:
    p = b.presentation
    domain = p.domain
    for a, c in p.pairs():
        hc = b.classifications.get((a.name, c.name)) or classify_space(p, a, c)
        _, doubles = enumerate_basis_morphisms(p, hc, composites)
        members = b.between(a.name, c.name)
        for d in doubles:
            if d.short:
                continue
            if not any(_is_multiple(d.matrix, f.matrix) and not linalg.is_zero(f.matrix) for f in members):
                return False
    return True


def check_basis_conditions(b: ClassifiedBasis, max_product_length: int = 4) -> ConditionReport:
    """
    Evaluate conditions a) to e) on a basis.

    a) thinness against ``S`` perturbations and their pairwise sums;
    b) every product ``f m_i`` is a multiple of one basis vector;
    c) distinct vectors go to distinct basis vectors;
    d) coefficients outside ``{0, 1}`` only after a product at a smaller column;
    e) rank additivity on products of basis morphisms.

    A failure of e) made only of ``e_ii + e_jj`` products is tolerated in
    characteristic 2.
    """
    composites = CompositeSpans(b.presentation)
    a = _check_thinness(b)
    cb = _check_columns(b)
    cc = _check_rows(b)
    cd = _check_normed(b)
    ce, exempt = _check_rank_additivity(b, max_product_length)
    divergence = [f"{k[0]}->{k[1]}" for k, hc in sorted(b.classifications.items()) if not hc.classified]
    accepted = a.passed and cb.passed and cc.passed and cd.passed and (ce.passed or exempt)
    return ConditionReport(
        a=a,
        b=cb,
        c=cc,
        d=cd,
        e=ce,
        long_doubles_in_basis=_long_doubles_in_basis(b, composites),
        char2_exemption=exempt and not ce.passed,
        thinness_divergence=divergence,
        normed=cd.passed,
        reduced=ce.passed,
        accepted=accepted,
    )


# ---------------------------------------------------------------------------
# long doubles
# ---------------------------------------------------------------------------


def factor_long_double(b: ClassifiedBasis, f: BasisMorphism) -> Optional[Tuple[BasisMorphism, BasisMorphism]]:
    """Composable basis doubles ``g: a -> c``, ``h: c -> b`` with ``M(h) M(g) = M(f)``."""
    for g in b.morphisms:
        if g.kind != "double" or g.source != f.source:
            continue
        for h in b.morphisms:
            if h.kind != "double" or h.source != g.target or h.target != f.target:
                continue
            if h.matrix * g.matrix == f.matrix:
                return g, h
    return None


# ---------------------------------------------------------------------------
# the reduced basis
# ---------------------------------------------------------------------------


def basis_from_matrices(
    p: SpacedModulePresentation,
    matrices: Mapping[PairName, Sequence[DomainMatrix]],
    bases: Optional[Dict[str, TriangularBasis]] = None,
) -> ClassifiedBasis:
    """Wrap a hand-chosen basis so the condition checks can run on it."""
    composites = CompositeSpans(p)
    morphisms = [
        make_basis_morphism(p, a, b, m, composites)
        for (a, b), mats in sorted(matrices.items())
        for m in mats
    ]
    classifications = {(a.name, c.name): classify_space(p, a, c) for a, c in p.pairs()}
    return ClassifiedBasis(p, dict(bases or {}), morphisms, classifications=classifications)


def build_reduced_basis(
    p: SpacedModulePresentation,
    bases: Optional[Dict[str, TriangularBasis]] = None,
    max_product_length: int = 4,
    logger_: Optional[logging.Logger] = None,
) -> ClassifiedBasis:
    """
    Classify every pair and assemble the reduced normed basis.

    All primes and doubles are kept except, for pairs with three doubles,
    the short double with the lexicographically smallest positions. The
    condition report is attached before returning.
    """
    log = logger_ or logger
    composites = CompositeSpans(p)
    basis = ClassifiedBasis(p, dict(bases or {}), [])

    for a in p.objects:
        outcome = classify_endo(p, a)
        if outcome.flagged:
            basis.certificates.append(outcome.certificate)
        else:
            basis.endo[a.name] = outcome.value
        log.debug("endomorphisms of %s: %s", a.name, outcome.value.type.value if outcome.value else outcome.flag_reason)

    for a, c in p.pairs():
        hc = classify_hom(p, a, c)
        basis.classifications[(a.name, c.name)] = hc
        basis.certificates.extend(hc.certificates)
        primes, doubles = enumerate_basis_morphisms(p, hc, composites)
        count = len(doubles)
        basis.double_counts[(a.name, c.name)] = count
        kept = list(doubles)
        if count not in (0, 1, 3):
            basis.certificates.append(
                certificate(
                    "double_count",
                    [a.name, c.name],
                    f"M({a.name},{c.name}) has {count} double directions",
                    count=count,
                )
            )
        elif count == 3:
            shorts = sorted((d for d in doubles if d.short), key=lambda d: d.positions)
            if not shorts:
                basis.certificates.append(
                    certificate(
                        "short_double_exists",
                        [a.name, c.name],
                        f"all three doubles of M({a.name},{c.name}) are long",
                    )
                )
            else:
                dropped = shorts[0]
                basis.excluded.append(dropped)
                kept = [d for d in doubles if d is not dropped]
        basis.morphisms.extend(primes + kept)
        if hc.case != "unclassified" or hc.certificates:
            log.debug("pair %s->%s: %s, %d double(s)", a.name, c.name, hc.case, count)

    for f in basis.morphisms:
        if f.kind == "double" and not f.short:
            factors = factor_long_double(basis, f)
            if factors is None:
                basis.unfactored_long_doubles.append(f.label)
            else:
                basis.long_double_factors[f.label] = (factors[0].label, factors[1].label)

    report = check_basis_conditions(basis, max_product_length)
    basis.conditions = report
    basis.normed = report.normed
    basis.reduced = report.reduced
    for cert in basis.certificates:
        log.warning("%s: %s", cert.check, cert.message)
    return basis


__all__ = [
    "BasisMorphism",
    "ClassifiedBasis",
    "CompositeSpans",
    "ConditionReport",
    "ConditionResult",
    "DoubleDirection",
    "EndoClassification",
    "EndoType",
    "HomClassification",
    "basis_from_matrices",
    "build_reduced_basis",
    "check_basis_conditions",
    "classify_endo",
    "classify_hom",
    "classify_space",
    "enumerate_basis_morphisms",
    "factor_long_double",
    "is_short",
    "lower_sets",
    "make_basis_morphism",
    "position_greater",
    "steps_of_map",
    "steps_of_space",
]
