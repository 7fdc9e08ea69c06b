"""
Rescaling of a reduced normed basis to a multiplicative one.

Every connected arrow pair ``(a_p1 -> b_q1, a_p2 -> b_q2)`` of a double
``f`` with ``f m_p1 = m_q1`` and ``f m_p2 = λ m_q2`` asks for scalars with

    λ x_p1 x_p2^{-1} = x_q1 x_q2^{-1}

Written additively in the exponents this is an integer system ``A y = log λ``
which is solved through the Smith normal form ``S A T = D``. Rows of ``S``
meeting a zero row of ``D`` span the left kernel of ``A``; each kernel vector
is a weight function on the arrow graph and obstructs the rescaling unless
``∏ λ_j^{z_j} = 1``.

Values live in one of three groups:

* ``numeric``: rationals as ``RadMonomial`` (roots stay formal);
* ``symbolic``: every parameter is a free symbol ``λ_j``;
* ``prime``: residues in F_p, exponents resolved by discrete logarithms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMError
from sympy.polys.matrices.normalforms import hermite_normal_form, smith_normal_decomp

from src.algebra.monomials import PrimeFieldLogs, RadMonomial, UnsolvableRoot, monomial_product
from src.algebra.scalars import ExactScalar, FieldSpec
from src.common.certificates import Certificate, certificate
from src.pipeline.poset_graph import ArrowGraph, PosetElement

logger = logging.getLogger(__name__)

MODES = ("numeric", "symbolic", "prime")

Value = Union[RadMonomial, ExactScalar]


class RescalingError(ArithmeticError):
    """Raised when a computed solution fails substitution."""


@dataclass(frozen=True)
class PairRow:
    pair_id: int
    morphism: str
    p1: int
    p2: int
    q1: int
    q2: int
    parameter: Optional[ExactScalar] = None


@dataclass
class ExponentSystem:
    """
    Exponent form of the rescaling equations.

    Attributes
    ----------
    vertices : list of PosetElement
        Column order of ``matrix``.
    rows : list of PairRow
        One row per connected arrow pair, in pair-id order.
    matrix : list of list of int
        ``rows x vertices`` integer matrix.
    values : list
        Right-hand sides ``λ_j`` in the group of ``mode``.
    parameters : dict
        Group value of every double basis morphism, keyed by label; long
        doubles carry the product of their factors.
    """

    vertices: List[PosetElement]
    rows: List[PairRow]
    matrix: List[List[int]]
    field: FieldSpec
    mode: str
    values: List[Value]
    parameters: Dict[str, Value] = field(default_factory=dict)
    notices: List[str] = field(default_factory=list)

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), len(self.vertices)

    def one(self) -> Value:
        return self.field.scalar(1) if self.mode == "prime" else RadMonomial.one()

    def arrow_keys(self, row: PairRow) -> Tuple[str, str]:
        v = self.vertices
        return (
            f"{v[row.p1]}->{v[row.q1]}#{row.pair_id}",
            f"{v[row.p2]}->{v[row.q2]}#{row.pair_id}",
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "vertices": [str(v) for v in self.vertices],
            "matrix": self.matrix,
            "rhs": [str(x) for x in self.values],
            "notices": list(self.notices),
        }


class WeightFunction(BaseModel):
    """Integer labelling of arrows, antisymmetric on connected pairs."""

    z: Dict[str, int] = Field(default_factory=dict)
    kernel: List[int] = Field(default_factory=list)
    residual: str = "+1"


@dataclass
class RescalingSolution:
    x: Dict[PosetElement, Value]
    mode: str

    def to_json(self) -> Dict[str, Any]:
        return {"mode": self.mode, "x": {str(v): str(val) for v, val in self.x.items()}}


def _group_value(spec: FieldSpec, mode: str, coef: Any) -> Value:
    s = spec.scalar(coef)
    return s if mode == "prime" else RadMonomial.from_rational(s)


def exponent_system(b, g: ArrowGraph, mode: Optional[str] = None, logger_: Optional[logging.Logger] = None) -> ExponentSystem:
    """
    One row per connected pair of ``g``, right-hand side from the double's parameter.

    Over F_p the mode is always ``prime``. Over the rationals ``numeric``
    falls back to ``symbolic`` with a notice when a parameter is not positive.
    """
    log = logger_ or logger
    spec = b.presentation.field
    notices: List[str] = []
    requested = mode or ("prime" if spec.is_prime_field else "numeric")
    if requested not in MODES:
        raise ValueError(f"unknown mode {requested!r}")
    if spec.is_prime_field:
        if requested != "prime":
            notices.append(f"mode {requested} is not available over {spec.label}; using prime")
        mode = "prime"
    elif requested == "prime":
        raise ValueError("prime mode needs a prime field")
    else:
        mode = requested

    vertices = list(g.vertices)
    index = {v: k for k, v in enumerate(vertices)}
    rows: List[PairRow] = []
    matrix: List[List[int]] = []
    for pr in g.pairs:
        row = PairRow(
            pr.pair_id,
            pr.morphism,
            index[pr.first.source],
            index[pr.second.source],
            index[pr.first.target],
            index[pr.second.target],
            pr.parameter,
        )
        coeffs = [0] * len(vertices)
        coeffs[row.p1] -= 1
        coeffs[row.p2] += 1
        coeffs[row.q1] += 1
        coeffs[row.q2] -= 1
        rows.append(row)
        matrix.append(coeffs)

    if mode == "numeric":
        bad = [r.pair_id for r in rows if r.parameter is None or r.parameter.as_fraction() <= 0]
        bad += [f.label for f in b.morphisms if f.kind == "double" and f.parameter is not None and f.parameter.as_fraction() <= 0]
        if bad:
            notices.append(f"non-positive parameters {bad}; switching to symbolic mode")
            mode = "symbolic"

    parameters: Dict[str, Value] = {}
    values: List[Value] = []
    for row in rows:
        if mode == "symbolic":
            value = RadMonomial.symbol(f"λ_{row.pair_id}")
        else:
            value = _group_value(spec, mode, row.parameter)
        parameters[row.morphism] = value
        values.append(value)
    extra = 0
    for f in b.morphisms:
        if f.kind != "double" or f.label in parameters:
            continue
        factors = b.long_double_factors.get(f.label)
        if mode == "symbolic":
            if factors and all(name in parameters for name in factors):
                parameters[f.label] = parameters[factors[0]] * parameters[factors[1]]
            else:
                extra += 1
                parameters[f.label] = RadMonomial.symbol(f"μ_{extra}")
        else:
            parameters[f.label] = _group_value(spec, mode, f.parameter)

    system = ExponentSystem(vertices, rows, matrix, spec, mode, values, parameters, notices)
    for note in notices:
        log.info(note)
    log.debug("exponent system %dx%d in %s mode", len(rows), len(vertices), mode)
    return system


# ---------------------------------------------------------------------------
# left kernel / weight functions
# ---------------------------------------------------------------------------


def _zz(matrix: Sequence[Sequence[int]], shape: Tuple[int, int]) -> DomainMatrix:
    return DomainMatrix([[ZZ(int(x)) for x in row] for row in matrix], shape, ZZ)


def _smith(sys: ExponentSystem) -> Tuple[List[List[int]], List[List[int]], List[List[int]]]:
    s, r = sys.shape
    d, left, right = smith_normal_decomp(_zz(sys.matrix, (s, r)))
    as_ints = lambda m: [[int(x) for x in row] for row in m.to_list()]
    return as_ints(d), as_ints(left), as_ints(right)


def _annihilates(z: Sequence[int], matrix: Sequence[Sequence[int]], n_cols: int) -> bool:
    return all(sum(z[j] * matrix[j][v] for j in range(len(z))) == 0 for v in range(n_cols))


def _canonical_kernel(kernel: List[List[int]], sys: ExponentSystem) -> List[List[int]]:
    s, r = sys.shape
    if not kernel:
        return []
    try:
        h = hermite_normal_form(_zz(kernel, (len(kernel), s)).transpose()).to_list()
        columns = [[int(h[i][k]) for i in range(s)] for k in range(len(h[0]) if h else 0)]
        candidate = [c for c in columns if any(c)]
    except DMError:
        candidate = []
    if len(candidate) != len(kernel) or not all(_annihilates(c, sys.matrix, r) for c in candidate):
        candidate = kernel
    normed = []
    for z in candidate:
        lead = next(x for x in z if x)
        normed.append([-x for x in z] if lead < 0 else list(z))
    return normed


def left_kernel(sys: ExponentSystem) -> List[List[int]]:
    """Integer basis of ``{z : z A = 0}``, canonicalised by Hermite normal form."""
    s, r = sys.shape
    if s == 0:
        return []
    if r == 0:
        return [[int(i == j) for j in range(s)] for i in range(s)]
    d, left, _ = _smith(sys)
    raw = [left[i] for i in range(s) if not any(d[i])]
    return _canonical_kernel(raw, sys)


def _residual(sys: ExponentSystem, z: Sequence[int]) -> Value:
    return _product(sys, [v ** k for v, k in zip(sys.values, z)])


def _product(sys: ExponentSystem, items: Sequence[Value]) -> Value:
    if sys.mode == "prime":
        result = sys.one()
        for item in items:
            result = result * item
        return result
    return monomial_product(items)


def to_weight_function(sys: ExponentSystem, z: Sequence[int]) -> WeightFunction:
    weights: Dict[str, int] = {}
    for row, k in zip(sys.rows, z):
        first, second = sys.arrow_keys(row)
        weights[first] = int(k)
        weights[second] = -int(k)
    return WeightFunction(z=weights, kernel=[int(k) for k in z], residual=str(_residual(sys, z)))


def check_weight_axioms(w: WeightFunction, sys: ExponentSystem) -> bool:
    """Antisymmetry on connected pairs and flow conservation at every vertex."""
    flow = {v: 0 for v in sys.vertices}
    for row in sys.rows:
        first, second = sys.arrow_keys(row)
        z1, z2 = w.z.get(first, 0), w.z.get(second, 0)
        if z1 != -z2:
            return False
        v = sys.vertices
        flow[v[row.q1]] += z1
        flow[v[row.p1]] -= z1
        flow[v[row.q2]] += z2
        flow[v[row.p2]] -= z2
    return all(x == 0 for x in flow.values())


def weight_kernel(sys: ExponentSystem) -> Tuple[List[WeightFunction], List[Certificate]]:
    """
    Weight functions spanning the left kernel and the obstructions among them.

    A kernel vector whose residual ``∏ λ_j^{z_j}`` is not the identity gives
    a ``weight_obstruction`` certificate.
    """
    functions: List[WeightFunction] = []
    certs: List[Certificate] = []
    for z in left_kernel(sys):
        w = to_weight_function(sys, z)
        if not check_weight_axioms(w, sys):
            raise RescalingError(f"kernel vector {z} is not a weight function")
        functions.append(w)
        if not _residual(sys, z).is_one:
            arrows = sorted(k for k, v in w.z.items() if v)
            certs.append(
                certificate(
                    "weight_obstruction",
                    arrows,
                    f"nonzero weight function with residual {w.residual}",
                    z=w.z,
                    kernel=w.kernel,
                    residual=w.residual,
                )
            )
    return functions, certs


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


def _verify(sys: ExponentSystem, x: Sequence[Value]) -> None:
    for row, lam in zip(sys.rows, sys.values):
        lhs = lam * x[row.p1] / x[row.p2]
        rhs = x[row.q1] / x[row.q2]
        if lhs != rhs:
            raise RescalingError(f"pair {row.pair_id}: {lhs} != {rhs}")


def solve_rescaling(sys: ExponentSystem) -> Union[RescalingSolution, Certificate]:
    """
    Solve the system or return the first obstruction.

    Raises
    ------
    UnsolvableRoot
        In prime mode, when a required root does not exist in F_p.
    """
    _, obstructions = weight_kernel(sys)
    if obstructions:
        return obstructions[0]
    s, r = sys.shape
    one = sys.one()
    if s == 0:
        return RescalingSolution({v: one for v in sys.vertices}, sys.mode)
    d, left, right = _smith(sys)

    if sys.mode == "prime":
        logs = PrimeFieldLogs(sys.field.p)
        n = logs.order
        b = [logs.log(v) for v in sys.values]
        w = [0] * r
        for i in range(min(s, r)):
            if d[i][i]:
                target = sum(left[i][j] * b[j] for j in range(s)) % n if n else 0
                w[i] = logs.solve_linear(d[i][i], target)
        x = [logs.exp(sum(right[v][i] * w[i] for i in range(r))) for v in range(r)]
    else:
        w_m: List[Value] = [one] * r
        for i in range(min(s, r)):
            if d[i][i]:
                sb = monomial_product([sys.values[j] ** left[i][j] for j in range(s) if left[i][j]])
                w_m[i] = sb ** Fraction(1, d[i][i])
        x = [monomial_product([w_m[i] ** right[v][i] for i in range(r) if right[v][i]]) for v in range(r)]

    _verify(sys, x)
    return RescalingSolution(dict(zip(sys.vertices, x)), sys.mode)


# ---------------------------------------------------------------------------
# applying
# ---------------------------------------------------------------------------


@dataclass
class RescaledMorphism:
    label: str
    source: str
    target: str
    kind: str
    positions: Tuple[Tuple[int, int], ...]
    rank: int
    scale: Value
    entries: List[Tuple[int, int, Value]]

    def to_json(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "from": self.source,
            "to": self.target,
            "kind": self.kind,
            "positions": [list(p) for p in self.positions],
            "scale": str(self.scale),
            "coefficients": [str(v) for _, _, v in self.entries],
            "entries": [[i, j, str(v)] for i, j, v in self.entries],
        }


@dataclass
class RescaledBasis:
    """Basis vectors ``m'_v = s_v m_v`` and morphisms with their new coefficients."""

    mode: str
    vectors: Dict[PosetElement, Value]
    morphisms: List[RescaledMorphism]

    @property
    def rank(self) -> int:
        return max((m.rank for m in self.morphisms), default=0)

    @classmethod
    def identity(cls, b, mode: Optional[str] = None) -> "RescaledBasis":
        spec = b.presentation.field
        mode = mode or ("prime" if spec.is_prime_field else "numeric")
        one = spec.scalar(1) if mode == "prime" else RadMonomial.one()
        p = b.presentation
        vectors = {PosetElement(o.name, i): one for o, dim in zip(p.objects, p.dims) for i in range(1, dim + 1)}
        morphisms = [
            RescaledMorphism(
                f.label,
                f.source,
                f.target,
                f.kind,
                f.positions,
                f.rank,
                one,
                [(i, j, _group_value(spec, mode, c)) for i, j, c in f.products()],
            )
            for f in b.morphisms
        ]
        return cls(mode, vectors, morphisms)

    def to_json(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "rank": self.rank,
            "vectors": {str(v): str(s) for v, s in self.vectors.items()},
            "morphisms": [m.to_json() for m in self.morphisms],
        }


def apply_rescaling(b, solution: RescalingSolution, sys: ExponentSystem) -> RescaledBasis:
    """
    Substitute ``m_v = x_v m'_v`` and rescale every morphism by ``x_col1 x_row1^{-1}``.

    The first product of every morphism becomes exactly ``m'``; for doubles
    the second coefficient becomes the new parameter, which is 1 when the
    solution is valid.
    """
    spec = b.presentation.field
    x = solution.x
    morphisms = []
    for f in b.morphisms:
        prods = f.products()
        values = []
        for k, (i, j, c) in enumerate(prods):
            if f.kind == "double" and k == 1 and f.label in sys.parameters:
                values.append(sys.parameters[f.label])
            else:
                values.append(_group_value(spec, sys.mode, c))
        i1, j1, _ = prods[0]
        scale = x[PosetElement(f.source, j1)] / x[PosetElement(f.target, i1)] / values[0]
        entries = [
            (i, j, scale * v * x[PosetElement(f.target, i)] / x[PosetElement(f.source, j)])
            for (i, j, _), v in zip(prods, values)
        ]
        morphisms.append(RescaledMorphism(f.label, f.source, f.target, f.kind, f.positions, f.rank, scale, entries))
    vectors = {v: val.inverse() for v, val in x.items()}
    return RescaledBasis(sys.mode, vectors, morphisms)


def verify_multiplicative(basis: Union[RescaledBasis, Any]) -> Tuple[bool, int]:
    """Every nonzero product is a basis vector and the rank is at most 2."""
    if not isinstance(basis, RescaledBasis):
        basis = RescaledBasis.identity(basis)
    all_units = all(v.is_one for m in basis.morphisms for _, _, v in m.entries)
    return all_units and basis.rank <= 2, basis.rank


__all__ = [
    "ExponentSystem",
    "PairRow",
    "RescaledBasis",
    "RescaledMorphism",
    "RescalingError",
    "RescalingSolution",
    "UnsolvableRoot",
    "WeightFunction",
    "apply_rescaling",
    "check_weight_axioms",
    "exponent_system",
    "left_kernel",
    "solve_rescaling",
    "to_weight_function",
    "verify_multiplicative",
    "weight_kernel",
]
