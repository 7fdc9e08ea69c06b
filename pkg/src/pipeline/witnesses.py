"""
Infinite families of pairwise nonisomorphic spaces and an isomorphism test.

A space ``(V, h, X)`` is stored as a ``SpaceOnM``: the matrix of
``h: V -> M(X)`` with every row labelled ``(object, copy, layer)``. Each
family below places its blocks exactly on those labels, so the same builder
works inside any presentation whose objects have the required dimensions.

Two spaces are isomorphic when ``h' φ = M(ξ) h`` for an invertible ``φ``
and an invertible ``ξ`` in the endomorphism algebra of ``X``. All pairs
``(φ, ξ)`` solving the equation form a linear space; the test computes it
exactly and looks for an invertible member, first at random points and then
on a small exhaustive grid.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field
from sympy.polys.matrices import DomainMatrix

from src.algebra import linalg
from src.algebra.scalars import FieldSpec
from src.pipeline.presentation import (
    PresentationDoc,
    SpaceOnM,
    SpacedModulePresentation,
    from_document,
    generate_closure,
)

logger = logging.getLogger(__name__)

RowLabel = Tuple[str, int, int]

E7_A1 = [[1, None], [1, 1], [1, 0], [0, 1]]
E7_A2 = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]]
E7_A3 = [[0, 0, 0], [0, 0, 1], [0, 1, 0], [1, 0, 0]]
E7_B1 = [[0, 1, 0], [0, 0, 1]]
E7_B2 = [[1], [0]]


class ContextMismatch(ValueError):
    """The presentation lacks objects of the dimensions a family needs."""


class ScaleExceeded(ValueError):
    """The isomorphism test was asked to work beyond its size bounds."""


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    dims: Tuple[int, ...]
    default_layers: Tuple[int, ...] = ()
    description: str = ""


FAMILIES: Dict[str, FamilySpec] = {
    "two_step_pair": FamilySpec("two_step_pair", (3, 3), (), "a^2 + b^2 with the interleaved identity on (m_3^a, m_1^b)"),
    "diagonal_pencil": FamilySpec("diagonal_pencil", (3, 3), (), "a + b with the pencil diag(0, 1, λ) on b"),
    "incomparable_layers": FamilySpec("incomparable_layers", (3, 3), (3, 1), "a^2 + b^2 with the interleaved identity on (m_i^a, m_j^b)"),
    "crossed_two": FamilySpec("crossed_two", (2, 2), (1, 2, 1, 2), "h e1 = m_i^x + m_j'^y, h e2 = m_j^y + λ m_i'^x"),
    "crossed_three": FamilySpec("crossed_three", (2, 2, 2), (1, 2, 1, 2, 1, 2), "three-object analogue of crossed_two"),
    "e7_two_doubles": FamilySpec("e7_two_doubles", (3, 2, 2), (), "Ẽ7 representation on a triple and two doubles"),
    "e7_one_double": FamilySpec("e7_one_double", (3, 2), (), "Ẽ7 representation on a triple and one double"),
}


# ---------------------------------------------------------------------------
# contexts
# ---------------------------------------------------------------------------


def _lower(d: int) -> List[List[List[int]]]:
    mats = []
    for i in range(1, d):
        for j in range(i):
            m = [[0] * d for _ in range(d)]
            m[i][j] = 1
            mats.append(m)
    return mats


def family_context(kind: str, spec: Optional[FieldSpec] = None) -> SpacedModulePresentation:
    """
    Default presentation realising the hypothesis of a family.

    ``two_step_pair`` and ``diagonal_pencil`` carry the hom-spaces their
    construction starts from; every other family lives on objects without
    homomorphisms between them.
    """
    if kind not in FAMILIES:
        raise ContextMismatch(f"unknown family {kind!r}")
    spec = spec or FieldSpec.rational()
    names = ["a", "b", "c"][: len(FAMILIES[kind].dims)]
    dims = FAMILIES[kind].dims
    rad = [{"from": n, "to": n, "matrices": _lower(d)} for n, d in zip(names, dims) if d > 1]
    if kind == "two_step_pair":
        units = []
        for i in range(3):
            for j in range(3):
                if (i, j) != (0, 2):
                    m = [[0] * 3 for _ in range(3)]
                    m[i][j] = 1
                    units.append(m)
        rad.append({"from": "a", "to": "b", "matrices": units})
    elif kind == "diagonal_pencil":
        rad.append({"from": "a", "to": "b", "matrices": [[[1, 0, 0], [0, 1, 0], [0, 0, 1]]] + _lower(3)})
    doc = {"field": spec.to_json(), "objects": [{"name": n, "dim": d} for n, d in zip(names, dims)], "rad": rad}
    return generate_closure(from_document(PresentationDoc.model_validate(doc)))


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _assemble(
    p: SpacedModulePresentation,
    summands: Sequence[Tuple[str, int]],
    rows: Sequence[RowLabel],
    columns: Sequence[Dict[RowLabel, Any]],
) -> SpaceOnM:
    domain = p.domain
    index = {label: k for k, label in enumerate(rows)}
    data = [[domain.zero] * len(columns) for _ in rows]
    for v, col in enumerate(columns):
        for label, value in col.items():
            data[index[label]][v] = p.field.element(value)
    return SpaceOnM(tuple(summands), tuple(rows), linalg.matrix(data, len(rows), len(columns), domain))


def _layered_rows(objects: Sequence[Tuple[str, int, int]]) -> List[RowLabel]:
    """Rows grouped by object, then layer, then copy: ``(m_1^a)^t, (m_2^a)^t, ...``."""
    rows = []
    for name, copies, d in objects:
        for layer in range(1, d + 1):
            for copy in range(1, copies + 1):
                rows.append((name, copy, layer))
    return rows


def _incomparable_layers(a: str, b: str, i: int, j: int, lam: Any) -> List[Dict[RowLabel, Any]]:
    free_a = iter([{(a, 1, 0): 1}, {(a, 2, 0): 1}])
    free_b = iter([{(b, 1, 0): 1, (b, 2, 0): 1}, {(b, 1, 0): 1, (b, 2, 0): lam}])
    columns = []
    for layer in range(1, 4):
        if layer == i:
            columns.append({(a, 1, i): 1, (b, 1, j): 1})
            columns.append({(a, 2, i): 1, (b, 2, j): 1})
        else:
            template = next(free_a)
            columns.append({(n, c, layer): x for (n, c, _), x in template.items()})
    for layer in range(1, 4):
        if layer != j:
            template = next(free_b)
            columns.append({(n, c, layer): x for (n, c, _), x in template.items()})
    return columns


def _e7_columns(alpha: Any, a: str, b_rows, c_rows) -> List[Dict[RowLabel, Any]]:
    """``A_1 ⊕ [A_2; B_1] ⊕ [A_3; C_1] ⊕ B_2 ⊕ C_2`` on the given row labels."""
    a1 = [[alpha if x is None else x for x in row] for row in E7_A1]
    columns: List[Dict[RowLabel, Any]] = []

    def block(top, top_rows, bottom=None, bottom_rows=()):
        for v in range(len(top[0])):
            col = {label: top[k][v] for k, label in enumerate(top_rows) if top[k][v]}
            if bottom is not None:
                col.update({label: bottom[k][v] for k, label in enumerate(bottom_rows) if bottom[k][v]})
            columns.append(col)

    block(a1, [(a, k, 1) for k in range(1, 5)])
    block(E7_A2, [(a, k, 2) for k in range(1, 5)], E7_B1, b_rows(1))
    block(E7_A3, [(a, k, 3) for k in range(1, 5)], E7_B1, c_rows(1))
    block(E7_B2, b_rows(2))
    block(E7_B2, c_rows(2))
    return columns


def _require(p: SpacedModulePresentation, kind: str, objects: Sequence[str]) -> None:
    need = FAMILIES[kind].dims
    if len(objects) != len(need):
        raise ContextMismatch(f"{kind} needs {len(need)} objects, got {list(objects)}")
    for name, d in zip(objects, need):
        try:
            got = p.dim(name)
        except KeyError as exc:
            raise ContextMismatch(str(exc)) from exc
        if got != d:
            raise ContextMismatch(f"{kind} needs dim M({name}) = {d}, got {got}")


def build_family(
    kind: str,
    p: SpacedModulePresentation,
    parameter: Any,
    objects: Optional[Sequence[str]] = None,
    layers: Optional[Sequence[int]] = None,
) -> SpaceOnM:
    """
    Member of a family at one parameter value.

    Parameters
    ----------
    kind : str
        A key of ``FAMILIES``.
    p : SpacedModulePresentation
        Presentation in triangular coordinates supplying the objects.
    parameter
        λ (α for the Ẽ7 families), anything ``FieldSpec.scalar`` accepts.
    objects, layers : sequence, optional
        Object names and layer indices; default to the first objects of
        ``p`` and the family's default layers.

    Raises
    ------
    ContextMismatch
        If the objects do not have the dimensions the family needs.
    """
    if kind not in FAMILIES:
        raise ContextMismatch(f"unknown family {kind!r}")
    fam = FAMILIES[kind]
    objects = list(objects) if objects else [o.name for o in p.objects[: len(fam.dims)]]
    _require(p, kind, objects)
    layers = list(layers) if layers else list(fam.default_layers)
    lam = p.field.scalar(parameter)

    if kind in ("two_step_pair", "incomparable_layers"):
        a, b = objects
        i, j = (3, 1) if kind == "two_step_pair" else layers[:2]
        rows = _layered_rows([(a, 2, 3), (b, 2, 3)])
        columns = _incomparable_layers(a, b, i, j, lam)
        return _assemble(p, [(a, 1), (a, 2), (b, 1), (b, 2)], rows, columns)

    if kind == "diagonal_pencil":
        a, b = objects
        rows = _layered_rows([(a, 1, 3), (b, 1, 3)])
        columns = [
            {(a, 1, 1): 1},
            {(a, 1, 2): 1, (b, 1, 2): 1},
            {(a, 1, 3): 1, (b, 1, 3): lam},
        ]
        return _assemble(p, [(a, 1), (b, 1)], rows, columns)

    if kind == "crossed_two":
        x, y = objects
        i, i2, j, j2 = layers
        rows = _layered_rows([(x, 1, p.dim(x)), (y, 1, p.dim(y))])
        columns = [{(x, 1, i): 1, (y, 1, j2): 1}, {(y, 1, j): 1, (x, 1, i2): lam}]
        return _assemble(p, [(x, 1), (y, 1)], rows, columns)

    if kind == "crossed_three":
        x, y, z = objects
        i, i2, j, j2, l, l2 = layers
        rows = _layered_rows([(x, 1, p.dim(x)), (y, 1, p.dim(y)), (z, 1, p.dim(z))])
        columns = [
            {(x, 1, i): 1, (y, 1, j2): 1},
            {(y, 1, j): 1, (z, 1, l2): 1},
            {(z, 1, l): 1, (x, 1, i2): lam},
        ]
        return _assemble(p, [(x, 1), (y, 1), (z, 1)], rows, columns)

    if kind == "e7_two_doubles":
        a, b, c = objects
        b_rows = lambda layer: [(b, k, layer) for k in (1, 2)]
        c_rows = lambda layer: [(c, k, layer) for k in (1, 2)]
        summands = [(a, k) for k in range(1, 5)] + [(b, 1), (b, 2), (c, 1), (c, 2)]
    else:
        a, b = objects
        b_rows = lambda layer: [(b, k, layer) for k in (1, 2)]
        c_rows = lambda layer: [(b, k, layer) for k in (3, 4)]
        summands = [(a, k) for k in range(1, 5)] + [(b, k) for k in range(1, 5)]
    rows = (
        [(a, k, 1) for k in range(1, 5)]
        + [(a, k, 2) for k in range(1, 5)] + b_rows(1)
        + [(a, k, 3) for k in range(1, 5)] + c_rows(1)
        + b_rows(2)
        + c_rows(2)
    )
    return _assemble(p, summands, rows, _e7_columns(lam, a, b_rows, c_rows))


# ---------------------------------------------------------------------------
# isomorphism test
# ---------------------------------------------------------------------------


@dataclass
class IsoWitness:
    phi: DomainMatrix
    xi: DomainMatrix

    def verify(self, h: SpaceOnM, h2: SpaceOnM) -> bool:
        return (
            h2.h * self.phi == self.xi * h.h
            and linalg.rank(self.phi) == self.phi.shape[0]
            and linalg.rank(self.xi) == self.xi.shape[0]
        )


@dataclass
class NotIsomorphic:
    reason: str
    nullity: int = 0


def _endomorphism_basis(p: SpacedModulePresentation, space: SpaceOnM) -> List[DomainMatrix]:
    """``M(ξ)`` for a basis of ``End(X)`` in the row coordinates of ``space``."""
    domain = p.domain
    size = space.target_dim
    index = {label: k for k, label in enumerate(space.rows)}
    basis = []
    for src, sc in space.summands:
        for dst, dc in space.summands:
            mats = list(p.rad_matrices(src, dst))
            if src == dst:
                mats.insert(0, linalg.identity(p.dim(src), domain))
            for m in mats:
                data = [[domain.zero] * size for _ in range(size)]
                for i, j, x in linalg.nonzero_entries(m):
                    data[index[(dst, dc, i)]][index[(src, sc, j)]] = x
                basis.append(DomainMatrix(data, (size, size), domain))
    return basis


def _align(h: SpaceOnM, h2: SpaceOnM) -> Optional[DomainMatrix]:
    if sorted(h.rows) != sorted(h2.rows) or h.v_dim != h2.v_dim:
        return None
    if h.rows == h2.rows:
        return h2.h
    index = {label: k for k, label in enumerate(h2.rows)}
    rows = h2.h.to_list()
    return DomainMatrix([rows[index[label]] for label in h.rows], h2.h.shape, h2.h.domain)


def spaces_isomorphic(
    h: SpaceOnM,
    h2: SpaceOnM,
    p: SpacedModulePresentation,
    seed: int = 0,
    trials: int = 5,
    max_space_dim: int = 12,
    max_target_dim: int = 24,
    exhaustive_limit: int = 4096,
) -> Union[IsoWitness, NotIsomorphic]:
    """
    Decide ``H ≅ H'`` at desk scale.

    The solution space of ``h' φ = M(ξ) h`` is computed exactly; an invertible
    pair is searched for at ``trials`` seeded random points and then over all
    coefficient vectors with entries in ``0..4`` when there are at most
    ``exhaustive_limit`` of them.

    Raises
    ------
    ScaleExceeded
        When ``dim V`` or ``dim M(X)`` exceeds its bound.
    """
    if h.v_dim > max_space_dim or h.target_dim > max_target_dim:
        raise ScaleExceeded(
            f"dim V = {h.v_dim}, dim M(X) = {h.target_dim} exceed ({max_space_dim}, {max_target_dim})"
        )
    if h.target_counts() != h2.target_counts():
        return NotIsomorphic("different summands")
    target = _align(h, h2)
    if target is None:
        return NotIsomorphic("different shapes")

    domain = p.domain
    n, size = h.v_dim, h.target_dim
    xis = _endomorphism_basis(p, h)
    k = len(xis)
    images = [(e * h.h).to_list() for e in xis]
    t = target.to_list()
    # unknowns: k coefficients of ξ, then φ row-major
    equations = []
    for r in range(size):
        for v in range(n):
            row = [-images[q][r][v] for q in range(k)]
            phi_part = [domain.zero] * (n * n)
            for w in range(n):
                phi_part[w * n + v] = t[r][w]
            equations.append(row + phi_part)
    solutions = linalg.nullspace(DomainMatrix(equations, (len(equations), k + n * n), domain))
    if not solutions:
        return NotIsomorphic("no solutions", 0)

    def candidate(coeffs: Sequence[Any]) -> Optional[IsoWitness]:
        u = [domain.zero] * (k + n * n)
        for c, vec in zip(coeffs, solutions):
            if c:
                u = [x + c * y for x, y in zip(u, vec)]
        phi = linalg.unvectorize(u[k:], n, n, domain)
        if linalg.rank(phi) < n:
            return None
        xi = linalg.zeros(size, size, domain)
        for c, e in zip(u[:k], xis):
            if c:
                xi = xi + linalg.scale(e, c)
        if linalg.rank(xi) < size:
            return None
        return IsoWitness(phi, xi)

    rng = random.Random(seed)
    spread = p.field.p - 1 if p.field.is_prime_field else 97
    for _ in range(trials):
        coeffs = [domain.convert(rng.randint(0, spread)) for _ in solutions]
        found = candidate(coeffs)
        if found is not None:
            return found
    if 5 ** len(solutions) <= exhaustive_limit:
        for combo in product(range(5), repeat=len(solutions)):
            if not any(combo):
                continue
            found = candidate([domain.convert(c) for c in combo])
            if found is not None:
                return found
    return NotIsomorphic("no invertible solution found", len(solutions))


# ---------------------------------------------------------------------------
# family runs
# ---------------------------------------------------------------------------


class SpaceRecord(BaseModel):
    parameter: str
    rows: List[str]
    h: List[List[Union[int, str]]]


class Comparison(BaseModel):
    left: str
    right: str
    isomorphic: bool
    reason: Optional[str] = None


class WitnessReport(BaseModel):
    family: str
    objects: List[str]
    layers: List[int] = Field(default_factory=list)
    field: str
    spaces: List[SpaceRecord] = Field(default_factory=list)
    comparisons: List[Comparison] = Field(default_factory=list)

    @property
    def all_distinct(self) -> bool:
        return all(not c.isomorphic for c in self.comparisons)


def space_record(p: SpacedModulePresentation, parameter: Any, space: SpaceOnM) -> SpaceRecord:
    return SpaceRecord(
        parameter=str(p.field.scalar(parameter)),
        rows=[f"{name}[{copy}].m{layer}" for name, copy, layer in space.rows],
        h=[[p.field.scalar(x).to_json() for x in row] for row in linalg.to_rows(space.h)],
    )


def run_family(
    kind: str,
    params: Sequence[Any],
    p: Optional[SpacedModulePresentation] = None,
    objects: Optional[Sequence[str]] = None,
    layers: Optional[Sequence[int]] = None,
    seed: int = 0,
    trials: int = 5,
    max_space_dim: int = 12,
    max_target_dim: int = 24,
    exhaustive_limit: int = 4096,
    logger_: Optional[logging.Logger] = None,
) -> WitnessReport:
    """Build the family at every parameter and test every unordered pair."""
    log = logger_ or logger
    p = p or family_context(kind)
    members = [(x, build_family(kind, p, x, objects, layers)) for x in params]
    first = members[0][1] if members else None
    names = sorted({name for name, _ in first.summands}, key=lambda n: p.obj(n).index) if first else []
    report = WitnessReport(
        family=kind,
        objects=list(objects) if objects else names,
        layers=list(layers or FAMILIES[kind].default_layers),
        field=p.field.label,
        spaces=[space_record(p, x, s) for x, s in members],
    )
    for idx, (x, hx) in enumerate(members):
        for y, hy in members[idx + 1:]:
            result = spaces_isomorphic(
                hx, hy, p, seed, trials, max_space_dim, max_target_dim, exhaustive_limit
            )
            iso = isinstance(result, IsoWitness)
            report.comparisons.append(
                Comparison(
                    left=str(p.field.scalar(x)),
                    right=str(p.field.scalar(y)),
                    isomorphic=iso,
                    reason=None if iso else result.reason,
                )
            )
            log.debug("%s: %s vs %s -> %s", kind, x, y, "isomorphic" if iso else "not isomorphic")
    return report


__all__ = [
    "ContextMismatch",
    "FAMILIES",
    "IsoWitness",
    "NotIsomorphic",
    "ScaleExceeded",
    "WitnessReport",
    "build_family",
    "family_context",
    "run_family",
    "space_record",
    "spaces_isomorphic",
]
