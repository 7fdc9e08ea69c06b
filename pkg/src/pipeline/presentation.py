"""
Spaced-module presentations: data model, validation and JSON round trip.

A presentation lists the objects ``a`` of the spectroid with ``dim M(a)``
and, for each ordered pair ``(a, b)``, matrices spanning the image of the
radical ``M(R(a, b))`` as ``dim M(b) x dim M(a)`` matrices. The algebra is
never stored abstractly; everything downstream is a statement about these
matrices.

Document format::

    {"field": "Q" | {"Fp": p},
     "objects": [{"name": "a", "dim": 3}, ...],
     "rad": [{"from": "a", "to": "b", "matrices": [[[1, 0], ["1/2", 0]]]}, ...]}
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field as dc_field, replace
from typing import Any, Dict, Iterator, List, Literal, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, StrictStr, ValidationError
from sympy.polys.matrices import DomainMatrix

from src.algebra import linalg
from src.algebra.linalg import MatrixSpace
from src.algebra.scalars import FieldSpec, ScalarFormatError

logger = logging.getLogger(__name__)

PairKey = Tuple[int, int]


class PresentationFormatError(ValueError):
    """
    Raised when a presentation document cannot be turned into a value.

    ``line``/``column`` locate JSON syntax errors; ``path`` names the
    offending matrix for shape errors.
    """

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        path: Optional[str] = None,
    ) -> None:
        where = ""
        if line is not None:
            where = f" (line {line}, column {column})"
        elif path is not None:
            where = f" ({path})"
        super().__init__(message + where)
        self.line = line
        self.column = column
        self.path = path


# ---------------------------------------------------------------------------
# document schema
# ---------------------------------------------------------------------------

Entry = Union[StrictInt, StrictStr]


class ObjectDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: StrictStr = Field(..., min_length=1)
    dim: StrictInt


class RadDoc(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    source: StrictStr = Field(..., alias="from")
    target: StrictStr = Field(..., alias="to")
    matrices: List[List[List[Entry]]] = Field(default_factory=list)


class PresentationDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    field: Union[Literal["Q"], Dict[str, StrictInt]] = "Q"
    objects: List[ObjectDoc]
    rad: List[RadDoc] = Field(default_factory=list)


# ---------------------------------------------------------------------------
# values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObjectId:
    name: str
    index: int

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class SpacedModulePresentation:
    """
    Immutable presentation value.

    Attributes
    ----------
    field : FieldSpec
        Ground field.
    objects : tuple of ObjectId
        Objects with dense indices ``0..n-1``.
    dims : tuple of int
        ``dims[a.index] = dim M(a)``.
    rad : mapping
        ``(a.index, b.index) -> tuple of DomainMatrix`` spanning ``M(R(a, b))``;
        pairs with a zero radical are absent.
    """

    field: FieldSpec
    objects: Tuple[ObjectId, ...]
    dims: Tuple[int, ...]
    rad: Mapping[PairKey, Tuple[DomainMatrix, ...]] = dc_field(default_factory=dict)

    @property
    def domain(self):
        return self.field.domain

    def obj(self, ref: Union[str, int, ObjectId]) -> ObjectId:
        if isinstance(ref, ObjectId):
            return ref
        if isinstance(ref, int):
            return self.objects[ref]
        for o in self.objects:
            if o.name == ref:
                return o
        raise KeyError(f"unknown object {ref!r}")

    def dim(self, ref: Union[str, int, ObjectId]) -> int:
        return self.dims[self.obj(ref).index]

    def rad_matrices(self, a: Union[str, int, ObjectId], b: Union[str, int, ObjectId]) -> Tuple[DomainMatrix, ...]:
        return tuple(self.rad.get((self.obj(a).index, self.obj(b).index), ()))

    def rad_space(self, a: Union[str, int, ObjectId], b: Union[str, int, ObjectId]) -> MatrixSpace:
        oa, ob = self.obj(a), self.obj(b)
        return MatrixSpace(self.dim(ob), self.dim(oa), self.domain, self.rad_matrices(oa, ob))

    def pairs(self) -> Iterator[Tuple[ObjectId, ObjectId]]:
        for a in self.objects:
            for b in self.objects:
                yield a, b

    def with_rad(self, rad: Mapping[PairKey, Sequence[DomainMatrix]]) -> "SpacedModulePresentation":
        cleaned = {k: tuple(v) for k, v in sorted(rad.items()) if v}
        return replace(self, rad=cleaned)


@dataclass(frozen=True)
class SpaceOnM:
    """
    A space ``(V, h, X)`` on the module.

    ``summands`` lists the indecomposable summands of ``X`` as ``(object,
    copy)`` pairs; ``rows`` labels every row of ``h`` with ``(object, copy,
    layer)`` in the order the family prints them.
    """

    summands: Tuple[Tuple[str, int], ...]
    rows: Tuple[Tuple[str, int, int], ...]
    h: DomainMatrix

    @property
    def v_dim(self) -> int:
        return self.h.shape[1]

    @property
    def target_dim(self) -> int:
        return self.h.shape[0]

    def target_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for name, _ in self.summands:
            counts[name] = counts.get(name, 0) + 1
        return counts


class ValidationIssue(BaseModel):
    kind: Literal["shape", "independence", "closure", "nilpotency"]
    objects: List[str]
    message: str


class ValidationReport(BaseModel):
    issues: List[ValidationIssue] = Field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.issues


# ---------------------------------------------------------------------------
# parse / serialize
# ---------------------------------------------------------------------------


def parse(text: Union[str, bytes]) -> SpacedModulePresentation:
    """
    Parse a presentation document.

    Raises
    ------
    PresentationFormatError
        On invalid UTF-8, JSON syntax errors (with line and column), schema
        violations, unknown objects or matrices whose shape does not match
        the declared dimensions.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise PresentationFormatError(f"document is not UTF-8: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PresentationFormatError(f"syntax error: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    try:
        doc = PresentationDoc.model_validate(raw)
    except ValidationError as exc:
        raise PresentationFormatError(f"schema error: {exc}") from exc
    return from_document(doc)


def from_document(doc: PresentationDoc) -> SpacedModulePresentation:
    try:
        spec = FieldSpec.from_json(doc.field)
    except ScalarFormatError as exc:
        raise PresentationFormatError(str(exc), path="field") from exc
    names = [o.name for o in doc.objects]
    if len(set(names)) != len(names):
        raise PresentationFormatError("object names must be unique", path="objects")
    for o in doc.objects:
        if o.dim < 1:
            raise PresentationFormatError(f"dim must be >= 1, got {o.dim}", path=f"objects.{o.name}")
    objects = tuple(ObjectId(o.name, i) for i, o in enumerate(doc.objects))
    dims = tuple(o.dim for o in doc.objects)
    index = {o.name: o.index for o in objects}
    domain = spec.domain
    rad: Dict[PairKey, Tuple[DomainMatrix, ...]] = {}
    for k, entry in enumerate(doc.rad):
        for ref in (entry.source, entry.target):
            if ref not in index:
                raise PresentationFormatError(f"unknown object {ref!r}", path=f"rad[{k}]")
        key = (index[entry.source], index[entry.target])
        if key in rad:
            raise PresentationFormatError(
                f"duplicate entry for {entry.source}->{entry.target}", path=f"rad[{k}]"
            )
        rows_n, cols_n = dims[key[1]], dims[key[0]]
        mats = []
        for m, mat in enumerate(entry.matrices):
            path = f"rad[{k}] {entry.source}->{entry.target} matrix {m}"
            if len(mat) != rows_n or any(len(r) != cols_n for r in mat):
                got_cols = len(mat[0]) if mat else 0
                raise PresentationFormatError(
                    f"dimension mismatch: expected {rows_n}x{cols_n}, got {len(mat)}x{got_cols}",
                    path=path,
                )
            try:
                rows = [[spec.element(str(x)) for x in r] for r in mat]
            except (ScalarFormatError, ValueError) as exc:
                raise PresentationFormatError(f"bad entry: {exc}", path=path) from exc
            mats.append(linalg.matrix(rows, rows_n, cols_n, domain))
        if mats:
            rad[key] = tuple(mats)
    return SpacedModulePresentation(spec, objects, dims, dict(sorted(rad.items())))


def to_document(p: SpacedModulePresentation) -> Dict[str, Any]:
    rad = []
    for (ia, ib), mats in sorted(p.rad.items()):
        rad.append(
            {
                "from": p.objects[ia].name,
                "to": p.objects[ib].name,
                "matrices": [
                    [[p.field.scalar(x).to_json() for x in row] for row in linalg.to_rows(m)]
                    for m in mats
                ],
            }
        )
    return {
        "field": p.field.to_json(),
        "objects": [{"name": o.name, "dim": d} for o, d in zip(p.objects, p.dims)],
        "rad": rad,
    }


def serialize(p: SpacedModulePresentation) -> str:
    """Canonical document text (sorted pairs, 2-space indent, trailing newline)."""
    return json.dumps(to_document(p), indent=2, ensure_ascii=False) + "\n"


def change_field(p: SpacedModulePresentation, spec: FieldSpec) -> SpacedModulePresentation:
    """Read the same document over another field (rationals reduce mod p)."""
    if spec == p.field:
        return p
    doc = to_document(p)
    doc["field"] = spec.to_json()
    return from_document(PresentationDoc.model_validate(doc))


# ---------------------------------------------------------------------------
# validation and normal forms
# ---------------------------------------------------------------------------


def _products(left: Sequence[DomainMatrix], right: Sequence[DomainMatrix]) -> Iterator[DomainMatrix]:
    """All products ``N * K`` with ``K`` from ``right`` and ``N`` from ``left``."""
    for n in left:
        for k in right:
            yield n * k


def validate(p: SpacedModulePresentation) -> ValidationReport:
    """
    Check independence, composition closure and nilpotency.

    Side-effect free; every violation becomes an issue in the report.
    """
    report = ValidationReport()
    for (ia, ib), mats in sorted(p.rad.items()):
        a, b = p.objects[ia], p.objects[ib]
        for m in mats:
            if m.shape != (p.dims[ib], p.dims[ia]):
                report.issues.append(
                    ValidationIssue(kind="shape", objects=[a.name, b.name], message=f"matrix of shape {m.shape}")
                )
        if p.rad_space(a, b).dim != len(mats):
            report.issues.append(
                ValidationIssue(
                    kind="independence",
                    objects=[a.name, b.name],
                    message=f"{len(mats)} matrices span a space of dimension {p.rad_space(a, b).dim}",
                )
            )
    if any(i.kind == "shape" for i in report.issues):
        return report

    spaces = {(a.index, b.index): p.rad_space(a, b) for a, b in p.pairs()}
    for a in p.objects:
        for b in p.objects:
            first = p.rad_matrices(a, b)
            if not first:
                continue
            for c in p.objects:
                second = p.rad_matrices(b, c)
                target = spaces[(a.index, c.index)]
                for prod in _products(second, first):
                    if not target.contains(prod):
                        report.issues.append(
                            ValidationIssue(
                                kind="closure",
                                objects=[a.name, b.name, c.name],
                                message=f"a product {a.name}->{b.name}->{c.name} is not in rad({a.name},{c.name})",
                            )
                        )
                        break

    for a in p.objects:
        gens = p.rad_matrices(a, a)
        if not gens:
            continue
        d = p.dim(a)
        power = list(gens)
        for _ in range(d):
            space = MatrixSpace(d, d, p.domain, _products(gens, power))
            power = space.basis
            if not power:
                break
        if power:
            report.issues.append(
                ValidationIssue(
                    kind="nilpotency",
                    objects=[a.name],
                    message=f"rad({a.name},{a.name}) is not nilpotent",
                )
            )
    logger.debug("validated presentation: %d issue(s)", len(report.issues))
    return report


def canonicalize(p: SpacedModulePresentation) -> SpacedModulePresentation:
    """Replace every spanning list by the RREF basis of its span."""
    rad = {(a.index, b.index): tuple(p.rad_space(a, b).basis) for a, b in p.pairs()}
    return p.with_rad(rad)


def generate_closure(p: SpacedModulePresentation) -> SpacedModulePresentation:
    """
    Close the radical spaces under composition.

    Lets presentations be written from generators: the result contains every
    product of listed matrices in the span of the matching pair.
    """
    spaces = {(a.index, b.index): p.rad_space(a, b) for a, b in p.pairs()}
    changed = True
    while changed:
        changed = False
        for a in p.objects:
            for b in p.objects:
                first = spaces[(a.index, b.index)].basis
                if not first:
                    continue
                for c in p.objects:
                    second = spaces[(b.index, c.index)].basis
                    if not second:
                        continue
                    key = (a.index, c.index)
                    extra = MatrixSpace(p.dims[c.index], p.dims[a.index], p.domain, _products(second, first))
                    merged = spaces[key] + extra
                    if merged.dim > spaces[key].dim:
                        spaces[key] = merged
                        changed = True
    return p.with_rad({k: tuple(v.basis) for k, v in spaces.items()})


def conjugate(
    p: SpacedModulePresentation, changes: Mapping[str, DomainMatrix]
) -> SpacedModulePresentation:
    """
    Change coordinates of selected ``M(a)``.

    ``changes[a]`` holds the new basis vectors of ``M(a)`` as columns in the
    old coordinates; a matrix ``M`` of ``rad(a, b)`` becomes
    ``T_b^{-1} M T_a``. The result is canonicalized.
    """
    transforms: Dict[int, DomainMatrix] = {}
    inverses: Dict[int, DomainMatrix] = {}
    for name, t in changes.items():
        o = p.obj(name)
        t = t.convert_to(p.domain)
        if t.shape != (p.dim(o), p.dim(o)) or t.det() == p.domain.zero:
            raise ValueError(f"change of basis for {name} must be an invertible {p.dim(o)}x{p.dim(o)} matrix")
        transforms[o.index] = t
        inverses[o.index] = t.inv()
    rad = {}
    for (ia, ib), mats in p.rad.items():
        new = []
        for m in mats:
            if ib in inverses:
                m = inverses[ib] * m
            if ia in transforms:
                m = m * transforms[ia]
            new.append(m)
        rad[(ia, ib)] = tuple(MatrixSpace(p.dims[ib], p.dims[ia], p.domain, new).basis)
    return p.with_rad(rad)


__all__ = [
    "ObjectId",
    "PresentationDoc",
    "PresentationFormatError",
    "SpaceOnM",
    "SpacedModulePresentation",
    "ValidationIssue",
    "ValidationReport",
    "canonicalize",
    "change_field",
    "conjugate",
    "from_document",
    "generate_closure",
    "parse",
    "serialize",
    "to_document",
    "validate",
]
