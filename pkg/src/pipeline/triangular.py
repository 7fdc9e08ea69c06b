"""
Radical filtrations and triangular bases.

For every object ``a`` the chain ``M(a) ⊃ R M(a) ⊃ R^2 M(a) ⊃ ... ⊃ 0`` is
computed from the radical generators, and a basis ``m_1, ..., m_d`` with
one vector per layer is extracted from it. Rewriting every radical matrix in
these coordinates makes endomorphism radicals strictly lower triangular and
turns the basis morphisms of later stages into literal matrix units.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from sympy.polys.matrices import DomainMatrix

from src.algebra import linalg
from src.common.certificates import Certificate, Outcome, certificate, flag, ok
from src.pipeline.presentation import ObjectId, SpacedModulePresentation, conjugate

logger = logging.getLogger(__name__)

MAX_LAYERS = 3


@dataclass(frozen=True)
class Filtration:
    """``chain[i]`` is the RREF basis (rows) of ``R^i M(a)``."""

    object: ObjectId
    chain: Tuple[Tuple[Tuple[Any, ...], ...], ...]

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(len(c) for c in self.chain)

    @property
    def length(self) -> int:
        return len(self.chain) - 1


@dataclass(frozen=True)
class TriangularBasis:
    object: ObjectId
    vectors: Tuple[Tuple[Any, ...], ...]

    @property
    def d(self) -> int:
        return len(self.vectors)

    def matrix(self, domain) -> DomainMatrix:
        """Change of basis with ``m_i`` as the i-th column."""
        d = self.d
        rows = [[self.vectors[j][i] for j in range(d)] for i in range(d)]
        return linalg.matrix(rows, d, d, domain)


def _apply(m: DomainMatrix, vec: Sequence[Any]) -> List[Any]:
    domain = m.domain
    out = []
    for row in m.to_list():
        acc = domain.zero
        for x, y in zip(row, vec):
            acc += x * y
        out.append(acc)
    return out


def _leading(row: Sequence[Any]) -> int:
    for k, x in enumerate(row):
        if x:
            return k
    return -1


def radical_filtration(p: SpacedModulePresentation, a: ObjectId) -> Filtration:
    """
    Compute ``R^i M(a)`` for ``i = 0, 1, ...`` until the chain reaches zero.

    Stops early if a step fails to shrink, which only happens for
    non-nilpotent input rejected by validation.
    """
    d = p.dim(a)
    domain = p.domain
    gens = p.rad_matrices(a, a)
    current = linalg.identity(d, domain).to_list()
    chain = [tuple(tuple(r) for r in current)]
    while current:
        images = [_apply(g, v) for g in gens for v in current]
        nxt = linalg.row_space(images, d, domain)
        if len(nxt) >= len(current):
            break
        chain.append(tuple(tuple(r) for r in nxt))
        current = nxt
    logger.debug("filtration of %s: dims %s", a.name, [len(c) for c in chain])
    return Filtration(a, tuple(chain))


def triangular_basis(f: Filtration) -> Outcome:
    """
    Pick ``m_i`` in ``chain[i-1] \\ chain[i]`` by the pivot rule.

    ``m_i`` is the RREF row of ``chain[i-1]`` whose pivot column is not a
    pivot column of ``chain[i]``. Returns an ``Outcome`` whose value is a
    ``TriangularBasis`` or whose certificate names the failed bound.
    """
    a = f.object
    dims = f.dims
    d = dims[0]
    if d > MAX_LAYERS:
        cert = certificate(
            "dimension_bound",
            [a.name],
            f"dim M({a.name}) = {d} exceeds {MAX_LAYERS}",
            dimension=d,
        )
        return flag("dimension_bound", cert)
    if dims[-1] != 0 or any(dims[i] - dims[i + 1] != 1 for i in range(len(dims) - 1)):
        cert = certificate(
            "layer_drop",
            [a.name],
            f"radical filtration of {a.name} has dimensions {list(dims)}",
            dimension=d,
            filtration=list(dims),
        )
        return flag("layer_drop", cert)
    vectors = []
    for i in range(1, len(f.chain)):
        upper, lower = f.chain[i - 1], f.chain[i]
        lower_pivots = {_leading(r) for r in lower}
        chosen = [r for r in upper if _leading(r) not in lower_pivots]
        vectors.append(tuple(chosen[0]))
    return ok(TriangularBasis(a, tuple(vectors)))


def rebase(p: SpacedModulePresentation, bases: Mapping[str, TriangularBasis]) -> SpacedModulePresentation:
    """Express every radical matrix in the triangular coordinates."""
    return conjugate(p, {name: b.matrix(p.domain) for name, b in bases.items()})


@dataclass
class Triangulation:
    presentation: SpacedModulePresentation
    filtrations: Dict[str, Filtration]
    bases: Dict[str, TriangularBasis]
    certificates: List[Certificate]

    @property
    def complete(self) -> bool:
        return not self.certificates


def triangulate(p: SpacedModulePresentation, logger_: Optional[logging.Logger] = None) -> Triangulation:
    """Filtration and basis for every object, then rebase if all succeed."""
    log = logger_ or logger
    filtrations: Dict[str, Filtration] = {}
    bases: Dict[str, TriangularBasis] = {}
    certs: List[Certificate] = []
    for a in p.objects:
        filt = radical_filtration(p, a)
        filtrations[a.name] = filt
        outcome = triangular_basis(filt)
        if outcome.flagged:
            log.warning("triangular basis for %s: %s", a.name, outcome.certificate.message)
            certs.append(outcome.certificate)
        else:
            bases[a.name] = outcome.value
    rebased = rebase(p, bases) if not certs else p
    return Triangulation(rebased, filtrations, bases, certs)


__all__ = [
    "Filtration",
    "TriangularBasis",
    "Triangulation",
    "radical_filtration",
    "rebase",
    "triangular_basis",
    "triangulate",
]
