"""
Layer poset and arrow graph of a classified basis, with their linters.

The poset has one element ``a_i`` per object and layer. ``a_i < b_j`` when
some basis morphism sends ``m_i^a`` to a nonzero multiple of ``m_j^b``; the
order is the reflexive-transitive closure of these relations together with
the chain ``a_1 < a_2 < a_3`` of every object.

The arrow graph has one pair of connected arrows per short double basis
morphism ``e_P + λ e_Q``. A pair is weak when its hom-space carries three
double directions.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx

from src.algebra.scalars import ExactScalar
from src.common.certificates import Certificate, certificate

logger = logging.getLogger(__name__)

KIND_BY_DIM = {1: "singleton", 2: "double", 3: "triple"}


@dataclass(frozen=True, order=True)
class PosetElement:
    object: str
    layer: int

    def __str__(self) -> str:
        return f"{self.object}_{self.layer}"


class Poset:
    """
    Finite poset on the layers of the objects.

    Parameters
    ----------
    dims : mapping
        ``object -> number of layers``, in object order.
    relations : iterable of (PosetElement, PosetElement)
        Generating relations ``x < y``; chains inside every object are added.
    """

    def __init__(self, dims: Mapping[str, int], relations: Iterable[Tuple[PosetElement, PosetElement]] = ()) -> None:
        self.dims = dict(dims)
        self.order = {name: k for k, name in enumerate(self.dims)}
        self.elements = [PosetElement(a, i) for a, d in self.dims.items() for i in range(1, d + 1)]
        self.direct = nx.DiGraph()
        self.direct.add_nodes_from(self.elements)
        for a, d in self.dims.items():
            for i in range(1, d):
                self.direct.add_edge(PosetElement(a, i), PosetElement(a, i + 1))
        for x, y in relations:
            if x != y:
                self.direct.add_edge(x, y)
        self.closure = nx.transitive_closure(self.direct, reflexive=True)
        self.certificates: List[Certificate] = []
        try:
            cycle = nx.find_cycle(self.direct)
        except nx.NetworkXNoCycle:
            cycle = None
        if cycle:
            names = [str(u) for u, _ in cycle]
            self.certificates.append(
                certificate(
                    "poset_antisymmetry",
                    names,
                    "the layer relation has a cycle: " + " < ".join(names + names[:1]),
                )
            )

    @classmethod
    def from_relations(cls, dims: Mapping[str, int], relations: Iterable[Tuple[Tuple[str, int], Tuple[str, int]]]) -> "Poset":
        return cls(dims, ((PosetElement(*x), PosetElement(*y)) for x, y in relations))

    def kind(self, a: str) -> str:
        return KIND_BY_DIM.get(self.dims[a], "other")

    def layers(self, a: str) -> List[PosetElement]:
        return [PosetElement(a, i) for i in range(1, self.dims[a] + 1)]

    def objects_of_kind(self, kind: str) -> List[str]:
        return [a for a in self.dims if self.kind(a) == kind]

    def leq(self, x: PosetElement, y: PosetElement) -> bool:
        return self.closure.has_edge(x, y)

    def less(self, x: PosetElement, y: PosetElement) -> bool:
        return x != y and self.leq(x, y)

    def comparable(self, x: PosetElement, y: PosetElement) -> bool:
        return self.leq(x, y) or self.leq(y, x)

    @property
    def antisymmetric(self) -> bool:
        return not self.certificates

    def to_json(self) -> Dict[str, Any]:
        return {
            "elements": [str(x) for x in self.elements],
            "kinds": {a: self.kind(a) for a in self.dims},
            "less": sorted([str(x), str(y)] for x, y in self.closure.edges if x != y),
        }


def build_poset(b, logger_: Optional[logging.Logger] = None) -> Poset:
    """Poset of a ``ClassifiedBasis`` from the products of its morphisms."""
    log = logger_ or logger
    p = b.presentation
    dims = {o.name: d for o, d in zip(p.objects, p.dims)}
    relations = []
    for f in b.morphisms:
        for row, col, _ in f.products():
            relations.append((PosetElement(f.source, col), PosetElement(f.target, row)))
    poset = Poset(dims, relations)
    log.debug("poset: %d elements, %d relations", len(poset.elements), poset.closure.number_of_edges())
    return poset


# ---------------------------------------------------------------------------
# poset linters
# ---------------------------------------------------------------------------


def _triples_total_order(p: Poset) -> List[Certificate]:
    certs = []
    for x, y in combinations(p.objects_of_kind("triple"), 2):
        bad = next(
            ((u, v) for u in p.layers(x) for v in p.layers(y) if not p.comparable(u, v)),
            None,
        )
        if bad is None:
            continue
        u, v = bad
        certs.append(
            certificate(
                "triples_total_order",
                [u, v],
                f"{u} and {v} are incomparable although both objects are triples",
                family="incomparable_layers",
                objects=[x, y],
                layers=[u.layer, v.layer],
            )
        )
    return certs


def _crossed_pair(p: Poset, x: str, y: str) -> Optional[Tuple[int, int, int, int]]:
    """Layers ``i, i', j, j'`` with ``x_i ∥ y_j'`` and ``y_j ∥ x_i'``."""
    X, Y = p.layers(x), p.layers(y)
    for xi in X:
        for yj2 in Y:
            if p.comparable(xi, yj2):
                continue
            for yj in Y:
                if yj == yj2:
                    continue
                for xi2 in X:
                    if xi2 != xi and not p.comparable(yj, xi2):
                        return xi.layer, xi2.layer, yj.layer, yj2.layer
    return None


def _crossed_triangle(p: Poset, x: str, y: str, z: str) -> Optional[List[PosetElement]]:
    X, Y, Z = p.layers(x), p.layers(y), p.layers(z)
    for xi in X:
        for yj2 in Y:
            if p.comparable(xi, yj2):
                continue
            for yj in Y:
                if yj == yj2:
                    continue
                for zl2 in Z:
                    if p.comparable(yj, zl2):
                        continue
                    for zl in Z:
                        if zl == zl2:
                            continue
                        for xi2 in X:
                            if xi2 != xi and not p.comparable(zl, xi2):
                                return [xi, yj2, yj, zl2, zl, xi2]
    return None


def _crossed_incomparability(p: Poset) -> List[Certificate]:
    wide = [a for a in p.dims if p.dims[a] >= 2]
    certs = []
    crossed: Set[frozenset] = set()
    for x, y in combinations(wide, 2):
        found = _crossed_pair(p, x, y)
        if found is None:
            continue
        crossed.add(frozenset((x, y)))
        i, i2, j, j2 = found
        certs.append(
            certificate(
                "crossed_incomparability",
                [PosetElement(x, i), PosetElement(y, j2), PosetElement(y, j), PosetElement(x, i2)],
                f"{x}_{i} ∥ {y}_{j2} and {y}_{j} ∥ {x}_{i2}",
                family="crossed_two",
                objects=[x, y],
                layers=[i, i2, j, j2],
            )
        )
    for trio in combinations(wide, 3):
        if any(frozenset(pair) in crossed for pair in combinations(trio, 2)):
            continue
        for x, y, z in (trio, (trio[0], trio[2], trio[1])):
            found = _crossed_triangle(p, x, y, z)
            if found is None:
                continue
            xi, yj2, yj, zl2, zl, xi2 = found
            certs.append(
                certificate(
                    "crossed_incomparability",
                    found,
                    f"{xi} ∥ {yj2}, {yj} ∥ {zl2} and {zl} ∥ {xi2}",
                    family="crossed_three",
                    objects=[x, y, z],
                    layers=[xi.layer, xi2.layer, yj.layer, yj2.layer, zl.layer, zl2.layer],
                )
            )
            break
    return certs


def _triple_double_comparability(p: Poset) -> List[Certificate]:
    doubles = p.objects_of_kind("double")
    certs = []
    for a in p.objects_of_kind("triple"):
        blame: Dict[int, List[str]] = {}
        for u in p.layers(a):
            for d in doubles:
                if any(not p.comparable(u, v) for v in p.layers(d)):
                    blame.setdefault(u.layer, []).append(d)
        good = p.dims[a] - len(blame)
        if good >= 2:
            continue
        involved = sorted({d for ds in blame.values() for d in ds}, key=p.order.get)
        # two layers blamed on two different doubles
        two = any(
            d1 != d2 for i, j in combinations(sorted(blame), 2) for d1 in blame[i] for d2 in blame[j]
        )
        family = "e7_two_doubles" if two else "e7_one_double"
        certs.append(
            certificate(
                "triple_double_comparability",
                [a] + involved,
                f"only {good} element(s) of {a} are comparable with every element of every double",
                family=family,
                objects=[a] + involved[: 2 if family == "e7_two_doubles" else 1],
                layers=sorted(blame),
            )
        )
    return certs


def check_poset_conditions(p: Poset) -> List[Certificate]:
    """Antisymmetry, triples totally ordered, crossed incomparabilities, triple/double comparability."""
    certs = list(p.certificates)
    certs.extend(_triples_total_order(p))
    certs.extend(_crossed_incomparability(p))
    certs.extend(_triple_double_comparability(p))
    return certs


# ---------------------------------------------------------------------------
# arrow graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Arrow:
    source: PosetElement
    target: PosetElement
    pair_id: int
    weak: bool

    @property
    def key(self) -> str:
        return f"{self.source}->{self.target}#{self.pair_id}"


@dataclass(frozen=True)
class ArrowPair:
    pair_id: int
    first: Arrow
    second: Arrow
    weak: bool
    morphism: str = ""
    parameter: Optional[ExactScalar] = None

    @property
    def source_object(self) -> str:
        return self.first.source.object

    @property
    def target_object(self) -> str:
        return self.first.target.object

    def partner(self, arrow: Arrow) -> Arrow:
        return self.second if arrow == self.first else self.first


@dataclass
class ArrowGraph:
    vertices: List[PosetElement]
    pairs: List[ArrowPair] = field(default_factory=list)
    double_counts: Dict[Tuple[str, str], int] = field(default_factory=dict)

    @property
    def arrows(self) -> List[Arrow]:
        return [a for pr in self.pairs for a in (pr.first, pr.second)]

    def pair(self, pair_id: int) -> ArrowPair:
        return self.pairs[pair_id - 1]

    def partner(self, arrow: Arrow) -> Arrow:
        return self.pair(arrow.pair_id).partner(arrow)

    def out_arrows(self, v: PosetElement) -> List[Arrow]:
        return [a for a in self.arrows if a.source == v]

    def in_arrows(self, v: PosetElement) -> List[Arrow]:
        return [a for a in self.arrows if a.target == v]

    def count(self, a: str, b: str) -> int:
        return self.double_counts.get((a, b), 0)

    def to_networkx(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(str(v) for v in self.vertices)
        for a in self.arrows:
            g.add_edge(str(a.source), str(a.target), key=a.key, pair_id=a.pair_id, weak=a.weak)
        return g

    def to_json(self) -> Dict[str, Any]:
        return {
            "pairs": [
                {
                    "pair_id": pr.pair_id,
                    "morphism": pr.morphism,
                    "weak": pr.weak,
                    "arrows": [[str(pr.first.source), str(pr.first.target)], [str(pr.second.source), str(pr.second.target)]],
                }
                for pr in self.pairs
            ]
        }

    @classmethod
    def from_specs(
        cls,
        poset: Poset,
        specs: Sequence[Tuple[Tuple[str, int], Tuple[str, int], Tuple[str, int], Tuple[str, int], bool]],
        double_counts: Optional[Mapping[Tuple[str, str], int]] = None,
    ) -> "ArrowGraph":
        """Hand-built graph: each spec is ``(s1, t1, s2, t2, weak)``."""
        pairs = []
        for k, (s1, t1, s2, t2, weak) in enumerate(specs, start=1):
            first = Arrow(PosetElement(*s1), PosetElement(*t1), k, weak)
            second = Arrow(PosetElement(*s2), PosetElement(*t2), k, weak)
            pairs.append(ArrowPair(k, first, second, weak))
        return cls(list(poset.elements), pairs, dict(double_counts or {}))


def build_gamma(b, logger_: Optional[logging.Logger] = None) -> ArrowGraph:
    """One connected pair per short double basis morphism, deterministically numbered."""
    log = logger_ or logger
    p = b.presentation
    index = {o.name: o.index for o in p.objects}
    raw = []
    for f in b.morphisms:
        if f.kind != "double" or not f.short:
            continue
        (i, j), (i2, j2) = f.positions
        raw.append((f, (f.source, j), (f.target, i), (f.source, j2), (f.target, i2)))
    raw.sort(key=lambda r: (index[r[1][0]], r[1][1], index[r[2][0]], r[2][1]))
    pairs = []
    for k, (f, s1, t1, s2, t2) in enumerate(raw, start=1):
        weak = b.double_counts.get((f.source, f.target), 0) == 3
        pairs.append(
            ArrowPair(
                k,
                Arrow(PosetElement(*s1), PosetElement(*t1), k, weak),
                Arrow(PosetElement(*s2), PosetElement(*t2), k, weak),
                weak,
                f.label,
                f.parameter,
            )
        )
    vertices = [PosetElement(o.name, i) for o, d in zip(p.objects, p.dims) for i in range(1, d + 1)]
    log.debug("arrow graph: %d pair(s)", len(pairs))
    return ArrowGraph(vertices, pairs, dict(b.double_counts))


def gamma_to_dot(g: ArrowGraph) -> str:
    """DOT text; every arrow is labelled with its pair id, weak arrows with a trailing ``w``."""
    dot = nx.MultiDiGraph()
    dot.add_nodes_from(str(v) for v in g.vertices)
    for a in g.arrows:
        dot.add_edge(
            str(a.source),
            str(a.target),
            label=f"{a.pair_id}{'w' if a.weak else ''}",
            style="dashed" if a.weak else "solid",
        )
    return nx.nx_pydot.to_pydot(dot).to_string()


# ---------------------------------------------------------------------------
# arrow graph linters
# ---------------------------------------------------------------------------


def _strong_steps(g: ArrowGraph) -> Dict[Tuple[PosetElement, PosetElement], List[Tuple[PosetElement, PosetElement]]]:
    steps: Dict[Tuple[PosetElement, PosetElement], List[Tuple[PosetElement, PosetElement]]] = {}
    for pr in g.pairs:
        if pr.weak:
            continue
        x, y = pr.first, pr.second
        steps.setdefault((x.source, y.source), []).append((x.target, y.target))
        steps.setdefault((y.source, x.source), []).append((y.target, x.target))
    return steps


def _reachable(steps, start) -> Set[Tuple[PosetElement, PosetElement]]:
    seen = {start}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for nxt in steps.get(state, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def _strong_path_pair(g: ArrowGraph, p: Poset, x: PosetElement, y: PosetElement, z: PosetElement) -> bool:
    """Connected strong paths ``x -> .. -> y -> .. -> z`` and ``x' -> .. -> y' -> .. -> z'`` with equal layers at the ends."""
    steps = _strong_steps(g)
    for x2 in p.layers(x.object):
        if x2 == x:
            continue
        z2 = PosetElement(z.object, x2.layer)
        if z2.layer > p.dims.get(z.object, 0):
            continue
        for mid in _reachable(steps, (x, x2)):
            if mid[0] == y and (z, z2) in _reachable(steps, mid):
                return True
    return False


def _transitive_arrow(g: ArrowGraph, p: Poset) -> List[Certificate]:
    certs = []
    for arrow in g.arrows:
        x, z = arrow.source, arrow.target
        between = [y for y in p.elements if p.less(x, y) and p.less(y, z)]
        if not between:
            continue
        y = between[0]
        a, b, c = x.object, y.object, z.object
        problems = []
        if len({a, b, c}) != 3:
            problems.append("objects are not distinct")
        else:
            if x.layer != z.layer:
                problems.append("arrow changes layer")
            counts = (g.count(a, b), g.count(b, c), g.count(a, c))
            if counts != (1, 1, 3):
                problems.append(f"double counts {list(counts)} instead of [1, 1, 3]")
            partner = g.partner(arrow)
            if not arrow.weak or partner.source.layer != partner.target.layer or partner.source.layer == x.layer:
                problems.append("arrow is not part of a weak pair with equal layers")
            between_pairs = [pr for pr in g.pairs if pr.source_object == a and pr.target_object == c]
            if len(between_pairs) != 1:
                problems.append(f"{len(between_pairs)} arrow pairs from {a} to {c}")
            if not _strong_path_pair(g, p, x, y, z):
                problems.append("no connected strong paths through the middle element")
        if problems:
            certs.append(
                certificate(
                    "transitive_arrow",
                    [x, y, z],
                    f"arrow {x} -> {z} above {y}: " + "; ".join(problems),
                    problems=problems,
                )
            )
    return certs


def _connected_endpoints(g: ArrowGraph) -> List[Certificate]:
    certs = []
    arrows = g.arrows
    for u, v in combinations(arrows, 2):
        if u.pair_id == v.pair_id:
            continue
        pu, pv = g.partner(u), g.partner(v)
        if u.source == v.source and pu.source == pv.source:
            certs.append(
                certificate(
                    "connected_endpoints",
                    [u.source, pu.source],
                    f"arrows of pairs {u.pair_id} and {v.pair_id} start from {u.source} and their partners from {pu.source}",
                    pairs=[u.pair_id, v.pair_id],
                )
            )
        if u.target == v.target and pu.target == pv.target:
            certs.append(
                certificate(
                    "connected_endpoints",
                    [u.target, pu.target],
                    f"arrows of pairs {u.pair_id} and {v.pair_id} stop at {u.target} and their partners at {pu.target}",
                    pairs=[u.pair_id, v.pair_id],
                )
            )
    return certs


def _vertex_degree(g: ArrowGraph, p: Poset) -> List[Certificate]:
    limits = {"double": 1, "triple": 2}
    certs = []
    for v in g.vertices:
        limit = limits.get(p.kind(v.object))
        if limit is None:
            continue
        for direction, arrows in (("start from", g.out_arrows(v)), ("stop at", g.in_arrows(v))):
            if len(arrows) > limit:
                certs.append(
                    certificate(
                        "vertex_degree",
                        [v],
                        f"{len(arrows)} arrows {direction} {v} of a {p.kind(v.object)}",
                        degree=len(arrows),
                        limit=limit,
                    )
                )
    return certs


def _triple_pair_limit(g: ArrowGraph, p: Poset) -> List[Certificate]:
    certs = []
    for a in p.objects_of_kind("triple"):
        leaving = [pr.pair_id for pr in g.pairs if pr.source_object == a]
        entering = [pr.pair_id for pr in g.pairs if pr.target_object == a]
        for direction, ids in (("leave", leaving), ("enter", entering)):
            if len(ids) > 2:
                certs.append(
                    certificate(
                        "triple_pair_limit",
                        [a],
                        f"{len(ids)} pairs of connected arrows {direction} the triple {a}",
                        pairs=ids,
                    )
                )
    return certs


def check_gamma_conditions(g: ArrowGraph, p: Poset) -> List[Certificate]:
    """Transitive arrows, connected endpoints, vertex degrees and the pair limit at triples."""
    certs: List[Certificate] = []
    certs.extend(_transitive_arrow(g, p))
    certs.extend(_connected_endpoints(g))
    certs.extend(_vertex_degree(g, p))
    certs.extend(_triple_pair_limit(g, p))
    return certs


__all__ = [
    "Arrow",
    "ArrowGraph",
    "ArrowPair",
    "Poset",
    "PosetElement",
    "build_gamma",
    "build_poset",
    "check_gamma_conditions",
    "check_poset_conditions",
    "gamma_to_dot",
]
