import networkx as nx

from src.pipeline.classifier import build_reduced_basis
from src.pipeline.poset_graph import (
    ArrowGraph,
    Poset,
    PosetElement,
    build_gamma,
    build_poset,
    check_gamma_conditions,
    check_poset_conditions,
    gamma_to_dot,
)
from src.pipeline.triangular import triangulate
from tests.conftest import load_corpus, presentation, strictly_lower, units


def reduced(p):
    tri = triangulate(p)
    assert tri.complete
    return build_reduced_basis(tri.presentation, tri.bases)


def chain_of(poset):
    """Elements in increasing order when the poset is a chain."""
    return [str(x) for x in sorted(poset.elements, key=lambda x: sum(poset.leq(y, x) for y in poset.elements))]


def test_two_step_poset_is_a_chain():
    poset = build_poset(reduced(load_corpus("two_step")))
    assert chain_of(poset) == ["a_1", "a_2", "b_1", "a_3", "b_2", "b_3"]
    assert check_poset_conditions(poset) == []


def test_three_doubles_poset_and_graph():
    b = reduced(load_corpus("three_doubles"))
    poset = build_poset(b)
    assert chain_of(poset) == ["a_1", "b_1", "c_1", "a_2", "b_2", "c_2", "a_3", "c_3"]
    assert poset.to_json()["kinds"] == {"a": "triple", "b": "double", "c": "triple"}
    gamma = build_gamma(b)
    described = [
        (pr.morphism, pr.weak, str(pr.first.source), str(pr.first.target), str(pr.second.source), str(pr.second.target))
        for pr in gamma.pairs
    ]
    assert described == [
        ("a->b:e11+e22", False, "a_1", "b_1", "a_2", "b_2"),
        ("a->c:e22+e33", True, "a_2", "c_2", "a_3", "c_3"),
        ("b->c:e11+e22", False, "b_1", "c_1", "b_2", "c_2"),
    ]
    assert check_gamma_conditions(gamma, poset) == []


def test_cycle_breaks_antisymmetry():
    poset = Poset.from_relations({"a": 1, "b": 1}, [(("a", 1), ("b", 1)), (("b", 1), ("a", 1))])
    certs = check_poset_conditions(poset)
    assert [c.check for c in certs] == ["poset_antisymmetry"]
    assert not poset.antisymmetric


def test_incomparable_triples(two_step_context):
    poset = build_poset(reduced(two_step_context))
    certs = [c for c in check_poset_conditions(poset) if c.check == "triples_total_order"]
    [cert] = certs
    assert cert.witness_handle.family == "incomparable_layers"
    assert cert.witness_handle.objects == ["a", "b"]
    assert cert.witness_handle.layers == [3, 1]


def test_crossed_doubles():
    e21 = units(2, 2, (2, 1, 1))
    poset = build_poset(reduced(presentation({"x": 2, "y": 2}, {("x", "x"): [e21], ("y", "y"): [e21]})))
    [cert] = check_poset_conditions(poset)
    assert cert.check == "crossed_incomparability"
    assert cert.witness_handle.family == "crossed_two"
    assert cert.witness_handle.objects == ["x", "y"]


def test_crossed_triangle():
    poset = Poset.from_relations(
        {"x": 2, "y": 2, "z": 2},
        [
            (("x", 1), ("y", 1)),
            (("y", 2), ("x", 2)),
            (("x", 1), ("z", 1)),
            (("z", 2), ("x", 2)),
        ],
    )
    # x meets y and z in a comparable way; only y and z cross
    pairs = [c for c in check_poset_conditions(poset) if c.check == "crossed_incomparability"]
    assert [c.witness_handle.family for c in pairs] == ["crossed_two"]
    assert pairs[0].witness_handle.objects == ["y", "z"]


def test_triple_against_a_double():
    p = presentation(
        {"a": 3, "b": 2},
        {
            ("a", "a"): strictly_lower(3),
            ("b", "b"): [units(2, 2, (2, 1, 1))],
            ("a", "b"): [units(2, 3, (1, 1, 1)), units(2, 3, (2, 1, 1)), units(2, 3, (2, 2, 1)), units(2, 3, (2, 3, 1))],
        },
    )
    certs = check_poset_conditions(build_poset(reduced(p)))
    [cert] = [c for c in certs if c.check == "triple_double_comparability"]
    assert cert.witness_handle.family == "e7_one_double"
    assert cert.witness_handle.objects == ["a", "b"]


def test_obstruction_square_graph_linters(obstruction_square):
    b = reduced(obstruction_square)
    poset = build_poset(b)
    gamma = build_gamma(b)
    assert [pr.morphism for pr in gamma.pairs] == [
        "a->b:e11+e22",
        "a->c:e11+e22",
        "b->d:e11+e22",
        "c->d:e11+e22",
    ]
    checks = {c.check for c in check_gamma_conditions(gamma, poset)}
    assert {"connected_endpoints", "vertex_degree"} <= checks
    assert "crossed_incomparability" in {c.check for c in check_poset_conditions(poset)}


def test_pair_limit_at_a_triple():
    poset = Poset({"t": 3, "u": 3, "v": 3, "w": 3})
    specs = [
        (("t", 1), ("u", 1), ("t", 2), ("u", 2), False),
        (("t", 2), ("v", 2), ("t", 3), ("v", 3), False),
        (("t", 1), ("w", 2), ("t", 3), ("w", 3), False),
    ]
    gamma = ArrowGraph.from_specs(poset, specs, {("t", "u"): 1, ("t", "v"): 1, ("t", "w"): 1})
    certs = [c for c in check_gamma_conditions(gamma, poset) if c.check == "triple_pair_limit"]
    [cert] = certs
    assert cert.elements == ["t"]
    assert cert.details["pairs"] == [1, 2, 3]


def test_transitive_arrow_needs_the_weak_configuration():
    poset = Poset.from_relations(
        {"a": 2, "b": 2, "c": 2},
        [(("a", 1), ("b", 1)), (("b", 1), ("c", 1)), (("a", 2), ("b", 2)), (("b", 2), ("c", 2))],
    )
    gamma = ArrowGraph.from_specs(poset, [(("a", 1), ("c", 1), ("a", 2), ("c", 2), False)], {("a", "c"): 1})
    certs = [c for c in check_gamma_conditions(gamma, poset) if c.check == "transitive_arrow"]
    assert [c.elements for c in certs] == [["a_1", "b_1", "c_1"], ["a_2", "b_2", "c_2"]]
    cert = certs[0]
    assert "arrow is not part of a weak pair with equal layers" in cert.details["problems"]


def test_dot_export_marks_weak_arrows():
    b = reduced(load_corpus("three_doubles"))
    dot = gamma_to_dot(build_gamma(b))
    assert "2w" in dot
    assert "dashed" in dot
    g = build_gamma(b).to_networkx()
    assert isinstance(g, nx.MultiDiGraph)
    assert g.number_of_edges() == 6


def test_poset_elements_print_with_layers():
    assert str(PosetElement("a", 2)) == "a_2"
    poset = Poset({"a": 2})
    assert poset.less(PosetElement("a", 1), PosetElement("a", 2))
    assert poset.to_json()["less"] == [["a_1", "a_2"]]
