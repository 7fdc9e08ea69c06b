import pytest

from src.algebra import linalg
from src.pipeline.presentation import conjugate
from src.pipeline.triangular import radical_filtration, triangular_basis, triangulate
from tests.conftest import as_matrix, load_corpus, presentation, strictly_lower, units


def test_filtration_of_a_triple():
    p = load_corpus("triple")
    f = radical_filtration(p, p.obj("a"))
    assert f.dims == (3, 2, 1, 0)
    assert f.length == 3
    outcome = triangular_basis(f)
    assert not outcome.flagged
    assert [list(v) for v in outcome.value.vectors] == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_triangular_coordinates_recovered_after_base_change():
    p = load_corpus("triple")
    t = as_matrix(p, [[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    scrambled = conjugate(p, {"a": t})
    assert scrambled.rad_space("a", "a") != p.rad_space("a", "a")
    tri = triangulate(scrambled)
    assert tri.complete
    assert tri.presentation.rad_space("a", "a") == p.rad_space("a", "a")


def test_dimension_bound():
    p = presentation({"a": 4}, {("a", "a"): strictly_lower(4)})
    tri = triangulate(p)
    assert not tri.complete
    [cert] = tri.certificates
    assert cert.check == "dimension_bound"
    assert cert.elements == ["a"]
    assert cert.details["dimension"] == 4


def test_layer_drop():
    # rad(a, a) = k e31 leaves a two-dimensional top layer
    p = presentation({"a": 3}, {("a", "a"): [units(3, 3, (3, 1, 1))]})
    tri = triangulate(p)
    [cert] = tri.certificates
    assert cert.check == "layer_drop"
    assert cert.details["filtration"] == [3, 1, 0]


@pytest.mark.parametrize("name", ["singleton", "double", "two_step", "three_doubles"])
def test_corpus_is_triangular(name):
    tri = triangulate(load_corpus(name))
    assert tri.complete
    for a in tri.presentation.objects:
        for m in tri.presentation.rad_matrices(a, a):
            assert all(i > j for i, j in linalg.support(m))
