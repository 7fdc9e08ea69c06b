from fractions import Fraction

import pytest

from src.algebra.monomials import RadMonomial, UnsolvableRoot
from src.algebra.scalars import FieldSpec
from src.common.certificates import Certificate
from src.pipeline.classifier import build_reduced_basis
from src.pipeline.poset_graph import PosetElement, build_gamma
from src.pipeline.rescaler import (
    ExponentSystem,
    PairRow,
    RescaledBasis,
    RescalingSolution,
    apply_rescaling,
    check_weight_axioms,
    exponent_system,
    left_kernel,
    solve_rescaling,
    verify_multiplicative,
    weight_kernel,
)
from src.pipeline.triangular import triangulate
from tests.conftest import load_corpus, presentation, units


def reduced(p):
    tri = triangulate(p)
    return build_reduced_basis(tri.presentation, tri.bases)


def system_of(p, mode=None):
    b = reduced(p)
    g = build_gamma(b)
    return b, exponent_system(b, g, mode)


def doubles_of(rescaled):
    return [m for m in rescaled.morphisms if m.kind == "double"]


def test_single_pair_rows_and_right_hand_side():
    _, sys = system_of(load_corpus("one_double"))
    assert sys.mode == "numeric"
    assert sys.shape == (1, 6)
    assert sys.to_json()["vertices"] == ["a_1", "a_2", "a_3", "b_1", "b_2", "b_3"]
    # -a_1 + a_2 + b_1 - b_2
    assert sys.matrix == [[-1, 1, 0, 1, -1, 0]]
    assert [str(v) for v in sys.values] == ["+2"]
    assert left_kernel(sys) == []


def test_single_pair_rescales_to_one():
    b, sys = system_of(load_corpus("one_double"))
    solution = solve_rescaling(sys)
    assert isinstance(solution, RescalingSolution)
    rescaled = apply_rescaling(b, solution, sys)
    [double] = doubles_of(rescaled)
    assert all(v.is_one for _, _, v in double.entries)
    assert verify_multiplicative(rescaled) == (True, 2)


def test_identity_basis_is_not_multiplicative_with_a_pencil():
    b = reduced(load_corpus("one_double"))
    ok, rank = verify_multiplicative(RescaledBasis.identity(b))
    assert not ok
    assert rank == 2
    assert verify_multiplicative(reduced(load_corpus("triple"))) == (True, 1)


def test_symbolic_mode_keeps_parameters_free():
    b, sys = system_of(load_corpus("three_doubles"), "symbolic")
    assert sys.mode == "symbolic"
    assert [str(v) for v in sys.values] == ["+λ_1", "+λ_2", "+λ_3"]
    # the long double is the product of its two factors
    assert sys.parameters["a->c:e11+e22"] == RadMonomial.symbol("λ_1") * RadMonomial.symbol("λ_3")
    solution = solve_rescaling(sys)
    rescaled = apply_rescaling(b, solution, sys)
    ok, rank = verify_multiplicative(rescaled)
    assert ok and rank == 2


def test_non_positive_parameter_switches_to_symbolic():
    e21 = units(2, 2, (2, 1, 1))
    p = presentation(
        {"a": 2, "b": 2},
        {("a", "a"): [e21], ("b", "b"): [e21], ("a", "b"): [units(2, 2, (1, 1, 1), (2, 2, -1)), e21]},
    )
    _, sys = system_of(p, "numeric")
    assert sys.mode == "symbolic"
    assert any("switching to symbolic" in n for n in sys.notices)


def test_mode_errors():
    b = reduced(load_corpus("one_double"))
    g = build_gamma(b)
    with pytest.raises(ValueError):
        exponent_system(b, g, "bogus")
    with pytest.raises(ValueError):
        exponent_system(b, g, "prime")


def test_prime_field_forces_prime_mode():
    b, sys = system_of(load_corpus("one_double", FieldSpec.from_label("F5")), "numeric")
    assert sys.mode == "prime"
    assert sys.notices
    solution = solve_rescaling(sys)
    rescaled = apply_rescaling(b, solution, sys)
    assert verify_multiplicative(rescaled)[0]


def _square_root_system(mode, spec, lam):
    """One pair ``u_1 -> u_2``, ``u_2 -> u_1``: asks for a square root of ``lam``."""
    vertices = [PosetElement("u", 1), PosetElement("u", 2)]
    rows = [PairRow(1, "f", 0, 1, 1, 0, spec.scalar(lam))]
    value = spec.scalar(lam) if mode == "prime" else RadMonomial.from_rational(Fraction(lam))
    return ExponentSystem(vertices, rows, [[-2, 2]], spec, mode, [value])


def test_numeric_roots_stay_formal():
    sys = _square_root_system("numeric", FieldSpec.from_label("Q"), 2)
    solution = solve_rescaling(sys)
    x1, x2 = solution.x[PosetElement("u", 1)], solution.x[PosetElement("u", 2)]
    assert sys.values[0] * x1 / x2 == x2 / x1
    assert any(m.to_rational() is None for m in (x1, x2))


def test_prime_mode_without_a_root():
    # 3 is not a square modulo 7
    sys = _square_root_system("prime", FieldSpec.from_label("F7"), 3)
    with pytest.raises(UnsolvableRoot):
        solve_rescaling(sys)
    solvable = _square_root_system("prime", FieldSpec.from_label("F7"), 2)
    assert isinstance(solve_rescaling(solvable), RescalingSolution)


def test_obstruction_square_weight_function(obstruction_square):
    _, sys = system_of(obstruction_square)
    assert left_kernel(sys) == [[1, -1, 1, -1]]
    functions, certs = weight_kernel(sys)
    [w] = functions
    assert w.residual == "+2"
    assert check_weight_axioms(w, sys)
    assert w.z["a_1->b_1#1"] == 1 and w.z["a_2->b_2#1"] == -1
    [cert] = certs
    assert cert.check == "weight_obstruction"
    assert cert.details["residual"] == "+2"
    result = solve_rescaling(sys)
    assert isinstance(result, Certificate)


def test_broken_weight_function_fails_axioms(obstruction_square):
    _, sys = system_of(obstruction_square)
    [w] = weight_kernel(sys)[0]
    broken = w.model_copy(update={"z": {**w.z, "a_1->b_1#1": 2}})
    assert not check_weight_axioms(broken, sys)


def test_consistent_square_has_trivial_residual():
    e21 = units(2, 2, (2, 1, 1))
    pencil = [units(2, 2, (1, 1, 1), (2, 2, 2)), e21]
    p = presentation(
        {"a": 2, "b": 2, "c": 2, "d": 2},
        {
            ("a", "a"): [e21],
            ("b", "b"): [e21],
            ("c", "c"): [e21],
            ("d", "d"): [e21],
            ("a", "b"): pencil,
            ("a", "c"): pencil,
            ("b", "d"): pencil,
            ("c", "d"): pencil,
        },
    )
    _, sys = system_of(p)
    functions, certs = weight_kernel(sys)
    assert [w.residual for w in functions] == ["+1"]
    assert certs == []
    assert isinstance(solve_rescaling(sys), RescalingSolution)
