"""Tests for the projective-plane and quadrilateral-cover catalogue."""

from fractions import Fraction

import pytest

from pms.atlas import validate_double_scheme, validate_mult_cocycle
from pms.cohomology import BOUND_CAVEAT
from pms.laurent_core import LaurentPoly
from pms.p2_catalog import (
    beta_table,
    build_carpet,
    carpet_decompose,
    carpet_extends,
    carpet_obstruction,
    extension_bundle,
    extension_lattice,
    make_blown_plane,
    make_p2,
    make_p2_atlas,
    make_wcover_atlas,
    p2_line_bundle,
    pairing_matrix,
    quasiprojective,
    solve_pullback_family,
    wcover_unit_classes,
)


def test_atlas_structures_are_clean():
    assert make_p2_atlas().structure_failures() == []
    assert make_wcover_atlas().structure_failures() == []
    assert make_p2_atlas(symbolic=True).structure_failures() == []
    assert make_wcover_atlas(symbolic=True).structure_failures() == []


def test_line_bundle_grids_validate():
    p2 = make_p2_atlas()
    w = make_wcover_atlas()
    for m in range(-3, 4):
        assert validate_mult_cocycle(p2, p2_line_bundle(m)).ok
        for p in range(0, 3):
            assert validate_mult_cocycle(w, beta_table(m, p)).ok
            assert validate_mult_cocycle(w, extension_bundle(m, p)).ok


def test_double_scheme_grids_validate():
    for m in range(-3, 4):
        assert validate_double_scheme(make_p2(m)).ok
        for p in range(0, 3):
            spec = make_blown_plane(m, p, nontrivial=(m == -3))
            assert validate_double_scheme(spec).ok
    assert validate_double_scheme(make_p2(-3, nontrivial=True)).ok
    assert validate_double_scheme(make_blown_plane(0, 0, 0, 5)).ok
    assert validate_double_scheme(make_blown_plane(2, 0, 3, -1)).ok


def test_carpet_constructors_validate():
    for alpha in (0, 1, Fraction(1, 2), -2, "symbolic"):
        assert validate_double_scheme(build_carpet(alpha)).ok
    assert validate_double_scheme(build_carpet(3, trivial=True)).ok
    assert validate_double_scheme(build_carpet("symbolic", trivial=True)).ok


def test_constructor_argument_errors():
    with pytest.raises(ValueError):
        make_p2(0, nontrivial=True)
    with pytest.raises(ValueError):
        make_blown_plane(-3, 2, c0=1)
    with pytest.raises(ValueError):
        make_blown_plane(-3, 1, c0=0, r0=1)
    with pytest.raises(ValueError):
        make_blown_plane(0, 0, nontrivial=True)
    with pytest.raises(ValueError):
        make_blown_plane(-3, -1)


def test_pairing_matrices():
    assert pairing_matrix("blown") == (
        (Fraction(1), Fraction(0)),
        (Fraction(0), Fraction(-1)),
    )
    assert pairing_matrix("plane") == ((Fraction(1),),)
    with pytest.raises(ValueError):
        pairing_matrix("torus")


def test_unit_classes_shape():
    u_cls, v_cls = wcover_unit_classes()
    assert u_cls.data[("W0", "W1")] == LaurentPoly.monomial(2, (-1, 0))
    assert u_cls.data[("W2", "W3")] == LaurentPoly.const(2, 1)
    assert v_cls.data[("W0", "W1")] == LaurentPoly.const(2, 1)
    assert v_cls.data[("W2", "W3")] == LaurentPoly.monomial(2, (1, 0))


def test_carpet_decomposition_coefficients():
    for alpha in (Fraction(0), Fraction(1, 2)):
        coeffs, report = carpet_decompose(alpha, bound=4)
        assert coeffs == (Fraction(1), alpha)
        assert report["status"] == "found"
        assert report["caveat"] == BOUND_CAVEAT


def test_carpet_obstruction_is_bilinear_in_degrees():
    for alpha in (Fraction(0), Fraction(1, 2), Fraction(2)):
        for m in range(-3, 4):
            for n in range(-3, 4):
                value = carpet_obstruction(alpha, m, n)
                assert value == m - n * alpha
                assert carpet_extends(alpha, m, n) == (value == 0)
    sym = carpet_obstruction("symbolic", 2, 3)
    expected = (
        LaurentPoly.const(3, 2)
        - LaurentPoly.monomial(3, (0, 0, 1), 3)
    )
    assert sym == expected


def test_extension_lattice():
    assert extension_lattice(Fraction(3, 4)) == (3, 4)
    assert extension_lattice(Fraction(-2)) == (-2, 1)
    assert extension_lattice(Fraction(0)) == (0, 1)


def test_quasiprojective_answers():
    yes = quasiprojective(Fraction(3, 4))
    assert yes == {"answer": "yes", "witness": [3, 4]}
    no = quasiprojective(Fraction(-1))
    assert no["answer"] == "no"
    assert no["evidence"]["obstruction_at_1_0"] == "1/1"
    assert no["evidence"]["obstruction_at_0_1"] == "1/1"
    zero = quasiprojective(Fraction(0))
    assert zero["answer"] == "no"
    sym = quasiprojective("symbolic")
    assert sym["answer"] == "no"
    assert "al" in sym["evidence"]["obstruction_at_0_1"]


def test_family_dimensions_and_relations():
    f0 = solve_pullback_family(-3, 0, ansatz_bound=4)
    assert f0.parameter_dim == 2
    assert f0.free_parameters == ("c0", "R0")
    assert f0.relations == (
        "c0D = c0",
        "R1 = c0",
        "S0 = -R0",
        "R2 = R3 = R4 = S1 = S2 = S3 = S4 = 0",
    )

    f1 = solve_pullback_family(-3, 1, ansatz_bound=4)
    assert f1.parameter_dim == 1
    assert f1.free_parameters == ("c0",)
    assert f1.relations == (
        "R0 = c0",
        "c0D = c0",
        "R1 = R2 = R3 = R4 = S0 = S1 = S2 = S3 = S4 = 0",
    )

    f2 = solve_pullback_family(-3, 2, ansatz_bound=4)
    assert f2.parameter_dim == 0
    assert f2.free_parameters == ()
    assert f2.relations == (
        "c0 = R0 = c0D = R1 = R2 = R3 = R4 = S0 = S1 = S2 = S3 = S4 = 0",
    )

    for fd in (f0, f1, f2):
        assert fd.diagnostics["kernel_dim"] - fd.diagnostics["gauge_rank"] \
            == fd.parameter_dim
        payload = fd.to_json()
        assert payload["caveat"] == BOUND_CAVEAT
        assert payload["parameter_dim"] == fd.parameter_dim


def test_family_membership_and_instantiation():
    fd = solve_pullback_family(-3, 1, ansatz_bound=4)
    assert fd.parameter_space_contains({"c0": Fraction(1, 2)})
    assert not fd.parameter_space_contains({"c0": 1, "S0": 1})
    spec = fd.instantiate({"c0": Fraction(1, 2)})
    assert validate_double_scheme(spec).ok
    assert spec.D.data == build_carpet(Fraction(1, 2)).D.data
    with pytest.raises(ValueError):
        fd.instantiate({"S0": Fraction(1)})

    f2 = solve_pullback_family(-3, 2, ansatz_bound=4)
    rigid = f2.instantiate({})
    assert validate_double_scheme(rigid).ok
    assert rigid.D.data == make_blown_plane(-3, 2).D.data


def test_trivial_base_family_is_detected():
    fd = solve_pullback_family(-3, 1, ansatz_bound=4, nontrivial=False)
    assert fd.parameter_dim == 1
    assert not fd.nontrivial
    spec = fd.instantiate({"c0": Fraction(2)})
    assert spec.D.data == build_carpet(Fraction(2), trivial=True).D.data


def test_symbolic_bundles_extend_numeric_tables():
    sym = beta_table(2, 1, symbolic=True)
    num = beta_table(2, 1)
    for pair, poly in num.data.items():
        (exp, coeff), = poly.items()
        assert sym.data[pair] == LaurentPoly.monomial(3, exp + (0,), coeff)
    named = extension_bundle(2, 1, symbolic=True)
    assert named.name == "F_2_1"
