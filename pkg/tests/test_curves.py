from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, settings, strategies as st

from ecnondiv.curves import (
    EGG,
    IDENTITY_COMPONENT,
    MODEL_E,
    MODEL_EPRIME,
    CurveParams,
    WeierstrassCurve,
    component_of,
    count_roots_above,
    cubic_roots,
    isolate_real_roots,
    make_curve,
    minimal_model,
    refine_root,
)
from ecnondiv.points import Point, on_curve

x_sym = sympy.Symbol("x")
params_st = st.builds(
    CurveParams,
    st.integers(min_value=1, max_value=12),
    st.integers(min_value=-10**5, max_value=10**5).filter(lambda t: t != 0),
)


def test_params_validation():
    with pytest.raises(ValueError):
        CurveParams(0, 1)
    with pytest.raises(ValueError):
        CurveParams(1, 0)


def test_delta_examples():
    assert CurveParams(1, 1).delta == 13
    assert CurveParams(1, 5).delta == 49
    assert CurveParams(2, 1).delta == 157


def test_singular_equation_rejected():
    with pytest.raises(ValueError):
        WeierstrassCurve(0, 0, 0, 0, 0)


@given(params_st)
@settings(max_examples=100)
def test_discriminant_matches_cubic_discriminant(params):
    E = make_curve(params)
    n2, t = params.n**2, params.t
    cubic = x_sym**3 + t * x_sym**2 - n2 * (t + 3 * n2) * x_sym + n2**3
    assert E.discriminant == 16 * sympy.discriminant(cubic, x_sym)
    # the discriminant is a square multiple of delta^2, so all three 2-torsion roots are real
    assert E.discriminant == 16 * n2**2 * params.delta**2


def test_eprime_equation_for_n4_t1():
    Ep, to_model = minimal_model(CurveParams(4, 1))
    assert Ep.provenance == MODEL_EPRIME
    assert Ep.ainvs == (1, 0, 0, -49, 64)
    assert to_model(Point(0, 64)) == Point(0, 8)


@given(st.integers(min_value=1, max_value=5), st.integers(min_value=-3000, max_value=3000))
@settings(max_examples=100)
def test_model_map_is_isomorphism(m, k):
    params = CurveParams(4 * m, 4 * k + 1)
    E = make_curve(params)
    Ep, to_model = minimal_model(params)
    assert Ep.discriminant * 2**12 == E.discriminant
    assert Ep.j_invariant == E.j_invariant
    P = Point(0, params.n**3)
    Q = to_model(P)
    assert on_curve(Ep, Q) and Q.x.denominator == 1 and Q.y.denominator == 1
    assert to_model.inverse(Q) == P


def test_model_e_when_not_special():
    for n, t in [(1, 1), (4, 2), (4, 3), (2, 5), (8, -1)]:
        E, to_model = minimal_model(CurveParams(n, t))
        assert E.provenance == MODEL_E and to_model.is_identity


@given(params_st)
@settings(max_examples=60, deadline=None)
def test_root_isolation_matches_sympy(params):
    E = make_curve(params)
    coeffs = E.two_torsion_poly
    ivs = isolate_real_roots(coeffs)
    exact = sympy.Poly(list(reversed(coeffs)), x_sym).real_roots()
    assert len(ivs) == len(exact) == 3
    for iv, r in zip(ivs, exact):
        assert iv.lo <= r <= iv.hi
        fine = refine_root(coeffs, iv, 100)
        assert fine.lo <= r <= fine.hi
        assert fine.width <= Fraction(1, 2**100) * max(abs(fine.lo), abs(fine.hi))


def test_isolation_with_rational_roots():
    # 4(x - 1)(x - 2)(x + 3): rational roots can land on bisection points
    coeffs = [24, -28, 0, 4]
    ivs = isolate_real_roots(coeffs)
    assert len(ivs) == 3
    assert all(iv.lo <= r <= iv.hi for iv, r in zip(ivs, (-3, 1, 2)))
    assert refine_root(coeffs, ivs[1], 64).lo <= 1 <= refine_root(coeffs, ivs[1], 64).hi


@given(st.lists(st.integers(min_value=-50, max_value=50), min_size=3, max_size=3, unique=True),
       st.fractions(min_value=-60, max_value=60, max_denominator=7))
def test_count_roots_above(roots, x):
    coeffs = [int(c) for c in reversed(sympy.Poly(sympy.prod([x_sym - r for r in roots]), x_sym).all_coeffs())]
    assert count_roots_above(coeffs, x) == sum(1 for r in roots if r > x)


@given(params_st)
@settings(max_examples=60, deadline=None)
def test_e_roots_are_shifted_alpha(params):
    E, _ = minimal_model(params)
    data = cubic_roots(E, 80)
    shift = Fraction(E.b2, 12)
    for a, e in zip(data.alpha, data.e):
        assert e.lo == a.lo + shift and e.hi == a.hi + shift
    # depressed cubic has roots summing to zero
    assert sum(e.lo for e in data.e) <= 0 <= sum(e.hi for e in data.e)


@given(params_st)
@settings(max_examples=100, deadline=None)
def test_component_of_base_point(params):
    E, to_model = minimal_model(params)
    P = to_model(Point(0, params.n**3))
    roots = sorted(float(r) for r in sympy.Poly(list(reversed(E.two_torsion_poly)), x_sym).nroots())
    expected = EGG if roots[0] <= float(P.x) <= roots[1] else IDENTITY_COMPONENT
    assert component_of(E, P) == expected


def test_component_examples():
    # E_1(1): the egg is [e1, e2] with e1 < 0 < e2
    E = make_curve(CurveParams(1, 1))
    assert component_of(E, Point(0, 1)) == EGG
    assert component_of(E, Point(3, 5)) == IDENTITY_COMPONENT
