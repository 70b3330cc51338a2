from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from conftest import fractions, polynomial_pairs, polynomials
from hardy_forge.poly import (DivisibilityError, Polynomial, PolynomialError, PolynomialSyntaxError, format_poly,
                              parse, sum_sq_partials)

CUBIC = "x1*(x2^2+x3^2) + x2^3"


def to_sympy(P: Polynomial):
    xs = sympy.symbols(f"x1:{P.nvars + 1}")
    return sum((sympy.Rational(c.numerator, c.denominator) * sympy.prod([x**e for x, e in zip(xs, exp)])
                for exp, c in P.terms.items()), sympy.Integer(0)), xs


def from_sympy(expr, xs) -> Polynomial:
    poly = sympy.Poly(sympy.expand(expr), *xs)
    return Polynomial(len(xs), {m: Fraction(int(c.p), int(c.q)) for m, c in poly.terms()})


# --- parse / format ----------------------------------------------------------------

def test_parse_circle():
    assert parse("x1^2 + x2^2", 2).terms == {(2, 0): 1, (0, 2): 1}


def test_parse_zero_has_no_terms():
    P = parse("0", 3)
    assert P.is_zero() and P.terms == {} and P.nvars == 3


def test_parse_cubic_matches_cas():
    P = parse(CUBIC, 3)
    assert P.terms == {(1, 2, 0): 1, (1, 0, 2): 1, (0, 3, 0): 1}
    x1, x2, x3 = sympy.symbols("x1:4")
    assert P == from_sympy(x1 * (x2**2 + x3**2) + x2**3, (x1, x2, x3))


def test_parse_rationals_and_powers():
    P = parse("3/2*x1 - (x1 + x2/2)^2/4", 2)
    assert format_poly(P) == "-1/4*x1^2 - 1/4*x1*x2 - 1/16*x2^2 + 3/2*x1"


def test_parse_errors():
    with pytest.raises(PolynomialSyntaxError) as e:
        parse("x1 + * x2")
    assert e.value.position == 5
    with pytest.raises(PolynomialError, match="out of range"):
        parse("x3", 2)
    with pytest.raises(PolynomialSyntaxError):
        parse("")
    with pytest.raises(PolynomialSyntaxError):
        parse("(x1 + 1")


def test_floats_are_rejected():
    with pytest.raises(TypeError):
        Polynomial(1, {(1,): 0.5})


@given(polynomials())
def test_parse_format_roundtrip(P):
    assert parse(format_poly(P), P.nvars) == P


@given(polynomials())
def test_json_roundtrip(P):
    assert Polynomial.from_json(P.to_json()) == P


# --- evaluation --------------------------------------------------------------------

def test_evaluate_examples():
    assert parse("x1^2+x2^2", 2).evaluate((3, 4)) == 25
    assert parse("x1*x2", 2).evaluate((0, 7)) == 0
    assert parse(CUBIC, 3).evaluate((1, 1, 1)) == 3
    assert isinstance(parse("x1", 1).evaluate((Fraction(1, 3),)), Fraction)
    with pytest.raises(PolynomialError):
        parse("x1", 2).evaluate((1,))


@given(polynomials(), st.lists(fractions, min_size=3, max_size=3))
def test_numeric_agrees_with_exact(P, pt):
    pt = pt[: P.nvars]
    exact = float(P.evaluate(pt))
    assert np.isclose(P.numeric(np.array([float(v) for v in pt])), exact, rtol=1e-12, atol=1e-12)


# --- calculus ----------------------------------------------------------------------

def test_partials_and_gradient():
    assert parse("x1^2+x2^2", 2).partial(0) == parse("2*x1", 2)
    assert parse("x1^3", 2).partial(1).is_zero()
    assert parse(CUBIC, 3).partial(0) == parse("x2^2+x3^2", 3)
    assert parse("x1*x2", 2).gradient() == [parse("x2", 2), parse("x1", 2)]
    assert parse("x1^2+x2^2", 2).laplacian() == Polynomial.constant(2, 4)
    assert parse("x1*(x2^2+x3^2)", 3).laplacian() == parse("4*x1", 3)
    with pytest.raises((PolynomialError, IndexError)):
        parse("x1", 1).partial(3)


@given(polynomials())
def test_partials_match_cas(P):
    expr, xs = to_sympy(P)
    for i, x in enumerate(xs):
        assert P.partial(i) == from_sympy(sympy.diff(expr, x), xs)


def test_degree_and_homogeneity():
    P = parse("x1^2*x2", 2)
    assert P.degree() == 3 and P.is_homogeneous()
    Q = parse("x1^2 + x1", 1)
    assert Q.degree() == 2 and not Q.is_homogeneous()
    assert parse(CUBIC, 3).is_homogeneous() and parse(CUBIC, 3).degree() == 3
    assert Polynomial.zero(2).degree() is None


def test_order_and_initial_form():
    circle = parse("x1^2+x2^2", 2)
    assert circle.order_at((0, 0)) == 2 and circle.order_at((1, 0)) == 0
    cubic = parse(CUBIC, 3)
    assert cubic.order_at((1, 0, 0)) == 2
    assert cubic.initial_form((1, 0, 0)) == parse("x2^2+x3^2", 3)
    assert parse("x2^2-x1^3", 2).initial_form((0, 0)) == parse("x2^2", 2)
    assert cubic.initial_form((0, 0, 0)) == cubic


@given(polynomials(), st.lists(fractions, min_size=3, max_size=3))
def test_order_equals_initial_form_degree(P, pt):
    if P.is_zero():
        return
    a = pt[: P.nvars]
    assert P.initial_form(a).degree() == P.order_at(a)


def test_sum_sq_partials_examples():
    cross = parse("x1*x2", 2)
    assert sum_sq_partials(cross, 1) == parse("x1^2+x2^2", 2)
    assert sum_sq_partials(cross, 2) == Polynomial.constant(2, 1)
    assert sum_sq_partials(cross, 3).is_zero()
    assert sum_sq_partials(cross, 0) == cross * cross


@given(polynomials(max_exp=2), st.lists(fractions, min_size=3, max_size=3))
def test_sum_sq_partials_vanish_below_order(P, pt):
    if P.is_zero():
        return
    a = pt[: P.nvars]
    m = P.order_at(a)
    for k in range(m):
        assert sum_sq_partials(P, k).evaluate(a) == 0
    assert sum_sq_partials(P, m).evaluate(a) > 0


def test_euler_examples():
    assert parse("x1^2+x2^2", 2).euler() == parse("2*x1^2+2*x2^2", 2)
    assert parse("x1+x2^2", 2).euler() == parse("x1+2*x2^2", 2)
    assert Polynomial.constant(2, 5).euler().is_zero()


def test_euler_identity_on_homogeneous_fixtures(corpus):
    for fx in corpus.values():
        P = fx.poly
        if P.is_homogeneous():
            assert (P.euler() - P * P.degree()).is_zero(), fx.name


# --- substitution and division -------------------------------------------------------

def test_substitute_examples():
    u = Polynomial.variable(2, 0)
    v = Polynomial.variable(2, 1)
    assert parse("x1^2+x2^2", 2).substitute([u, u * v]) == parse("x1^2 + x1^2*x2^2", 2)
    assert parse("x2^2-x1^3", 2).substitute([u, u * v]) == parse("x1^2*x2^2 - x1^3", 2)
    P = parse(CUBIC, 3)
    assert P.substitute([Polynomial.variable(3, i) for i in range(3)]) == P
    with pytest.raises(PolynomialError):
        P.substitute([u, v])


def test_factor_out_variable_power():
    assert parse("x1^2 + x1^2*x2^2", 2).factor_out_variable_power(0, 2) == parse("1 + x2^2", 2)
    assert parse("x1^2*x2^2 - x1^3", 2).factor_out_variable_power(0, 2) == parse("x2^2 - x1", 2)
    with pytest.raises(DivisibilityError) as e:
        parse("x1 + x2", 2).factor_out_variable_power(0, 1)
    assert e.value.term == (0, 1)


@given(polynomial_pairs(3))
def test_ring_axioms(triple):
    P, Q, R = triple
    assert (P + Q) - Q == P
    assert (P * Q) * R == P * (Q * R)
    assert P * (Q + R) == P * Q + P * R
    assert P + Q == Q + P


@given(polynomial_pairs(2), st.data())
def test_substitute_is_homomorphism(pair, data):
    P, Q = pair
    images = [data.draw(polynomials(nvars=P.nvars, max_terms=2, max_exp=2)) for _ in range(P.nvars)]
    assert (P * Q).substitute(images) == P.substitute(images) * Q.substitute(images)
    assert (P + Q).substitute(images) == P.substitute(images) + Q.substitute(images)


@given(polynomials(), st.lists(fractions, min_size=3, max_size=3))
def test_translate_matches_cas(P, a):
    a = a[: P.nvars]
    expr, xs = to_sympy(P)
    shifted = expr.subs({x: x + sympy.Rational(v.numerator, v.denominator) for x, v in zip(xs, a)},
                        simultaneous=True)
    assert P.translate(a) == from_sympy(shifted, xs)
