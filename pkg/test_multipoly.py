#!/usr/bin/env python3
"""
Test script for sparse polynomials over Q(i)
"""

import random
import sys
import os
from fractions import Fraction

# Add the current directory to Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from jetspace.coeff_field import GaussianRational, I
from jetspace.errors import JetspaceError, MissingAssignmentError, MissingWeightError, PolynomialSyntaxError, \
    ZeroPolynomialError
from jetspace.multipoly import (GREVLEX, LEX, MonomialOrder, Polynomial, WeightVector, aux_var, collect, evaluate,
                                is_weighted_homogeneous, jet_var, leading_form, parse_polynomial, parse_variable,
                                partial_derivative, poly_arith, substitute, weighted_order)

P = parse_polynomial


def test_variable_names():
    print("🧪 Variable names")
    assert parse_variable("a2") == jet_var('a', 2)
    assert parse_variable("c5_3") == jet_var('c', 5, 3), "a2_3 style names carry an s-index"
    assert parse_variable("c5_3").is_wedge and parse_variable("c5_3").jet() == jet_var('c', 5)
    assert parse_variable("Ct") == aux_var("Ct")
    assert parse_variable("nz_2") == aux_var("nz", 2)
    assert jet_var('a', 3) < jet_var('b', 1) < jet_var('c', 1) < aux_var('s'), "families order a < b < c < aux"
    try:
        parse_variable("i")
        assert False, "i is the imaginary unit"
    except PolynomialSyntaxError:
        pass
    print("✅ Variable names passed")


def test_parse_and_print():
    print("🧪 Parsing and printing")
    p = P("c4^2 + a2^4")
    assert len(p) == 2 and p.total_degree() == 4
    assert P("(a1 + i*c2)*(a1 - i*c2)") == P("a1^2 + c2^2"), "(a+ib)(a-ib) = a^2+b^2"
    assert P("a1**2/2") == P("a1^2").scale(Fraction(1, 2))
    for text in ("2*i*a1^2*(c4-i*a2^2)", "b2^3 - 3/2*c3*a1 + (1+i)", "Z^2*Ct - 2*i*a3*Z^3 + B^3"):
        q = P(text)
        assert P(str(q)) == q, f"{text!r} does not survive printing: {q}"
    try:
        P("a1 + * b2")
        assert False, "syntax error expected"
    except PolynomialSyntaxError as e:
        assert e.column > 0, "syntax errors carry the column"
    try:
        P("a1 / b2")
        assert False, "division by a variable is not a polynomial"
    except PolynomialSyntaxError:
        pass
    print("✅ Parsing and printing passed")


def test_ring_axioms_randomized():
    print("🧪 Ring axioms on random polynomials")
    rng = random.Random(11)
    names = ["a1", "a2", "b2", "c3"]

    def random_poly():
        text = " + ".join(f"{rng.randint(-3, 3)}*{rng.choice(names)}^{rng.randint(0, 3)}*{rng.choice(names)}"
                          for _ in range(rng.randint(1, 4)))
        return P(text)

    for _ in range(60):
        f, g, h = random_poly(), random_poly(), random_poly()
        assert (f * g) * h == f * (g * h), "multiplication is not associative"
        assert f * (g + h) == f * g + f * h, "distributivity fails"
        assert f - f == Polynomial(), "f - f should vanish"
        assert (f + g) - g == f
        assert poly_arith(f, g, 'mul') == f * g and poly_arith(f, g, 'sub') == f - g
    try:
        poly_arith(P("a1"), P("a1"), 'div')
        assert False, "only add, sub and mul are ring operations"
    except ValueError:
        pass
    print("✅ Ring axioms passed")


def test_orders_and_leading_terms():
    print("🧪 Monomial orders")
    p = P("a1^3 + a1*b1^2 + c1")
    m, c = p.leading_term(GREVLEX)
    assert Polynomial.monomial(m, c) == P("a1*b1^2"), f"grevlex leading term is {Polynomial.monomial(m, c)}"
    m, c = p.leading_term(LEX)
    assert Polynomial.monomial(m, c) == P("c1"), "lex ranks the c family highest"
    block = MonomialOrder('block', frozenset([parse_variable("a1")]))
    m, c = p.leading_term(block)
    assert Polynomial.monomial(m, c) == P("a1^3"), "block variables dominate"
    try:
        Polynomial().leading_term()
        assert False, "zero has no leading term"
    except ZeroPolynomialError:
        pass
    print("✅ Monomial orders passed")


def test_substitute_and_truncate():
    print("🧪 Substitution")
    p = P("a1^2 + b1")
    image = substitute(p, {parse_variable("a1"): P("t + t^2"), parse_variable("b1"): P("t^3")})
    assert image == P("t^2 + 3*t^3 + t^4"), f"got {image}"
    truncated = substitute(p, {parse_variable("a1"): P("t + t^2"), parse_variable("b1"): P("t^3")},
                           truncate=(aux_var('t'), 3))
    assert truncated == P("t^2 + 3*t^3"), f"truncation kept {truncated}"
    parts = collect(P("a1*s^2 + b2*s^2 + c3"), aux_var('s'))
    assert parts[2] == P("a1 + b2") and parts[0] == P("c3")
    print("✅ Substitution passed")


def test_evaluate_and_derivatives():
    print("🧪 Evaluation and derivatives")
    p = P("c2^2 + a1^4")
    point = {parse_variable("c2"): I, parse_variable("a1"): 1}
    assert evaluate(p, point) == 0, "c2 = i, a1 = 1 is a zero of c2^2 + a1^4"
    assert partial_derivative(p, parse_variable("a1")) == P("4*a1^3")
    try:
        evaluate(p, {parse_variable("c2"): 1})
        assert False, "missing assignment should raise"
    except MissingAssignmentError as e:
        assert isinstance(e, JetspaceError)
    print("✅ Evaluation and derivatives passed")


def test_weights():
    print("🧪 Weighted gradings")
    w = WeightVector.from_names({"x": 3, "y": 4, "z": 6})
    F = P("z^2 + y^3 + x^4")
    assert weighted_order(F, w) == 12
    assert is_weighted_homogeneous(F, w) == (True, Fraction(12))
    w2 = WeightVector.from_names({"x": 1, "y": 2, "z": 2})
    assert leading_form(F, w2) == P("z^2 + x^4"), "mu = (1,2,2) keeps z^2 + x^4"
    try:
        weighted_order(P("x + q"), w)
        assert False, "q has no weight"
    except MissingWeightError:
        pass
    assert GaussianRational(2) * P("x") == P("2*x")
    print("✅ Weighted gradings passed")


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 TESTING POLYNOMIALS")
    print("=" * 60)
    test_variable_names()
    test_parse_and_print()
    test_ring_axioms_randomized()
    test_orders_and_leading_terms()
    test_substitute_and_truncate()
    test_evaluate_and_derivatives()
    test_weights()
    print("\n🎯 All polynomial tests passed")
