"""Grammar, expression evaluation, and Taylor expansion."""

import math
import random
from fractions import Fraction as F

import pytest

from netblow.errors import LaurentError, ParseError, SymbolError
from netblow.expr import parse_expression, taylor_expand
from netblow.poly import (ROLE_PARAMETER, ROLE_RADIAL, ROLE_STATE, Monomial,
                          Polynomial, SymbolTable)

from conftest import sym


@pytest.fixture
def table():
    return SymbolTable([
        ("x1", ROLE_STATE), ("x2", ROLE_STATE),
        ("ps1", ROLE_STATE), ("ps2", ROLE_STATE), ("u", ROLE_STATE),
        ("a1", ROLE_PARAMETER), ("w12", ROLE_PARAMETER),
        ("alpha", ROLE_PARAMETER), ("beta", ROLE_PARAMETER),
        ("r", ROLE_RADIAL),
    ])


def test_parse_distributes(table):
    e = parse_expression("a1*x1 + w12*(x2 - x1)", table)
    p = e.to_polynomial(table)
    a1, x1 = sym("a1", table), sym("x1", table)
    w12, x2 = sym("w12", table), sym("x2", table)
    assert p == a1 * x1 + w12 * x2 - w12 * x1


def test_parse_trig_affine(table):
    e = parse_expression("sin(ps1 - ps2 + beta)", table)
    assert e.contains_trig()
    assert e.free_symbols() == {"ps1", "ps2", "beta"}
    arg = e.arg
    assert arg.const == 0
    assert dict(arg.coeffs) == {"ps1": F(1), "ps2": F(-1), "beta": F(1)}


def test_parse_negative_power_rules(table):
    with pytest.raises(LaurentError):
        parse_expression("x1^-2", table)
    e = parse_expression("r^-2", table)
    assert e.to_polynomial(table).r_valuation() == -2


def test_parse_errors_carry_position(table):
    with pytest.raises(ParseError) as err:
        parse_expression("a1*(x1 +", table)
    assert "column" in str(err.value) or "end of input" in str(err.value)
    with pytest.raises(ParseError):
        parse_expression("zz*x1", table)
    with pytest.raises(ParseError):
        parse_expression("sin(x1*x2)", table)   # non-affine trig argument


def test_parse_decimal_and_rational(table):
    assert parse_expression("0.2", table).to_polynomial(table).constant_term() == F(1, 5)
    assert parse_expression("3/4*x1", table).to_polynomial(table).coefficient(
        Monomial([("x1", 1)])) == F(3, 4)


def test_parse_unary_minus(table):
    p = parse_expression("-x1 + 2", table).to_polynomial(table)
    assert p == 2 - sym("x1", table)


def test_evaluate_trig_numeric(table):
    e = parse_expression("sin(ps1)", table)
    value = e.evaluate({"ps1": math.pi / 2})
    assert abs(value - 1.0) <= 1e-15


def test_evaluate_exact_polynomial_path(table):
    e = parse_expression("a1*x1 + w12*(x2 - x1)", table)
    assert e.evaluate({"a1": 2, "x1": F(1, 2), "w12": 4, "x2": 0}) == -1


def test_taylor_symbolic_offset(table):
    e = parse_expression("sin(ps1 - ps2 + beta)", table)
    p = taylor_expand(e, {"ps1": 0, "ps2": 0}, 1, table)
    tb = p.table
    sin_b, cos_b = sym("sin_beta", tb), sym("cos_beta", tb)
    ps1, ps2 = sym("ps1", tb), sym("ps2", tb)
    assert p == sin_b + cos_b * (ps1 - ps2)
    assert ("sin_beta", "cos_beta") in tb.pairs


def test_taylor_standard_series(table):
    u = parse_expression("sin(u)", table)
    p = taylor_expand(u, {"u": 0}, 3, table)
    assert p == sym("u", table) - F(1, 6) * sym("u", table) ** 3
    c = taylor_expand(parse_expression("cos(u)", table), {"u": 0}, 0, table)
    assert c == Polynomial.constant(1, table)


def test_taylor_truncation_error_bound(table):
    # |series - exact| <= ||u||^(degree+1) on ||u|| <= 1/10
    rng = random.Random(31)
    e = parse_expression("sin(u)", table)
    for degree in (1, 3, 5):
        p = taylor_expand(e, {"u": 0}, degree, table)
        for _ in range(40):
            u = rng.uniform(-0.1, 0.1)
            err = abs(p.evaluate({"u": u}) - math.sin(u))
            assert err <= abs(u) ** (degree + 1) + 1e-18


def test_taylor_nonzero_rational_center(table):
    # recentering a polynomial is exact at any degree covering it
    e = parse_expression("x1^2", table)
    p = taylor_expand(e, {"x1": F(1, 2)}, 2, table)
    assert p == sym("x1", table) ** 2
    # truncation at degree 1 keeps the tangent line at the center
    lin = taylor_expand(e, {"x1": F(1, 2)}, 1, table)
    assert lin == sym("x1", table) - F(1, 4)


def test_taylor_rejects_nonzero_trig_offset(table):
    e = parse_expression("sin(u + 1)", table)
    with pytest.raises(SymbolError):
        taylor_expand(e, {"u": 0}, 2, table)


def test_taylor_rejects_irrational_center(table):
    e = parse_expression("x1^2", table)
    with pytest.raises(TypeError):
        taylor_expand(e, {"x1": 0.5}, 2, table)


def test_expression_string_reparses(table):
    src = "a1*x1 + w12*(x2 - x1) - 3/4*x2^3"
    e = parse_expression(src, table)
    again = parse_expression(str(e), table)
    assert e.to_polynomial(table) == again.to_polynomial(table)
    trig_src = "sin(ps1 - ps2 + beta)"
    e2 = parse_expression(trig_src, table)
    again2 = parse_expression(str(e2), table)
    pt = {"ps1": 0.3, "ps2": -0.2, "beta": 0.05}
    assert abs(e2.evaluate(pt) - again2.evaluate(pt)) < 1e-15
