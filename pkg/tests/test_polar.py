"""Planar polar blow-up with parameter rescaling and circle equilibria."""

import math
from fractions import Fraction as F

import pytest

from netblow.blowup import (ChartError, circle_equilibria, polar_blowup_2d,
                            polar_consistency_check)
from netblow.examples import get_example
from netblow.netsys import VectorField, assemble
from netblow.poly import (ROLE_PARAMETER, ROLE_STATE, Polynomial,
                          SymbolTable)

from conftest import sym


def hot_planar_field():
    """Cubic-stabilized planar system with a1 = alpha, a2 = -alpha,
    w12 = alpha/2, w21 = -alpha/2 substituted symbolically."""
    ns = get_example("diffusive2-hot").build()
    vf = assemble(ns)
    table = vf.components[0].table.extended([("alpha", ROLE_PARAMETER)])
    al = Polynomial.symbol("alpha", table)
    return vf.substitute_parameters({"a1": al, "a2": -al,
                                     "w12": F(1, 2) * al,
                                     "w21": -F(1, 2) * al})


@pytest.fixture(scope="module")
def hot_trig_field():
    return polar_blowup_2d(hot_planar_field(), {"alpha": 3, "w": 1}, 3)


def eval_at_multiple_of_quarter(p, s_is_minus_c: bool):
    """Exact value of a trig-normalized polynomial at theta with |C| = |S| =
    sqrt(2)/2.  Substitutes S = +-C, reduces C^2 -> 1/2 and demands that the
    odd part vanish (otherwise the value is irrational and the caller's
    exactness claim is already false)."""
    t = p.table
    C = Polynomial.symbol(t.trig_cos, t)
    substituted = p.substitute({t.trig_sin: (-C if s_is_minus_c else C)})
    even = F(0)
    for mono, coeff in substituted.terms.items():
        e = mono.exp_of(t.trig_cos)
        rest = [(n, k) for n, k in mono.exps if n != t.trig_cos]
        assert not rest, "parameters must be bound before exact evaluation"
        if e % 2:
            # odd powers of C contribute sqrt(2)/2 multiples: must cancel
            assert coeff == 0
        else:
            even += coeff * F(1, 2) ** (e // 2)
    return even


def test_polar_matches_reference_formulas(hot_trig_field):
    # dense comparison against the closed-form coefficient functions
    tf = hot_trig_field
    A, W = 1.0, -1.0

    def f1_ref(t):
        return (4 * A * math.cos(2 * t)
                + W * (6 * math.sin(2 * t) + 3 * math.sin(4 * t)
                       - math.cos(4 * t) + 9)) / 8

    def f2_ref(t):
        return (-2 * (2 * A + 3 * W) * math.sin(2 * t) - 4 * A
                + W * math.sin(4 * t) + 3 * W * math.cos(4 * t) - 3 * W) / 8

    for k in range(64):
        theta = 2 * math.pi * k / 64
        assert abs(tf.evaluate("f1", theta, {"alpha_b": A, "w_b": W})
                   - f1_ref(theta)) <= 1e-12
        assert abs(tf.evaluate("f2", theta, {"alpha_b": A, "w_b": W})
                   - f2_ref(theta)) <= 1e-12


def test_polar_exact_spot_check_at_three_quarter_pi(hot_trig_field):
    # theta = 3*pi/4: S = -C, C^2 = 1/2; f2 vanishes exactly and f1 = W/2
    tf = hot_trig_field
    bound_f2 = tf.f2.substitute({"alpha_b": F(1), "w_b": F(-1)})
    bound_f1 = tf.f1.substitute({"alpha_b": F(1), "w_b": F(-1)})
    assert eval_at_multiple_of_quarter(bound_f2, s_is_minus_c=True) == 0
    assert eval_at_multiple_of_quarter(bound_f1, s_is_minus_c=True) == F(-1, 2)


def test_polar_trivial_rotation():
    t = SymbolTable([("x", ROLE_STATE), ("y", ROLE_STATE)])
    x, y = sym("x", t), sym("y", t)
    rotation = VectorField(("x", "y"), (-y, x))
    tf = polar_blowup_2d(rotation, {}, 0)
    assert tf.f1.is_zero
    assert tf.f2 == Polynomial.constant(1, tf.f2.table)
    radial = VectorField(("x", "y"), (x, y))
    tf2 = polar_blowup_2d(radial, {}, 0)
    assert tf2.f1 == Polynomial.constant(1, tf2.f1.table)
    assert tf2.f2.is_zero


def test_polar_wrong_division_exponent_errors():
    vf = hot_planar_field()
    with pytest.raises(ChartError):
        polar_blowup_2d(vf, {"alpha": 3, "w": 1}, 5)
    with pytest.raises(ChartError):
        polar_blowup_2d(vf, {"alpha": 3, "w": 1}, 1)


def test_polar_sin_degree_normalized(hot_trig_field):
    for p in (hot_trig_field.f1, hot_trig_field.f2):
        assert all(m.exp_of("S") <= 1 for m in p.terms)


def test_circle_equilibria_eight_roots(hot_trig_field):
    expected = [0.431808, 1.26918, 2.35619, 2.54775, 3.5734, 4.41077,
                5.49779, 5.68935]
    res = circle_equilibria(hot_trig_field, {"alpha_b": 1, "w_b": -1})
    thetas = res.thetas()
    assert len(thetas) == 8
    for got, ref in zip(thetas, expected):
        assert abs(got - ref) <= 1e-4
    classes = [r.klass for r in res.roots]
    assert classes[1::2] == ["stable-node"] * 4
    assert classes[0::2] == ["saddle"] * 4
    assert all(r.f1_value < 0 for r in res.roots)


def test_circle_equilibria_double_roots_flagged(hot_trig_field):
    # W = 0 collapses f2 to -(1/2)(1 + sin 2 theta): tangency roots at
    # 3*pi/4 and 7*pi/4 with no sign change
    res = circle_equilibria(hot_trig_field, {"alpha_b": 1, "w_b": 0})
    thetas = res.thetas()
    assert len(thetas) == 2
    assert abs(thetas[0] - 3 * math.pi / 4) <= 1e-6
    assert abs(thetas[1] - 7 * math.pi / 4) <= 1e-6
    assert all(r.klass == "non-hyperbolic" for r in res.roots)


def test_polar_reconstruction_consistency(hot_trig_field):
    worst = polar_consistency_check(
        hot_planar_field(), hot_trig_field, {"alpha": 3, "w": 1},
        {"alpha": 1.0, "w": -1.0}, samples=50, seed=2, tol=1e-12)
    assert worst <= 1e-12
