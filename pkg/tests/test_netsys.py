"""Network systems: assembly, linear decomposition, file format."""

import random
from fractions import Fraction as F

import pytest

from netblow.errors import EquilibriumError, SymbolError
from netblow.examples import get_example
from netblow.netsys import (NetworkSystem, assemble,
                            diffusive_weights_2node, emit_system_file,
                            lift_parameters, linearize, parse_system_file,
                            shift_origin)


from conftest import random_rational, sym


@pytest.fixture
def diffusive2():
    return get_example("diffusive2").build()


def table_of(vf):
    return vf.components[0].table


def test_assemble_diffusive(diffusive2):
    vf = assemble(diffusive2)
    t = table_of(vf)
    a1, a2 = sym("a1", t), sym("a2", t)
    x1, x2 = sym("x1", t), sym("x2", t)
    w12, w21 = sym("w12", t), sym("w21", t)
    assert vf.component("x1") == a1 * x1 + w12 * (x2 - x1)
    assert vf.component("x2") == a2 * x2 + w21 * (x1 - x2)


def test_assemble_empty_interactions():
    entry = get_example("diffusive2")
    ns = entry.build()
    bare = NetworkSystem(name="bare", node_symbols=ns.node_symbols,
                         parameter_symbols=ns.parameter_symbols,
                         internal=ns.internal, interactions=())
    vf = assemble(bare)
    t = table_of(vf)
    assert vf.component("x1") == sym("a1", t) * sym("x1", t)
    assert vf.component("x2") == sym("a2", t) * sym("x2", t)


def test_assemble_matches_direct_evaluation(diffusive2):
    rng = random.Random(41)
    vf = assemble(diffusive2)
    names = ("x1", "x2", "a1", "a2", "w12", "w21")
    for _ in range(100):
        point = {n: random_rational(rng) for n in names}
        direct1 = (point["a1"] * point["x1"]
                   + point["w12"] * (point["x2"] - point["x1"]))
        direct2 = (point["a2"] * point["x2"]
                   + point["w21"] * (point["x1"] - point["x2"]))
        assert vf.evaluate(point) == [direct1, direct2]


def test_assemble_trig_requires_degree():
    ns = get_example("kuramoto-adaptive").build(n=2)
    with pytest.raises(SymbolError):
        assemble(ns)


def test_assemble_kuramoto_leading_part():
    # degree-1 expansion in the states with alpha, beta symbolic reproduces the
    # slow-fast leading form with sin_/cos_ stand-ins
    ns = get_example("kuramoto-adaptive").build(n=2)
    center = {"ps1": 0, "ps2": 0, "sg11": 0, "sg12": 0, "sg21": 0, "sg22": 0}
    vf = assemble(ns, taylor_degree=1, center=center)
    t = table_of(vf)
    sa, ca = sym("sin_alpha", t), sym("cos_alpha", t)
    sb, cb = sym("sin_beta", t), sym("cos_beta", t)
    ps1, ps2 = sym("ps1", t), sym("ps2", t)
    sg = {(i, j): sym(f"sg{i}{j}", t) for i in (1, 2) for j in (1, 2)}
    eps = sym("eps", t)
    half = F(1, 2)
    exp1 = half * (sb * ca * (ps1 - ps2)
                   - sg[(1, 1)] * sa - sg[(1, 2)] * (sa + ca * (ps1 - ps2)))
    assert vf.component("ps1") == exp1
    assert vf.component("sg12") == -eps * (cb * (ps1 - ps2) + sg[(1, 2)])
    assert vf.component("sg11") == -eps * sg[(1, 1)]


def test_linearize_diffusive_decomposition(diffusive2):
    params = get_example("diffusive2").default_params
    dec = linearize(diffusive2, {"x1": 0, "x2": 0}, params)
    assert dec.D == (F(2), F(1))
    assert dec.A == ((F(-4), F(4)), (F(-1), F(1)))
    assert dec.linear_matrix() == ((F(-2), F(4)), (F(-1), F(2)))


def test_linearize_zero_weights(diffusive2):
    dec = linearize(diffusive2, {"x1": 0, "x2": 0},
                    {"a1": 2, "a2": 1, "w12": 0, "w21": 0})
    assert all(v == 0 for row in dec.A for v in row)


def test_linearize_cubic_network():
    entry = get_example("cubic3")
    dec = linearize(entry.build(), {"x1": 0, "x2": 0, "x3": 0},
                    entry.default_params)
    assert dec.D == (F(0), F(0), F(0))
    eps = F(1, 20)
    assert dec.A == ((-eps, eps, F(0)), (F(0), -eps, eps), (eps, F(0), -eps))


def test_linearize_rejects_non_equilibrium(diffusive2):
    with pytest.raises(EquilibriumError):
        linearize(diffusive2, {"x1": 1, "x2": 0},
                  get_example("diffusive2").default_params)


def test_linearize_reconstructs_jacobian():
    # Jacobian of the assembled field equals D + A + Jacobian of residues
    rng = random.Random(43)
    entry = get_example("gradient2")
    ns = entry.build()
    params = dict(entry.default_params)
    dec = linearize(ns, {"x1": 0, "x2": 0}, params)
    vf = assemble(ns).substitute_parameters(params)
    xs = {"x1": F(0), "x2": F(0)}
    for i, node in enumerate(ns.node_symbols):
        for j, other in enumerate(ns.node_symbols):
            full = vf.component(node).differentiate(other).evaluate(xs)
            res = (dec.residual_internal[i] + dec.residual_interaction[i]
                   ).differentiate(other).evaluate(xs)
            expected = dec.A[i][j] + (dec.D[i] if i == j else 0) + res
            assert full == expected
    # residues vanish to second order
    for p in dec.residual_internal + dec.residual_interaction:
        assert p.evaluate(xs) == 0
        for v in ns.node_symbols:
            assert p.differentiate(v).evaluate(xs) == 0


def test_diffusive_weights_formula():
    assert diffusive_weights_2node(2, 1) == (F(4), F(-1))
    assert diffusive_weights_2node(1, -1) == (F(1, 2), F(-1, 2))
    with pytest.raises(ValueError):
        diffusive_weights_2node(1, 1)


def test_diffusive_weights_zero_nilpotency_conditions():
    rng = random.Random(47)
    count = 0
    while count < 50:
        a1 = random_rational(rng)
        a2 = random_rational(rng)
        if a1 == a2 or a1 == 0 or a2 == 0:
            continue
        count += 1
        w12, w21 = diffusive_weights_2node(a1, a2)
        assert a1 - w12 + a2 - w21 == 0            # trace
        assert a1 * a2 - a1 * w21 - a2 * w12 == 0  # determinant


def test_shift_origin_affine(diffusive2):
    vf = assemble(diffusive2).substitute_parameters(
        get_example("diffusive2").default_params)
    shifted = shift_origin(vf, {"x1": F(1), "x2": F(1, 2)})
    # the shifted point was an equilibrium direction value: G(0) = F(x*)
    origin = {"x1": F(0), "x2": F(0)}
    assert shifted.evaluate(origin) == vf.evaluate({"x1": F(1), "x2": F(1, 2)})
    zero_shift = shift_origin(vf, {"x1": F(0)})
    assert zero_shift.component("x1") == vf.component("x1")


def test_lift_parameters(diffusive2):
    vf = assemble(diffusive2)
    lifted = lift_parameters(vf, ["a1"])
    assert lifted.variables == ("x1", "x2", "a1")
    assert lifted.component("a1").is_zero
    assert "a1" not in lifted.frozen_parameters
    with pytest.raises(SymbolError):
        lift_parameters(vf, ["nope"])


def test_system_file_round_trip(diffusive2):
    text = emit_system_file(diffusive2)
    again = parse_system_file(text)
    assert again.node_symbols == diffusive2.node_symbols
    assert again.parameter_symbols == diffusive2.parameter_symbols
    vf1, vf2 = assemble(diffusive2), assemble(again)
    for v in vf1.variables:
        assert vf1.component(v) == vf2.component(v)


def test_system_file_round_trip_adaptive():
    ns = get_example("adaptive3").build()
    again = parse_system_file(emit_system_file(ns))
    assert again.slow_symbol == "eps"
    vf1, vf2 = assemble(ns), assemble(again)
    assert vf1.variables == vf2.variables
    for v in vf1.variables:
        assert vf1.component(v) == vf2.component(v)


def test_system_file_round_trip_trig():
    ns = get_example("kuramoto-adaptive").build(n=2)
    again = parse_system_file(emit_system_file(ns))
    center = {"ps1": 0, "ps2": 0, "sg11": 0, "sg12": 0, "sg21": 0, "sg22": 0,
              "alpha": 0, "beta": 0}
    vf1 = assemble(ns, taylor_degree=3, center=center)
    vf2 = assemble(again, taylor_degree=3, center=center)
    assert vf1.variables == vf2.variables
    for v in vf1.variables:
        assert vf1.component(v) == vf2.component(v)


def test_invalid_system_declarations():
    t = get_example("diffusive2").build()
    with pytest.raises(SymbolError):
        NetworkSystem(name="bad", node_symbols=("x1", "x2"),
                      parameter_symbols=("a1", "a2", "w12", "w21"),
                      internal={"x1": t.internal["x1"],
                                "x2": t.interactions[0].coupling},
                      interactions=())
