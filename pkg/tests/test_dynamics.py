"""Integrator accuracy, equilibrium search, classification, probes, sweeps."""

import math
from fractions import Fraction as F

import pytest

from netblow.dynamics import (IntegratorControls, classify_equilibrium,
                              compile_field, find_equilibria, integrate,
                              integrate_rk4_fixed, stability_probe,
                              sweep_portrait)
from netblow.errors import EquilibriumError
from netblow.examples import get_example
from netblow.expr import parse_expression
from netblow.netsys import VectorField, assemble
from netblow.poly import (ROLE_PARAMETER, ROLE_STATE, Polynomial, SymbolTable)

from conftest import sym


def field_1d_decay():
    t = SymbolTable([("x", ROLE_STATE)])
    return VectorField(("x",), (-sym("x", t),))


def field_rotation():
    t = SymbolTable([("x", ROLE_STATE), ("y", ROLE_STATE)])
    return VectorField(("x", "y"), (-sym("y", t), sym("x", t)))


def test_integrate_exponential_decay():
    traj = integrate(field_1d_decay(), [1.0], T=1.0)
    assert traj.termination == "reached-T"
    assert abs(traj.final_state[0] - math.exp(-1)) <= 1e-7


def test_integrate_harmonic_oscillator():
    traj = integrate(field_rotation(), [1.0, 0.0], T=2 * math.pi)
    x, y = traj.final_state
    assert abs(x - 1.0) <= 1e-6 and abs(y) <= 1e-6
    drift = max(abs(a * a + b * b - 1.0) for a, b in traj.states)
    assert drift <= 1e-6


def test_integrate_hot_trajectory_contracts_on_kernel_line():
    # on the kernel line x2 = -x1 the cubic terms contract monotonically;
    # off the line the nilpotent shear first drives a large excursion, so the
    # honest statements at T = 200 are strict contraction on the line and
    # boundedness off it
    entry = get_example("diffusive2-hot")
    vf = assemble(entry.build())
    params = {k: float(v) for k, v in entry.default_params.items()}
    on_line = integrate(vf, [0.1, -0.1], params=params, T=200.0)
    assert math.hypot(*on_line.final_state) < math.hypot(0.1, -0.1)
    off_line = integrate(vf, [0.1, 0.1], params=params, T=200.0)
    assert off_line.termination == "reached-T"
    assert math.hypot(*off_line.final_state) < 3.0


def test_integrate_divergence_detection():
    t = SymbolTable([("x", ROLE_STATE)])
    vf = VectorField(("x",), (sym("x", t) ** 2,))   # finite-time blow-up
    traj = integrate(vf, [1.0], T=10.0)
    assert traj.termination in {"diverged", "step-underflow"}


def test_integrate_convergence_termination():
    ctl = IntegratorControls(abs_tol=1e-13)
    traj = integrate(field_1d_decay(), [1.0], T=1e6, controls=ctl)
    assert traj.termination == "converged"
    assert abs(traj.final_state[0]) < 1e-10


def test_integrate_expression_field():
    t = SymbolTable([("x", ROLE_STATE), ("om", ROLE_PARAMETER)])
    e = parse_expression("0 - om*sin(x)", t)
    traj = integrate([e], [0.5], params={"om": 1.0}, T=5.0, variables=["x"])
    assert abs(traj.final_state[0]) < 0.1   # pendulum settles toward 0


def test_rk4_reference_order():
    def error(h):
        traj = integrate_rk4_fixed(field_1d_decay(), [1.0], T=1.0, h=h)
        return abs(traj.final_state[0] - math.exp(-1))
    assert error(0.1) / error(0.05) >= 12.0


def test_find_equilibria_chart_line():
    # restricted planar chart at a = (2, 1): double root at a2/a1 = 1/2
    t = SymbolTable([("xb", ROLE_STATE)])
    xb = sym("xb", t)
    vf = VectorField(("xb",), (-(1 - 2 * xb) ** 2,))
    res = find_equilibria(vf, box={"xb": (-2.0, 2.0)}, grid=21)
    assert len(res.points) == 1
    assert abs(res.points[0][0] - 0.5) <= 1e-6
    assert res.residuals[0] <= 1e-12


def test_find_equilibria_cubic_chart_levels():
    # stationary values of -x + x^3 (slow-fast chart slice): 0 and +-1
    t = SymbolTable([("xb", ROLE_STATE)])
    xb = sym("xb", t)
    vf = VectorField(("xb",), (xb - xb ** 3,))
    res = find_equilibria(vf, box={"xb": (-1.5, 1.5)}, grid=21)
    got = sorted(p[0] for p in res.points)
    assert len(got) == 3
    for val, ref in zip(got, (-1.0, 0.0, 1.0)):
        assert abs(val - ref) <= 1e-10


def test_find_equilibria_delta_perturbed_quotient():
    # perturbed weights w* + delta at a = (1, -1), delta = 1: the restricted
    # chart equation has the closed-form roots -1 and 1/3
    t = SymbolTable([("x2b", ROLE_STATE)])
    x2 = sym("x2b", t)
    w12, w21 = F(3, 2), F(1, 2)
    a1, a2 = F(1), F(-1)
    f = w21 + (-a1 + a2 + w12 - w21) * x2 - w12 * x2 ** 2
    vf = VectorField(("x2b",), (f,))
    res = find_equilibria(vf, box={"x2b": (-2.0, 2.0)}, grid=21)
    got = sorted(p[0] for p in res.points)
    assert len(got) == 2
    assert abs(got[0] - (-1.0)) <= 1e-10
    assert abs(got[1] - 1 / 3) <= 1e-10
    # exact confirmation through rationalization
    for val in got:
        assert f.evaluate({"x2b": F(round(val * 3), 3)}) == 0


def test_find_equilibria_exact_residual_rationalization():
    entry = get_example("diffusive2")
    vf = assemble(entry.build()).substitute_parameters(
        {"a1": F(-2), "a2": F(1), "w12": F(-17, 15), "w21": F(8, 15)})
    res = find_equilibria(vf, box={"x1": (-1.0, 1.0), "x2": (-1.0, 1.0)},
                          grid=5)
    assert len(res.points) == 1
    point = {v: F(round(val)) for v, val in zip(vf.variables, res.points[0])}
    assert vf.evaluate(point) == [0, 0]


def test_classify_equilibrium_exact_nilpotent():
    entry = get_example("diffusive2")
    vf = assemble(entry.build())
    rep = classify_equilibrium(vf, {"x1": 0, "x2": 0},
                               params=entry.default_params)
    assert rep.exact
    assert rep.klass == "nilpotent"
    assert rep.spectrum.char_poly == (F(1), F(0), F(0))


def test_classify_degenerate_shifted_chart_field():
    # the chart field shifted to its equilibrium is as degenerate as it can
    # get: identically zero linearization at the origin, class nilpotent
    t = SymbolTable([("r", "radial"), ("xb", ROLE_STATE)])
    r, xb = sym("r", t), sym("xb", t)
    vf = VectorField(("r", "xb"), (4 * r * xb, -4 * xb ** 2))
    rep = classify_equilibrium(vf, {"r": 0, "xb": 0})
    assert rep.exact
    assert rep.klass == "nilpotent"
    assert rep.jacobian.is_zero()


def test_classify_equilibrium_rejects_off_equilibrium():
    entry = get_example("diffusive2")
    vf = assemble(entry.build())
    with pytest.raises(EquilibriumError):
        classify_equilibrium(vf, {"x1": 1, "x2": 0}, params=entry.default_params)


def test_classify_saddle_and_sink_eigenvalues():
    t = SymbolTable([("r", "radial"), ("xb", ROLE_STATE)])
    r, xb = sym("r", t), sym("xb", t)
    a = F(-1)
    vf = VectorField(("r", "xb"),
                     (a * r * (1 - r), -a * xb + a * xb ** 3 + r * (a * xb - a * xb ** 4)))
    saddle = classify_equilibrium(vf, {"r": 0, "xb": 0})
    evs = sorted(e.real for e in saddle.spectrum.eigenvalues)
    assert saddle.klass == "hyperbolic"
    assert abs(evs[0] + 1) <= 1e-9 and abs(evs[1] - 1) <= 1e-9
    sink = classify_equilibrium(vf, {"r": 0, "xb": 1})
    evs = sorted(e.real for e in sink.spectrum.eigenvalues)
    assert sink.klass == "hyperbolic"
    assert abs(evs[0] + 2) <= 1e-9 and abs(evs[1] + 1) <= 1e-9


def test_probe_linear_stable_and_unstable():
    t = SymbolTable([("x", ROLE_STATE), ("y", ROLE_STATE)])
    x, y = sym("x", t), sym("y", t)
    sink = VectorField(("x", "y"), (-x, -y))
    verdict = stability_probe(sink, [0.0, 0.0], radius=0.05, samples=16,
                              T=60.0, seed=0)
    assert verdict.verdict == "stable"
    assert verdict.converged == 16
    saddle = VectorField(("x", "y"), (x, -y))
    verdict = stability_probe(saddle, [0.0, 0.0], radius=0.05, samples=16,
                              T=60.0, seed=0)
    assert verdict.verdict == "unstable"
    assert verdict.escaped >= 1
    assert verdict.escape_examples


def test_probe_monotone_in_radius_linear():
    t = SymbolTable([("x", ROLE_STATE), ("y", ROLE_STATE)])
    x, y = sym("x", t), sym("y", t)
    sink = VectorField(("x", "y"), (-x, -2 * y))
    big = stability_probe(sink, [0.0, 0.0], radius=0.05, samples=8, T=60.0, seed=1)
    small = stability_probe(sink, [0.0, 0.0], radius=0.025, samples=8, T=60.0, seed=1)
    assert big.verdict == small.verdict == "stable"


def test_probe_thread_cap_matches_sequential(monkeypatch):
    t = SymbolTable([("x", ROLE_STATE), ("y", ROLE_STATE)])
    x, y = sym("x", t), sym("y", t)
    sink = VectorField(("x", "y"), (-x, -y + x * y))
    seq = stability_probe(sink, [0.0, 0.0], radius=0.05, samples=8, T=30.0,
                          seed=6)
    monkeypatch.setenv("NETBLOW_THREADS", "4")
    par = stability_probe(sink, [0.0, 0.0], radius=0.05, samples=8, T=30.0,
                          seed=6)
    assert seq.to_dict() == par.to_dict()


def test_probe_seed_determinism():
    t = SymbolTable([("x", ROLE_STATE), ("y", ROLE_STATE)])
    x, y = sym("x", t), sym("y", t)
    sink = VectorField(("x", "y"), (-x, -y + x * y))
    a = stability_probe(sink, [0.0, 0.0], radius=0.05, samples=8, T=30.0, seed=4)
    b = stability_probe(sink, [0.0, 0.0], radius=0.05, samples=8, T=30.0, seed=4)
    assert a.to_dict() == b.to_dict()


def test_sweep_zero_field_constant(tmp_path):
    t = SymbolTable([("x", ROLE_STATE), ("y", ROLE_STATE)])
    vf = VectorField(("x", "y"), (Polynomial.zero(t), Polynomial.zero(t)))
    bundle = sweep_portrait(vf, grid={"x": (-1, 1, 3), "y": (-1, 1, 3)}, T=5.0)
    for ic, traj in zip(bundle.initial_conditions, bundle.trajectories):
        assert traj.final_state == ic
    manifest = bundle.write(tmp_path / "sweep")
    assert manifest.exists()
    csvs = list((tmp_path / "sweep").glob("trajectory_*.csv"))
    assert len(csvs) == 9
    header = csvs[0].read_text().splitlines()[0]
    assert header == "t,x,y"


def test_sweep_diffusive_alignment():
    # with nilpotent weights the velocity is everywhere parallel to the
    # equilibrium line direction (2, 1)
    entry = get_example("diffusive2")
    vf = assemble(entry.build()).substitute_parameters(entry.default_params)
    bundle = sweep_portrait(vf, grid={"x1": (-1, 1, 3), "x2": (-1, 1, 3)}, T=2.0)
    f, _ = compile_field(vf)
    for traj in bundle.trajectories:
        for state in traj.states[:: max(1, len(traj.states) // 5)]:
            vx, vy = f(state)
            assert abs(vx * 1 - vy * 2) <= 1e-9 * max(1.0, abs(vx), abs(vy))


def test_sweep_delta_perturbed_converges_to_origin():
    entry = get_example("diffusive2")
    vf = assemble(entry.build()).substitute_parameters(
        {"a1": F(-2), "a2": F(1), "w12": F(-17, 15), "w21": F(8, 15)})
    bundle = sweep_portrait(vf, grid={"x1": (-1, 1, 3), "x2": (-1, 1, 3)},
                            T=150.0)
    for traj in bundle.trajectories:
        assert math.hypot(*traj.final_state) <= 1e-6
