"""Per-example verification bundles for the CLI `verify` subcommand.

Each bundle replays the example's defining computations: exact nilpotency,
chart reproduction, conjugacy sampling, and (where meaningful at achievable
horizons) stability probes.  Probe horizons here are chosen long enough for
the slow modes actually present; the acceptance test suite separately pins
the stricter recorded defaults.
"""

from __future__ import annotations

from fractions import Fraction

from . import examples as ex
from .blowup import (BlowupChart, circle_equilibria, desingularize,
                     directional_blowup, polar_blowup_2d, restrict,
                     structure_report, verify_conjugacy)
from .dynamics import stability_probe
from .netsys import assemble, lift_parameters, linearize
from .nilpotent import char_poly, is_nilpotent, jacobian
from .poly import Polynomial


class _Bundle:
    def __init__(self):
        self.lines: list[str] = []
        self.ok = True

    def check(self, label: str, passed: bool, detail: str = ""):
        self.ok &= bool(passed)
        tail = f"  [{detail}]" if detail else ""
        self.lines.append(f"{'PASS' if passed else 'FAIL'}  {label}{tail}")


def _verify_diffusive2(seed: int) -> _Bundle:
    b = _Bundle()
    entry = ex.get_example("diffusive2")
    ns = entry.build()
    params = dict(entry.default_params)
    vf = assemble(ns).substitute_parameters(params)
    m = jacobian(vf, {**{v: 0 for v in vf.variables}})
    b.check("origin Jacobian has char poly lambda^n",
            all(c == 0 for c in char_poly(m)[1:]))
    b.check("origin is nilpotent", is_nilpotent(m))
    chart = BlowupChart(kind="node", distinguished="x1", sign=1,
                        state_weights={"x1": 1, "x2": 1})
    cf = directional_blowup(vf, chart)
    rep = verify_conjugacy(vf, chart, cf, samples=50, seed=seed)
    b.check("chart conjugacy identity exact at 50 samples", rep.ok,
            f"max residual {rep.max_residual}")
    b.check("raw chart field already regular (division exponent 0)",
            desingularize(cf).division_exponent == 0)
    decomp = linearize(ns, {v: 0 for v in ns.node_symbols}, params)
    srep = structure_report(restrict(cf, {"r": 0}).field, decomp, "x1")
    b.check("r=0 restriction matches the static-network template", srep.matches)
    return b


def _verify_diffusive2_hot(seed: int) -> _Bundle:
    b = _Bundle()
    entry = ex.get_example("diffusive2-hot")
    ns = entry.build()
    vf = assemble(ns)
    table = vf.components[0].table.extended([("alpha", "parameter")])
    al = Polynomial.symbol("alpha", table)
    vfa = vf.substitute_parameters({"a1": al, "a2": -al,
                                    "w12": Fraction(1, 2) * al,
                                    "w21": -Fraction(1, 2) * al})
    tf = polar_blowup_2d(vfa, {"alpha": 3, "w": 1}, 3)
    res = circle_equilibria(tf, {"alpha_b": 1, "w_b": -1})
    b.check("eight circle equilibria", len(res.roots) == 8,
            f"found {len(res.roots)}")
    classes = [r.klass for r in res.roots]
    b.check("alternating saddle / stable-node pattern",
            classes == ["saddle", "stable-node"] * 4)
    b.check("radial direction attracting at every root",
            all(r.f1_value < 0 for r in res.roots))
    probe = stability_probe(
        assemble(ns), [0.0, 0.0],
        params={k: float(v) for k, v in entry.default_params.items()},
        radius=0.05, samples=16, T=100.0, seed=seed)
    b.check("probe records the shear excursion (escapes expected)",
            probe.verdict in {"unstable", "inconclusive"},
            f"verdict {probe.verdict}")
    return b


def _verify_cubic3(seed: int) -> _Bundle:
    b = _Bundle()
    entry = ex.get_example("cubic3")
    ns = entry.build()
    params = dict(entry.default_params)
    vf = assemble(ns).substitute_parameters(
        {k: v for k, v in params.items() if k != "eps"})
    vfe = lift_parameters(vf, ["eps"])
    chart = BlowupChart(kind="node", distinguished="x1", sign=1,
                        state_weights={"x1": 1, "x2": 1, "x3": 1},
                        parameter_weights={"eps": 2})
    cf = desingularize(directional_blowup(vfe, chart))
    b.check("node chart desingularizes with k = 2", cf.division_exponent == 2)
    rep = verify_conjugacy(vfe, chart, directional_blowup(vfe, chart),
                           samples=50, seed=seed)
    b.check("conjugacy identity exact at 50 samples", rep.ok)
    sub = restrict(restrict(cf, {"eps_b": 0}), {"x3_b": 0})
    from .dynamics import classify_equilibrium
    saddle = classify_equilibrium(sub.field, {"r": 0, "x2_b": 0})
    evs = sorted(e.real for e in saddle.spectrum.eigenvalues)
    b.check("(0,0) is a saddle with eigenvalues (a_i, -a_i)",
            saddle.klass == "hyperbolic" and abs(evs[0] + 1) < 1e-9
            and abs(evs[1] - 1) < 1e-9)
    sink = classify_equilibrium(sub.field, {"r": 0, "x2_b": 1})
    evs = sorted(e.real for e in sink.spectrum.eigenvalues)
    b.check("(0,1) is a sink with eigenvalues (a_i, 2a_i)",
            sink.klass == "hyperbolic" and abs(evs[0] + 2) < 1e-9
            and abs(evs[1] + 1) < 1e-9)
    return b


def _verify_kuramoto_adaptive(seed: int) -> _Bundle:
    b = _Bundle()
    ns = ex.get_example("kuramoto-adaptive").build(n=4)
    center = {f"ps{i}": 0 for i in range(1, 5)}
    center.update({f"sg{i}{j}": 0 for i in range(1, 5) for j in range(1, 5)})
    center.update({"alpha": 0, "beta": 0})
    vf = assemble(ns, taylor_degree=2, center=center)
    vfe = lift_parameters(vf, ["alpha", "beta", "eps"])
    chart = BlowupChart(kind="parameter", distinguished="eps", sign=1,
                        state_weights={v: 1 for v in vf.variables},
                        parameter_weights={"alpha": 1, "beta": 1, "eps": 1})
    cf = directional_blowup(vfe, chart)
    matches = True
    for sgn in (1, -1):
        cfd = desingularize(restrict(cf, {"beta_b": sgn}))
        tb = cfd.components[0].table
        s = lambda n: Polynomial.symbol(n, tb)
        u = {i: s(f"ps{i}_b") for i in range(1, 5)}
        sg = {(i, j): s(f"sg{i}{j}_b") for i in range(1, 5) for j in range(1, 5)}
        A = s("alpha_b")
        for i in range(1, 5):
            expected = Polynomial.zero(tb)
            for j in range(1, 5):
                diff = u[i] - u[j]
                expected = expected + Fraction(1, 4) * (
                    sgn * diff - sg[(i, j)] * (A + diff))
            matches &= cfd.field.component(f"ps{i}_b") == expected
        for i in range(1, 5):
            for j in range(1, 5):
                matches &= cfd.field.component(f"sg{i}{j}_b") == -(
                    (u[i] - u[j]) + sg[(i, j)])
        matches &= cfd.field.component("r").is_zero
        matches &= cfd.division_exponent == 1
    b.check("rescaling chart reproduces the reduced slow system, both signs",
            matches)
    rep = verify_conjugacy(vfe, chart, cf, samples=50, seed=seed)
    b.check("conjugacy identity exact at 50 samples", rep.ok)
    exprs, variables = ex.kuramoto_reduced_field(4)
    x_star = [0.0] * len(variables)
    stable = stability_probe(exprs, x_star,
                             params={"alpha": 0.1, "beta": -0.2, "eps": 0.02},
                             radius=0.05, samples=32, T=2000.0, seed=seed,
                             variables=variables)
    b.check("probe: stable below the critical offset (T=2000)",
            stable.verdict == "stable",
            f"max final distance {stable.max_final_distance:.2e}")
    unstable = stability_probe(exprs, x_star,
                               params={"alpha": 0.1, "beta": 0.1, "eps": 0.02},
                               radius=0.05, samples=16, T=500.0, seed=seed,
                               variables=variables)
    b.check("probe: not stable above the critical offset",
            unstable.verdict in {"unstable", "inconclusive"},
            f"verdict {unstable.verdict}, escaped {unstable.escaped}")
    return b


def _verify_kuramoto4(seed: int) -> _Bundle:
    b = _Bundle()
    m = ex.kuramoto4_phase_jacobian((0, 1, 2, 3), 0, 0)
    b.check("phase block vanishes identically at the locked state",
            m.is_zero())
    b.check("phase block is nilpotent", is_nilpotent(m))
    return b


def _verify_adaptive3(seed: int) -> _Bundle:
    b = _Bundle()
    ns = ex.get_example("adaptive3").build()
    vf = assemble(ns)
    vfe = lift_parameters(vf, ["eps"])
    others = [v for v in vfe.variables if v != "w12"]
    chart = BlowupChart(kind="edge", distinguished="w12", sign=1,
                        state_weights={v: 1 for v in others if v != "eps"},
                        parameter_weights={"eps": 1, "w12": 1})
    cf = directional_blowup(vfe, chart)
    cfr = restrict(cf, {"eps_b": 0})
    weight_rows = [w + "_b" for w in ("w13", "w21", "w23", "w31", "w32")]
    b.check("all adapted weight rows vanish on the slow slice",
            all(cfr.field.component(w).is_zero for w in weight_rows))
    b.check("radial row vanishes on the slow slice",
            cfr.field.component("r").is_zero)
    tb = cfr.components[0].table
    s = lambda n: Polynomial.symbol(n, tb)
    expected = (s("a1") * s("x1_b")
                + s("r") * (s("w13_b") * (s("x3_b") - s("x1_b"))
                            + (s("x2_b") - s("x1_b"))))
    b.check("distinguished coupling enters with coefficient 1",
            cfr.field.component("x1_b") == expected)
    rep = verify_conjugacy(vfe, chart, cf, samples=50, seed=seed)
    b.check("conjugacy identity exact at 50 samples", rep.ok)
    return b


def _verify_gradient2(seed: int) -> _Bundle:
    b = _Bundle()
    entry = ex.get_example("gradient2")
    ns = entry.build()
    params = dict(entry.default_params)
    vf = assemble(ns).substitute_parameters(params)
    m = jacobian(vf, {v: 0 for v in vf.variables})
    b.check("origin is nilpotent", is_nilpotent(m))
    probe = stability_probe(vf, [0.0, 0.0], radius=0.05, samples=16,
                            T=200.0, seed=seed)
    b.check("probe executed (verdict recorded; see stability notes)",
            probe.verdict in {"stable", "unstable", "inconclusive"},
            f"verdict {probe.verdict}")
    return b


_BUNDLES = {
    "diffusive2": _verify_diffusive2,
    "diffusive2-hot": _verify_diffusive2_hot,
    "cubic3": _verify_cubic3,
    "kuramoto-adaptive": _verify_kuramoto_adaptive,
    "kuramoto4-motivating": _verify_kuramoto4,
    "adaptive3": _verify_adaptive3,
    "gradient2": _verify_gradient2,
}


def run_verify(example_id: str, seed: int = 0) -> tuple[bool, list[str]]:
    ex.get_example(example_id)  # raises on unknown ids
    bundle = _BUNDLES[example_id](seed)
    return bundle.ok, bundle.lines
