"""Command-line front end.

Reports are JSON on stdout wrapped in a run envelope (command echo, seed,
timing); trajectories are CSV files.  Exit codes: 0 ok, 2 input error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import examples as ex
from .blowup import (BlowupChart, circle_equilibria, desingularize,
                     directional_blowup, polar_blowup_2d, restrict,
                     structure_report, verify_conjugacy)
from .dynamics import (classify_equilibrium, find_equilibria, integrate,
                       stability_probe, sweep_portrait)
from .errors import NetblowError
from .netsys import (VectorField, assemble, emit_system_file, lift_parameters,
                     linearize, parse_system_file)
from .nilpotent import jacobian, spectrum_classify
from .poly import as_fraction


def _parse_kv(text: str | None, cast=as_fraction) -> dict:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        if not item:
            continue
        key, _, value = item.partition("=")
        if not _:
            raise NetblowError(f"expected key=value, got {item!r}")
        out[key.strip()] = cast(value.strip())
    return out


def _parse_chart(spec: str, weights: dict, param_weights: dict) -> BlowupChart:
    parts = spec.split(":")
    kind = parts[0]
    if kind == "polar":
        xy = parts[1].split(",")
        return BlowupChart(kind="polar", distinguished=(xy[0], xy[1]),
                           parameter_weights=param_weights)
    if len(parts) != 3 or parts[2] not in {"+", "-"}:
        raise NetblowError(f"chart spec must be kind:symbol:+|-, got {spec!r}")
    sign = 1 if parts[2] == "+" else -1
    if kind == "param":
        kind = "parameter"
    return BlowupChart(kind=kind, distinguished=parts[1], sign=sign,
                       state_weights={k: int(v) for k, v in weights.items()
                                      if k not in param_weights},
                       parameter_weights={k: int(v) for k, v in param_weights.items()})


def _load_system(ref: str):
    path = Path(ref)
    if path.exists():
        ns = parse_system_file(path.read_text())
        return ns, {}
    entry = ex.get_example(ref)
    return entry.build(), dict(entry.default_params)


def _field_for(args, ns, defaults) -> tuple[VectorField, dict]:
    params = dict(defaults)
    params.update(_parse_kv(getattr(args, "params", None)))
    degree = getattr(args, "taylor_degree", None)
    center_arg = getattr(args, "center", None)
    center = _parse_kv(center_arg) if center_arg else None
    if ns.contains_trig() and degree is None:
        degree, center = 2, {s: 0 for s in ns.node_symbols}
        center.update({w: 0 for w in ns.adaptation})
    vf = assemble(ns, taylor_degree=degree, center=center)
    return vf, params


def _emit(payload: dict, started: float, seed: int | None = None) -> None:
    envelope = {
        "command": " ".join(sys.argv[1:]),
        "inputs_digest": hashlib.sha256(
            " ".join(sys.argv[1:]).encode()).hexdigest()[:16],
        "elapsed_s": round(time.time() - started, 6),
    }
    if seed is not None:
        envelope["seed"] = seed
    envelope["outputs"] = payload
    json.dump(envelope, sys.stdout, indent=2, default=str)
    sys.stdout.write("\n")


def _floats(mapping: dict) -> dict:
    return {k: float(v) for k, v in mapping.items()}


def cmd_list_examples(args, started):
    rows = [{"id": e.id, "notes": e.notes} for e in ex.list_examples()]
    _emit({"examples": rows, "count": len(rows)}, started)
    return 0


def cmd_emit(args, started):
    ns, _ = _load_system(args.system)
    text = emit_system_file(ns)
    if args.out:
        Path(args.out).write_text(text)
        _emit({"written": args.out}, started)
    else:
        sys.stdout.write(text)
    return 0


def cmd_check_nilpotent(args, started):
    ns, defaults = _load_system(args.system)
    vf, params = _field_for(args, ns, defaults)
    at = _parse_kv(args.at)
    point = {**params, **{v: at.get(v, Fraction(0)) for v in vf.variables}}
    matrix = jacobian(vf, point)
    report = spectrum_classify(matrix, zero_tolerance=args.zero_tol)
    _emit({"char_poly": [str(c) for c in report.char_poly],
           "class": report.klass,
           "is_nilpotent": report.klass == "nilpotent",
           "matrix": matrix.to_lists()}, started)
    return 0


def _chart_pipeline(args, ns, defaults):
    vf, params = _field_for(args, ns, defaults)
    weights = _parse_kv(args.weights, cast=int) if args.weights else {}
    param_weights = _parse_kv(args.param_weights, cast=int) if args.param_weights else {}
    lift = [s for s in param_weights if s in vf.frozen_parameters]
    sub = {k: v for k, v in params.items()
           if k in vf.frozen_parameters and k not in lift}
    vf = vf.substitute_parameters(sub)
    if lift:
        vf = lift_parameters(vf, lift)
    chart = _parse_chart(args.chart, weights, param_weights)
    cf = directional_blowup(vf, chart)
    return vf, chart, cf


def cmd_blowup(args, started):
    ns, defaults = _load_system(args.system)
    vf, chart, cf = _chart_pipeline(args, ns, defaults)
    conjugacy = None
    if args.verify_conjugacy:
        # the commuting-diagram identity concerns the full chart field
        conjugacy = verify_conjugacy(vf, chart, cf, samples=args.samples,
                                     seed=args.seed)
    if args.restrict:
        cf = restrict(cf, _parse_kv(args.restrict))
    if args.desing:
        cf = desingularize(cf)
    if args.divide:
        from dataclasses import replace
        comps = tuple(c.divide_r_power(args.divide) for c in cf.components)
        cf = replace(cf, field=VectorField(cf.field.variables, comps,
                                           cf.field.frozen_parameters),
                     division_exponent=cf.division_exponent + args.divide)
    payload = cf.to_dict()
    if conjugacy is not None:
        payload["conjugacy"] = conjugacy.to_dict()
    _emit(payload, started, seed=args.seed)
    return 0


def cmd_structure_report(args, started):
    ns, defaults = _load_system(args.system)
    params = dict(defaults)
    params.update(_parse_kv(args.params))
    vf, _ = _field_for(args, ns, defaults)
    vf = vf.substitute_parameters({k: v for k, v in params.items()
                                   if k in vf.frozen_parameters})
    weights = _parse_kv(args.weights, cast=int) if args.weights else \
        {v: 1 for v in vf.variables}
    chart = _parse_chart(args.chart, weights, {})
    cf = directional_blowup(vf, chart)
    cf0 = restrict(cf, {chart.radial_symbol: 0})
    at = _parse_kv(args.at)
    x_star = {v: at.get(v, Fraction(0)) for v in ns.node_symbols}
    decomp = linearize(ns, x_star, params)
    rep = structure_report(cf0.field, decomp, chart.distinguished, sign=chart.sign)
    _emit(rep.to_dict(), started)
    return 0 if rep.matches else 3


def cmd_polar(args, started):
    ns, defaults = _load_system(args.system)
    vf, params = _field_for(args, ns, defaults)
    param_weights = _parse_kv(args.param_weights, cast=int)
    bind = {k: v for k, v in params.items()
            if k in vf.frozen_parameters and k not in param_weights}
    vf = vf.substitute_parameters(bind)
    tf = polar_blowup_2d(vf, param_weights, args.k)
    _emit(tf.to_dict(), started)
    return 0


def cmd_circle_equilibria(args, started):
    ns, defaults = _load_system(args.system)
    vf, params = _field_for(args, ns, defaults)
    param_weights = _parse_kv(args.param_weights, cast=int)
    bind = {k: v for k, v in params.items()
            if k in vf.frozen_parameters and k not in param_weights}
    vf = vf.substitute_parameters(bind)
    tf = polar_blowup_2d(vf, param_weights, args.k)
    chart_params = _parse_kv(args.chart_params)
    res = circle_equilibria(tf, chart_params, grid=args.grid, tol=args.tol)
    _emit(res.to_dict(), started)
    return 0


def cmd_equilibria(args, started):
    ns, defaults = _load_system(args.system)
    vf, params = _field_for(args, ns, defaults)
    box = {}
    for key, rng in _parse_kv(args.box, cast=str).items():
        lo, _, hi = rng.partition(":")
        box[key] = (float(lo), float(hi))
    res = find_equilibria(vf, params=_floats(params), box=box or None,
                          grid=args.grid, tol=args.tol)
    _emit(res.to_dict(), started)
    return 0


def cmd_classify(args, started):
    ns, defaults = _load_system(args.system)
    vf, params = _field_for(args, ns, defaults)
    at = _parse_kv(args.at)
    x_star = {v: at.get(v, Fraction(0)) for v in vf.variables}
    rep = classify_equilibrium(vf, x_star, params=params)
    _emit(rep.to_dict(), started)
    return 0


def cmd_simulate(args, started):
    ns, defaults = _load_system(args.system)
    vf, params = _field_for(args, ns, defaults)
    x0_map = _parse_kv(args.x0, cast=float)
    x0 = [x0_map.get(v, 0.0) for v in vf.variables]
    traj = integrate(vf, x0, params=_floats(params), T=args.T)
    payload = {"termination": traj.termination,
               "final_time": traj.final_time,
               "final_state": list(traj.final_state),
               "steps": len(traj.times)}
    if args.out:
        traj.write_csv(args.out)
        payload["csv"] = args.out
    _emit(payload, started)
    return 0


def cmd_probe(args, started):
    ns, defaults = _load_system(args.system)
    vf, params = _field_for(args, ns, defaults)
    at = _parse_kv(args.at, cast=float) if args.at else {}
    x_star = [at.get(v, 0.0) for v in vf.variables]
    verdict = stability_probe(vf, x_star, params=_floats(params),
                              radius=args.radius, samples=args.samples,
                              T=args.T, capture=args.capture, seed=args.seed)
    _emit(verdict.to_dict(), started, seed=args.seed)
    return 0


def cmd_sweep(args, started):
    ns, defaults = _load_system(args.system)
    vf, params = _field_for(args, ns, defaults)
    grid = {}
    for key, rng in _parse_kv(args.grid, cast=str).items():
        lo, mid, count = rng.split(":")
        grid[key] = (float(lo), float(mid), int(count))
    bundle = sweep_portrait(vf, params=_floats(params), grid=grid or None, T=args.T)
    manifest = bundle.write(args.outdir)
    _emit({"manifest": str(manifest),
           "trajectories": len(bundle.trajectories)}, started)
    return 0


def cmd_verify(args, started):
    from .verify import run_verify
    ok, lines = run_verify(args.example, seed=args.seed)
    for line in lines:
        print(line)
    _emit({"example": args.example, "passed": ok}, started, seed=args.seed)
    return 0 if ok else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netblow",
        description="blow-up analysis of nilpotent equilibria in network "
                    "dynamical systems")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_system(p):
        p.add_argument("system", help="system file path or built-in example id")
        p.add_argument("--params", help="comma list name=rational")
        p.add_argument("--taylor-degree", type=int, dest="taylor_degree")
        p.add_argument("--center", help="expansion center name=rational")

    p = sub.add_parser("list-examples", help="list built-in example systems")
    p.set_defaults(fn=cmd_list_examples)

    p = sub.add_parser("emit", help="write a system back to the text format")
    add_system(p)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_emit)

    p = sub.add_parser("check-nilpotent", help="exact spectrum report at a point")
    add_system(p)
    p.add_argument("--at", help="point name=rational (default origin)")
    p.add_argument("--zero-tol", type=float, default=1e-9, dest="zero_tol")
    p.set_defaults(fn=cmd_check_nilpotent)

    p = sub.add_parser("blowup", help="apply a directional blow-up chart")
    add_system(p)
    p.add_argument("--chart", required=True,
                   help="node:<sym>:<+|-> | param:<sym>:<+|-> | edge:<sym>:<+|->")
    p.add_argument("--weights", help="state weights name=int")
    p.add_argument("--param-weights", dest="param_weights",
                   help="parameter weights name=int (symbol is lifted)")
    p.add_argument("--desing", action="store_true")
    p.add_argument("--divide", type=int, default=0,
                   help="explicit extra division by r^k (validated)")
    p.add_argument("--restrict", help="pinnings name=rational, e.g. r=0")
    p.add_argument("--verify-conjugacy", action="store_true",
                   dest="verify_conjugacy")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_blowup)

    p = sub.add_parser("structure-report",
                       help="r=0 static-network template comparison")
    add_system(p)
    p.add_argument("--chart", required=True)
    p.add_argument("--weights")
    p.add_argument("--at", help="equilibrium for the linearization")
    p.set_defaults(fn=cmd_structure_report)

    p = sub.add_parser("polar", help="planar polar blow-up")
    add_system(p)
    p.add_argument("--k", type=int, required=True, help="division exponent")
    p.add_argument("--param-weights", dest="param_weights", required=True)
    p.set_defaults(fn=cmd_polar)

    p = sub.add_parser("circle-equilibria", help="roots of f2 on the circle")
    add_system(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--param-weights", dest="param_weights", required=True)
    p.add_argument("--chart-params", dest="chart_params", required=True,
                   help="values for rescaled parameters, e.g. alpha_b=1,w_b=-1")
    p.add_argument("--grid", type=int, default=2048)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(fn=cmd_circle_equilibria)

    p = sub.add_parser("equilibria", help="Newton search in a box")
    add_system(p)
    p.add_argument("--box", help="name=lo:hi per variable")
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(fn=cmd_equilibria)

    p = sub.add_parser("classify", help="equilibrium spectrum report")
    add_system(p)
    p.add_argument("--at")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("simulate", help="integrate one trajectory")
    add_system(p)
    p.add_argument("--x0", required=True, help="initial point name=float")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--out", help="CSV path")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("probe", help="stability probe around a point")
    add_system(p)
    p.add_argument("--at")
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--T", type=float, default=500.0)
    p.add_argument("--capture", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_probe)

    p = sub.add_parser("sweep", help="phase-portrait trajectory bundle")
    add_system(p)
    p.add_argument("--grid", required=True, help="name=lo:hi:count per axis")
    p.add_argument("--T", type=float, default=100.0)
    p.add_argument("--outdir", required=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("verify", help="run an example's acceptance bundle")
    p.add_argument("example")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        return args.fn(args, started)
    except NetblowError as err:
        json.dump({"error": {"type": type(err).__name__, "message": str(err)}},
                  sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 2
    except (ValueError, KeyError, OSError) as err:
        json.dump({"error": {"type": type(err).__name__, "message": str(err)}},
                  sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
