"""Numerical validation layer: integration, equilibria, stability probes.

Floats enter here and only here.  Fields are compiled to plain Python
callables; the integrator is an embedded Dormand-Prince 5(4) pair with PI
step control.  Stability is probed, not proven: verdicts are falsifiable
statements with recorded sample counts, thresholds and seeds.
"""

from __future__ import annotations

import json
import math
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import EquilibriumError, IntegrationError, SymbolError
from .expr import Expression
from .netsys import VectorField
from .nilpotent import (RationalMatrix, SpectrumReport, jacobian,
                        spectrum_classify)
from .poly import Polynomial, as_fraction

# ---- field compilation ---------------------------------------------------------


def _poly_source(p: Polynomial, names: Mapping[str, str]) -> str:
    if p.is_zero:
        return "0.0"
    parts = []
    for mono, coeff in p.sorted_terms():
        fac = [repr(float(coeff))]
        for n, e in mono.exps:
            ref = names[n]
            fac.append(ref if e == 1 else f"{ref}**{e}")
        parts.append("*".join(fac))
    return " + ".join(parts)


def _expr_source(e: Expression, names: Mapping[str, str]) -> str:
    from . import expr as ex
    if isinstance(e, ex.Const):
        return repr(float(e.value))
    if isinstance(e, ex.Sym):
        return names[e.name]
    if isinstance(e, ex.Sum):
        return "(" + " + ".join(_expr_source(p, names) for p in e.parts) + ")"
    if isinstance(e, ex.Prod):
        return "(" + "*".join(_expr_source(p, names) for p in e.parts) + ")"
    if isinstance(e, ex.Pow):
        return f"({_expr_source(e.base, names)})**({e.exponent})"
    if isinstance(e, ex.Trig):
        arg = [repr(float(e.arg.const))]
        for n, c in e.arg.coeffs:
            arg.append(f"{repr(float(c))}*{names[n]}")
        return f"math.{e.fn}(" + " + ".join(arg) + ")"
    raise TypeError(f"cannot compile {type(e).__name__}")


def compile_field(field, variables: Sequence[str] | None = None,
                  params: Mapping[str, object] | None = None
                  ) -> tuple[Callable, tuple[str, ...]]:
    """Compile a VectorField or a sequence of Expressions to f(y) -> list.

    Parameters are folded in as float literals, so the compiled callable is a
    closed function of the state vector alone.
    """
    params = {k: float(as_fraction(v)) if not isinstance(v, float) else v
              for k, v in (params or {}).items()}
    if isinstance(field, VectorField):
        variables = field.variables
        rows = field.components
        renderer = _poly_source
    else:
        if variables is None:
            raise ValueError("expression fields need an explicit variable order")
        variables = tuple(variables)
        rows = tuple(field)
        renderer = _expr_source

    names: dict[str, str] = {}
    free: set[str] = set()
    for row in rows:
        free |= row.free_symbols()
    for i, v in enumerate(variables):
        names[v] = f"y[{i}]"
    for p, value in params.items():
        if p not in names:
            names[p] = repr(value)
    missing = free - set(names)
    if missing:
        raise SymbolError(f"unbound symbols in field compilation: {sorted(missing)}")

    body = ", ".join(renderer(row, names) for row in rows)
    src = f"def _field(y):\n    return ({body}{',' if len(rows) == 1 else ''})\n"
    ns: dict = {"math": math}
    exec(src, ns)
    return ns["_field"], tuple(variables)


def compile_jacobian(vf: VectorField, params: Mapping[str, object] | None = None
                     ) -> Callable:
    params = dict(params or {})
    rows = vf.jacobian_symbolic()
    names = {v: f"y[{i}]" for i, v in enumerate(vf.variables)}
    for p, value in params.items():
        if p not in names:
            names[p] = repr(float(as_fraction(value)) if not isinstance(value, float)
                            else value)
    entries = []
    for row in rows:
        entries.append("[" + ", ".join(_poly_source(p, names) for p in row) + "]")
    src = "def _jac(y):\n    return [" + ", ".join(entries) + "]\n"
    ns: dict = {"math": math}
    exec(src, ns)
    return ns["_jac"]


# ---- adaptive Runge-Kutta ---------------------------------------------------------

# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
          187 / 2100, 1 / 40)

TERM_REACHED_T = "reached-T"
TERM_CONVERGED = "converged"
TERM_DIVERGED = "diverged"
TERM_UNDERFLOW = "step-underflow"


@dataclass
class IntegratorControls:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float | None = None
    escape_norm: float = 1e6
    escape_center: Sequence[float] | None = None
    escape_radius: float | None = None
    converge_steps: int = 100
    store: bool = True


@dataclass
class Trajectory:
    variables: tuple[str, ...]
    times: list[float]
    states: list[tuple[float, ...]]
    termination: str
    max_escape_distance: float = 0.0

    @property
    def final_time(self) -> float:
        return self.times[-1]

    @property
    def final_state(self) -> tuple[float, ...]:
        return self.states[-1]

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t," + ",".join(self.variables) + "\n")
            for t, row in zip(self.times, self.states):
                fh.write(f"{t!r}," + ",".join(repr(v) for v in row) + "\n")


def integrate(field, x0: Sequence[float], params: Mapping[str, object] | None = None,
              T: float = 1.0, controls: IntegratorControls | None = None,
              variables: Sequence[str] | None = None) -> Trajectory:
    """Integrate dy/dt = f(y) from 0 to T with the embedded 5(4) pair.

    Termination: reaching T, convergence (speed and displacement below abs_tol
    for `converge_steps` consecutive accepted steps), divergence (leaving the
    escape ball or |y| > escape_norm), or step underflow.
    """
    f, var_names = compile_field(field, variables=variables, params=params)
    c = controls or IntegratorControls()
    n = len(x0)
    y = [float(v) for v in x0]
    if len(var_names) != n:
        raise ValueError("initial condition dimension mismatch")
    t = 0.0
    max_step = c.max_step if c.max_step else T / 50.0
    center = list(c.escape_center) if c.escape_center is not None else None

    def norm_inf(vec) -> float:
        return max(abs(v) for v in vec)

    def check_finite(vec):
        for v in vec:
            if not math.isfinite(v):
                raise IntegrationError("field evaluation produced a non-finite value")

    def escape_distance(state) -> float:
        if center is None:
            return 0.0
        return math.sqrt(sum((a - b) ** 2 for a, b in zip(state, center)))

    k1 = list(f(y))
    check_finite(k1)
    # conservative initial step from the first derivative magnitude
    scale0 = max(norm_inf(y), 1.0)
    h = min(max_step, 1e-2 * scale0 / max(norm_inf(k1), 1e-8), T)

    times = [0.0]
    states = [tuple(y)]
    termination = TERM_REACHED_T
    quiet = 0
    max_escape = escape_distance(y)
    err_prev = 1.0
    stages = [None] * 7

    while t < T:
        h = min(h, T - t, max_step)
        if h < 1e-14 * max(1.0, t):
            termination = TERM_UNDERFLOW
            break
        stages[0] = k1
        ok = True
        for s in range(1, 7):
            ys = list(y)
            a_row = _DP_A[s]
            for j, a in enumerate(a_row):
                if a:
                    ks = stages[j]
                    for i in range(n):
                        ys[i] += h * a * ks[i]
            stages[s] = list(f(ys))
            check_finite(stages[s])
        y5 = list(y)
        for j, b in enumerate(_DP_B5):
            if b:
                ks = stages[j]
                for i in range(n):
                    y5[i] += h * b * ks[i]
        err = 0.0
        for i in range(n):
            e4 = 0.0
            for j in range(7):
                diff = _DP_B5[j] - _DP_B4[j]
                if diff:
                    e4 += diff * stages[j][i]
            sc = c.abs_tol + c.rel_tol * max(abs(y[i]), abs(y5[i]))
            err += (h * e4 / sc) ** 2
        err = math.sqrt(err / n)
        if err <= 1.0:
            t += h
            displacement = max(abs(a - b) for a, b in zip(y5, y))
            y = y5
            k1 = list(f(y))  # FSAL not used; keep it simple
            check_finite(k1)
            if c.store:
                times.append(t)
                states.append(tuple(y))
            else:
                times[-1] = t
                states[-1] = tuple(y)
            dist = escape_distance(y)
            max_escape = max(max_escape, dist)
            if c.escape_radius is not None and dist > c.escape_radius:
                termination = TERM_DIVERGED
                break
            if norm_inf(y) > c.escape_norm:
                termination = TERM_DIVERGED
                break
            if norm_inf(k1) <= c.abs_tol and displacement <= c.abs_tol:
                quiet += 1
                if quiet >= c.converge_steps:
                    termination = TERM_CONVERGED
                    break
            else:
                quiet = 0
            # PI controller
            grow = 0.9 * err ** -0.14 * err_prev ** 0.08 if err > 0 else 5.0
            h *= min(5.0, max(0.2, grow))
            err_prev = max(err, 1e-10)
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
    return Trajectory(var_names, times, states, termination, max_escape)


def integrate_rk4_fixed(field, x0: Sequence[float],
                        params: Mapping[str, object] | None = None,
                        T: float = 1.0, h: float = 1e-2,
                        variables: Sequence[str] | None = None) -> Trajectory:
    """Classic fixed-step RK4; reference mode for order-of-accuracy tests."""
    f, var_names = compile_field(field, variables=variables, params=params)
    n = len(x0)
    y = [float(v) for v in x0]
    t = 0.0
    times = [0.0]
    states = [tuple(y)]
    steps = max(1, round(T / h))
    h = T / steps
    for _ in range(steps):
        k1 = f(y)
        k2 = f([y[i] + 0.5 * h * k1[i] for i in range(n)])
        k3 = f([y[i] + 0.5 * h * k2[i] for i in range(n)])
        k4 = f([y[i] + h * k3[i] for i in range(n)])
        y = [y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) for i in range(n)]
        t += h
        times.append(t)
        states.append(tuple(y))
    return Trajectory(var_names, times, states, TERM_REACHED_T)


# ---- equilibria --------------------------------------------------------------------


@dataclass(frozen=True)
class EquilibriumSearch:
    points: tuple[tuple[float, ...], ...]
    residuals: tuple[float, ...]
    skipped_seeds: int

    def to_dict(self) -> dict:
        return {"points": [list(p) for p in self.points],
                "residuals": list(self.residuals),
                "skipped_seeds": self.skipped_seeds}


def find_equilibria(vf: VectorField, params: Mapping[str, object] | None = None,
                    box: Mapping[str, tuple[float, float]] | None = None,
                    grid: int = 21, tol: float = 1e-12,
                    max_iter: int = 60) -> EquilibriumSearch:
    """Newton iteration from a lattice of seeds inside the box.

    Grid seeding is practical only in low dimension (documented limit 6).
    Seeds where the Jacobian is singular are skipped and counted; converged
    roots are deduplicated at distance 1e-8.
    """
    if vf.dim > 6:
        raise ValueError("grid seeding supports at most 6 variables")
    if box is None:
        box = {v: (-1.0, 1.0) for v in vf.variables}
    f, _ = compile_field(vf, params=params)
    jac = compile_jacobian(vf, params=params)
    axes = []
    for v in vf.variables:
        lo, hi = box[v]
        axes.append(np.linspace(lo, hi, grid))
    mesh = np.meshgrid(*axes, indexing="ij")
    seeds = np.stack([m.ravel() for m in mesh], axis=-1)

    found: list[np.ndarray] = []
    residuals: list[float] = []
    skipped = 0
    for seed in seeds:
        y = np.array(seed, dtype=float)
        ok = False
        # iterate to step-size convergence, not just the residual gate, so
        # multiple (Newton-linear) roots still polish to full precision
        for it in range(max_iter):
            fy = np.array(f(y), dtype=float)
            if not np.all(np.isfinite(fy)):
                break
            J = np.array(jac(y), dtype=float)
            try:
                step = np.linalg.solve(J, -fy)
            except np.linalg.LinAlgError:
                if np.linalg.norm(fy) <= tol:
                    ok = True
                elif it == 0:
                    skipped += 1
                break
            if not np.all(np.isfinite(step)):
                break
            y = y + step
            if np.linalg.norm(y) > 1e8:
                break
            if np.linalg.norm(step) <= 1e-15 * max(1.0, np.linalg.norm(y)):
                ok = np.linalg.norm(np.array(f(y), dtype=float)) <= tol
                break
        else:
            ok = np.linalg.norm(np.array(f(y), dtype=float)) <= tol
        if not ok:
            continue
        if any(np.linalg.norm(y - p) < 1e-8 for p in found):
            continue
        found.append(y)
        residuals.append(float(np.linalg.norm(np.array(f(y), dtype=float))))
    order = sorted(range(len(found)), key=lambda i: tuple(found[i]))
    return EquilibriumSearch(
        points=tuple(tuple(float(v) for v in found[i]) for i in order),
        residuals=tuple(residuals[i] for i in order),
        skipped_seeds=skipped)


@dataclass(frozen=True)
class EquilibriumReport:
    location: tuple
    jacobian: RationalMatrix | tuple
    spectrum: SpectrumReport
    exact: bool

    @property
    def klass(self) -> str:
        return self.spectrum.klass

    def to_dict(self) -> dict:
        jac = (self.jacobian.to_lists() if isinstance(self.jacobian, RationalMatrix)
               else [list(map(float, row)) for row in self.jacobian])
        return {"location": [str(v) for v in self.location],
                "jacobian": jac, "exact": self.exact,
                **self.spectrum.to_dict()}


def classify_equilibrium(vf: VectorField, x_star: Mapping[str, object] | Sequence,
                         params: Mapping[str, object] | None = None,
                         residual_tol: float = 1e-10,
                         zero_tolerance: float = 1e-9) -> EquilibriumReport:
    """Jacobian spectrum at an equilibrium; exact when all inputs are rational.

    Exact mode decides nilpotency from the characteristic polynomial; float
    inputs get the same classification with `zero_tolerance` semantics but can
    never certify the nilpotent class.
    """
    params = dict(params or {})
    if not isinstance(x_star, Mapping):
        x_star = dict(zip(vf.variables, x_star))
    point = {**params, **x_star}
    exact = all(not isinstance(v, float) for v in point.values())
    if exact:
        values = {k: as_fraction(v) for k, v in point.items()}
        residual = [c.evaluate(values) for c in vf.components]
        worst = max((abs(float(res)) for res in residual), default=0.0)
        if worst > residual_tol:
            raise EquilibriumError(f"residual {worst:.3e} exceeds {residual_tol}")
        matrix = jacobian(vf, values)
        spectrum = spectrum_classify(matrix, zero_tolerance)
        location = tuple(values[v] for v in vf.variables)
        return EquilibriumReport(location, matrix, spectrum, True)
    f, _ = compile_field(vf, params=params)
    y = [float(x_star[v]) for v in vf.variables]
    worst = max(abs(v) for v in f(y)) if y else 0.0
    if worst > residual_tol:
        raise EquilibriumError(f"residual {worst:.3e} exceeds {residual_tol}")
    jac_fn = compile_jacobian(vf, params=params)
    J = np.array(jac_fn(y), dtype=float)
    eigs = tuple(complex(z) for z in np.linalg.eigvals(J))
    coeffs = (Fraction(1),) + tuple(
        Fraction(float(c)).limit_denominator(10 ** 12) for c in np.poly(J)[1:])
    small = sum(1 for ev in eigs if abs(ev.real) <= zero_tolerance)
    if small == 0:
        klass = "hyperbolic"
    elif small == len(eigs):
        klass = "non-hyperbolic-non-nilpotent"
    else:
        klass = "semi-hyperbolic"
    spectrum = SpectrumReport(coeffs, eigs, klass, zero_tolerance)
    return EquilibriumReport(tuple(y), tuple(tuple(row) for row in J.tolist()),
                             spectrum, False)


# ---- stability probe ----------------------------------------------------------------


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: str  # stable | unstable | inconclusive
    sampled: int
    converged: int
    escaped: int
    escape_examples: tuple[tuple[float, ...], ...]
    max_final_distance: float
    capture_distance: float
    escape_distance: float
    seed: int

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "sampled": self.sampled,
                "converged": self.converged, "escaped": self.escaped,
                "escape_examples": [list(e) for e in self.escape_examples],
                "max_final_distance": self.max_final_distance,
                "capture_distance": self.capture_distance,
                "escape_distance": self.escape_distance, "seed": self.seed}


def _sphere_sample(rng: random.Random, dim: int, radius: float) -> list[float]:
    while True:
        v = [rng.gauss(0.0, 1.0) for _ in range(dim)]
        norm = math.sqrt(sum(x * x for x in v))
        if norm > 1e-12:
            return [radius * x / norm for x in v]


def stability_probe(field, x_star: Sequence[float],
                    params: Mapping[str, object] | None = None,
                    radius: float = 0.05, samples: int = 64, T: float = 500.0,
                    capture: float = 1e-4, seed: int = 0,
                    controls: IntegratorControls | None = None,
                    variables: Sequence[str] | None = None) -> StabilityVerdict:
    """Sample the sphere around x_star and integrate; report a stability verdict.

    stable       every sample ends within capture*radius of x_star and never
                 leaves the 10*radius ball
    unstable     at least one sample leaves the 10*radius ball
    inconclusive anything else (a valid outcome, not an error)
    """
    rng = random.Random(seed)
    x_star = [float(v) for v in x_star]
    dim = len(x_star)
    base = controls or IntegratorControls()
    capture_distance = capture * radius
    escape_distance = 10.0 * radius

    converged = 0
    escaped = 0
    escape_examples: list[tuple[float, ...]] = []
    max_final = 0.0
    worker_cap = max(1, int(os.environ.get("NETBLOW_THREADS", "1") or "1"))

    starts = []
    for _ in range(samples):
        offset = _sphere_sample(rng, dim, radius)
        starts.append([x_star[i] + offset[i] for i in range(dim)])

    def run(start):
        ctl = IntegratorControls(
            rel_tol=base.rel_tol, abs_tol=base.abs_tol, max_step=base.max_step,
            escape_norm=base.escape_norm, escape_center=x_star,
            escape_radius=escape_distance, converge_steps=base.converge_steps,
            store=False)
        return integrate(field, start, params=params, T=T, controls=ctl,
                         variables=variables)

    if worker_cap > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=worker_cap) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]

    for start, traj in zip(starts, results):
        if traj.termination == TERM_DIVERGED:
            escaped += 1
            if len(escape_examples) < 3:
                escape_examples.append(tuple(start))
            continue
        final = traj.final_state
        dist = math.sqrt(sum((a - b) ** 2 for a, b in zip(final, x_star)))
        max_final = max(max_final, dist)
        if dist <= capture_distance and traj.max_escape_distance <= escape_distance:
            converged += 1

    if escaped:
        verdict = "unstable"
    elif converged == samples:
        verdict = "stable"
    else:
        verdict = "inconclusive"
    return StabilityVerdict(
        verdict=verdict, sampled=samples, converged=converged, escaped=escaped,
        escape_examples=tuple(escape_examples), max_final_distance=max_final,
        capture_distance=capture_distance, escape_distance=escape_distance,
        seed=seed)


# ---- portrait sweeps ----------------------------------------------------------------


@dataclass
class PortraitBundle:
    variables: tuple[str, ...]
    initial_conditions: list[tuple[float, ...]]
    trajectories: list[Trajectory]

    def write(self, outdir) -> Path:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        entries = []
        for idx, (ic, traj) in enumerate(zip(self.initial_conditions,
                                             self.trajectories)):
            name = f"trajectory_{idx:04d}.csv"
            traj.write_csv(outdir / name)
            entries.append({"index": idx, "file": name,
                            "initial": list(ic),
                            "termination": traj.termination})
        manifest = outdir / "manifest.json"
        with open(manifest, "w") as fh:
            json.dump({"variables": list(self.variables),
                       "trajectories": entries}, fh, indent=2)
        return manifest


def sweep_portrait(vf2d: VectorField, params: Mapping[str, object] | None = None,
                   grid: Mapping[str, tuple[float, float, int]] | None = None,
                   T: float = 100.0,
                   controls: IntegratorControls | None = None) -> PortraitBundle:
    """One trajectory per lattice point of a 2-d initial-condition grid."""
    if vf2d.dim != 2:
        raise ValueError("portrait sweeps are for planar fields")
    if grid is None:
        grid = {v: (-1.0, 1.0, 5) for v in vf2d.variables}
    ax = []
    for v in vf2d.variables:
        lo, hi, count = grid[v]
        ax.append(np.linspace(lo, hi, int(count)))
    ics = [(float(a), float(b)) for a in ax[0] for b in ax[1]]
    trajectories = []
    for ic in ics:
        trajectories.append(integrate(vf2d, ic, params=params, T=T,
                                      controls=controls))
    return PortraitBundle(vf2d.variables, ics, trajectories)
