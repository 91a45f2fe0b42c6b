"""Directional quasihomogeneous blow-up charts and desingularization.

A chart replaces one distinguished variable by +-r^w and every other variable
v by r^{w_v} * v_b (weight 0 leaves v untouched).  The blown-up field follows
from the triangular structure of the chart differential:

    r'   = (s / w_i) r^{1 - w_i} (P_i o Phi)
    v_b' = r^{-w_v} (P_v o Phi) - (w_v / w_i) s v_b r^{-w_i} (P_i o Phi)

where P_i is the distinguished component and s the chart sign.  Intermediate
terms are Laurent in r; a chart is rejected when they fail to cancel back to
r-regular components.  Division by the maximal common r-power is a separate,
explicit step, as is division by non-radial common factors (which reverses
time where the factor is negative and must stay visible).

Everything here is exact rational arithmetic; the only numeric routine is the
circle-equilibrium search for planar polar charts.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping

from .errors import ChartError, DivisionError, InvariantError, SymbolError
from .netsys import LinearDecomposition, VectorField
from .poly import (ROLE_PARAMETER, ROLE_RADIAL, ROLE_STATE, ROLE_TRIG_COS,
                   ROLE_TRIG_SIN, Polynomial, SymbolTable, as_fraction,
                   exact_divide)

BAR_SUFFIX = "_b"


def bar_name(symbol: str) -> str:
    return symbol + BAR_SUFFIX


@dataclass(frozen=True)
class BlowupChart:
    """Chart of a quasihomogeneous blow-up in one distinguished direction.

    kind is "node", "parameter" or "edge" for directional charts (they differ
    only in bookkeeping; the distinguished symbol is a node state, a lifted
    scalar parameter, or a lifted adaptive weight respectively) and "polar"
    for the planar trig chart, where `distinguished` holds the (x, y) pair.
    """

    kind: str
    distinguished: str | tuple[str, str]
    sign: int = 1
    radial_symbol: str = "r"
    state_weights: Mapping[str, int] = None
    parameter_weights: Mapping[str, int] = None

    def __post_init__(self):
        if self.kind not in {"node", "parameter", "edge", "polar"}:
            raise ChartError(f"unknown chart kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise ChartError("chart sign must be +1 or -1")
        object.__setattr__(self, "state_weights", dict(self.state_weights or {}))
        object.__setattr__(self, "parameter_weights", dict(self.parameter_weights or {}))
        for name, w in self.state_weights.items():
            if not isinstance(w, int) or w < 1:
                raise ChartError(f"state weight for {name} must be a positive integer")
        for name, w in self.parameter_weights.items():
            if not isinstance(w, int) or w < 0:
                raise ChartError(f"parameter weight for {name} must be a nonnegative integer")

    def weight_of(self, name: str) -> int:
        if name in self.state_weights:
            return self.state_weights[name]
        if name in self.parameter_weights:
            return self.parameter_weights[name]
        raise ChartError(f"no blow-up weight declared for variable {name!r}")


@dataclass(frozen=True)
class ChartField:
    """Blown-up vector field in chart coordinates."""

    chart: BlowupChart
    field: VectorField                      # variables: (r, barred..., untouched...)
    division_exponent: int = 0
    orientation_note: str | None = None

    @property
    def variables(self) -> tuple[str, ...]:
        return self.field.variables

    @property
    def components(self) -> tuple[Polynomial, ...]:
        return self.field.components

    def to_dict(self) -> dict:
        return {
            "chart": {
                "kind": self.chart.kind,
                "distinguished": self.chart.distinguished,
                "sign": self.chart.sign,
                "radial": self.chart.radial_symbol,
            },
            "variables": list(self.variables),
            "components": {v: str(c) for v, c in zip(self.variables, self.components)},
            "division_exponent": self.division_exponent,
            "orientation_note": self.orientation_note,
        }


def chart_substitution(chart: BlowupChart, vf: VectorField):
    """Build the chart map Phi as polynomial bindings plus the chart table.

    Returns (bindings original-var -> polynomial in chart coordinates,
    chart variable order, chart symbol table).
    """
    if chart.kind == "polar":
        raise ChartError("polar charts use polar_blowup_2d, not the directional solver")
    dist = chart.distinguished
    if dist not in vf.variables:
        raise ChartError(
            f"distinguished symbol {dist!r} is not a variable of the field; "
            "lift parameters first")
    r = chart.radial_symbol
    base_table = vf.components[0].table if vf.components else SymbolTable()
    roles = [(r, ROLE_RADIAL)]
    chart_vars = [r]
    for v in vf.variables:
        if v == dist:
            continue
        w = chart.weight_of(v)
        if w > 0:
            roles.append((bar_name(v), ROLE_STATE))
            chart_vars.append(bar_name(v))
        else:
            # untouched variable: same symbol, same role as in the source field
            original = base_table.role(v) if v in base_table else ROLE_PARAMETER
            roles.append((v, original))
            chart_vars.append(v)
    frozen_roles = [(p, ROLE_PARAMETER) for p in vf.frozen_parameters
                    if p not in dict(roles)]
    table = SymbolTable(roles + frozen_roles)
    if vf.components:
        table = table.merge(SymbolTable(
            [(s, base_table.role(s)) for s in base_table
             if s not in table and s != r and s not in vf.variables]))

    rp = Polynomial.symbol(r, table)
    bindings: dict[str, Polynomial] = {}
    for v in vf.variables:
        if v == dist:
            bindings[v] = chart.sign * rp ** chart.weight_of(v)
        else:
            w = chart.weight_of(v)
            if w > 0:
                bindings[v] = (rp ** w) * Polynomial.symbol(bar_name(v), table)
            else:
                bindings[v] = Polynomial.symbol(v, table)
    return bindings, tuple(chart_vars), table


def directional_blowup(vf: VectorField, chart: BlowupChart) -> ChartField:
    """Blown-up field in a directional chart, before any r-division.

    Raises ChartError when the chart weights leave genuinely Laurent
    components (negative minimal r-valuation after maximal cancellation).
    """
    bindings, chart_vars, table = chart_substitution(chart, vf)
    dist = chart.distinguished
    w_i = chart.weight_of(dist)
    if w_i < 1:
        raise ChartError(f"distinguished symbol {dist!r} needs a positive weight")
    s = chart.sign
    r = chart.radial_symbol

    if chart.kind == "node":
        _warn_nonuniform_node_weights(vf, chart)

    composed = {v: vf.component(v).substitute(bindings) for v in vf.variables}
    dist_num = composed[dist]  # P_i o Phi, still Laurent-free in r by construction

    components: list[Polynomial] = []
    for name in chart_vars:
        if name == r:
            comp = (Fraction(s, w_i) * dist_num).divide_r_power(
                w_i - 1, require_regular=False)
        else:
            orig = name[:-len(BAR_SUFFIX)] if name.endswith(BAR_SUFFIX) else name
            w_v = chart.weight_of(orig)
            if w_v == 0:
                comp = composed[orig]
            else:
                lead = composed[orig].divide_r_power(w_v, require_regular=False)
                correction = (Fraction(w_v * s, w_i)
                              * Polynomial.symbol(name, table)
                              * dist_num.divide_r_power(w_i, require_regular=False))
                comp = lead - correction
        components.append(comp)

    bad = [(n, c.r_valuation()) for n, c in zip(chart_vars, components)
           if not c.is_zero and c.r_valuation() < 0]
    if bad:
        raise ChartError(
            "chart weights are inconsistent with the field; Laurent terms "
            f"survive in {', '.join(f'{n} (valuation {v})' for n, v in bad)}")

    frozen = tuple(p for p in vf.frozen_parameters if p not in chart_vars)
    field = VectorField(tuple(chart_vars), tuple(components), frozen)
    return ChartField(chart=chart, field=field, division_exponent=0)


def _warn_nonuniform_node_weights(vf: VectorField, chart: BlowupChart):
    weights = set(chart.state_weights.values())
    if len(weights) <= 1:
        return
    # Nonzero linear part forces equal node weights for a well-defined chart
    # field; warn rather than fail because the choice is the caller's.
    origin = {v: Fraction(0) for v in vf.variables}
    for p in vf.frozen_parameters:
        origin[p] = Fraction(0)
    for comp in vf.components:
        for v in vf.variables:
            deriv = comp.differentiate(v)
            try:
                if deriv.evaluate({**origin, **{s: Fraction(0) for s in deriv.free_symbols()}}) != 0:
                    warnings.warn(
                        "non-uniform state weights with a nonzero linear part: "
                        "the blown-up field may fail to be r-regular",
                        stacklevel=3)
                    return
            except SymbolError:
                continue


def desingularize(cf: ChartField) -> ChartField:
    """Divide all components by the maximal common power of r."""
    nonzero = [c for c in cf.components if not c.is_zero]
    if not nonzero:
        raise DivisionError("cannot desingularize the zero field")
    k = min(c.r_valuation() for c in nonzero)
    if k == 0:
        return replace(cf, division_exponent=cf.division_exponent)
    comps = tuple(c if c.is_zero else c.divide_r_power(k) for c in cf.components)
    field = VectorField(cf.field.variables, comps, cf.field.frozen_parameters)
    return replace(cf, field=field, division_exponent=cf.division_exponent + k)


def restrict(obj: ChartField | VectorField, subset: Mapping[str, object]):
    """Restrict to an invariant subset by pinning variables to values.

    Every pinned variable's own component must vanish identically under the
    pinning, otherwise the subset is not invariant and InvariantError is
    raised.  ChartField input yields ChartField output so desingularization
    can follow; the plain field is available as `.field`.
    """
    field = obj.field if isinstance(obj, ChartField) else obj
    pins = {name: as_fraction(v) for name, v in subset.items()}
    for name in pins:
        if name not in field.variables:
            raise SymbolError(f"{name!r} is not a variable of the field")
    for name in pins:
        pinned_component = field.component(name).substitute(pins)
        if not pinned_component.is_zero:
            raise InvariantError(
                f"subset is not invariant: component of {name} restricts to "
                f"{pinned_component}")
    keep = [v for v in field.variables if v not in pins]
    comps = tuple(field.component(v).substitute(pins) for v in keep)
    new_field = VectorField(tuple(keep), comps, field.frozen_parameters)
    if isinstance(obj, ChartField):
        return replace(obj, field=new_field)
    return new_field


@dataclass(frozen=True)
class StructureReport:
    """Comparison of an r=0 node-chart restriction against the static template.

    The restricted field should read, per remaining node k (chart sign s):

        x_k' = s*A[k][i] + (a_k + A[k][k] - a_i - A[i][i]) x_k
               + sum_{j != i,k} A[k][j] x_j + higher order,

    i.e. a network of N-1 nodes whose self-interaction absorbed the blown-up
    node.  `modified_interaction` is that absorbed matrix; `shifted_internal`
    is the other reading, with the old interaction intact and the internal
    rate shifted by -a_i - A[i][i].
    """

    blown_node: str
    sign: int
    matches: bool
    mismatches: tuple[str, ...]
    constants: dict
    linear: dict
    shifted_internal: dict
    modified_interaction: dict

    def to_dict(self) -> dict:
        return {
            "blown_node": self.blown_node,
            "sign": self.sign,
            "matches": self.matches,
            "mismatches": list(self.mismatches),
            "constants": {k: str(v) for k, v in self.constants.items()},
            "linear": {k: {j: str(c) for j, c in row.items()}
                       for k, row in self.linear.items()},
            "shifted_internal": {k: str(v) for k, v in self.shifted_internal.items()},
            "modified_interaction": {k: {j: str(c) for j, c in row.items()}
                                     for k, row in self.modified_interaction.items()},
        }


def structure_report(cf_r0: VectorField, decomp: LinearDecomposition,
                     blown_node: str, sign: int = 1) -> StructureReport:
    """Check the static-network template of a node chart restricted to r=0."""
    nodes = decomp.node_symbols
    if blown_node not in nodes:
        raise SymbolError(f"{blown_node!r} is not a node of the decomposition")
    i = nodes.index(blown_node)
    a = decomp.D
    A = decomp.A
    mismatches: list[str] = []
    constants: dict = {}
    linear: dict = {}
    shifted_internal: dict = {}
    modified_interaction: dict = {}

    for k, node in enumerate(nodes):
        if node == blown_node:
            continue
        name = bar_name(node)
        if name not in cf_r0.variables:
            raise SymbolError(f"restricted field lacks the barred variable {name!r}")
        const, lin = cf_r0.component(name).linear_part()
        constants[name] = const
        linear[name] = lin
        expected_const = sign * A[k][i]
        if const != expected_const:
            mismatches.append(
                f"{name}: constant {const} != expected {expected_const}")
        for j, other in enumerate(nodes):
            if other == blown_node:
                continue
            coeff = lin.get(bar_name(other), Fraction(0))
            if j == k:
                expected = a[k] + A[k][k] - a[i] - A[i][i]
            else:
                expected = A[k][j]
            if coeff != expected:
                mismatches.append(
                    f"{name}: coefficient of {bar_name(other)} is {coeff}, "
                    f"expected {expected}")
        shifted_internal[name] = a[k] - a[i] - A[i][i]
        row = {}
        for j, other in enumerate(nodes):
            if other == blown_node:
                continue
            row[bar_name(other)] = (A[k][k] - a[i] - A[i][i]) if j == k else A[k][j]
        modified_interaction[name] = row

    return StructureReport(
        blown_node=blown_node, sign=sign, matches=not mismatches,
        mismatches=tuple(mismatches), constants=constants, linear=linear,
        shifted_internal=shifted_internal, modified_interaction=modified_interaction)


def common_factor_divide(vf: VectorField, factor: Polynomial
                         ) -> tuple[VectorField, str]:
    """Divide every component by a common polynomial factor, exactly.

    The returned note records the factor: trajectories of the quotient field
    run backwards wherever the factor is negative.
    """
    comps = tuple(exact_divide(c, factor) for c in vf.components)
    note = (f"divided by ({factor}); time is reversed on the locus where "
            "this factor is negative")
    return VectorField(vf.variables, comps, vf.frozen_parameters), note


# ---- planar polar chart --------------------------------------------------------


@dataclass(frozen=True)
class TrigField:
    """Planar polar chart data: r' = r^(k+1) f1(theta), theta' = r^k f2(theta).

    f1 and f2 are polynomials in the cos/sin stand-ins (C, S) and any rescaled
    parameters, trig-normalized so the sin-degree is at most 1.
    """

    f1: Polynomial
    f2: Polynomial
    division_exponent: int
    cos_symbol: str = "C"
    sin_symbol: str = "S"

    def evaluate(self, which: str, theta: float, params: Mapping[str, float]) -> float:
        p = self.f1 if which == "f1" else self.f2
        point = {self.cos_symbol: math.cos(theta), self.sin_symbol: math.sin(theta),
                 **{k: float(v) for k, v in params.items()}}
        missing = p.free_symbols() - set(point)
        if missing:
            raise SymbolError(f"unbound parameters {sorted(missing)}")
        return float(p.evaluate(point))

    def dtheta_derivative(self, theta: float, params: Mapping[str, float]) -> float:
        """d/dtheta of f2(cos theta, sin theta) by the chain rule."""
        c, s = math.cos(theta), math.sin(theta)
        point = {self.cos_symbol: c, self.sin_symbol: s,
                 **{k: float(v) for k, v in params.items()}}
        d_dc = self.f2.differentiate(self.cos_symbol).evaluate(point)
        d_ds = self.f2.differentiate(self.sin_symbol).evaluate(point)
        return float(-s * d_dc + c * d_ds)

    def to_dict(self) -> dict:
        return {"f1": str(self.f1), "f2": str(self.f2),
                "division_exponent": self.division_exponent,
                "cos_symbol": self.cos_symbol, "sin_symbol": self.sin_symbol}


def polar_blowup_2d(vf2d: VectorField, parameter_weights: Mapping[str, int],
                    division_exponent: int, radial_symbol: str = "r",
                    cos_symbol: str = "C", sin_symbol: str = "S") -> TrigField:
    """Polar blow-up (x, y) = (r C, r S) with quasihomogeneous parameter rescaling.

    Each parameter p with weight b > 0 is replaced by r^b * p_b.  After
    substitution both r' = C P + S Q and r theta' = C Q - S P must reduce to
    pure r^(k+1) multiples; anything else means k was chosen inconsistently
    with the weights and is an error rather than a silent truncation.
    """
    if vf2d.dim != 2:
        raise ChartError("polar blow-up needs a planar field")
    x, y = vf2d.variables
    k = division_exponent
    roles = [(radial_symbol, ROLE_RADIAL), (cos_symbol, ROLE_TRIG_COS),
             (sin_symbol, ROLE_TRIG_SIN)]
    for p in vf2d.frozen_parameters:
        w = parameter_weights.get(p, 0)
        roles.append((bar_name(p) if w > 0 else p, ROLE_PARAMETER))
    table = SymbolTable(roles)

    rp = Polynomial.symbol(radial_symbol, table)
    C = Polynomial.symbol(cos_symbol, table)
    S = Polynomial.symbol(sin_symbol, table)
    bindings: dict[str, Polynomial] = {x: rp * C, y: rp * S}
    for p in vf2d.frozen_parameters:
        w = parameter_weights.get(p, 0)
        bindings[p] = (rp ** w) * Polynomial.symbol(bar_name(p), table) if w > 0 \
            else Polynomial.symbol(p, table)

    P = vf2d.component(x).substitute(bindings)
    Q = vf2d.component(y).substitute(bindings)
    f_r = C * P + S * Q                 # = r'
    f_t = (C * Q - S * P).divide_r_power(1, require_regular=False)  # = theta'

    out = []
    for name, raw, power in (("f1", f_r, k + 1), ("f2", f_t, k)):
        if raw.is_zero:
            out.append(raw)
            continue
        shifted = raw.divide_r_power(power, require_regular=False)
        exponents = {m.exp_of(radial_symbol) for m in shifted.terms}
        if exponents == {0}:
            out.append(shifted.trig_normalize())
        elif min(exponents) < 0:
            raise ChartError(
                f"division exponent {k} too large: {name} keeps negative "
                f"r-powers {sorted(exponents)}")
        else:
            raise ChartError(
                f"division exponent {k} too small or weights inhomogeneous: "
                f"{name} keeps positive r-powers {sorted(exponents)}")
    return TrigField(f1=out[0], f2=out[1], division_exponent=k,
                     cos_symbol=cos_symbol, sin_symbol=sin_symbol)


@dataclass(frozen=True)
class CircleEquilibrium:
    theta: float
    f1_value: float
    df2_value: float
    klass: str  # stable-node | unstable-node | saddle | non-hyperbolic

    def to_dict(self) -> dict:
        return {"theta": self.theta, "f1": self.f1_value, "df2": self.df2_value,
                "class": self.klass}


@dataclass(frozen=True)
class CircleEquilibriaResult:
    roots: tuple[CircleEquilibrium, ...]
    warnings: tuple[str, ...]

    def thetas(self) -> list[float]:
        return [r.theta for r in self.roots]

    def to_dict(self) -> dict:
        return {"roots": [r.to_dict() for r in self.roots],
                "warnings": list(self.warnings)}


def circle_equilibria(tf: TrigField, params: Mapping[str, object],
                      grid: int = 2048, tol: float = 1e-12,
                      nonhyperbolic_tol: float = 1e-8) -> CircleEquilibriaResult:
    """Roots of f2 on [0, 2pi) with tangential/radial stability classification.

    Simple roots come from sign-change bracketing plus bisection; tangency
    (double) roots are caught at extrema of f2 where |f2| vanishes to within
    the bracketing resolution, and are flagged non-hyperbolic.
    """
    fparams = {k: float(as_fraction(v)) if not isinstance(v, float) else v
               for k, v in params.items()}
    two_pi = 2 * math.pi

    def f(t: float) -> float:
        return tf.evaluate("f2", t, fparams)

    def df(t: float) -> float:
        return tf.dtheta_derivative(t, fparams)

    def bisect(fun, lo: float, hi: float) -> float:
        flo = fun(lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = fun(mid)
            if hi - lo < tol:
                return mid
            if (flo < 0) == (fm < 0):
                lo, flo = mid, fm
            else:
                hi = mid
        return 0.5 * (lo + hi)

    ts = [i * two_pi / grid for i in range(grid + 1)]
    vals = [f(t) for t in ts]
    roots: list[float] = []
    notes: list[str] = []
    for i in range(grid):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(ts[i])
        elif a * b < 0:
            roots.append(bisect(f, ts[i], ts[i + 1]))

    # tangency roots: extrema of f2 where f2 itself vanishes
    dvals = [df(t) for t in ts]
    for i in range(grid):
        if dvals[i] == 0.0 or dvals[i] * dvals[i + 1] < 0:
            te = bisect(df, ts[i], ts[i + 1]) if dvals[i] != 0.0 else ts[i]
            if abs(f(te)) <= max(nonhyperbolic_tol, tol * 100):
                roots.append(te)

    roots = sorted(t % two_pi for t in roots)
    dedup: list[float] = []
    for t in roots:
        if not dedup or (t - dedup[-1] > two_pi / grid / 2
                         and (two_pi - (t - dedup[0])) > two_pi / grid / 2):
            dedup.append(t)
    spacing = two_pi / grid
    for i in range(1, len(dedup)):
        if dedup[i] - dedup[i - 1] < 2 * spacing:
            notes.append(
                f"roots {dedup[i-1]:.6f} and {dedup[i]:.6f} are closer than twice "
                f"the grid spacing; increase --grid to resolve them reliably")

    out = []
    for t in dedup:
        f1v = tf.evaluate("f1", t, fparams)
        dv = df(t)
        if abs(dv) < nonhyperbolic_tol:
            klass = "non-hyperbolic"
        elif dv < 0 and f1v < 0:
            klass = "stable-node"
        elif dv > 0 and f1v > 0:
            klass = "unstable-node"
        else:
            klass = "saddle"
        out.append(CircleEquilibrium(theta=t, f1_value=f1v, df2_value=dv, klass=klass))
    return CircleEquilibriaResult(tuple(out), tuple(notes))


# ---- conjugacy verification ------------------------------------------------------


@dataclass(frozen=True)
class ConjugacyReport:
    samples: int
    exact: bool
    max_residual: Fraction | float
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"samples": self.samples, "exact": self.exact,
                "max_residual": str(self.max_residual),
                "failures": list(self.failures)}


def verify_conjugacy(vf: VectorField, chart: BlowupChart, cf: ChartField,
                     samples: int = 100, seed: int = 0,
                     r_range: tuple[Fraction, Fraction] = (Fraction(0), Fraction(1, 4)),
                     ) -> ConjugacyReport:
    """Check DPhi(p) . (r^k Xtilde(p)) == X(Phi(p)) at random rational points.

    This is the commuting-diagram identity that defines the blown-up field,
    checked exactly in rational arithmetic for r in (0, 1/4] (the chart map is
    a diffeomorphism only away from r = 0).  Frozen parameters are sampled
    alongside the chart variables.
    """
    bindings, chart_vars, table = chart_substitution(chart, vf)
    if cf.variables != chart_vars:
        raise ChartError("conjugacy verification needs the full chart field; "
                         "run it before restricting")
    r = chart.radial_symbol
    k = cf.division_exponent
    rng = random.Random(seed)
    lo, hi = r_range

    dphi = {orig: {cv: bindings[orig].differentiate(cv) for cv in chart_vars}
            for orig in vf.variables}

    extra_syms = set()
    for c in list(vf.components) + list(cf.components):
        extra_syms |= c.free_symbols()
    extra_syms -= set(chart_vars)
    extra_syms -= set(vf.variables)

    max_res: Fraction = Fraction(0)
    failures: list[str] = []
    for _ in range(samples):
        point: dict[str, Fraction] = {}
        den = 64
        point[r] = lo + (hi - lo) * Fraction(rng.randint(1, den), den)
        for cv in chart_vars:
            if cv != r:
                point[cv] = Fraction(rng.randint(-den, den), den)
        for sym in sorted(extra_syms):
            point[sym] = Fraction(rng.randint(-den, den), den)

        xtilde = [c.evaluate(point) for c in cf.components]
        rk = point[r] ** k
        lhs = []
        for orig in vf.variables:
            total = Fraction(0)
            for cv, xd in zip(chart_vars, xtilde):
                total += dphi[orig][cv].evaluate(point) * (rk * xd)
            lhs.append(total)
        mapped = dict(point)
        for orig in vf.variables:
            mapped[orig] = bindings[orig].evaluate(point)
        rhs = [c.evaluate(mapped) for c in vf.components]
        for orig, left, right in zip(vf.variables, lhs, rhs):
            res = abs(left - right)
            if res > max_res:
                max_res = res
            if res != 0:
                failures.append(
                    f"component {orig}: residual {res} at "
                    f"{{{', '.join(f'{kk}={vv}' for kk, vv in point.items())}}}")
    return ConjugacyReport(samples=samples, exact=True, max_residual=max_res,
                           failures=tuple(failures[:5]))


def polar_consistency_check(vf2d: VectorField, tf: TrigField,
                            parameter_weights: Mapping[str, int],
                            params: Mapping[str, float], samples: int = 50,
                            seed: int = 0, tol: float = 1e-12) -> float:
    """Reconstruct (x', y') from the polar chart data and compare numerically.

    Returns the max relative residual over random (r, theta) samples with
    r in (0, 1/4]; the caller asserts it against `tol`.
    """
    rng = random.Random(seed)
    x, y = vf2d.variables
    worst = 0.0
    for _ in range(samples):
        rv = rng.uniform(1e-3, 0.25)
        th = rng.uniform(0.0, 2 * math.pi)
        fparams = {bar_name(p) if parameter_weights.get(p, 0) > 0 else p:
                   float(v) / rv ** parameter_weights.get(p, 0)
                   for p, v in params.items()}
        f1v = tf.evaluate("f1", th, fparams)
        f2v = tf.evaluate("f2", th, fparams)
        rk = rv ** tf.division_exponent
        rprime = rk * rv * f1v
        tprime = rk * f2v
        c, s = math.cos(th), math.sin(th)
        xd = rprime * c - rv * s * tprime
        yd = rprime * s + rv * c * tprime
        point = {x: rv * c, y: rv * s, **{p: float(v) for p, v in params.items()}}
        xe = float(vf2d.component(x).evaluate(point))
        ye = float(vf2d.component(y).evaluate(point))
        scale = max(1.0, abs(xe), abs(ye))
        worst = max(worst, abs(xd - xe) / scale, abs(yd - ye) / scale)
        if worst > tol:
            raise ChartError(
                f"polar reconstruction residual {worst:.3e} exceeds {tol:.1e} "
                f"at r={rv:.4f}, theta={th:.4f}")
    return worst
