"""Network dynamical systems and their assembled vector fields.

A system is a set of scalar nodes with per-node internal dynamics, weighted
pairwise interactions, and optionally slow adaptation rules for the weights.
Assembly produces an exact polynomial vector field (after Taylor expansion
when trig is present); the linear decomposition splits its Jacobian into the
diagonal internal part D, the interaction part A, and higher-order residues.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import EquilibriumError, ParseError, SymbolError
from .expr import Expression, parse_expression, taylor_expand
from .poly import (ROLE_PARAMETER, ROLE_RADIAL, ROLE_STATE, Polynomial,
                   SymbolTable, as_fraction)


@dataclass(frozen=True)
class Interaction:
    """One directed weighted edge: target <- source with coupling h(x_t, x_s)."""

    target: str
    source: str
    weight: str | Fraction  # symbol name or exact constant
    coupling: Expression


@dataclass(frozen=True)
class NetworkSystem:
    name: str
    node_symbols: tuple[str, ...]
    parameter_symbols: tuple[str, ...]
    internal: Mapping[str, Expression]           # node -> f(node, params)
    interactions: tuple[Interaction, ...]
    adaptation: Mapping[str, Expression] = field(default_factory=dict)
    slow_symbol: str | None = None

    def __post_init__(self):
        params = set(self.parameter_symbols)
        nodes = set(self.node_symbols)
        if nodes & params:
            raise SymbolError("node and parameter symbols overlap")
        for node, f in self.internal.items():
            bad = f.free_symbols() - params - {node}
            if bad:
                raise SymbolError(
                    f"internal dynamics of {node} may depend only on {node} and "
                    f"parameters; found {sorted(bad)}")
        for rec in self.interactions:
            bad = rec.coupling.free_symbols() - params - {rec.target, rec.source}
            if bad:
                raise SymbolError(
                    f"coupling {rec.target}<-{rec.source} may depend only on the "
                    f"two endpoint nodes and parameters; found {sorted(bad)}")
        if self.adaptation:
            if self.slow_symbol is None:
                raise SymbolError("adaptation rules require a slow symbol")
            for w in self.adaptation:
                if not isinstance(w, str) or w not in params:
                    raise SymbolError(f"adapted weight {w!r} must be a parameter symbol")
            for w, g in self.adaptation.items():
                bad = g.free_symbols() - params - nodes
                if bad:
                    raise SymbolError(f"adaptation of {w} uses undeclared {sorted(bad)}")

    def table(self, radial: str | None = None) -> SymbolTable:
        roles = [(n, ROLE_STATE) for n in self.node_symbols]
        roles += [(p, ROLE_PARAMETER) for p in self.parameter_symbols]
        if radial:
            roles.append((radial, ROLE_RADIAL))
        return SymbolTable(roles)

    def contains_trig(self) -> bool:
        if any(f.contains_trig() for f in self.internal.values()):
            return True
        if any(r.coupling.contains_trig() for r in self.interactions):
            return True
        return any(g.contains_trig() for g in self.adaptation.values())


@dataclass(frozen=True)
class VectorField:
    """Polynomial field: one component per variable, parameters frozen."""

    variables: tuple[str, ...]
    components: tuple[Polynomial, ...]
    frozen_parameters: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.variables) != len(self.components):
            raise ValueError("component count must equal variable count")

    @property
    def dim(self) -> int:
        return len(self.variables)

    def component(self, name: str) -> Polynomial:
        return self.components[self.variables.index(name)]

    def evaluate(self, point: Mapping[str, object]) -> list:
        return [c.evaluate(point) for c in self.components]

    def jacobian_symbolic(self) -> list[list[Polynomial]]:
        return [[c.differentiate(v) for v in self.variables] for c in self.components]

    def substitute_parameters(self, bindings: Mapping[str, object]) -> "VectorField":
        """Bind or rewrite frozen parameters (values may be polynomials)."""
        comps = tuple(c.substitute(bindings) for c in self.components)
        remaining = []
        for p in self.frozen_parameters:
            if p not in bindings:
                remaining.append(p)
        for c in comps:
            for s in c.free_symbols():
                if s not in self.variables and s not in remaining:
                    remaining.append(s)
        return VectorField(self.variables, comps, tuple(remaining))


def lift_parameters(vf: VectorField, names: Sequence[str]) -> VectorField:
    """Promote frozen parameters to variables with zero rows appended."""
    for n in names:
        if n not in vf.frozen_parameters:
            raise SymbolError(f"{n!r} is not a frozen parameter of the field")
    if not vf.components:
        raise ValueError("cannot lift parameters of an empty field")
    zero = Polynomial.zero(vf.components[0].table)
    variables = vf.variables + tuple(names)
    components = vf.components + tuple(zero for _ in names)
    frozen = tuple(p for p in vf.frozen_parameters if p not in names)
    return VectorField(variables, components, frozen)


def assemble(ns: NetworkSystem, taylor_degree: int | None = None,
             center: Mapping[str, object] | None = None,
             radial: str | None = "r") -> VectorField:
    """Assemble node rows f_i + sum_j w_ij h_ij, then slow adaptation rows.

    Trig-bearing systems must supply a Taylor degree and center; each declared
    expression is expanded individually and weights multiply the expansions
    exactly afterwards.
    """
    table = ns.table(radial=radial)
    has_trig = ns.contains_trig()
    if has_trig and (taylor_degree is None or center is None):
        raise SymbolError("system contains trig terms: taylor_degree and center "
                          "are required to assemble")

    def to_poly(e: Expression) -> Polynomial:
        if taylor_degree is not None and center is not None:
            return taylor_expand(e, center, taylor_degree, table)
        return e.to_polynomial(table)

    def weight_poly(w: str | Fraction, tbl: SymbolTable) -> Polynomial:
        if isinstance(w, str):
            return Polynomial.symbol(w, tbl)
        return Polynomial.constant(w, tbl)

    rows: dict[str, Polynomial] = {}
    out_table = table
    for node in ns.node_symbols:
        row = to_poly(ns.internal[node]) if node in ns.internal else Polynomial.zero(table)
        out_table = out_table.merge(row.table)
        rows[node] = row
    for rec in ns.interactions:
        h = to_poly(rec.coupling)
        out_table = out_table.merge(h.table)
        rows[rec.target] = rows[rec.target] + weight_poly(rec.weight, h.table) * h

    variables = list(ns.node_symbols)
    components = [rows[n] for n in ns.node_symbols]
    if ns.adaptation:
        eps = Polynomial.symbol(ns.slow_symbol, out_table)
        for w, g in ns.adaptation.items():
            gp = to_poly(g)
            out_table = out_table.merge(gp.table)
            variables.append(w)
            components.append(eps * gp)
    adapted = set(ns.adaptation)
    frozen = [p for p in ns.parameter_symbols if p not in adapted]
    frozen += [s for s in out_table.symbols(ROLE_PARAMETER)
               if s not in frozen and s not in adapted]
    return VectorField(tuple(variables), tuple(components), tuple(frozen))


@dataclass(frozen=True)
class LinearDecomposition:
    """Jacobian split at an equilibrium: diag internal D + interaction A + tails."""

    node_symbols: tuple[str, ...]
    D: tuple[Fraction, ...]                      # diagonal entries a_i
    A: tuple[tuple[Fraction, ...], ...]          # interaction Jacobian
    residual_internal: tuple[Polynomial, ...]    # f_i minus value and linear part
    residual_interaction: tuple[Polynomial, ...]
    x_star: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.node_symbols)

    def linear_matrix(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(
            tuple(self.A[i][j] + (self.D[i] if i == j else 0)
                  for j in range(self.n))
            for i in range(self.n))


def linearize(ns: NetworkSystem, x_star: Mapping[str, object],
              params: Mapping[str, object]) -> LinearDecomposition:
    """Split the node-block Jacobian at an equilibrium into D + A + residues.

    Adapted weights, if any, are held at the values given in `params`; the
    decomposition concerns the node rows only.
    """
    if ns.contains_trig():
        raise SymbolError("linearize requires a polynomial system; Taylor-expand first")
    table = ns.table()
    xs = {n: as_fraction(x_star[n]) for n in ns.node_symbols}
    ps = {p: as_fraction(params[p]) for p in ns.parameter_symbols if p in params}
    missing = set(ns.parameter_symbols) - set(ps)
    if missing:
        raise SymbolError(f"unbound parameters: {sorted(missing)}")
    point = {**xs, **ps}

    internal_polys = {}
    interaction_rows = {n: Polynomial.zero(table) for n in ns.node_symbols}
    for node in ns.node_symbols:
        f = ns.internal.get(node)
        internal_polys[node] = (f.to_polynomial(table) if f is not None
                                else Polynomial.zero(table))
    for rec in ns.interactions:
        w = (Polynomial.symbol(rec.weight, table) if isinstance(rec.weight, str)
             else Polynomial.constant(rec.weight, table))
        interaction_rows[rec.target] = (interaction_rows[rec.target]
                                        + w * rec.coupling.to_polynomial(table))

    for node in ns.node_symbols:
        residual = (internal_polys[node] + interaction_rows[node]).evaluate(point)
        if residual != 0:
            raise EquilibriumError(
                f"x_star is not an equilibrium: row {node} evaluates to {residual}")

    n = len(ns.node_symbols)
    D = []
    A = [[Fraction(0)] * n for _ in range(n)]
    res_int, res_inter = [], []
    for i, node in enumerate(ns.node_symbols):
        f = internal_polys[node].substitute(ps)
        h = interaction_rows[node].substitute(ps)
        a_i = f.differentiate(node).evaluate(xs)
        D.append(a_i)
        for j, other in enumerate(ns.node_symbols):
            A[i][j] = h.differentiate(other).evaluate(xs)
        lin_f = Polynomial.constant(f.evaluate(xs), table) + a_i * (
            Polynomial.symbol(node, table) - xs[node])
        res_int.append(f - lin_f)
        lin_h = Polynomial.constant(h.evaluate(xs), table)
        for j, other in enumerate(ns.node_symbols):
            lin_h = lin_h + A[i][j] * (Polynomial.symbol(other, table) - xs[other])
        res_inter.append(h - lin_h)
    return LinearDecomposition(
        node_symbols=ns.node_symbols,
        D=tuple(D),
        A=tuple(tuple(row) for row in A),
        residual_internal=tuple(res_int),
        residual_interaction=tuple(res_inter),
        x_star=tuple(xs[n] for n in ns.node_symbols),
    )


def diffusive_weights_2node(a1, a2) -> tuple[Fraction, Fraction]:
    """Weights w_ij = a_i^2/(a_i - a_j) that make the 2-node diffusive origin nilpotent."""
    a1, a2 = as_fraction(a1), as_fraction(a2)
    if a1 == a2:
        raise ValueError("weight formula is singular for a1 == a2")
    if a1 == 0 or a2 == 0:
        raise ValueError("internal rates must be nonzero")
    return a1 ** 2 / (a1 - a2), a2 ** 2 / (a2 - a1)


def shift_origin(vf: VectorField, x_star: Mapping[str, object]) -> VectorField:
    """Translate so the given point moves to the origin: G(y) = F(y + x_star).

    Shift entries may be exact rationals or polynomials in frozen parameters
    (useful for symbolic equilibria such as a2/a1 with an inverse helper).
    """
    if not vf.components:
        return vf
    table = vf.components[0].table
    bindings = {}
    for name, value in x_star.items():
        if name not in vf.variables:
            raise SymbolError(f"{name!r} is not a variable of the field")
        offset = value if isinstance(value, Polynomial) else Polynomial.constant(value, table)
        bindings[name] = Polynomial.symbol(name, table) + offset
    comps = tuple(c.substitute(bindings) for c in vf.components)
    frozen = list(vf.frozen_parameters)
    for c in comps:
        for s in c.free_symbols():
            if s not in vf.variables and s not in frozen:
                frozen.append(s)
    return VectorField(vf.variables, comps, tuple(frozen))


# ---- system file format -------------------------------------------------------

_HEADER_RE = re.compile(r'system\s+"([^"]+)"\s*$')
_COUPLE_RE = re.compile(
    r'couple\s+(?P<target>\w+)\s*<-\s*(?P<source>\w+)\s*:\s*'
    r'(?P<weight>-?\d+(?:/\d+)?(?:\.\d+)?|[A-Za-z]\w*)\s*\*\s*(?P<expr>.+)$')


def parse_system_file(text: str) -> NetworkSystem:
    """Parse the plain-text system format.

    Layout: `system "<name>"`, `nodes: ...`, `params: ...`, optional
    `slow: <sym>`, then `internal`, `couple` and `adapt` lines.  `#` comments.
    """
    name = None
    nodes: list[str] = []
    params: list[str] = []
    slow = None
    internal_src: dict[str, str] = {}
    couple_src: list[tuple[str, str, str, str]] = []
    adapt_src: dict[str, str] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("system"):
            m = _HEADER_RE.match(line)
            if not m:
                raise ParseError('expected: system "<name>"', line=lineno)
            name = m.group(1)
        elif line.startswith("nodes:"):
            nodes = line[len("nodes:"):].split()
        elif line.startswith("params:"):
            params = line[len("params:"):].split()
        elif line.startswith("slow:"):
            slow = line[len("slow:"):].strip()
        elif line.startswith("internal"):
            body = line[len("internal"):].strip()
            if "=" not in body:
                raise ParseError("expected: internal <node> = <expr>", line=lineno)
            node, src = body.split("=", 1)
            internal_src[node.strip()] = src.strip()
        elif line.startswith("couple"):
            m = _COUPLE_RE.match(line)
            if not m:
                raise ParseError(
                    "expected: couple <target> <- <source> : <weight> * <expr>",
                    line=lineno)
            couple_src.append((m.group("target"), m.group("source"),
                               m.group("weight"), m.group("expr")))
        elif line.startswith("adapt"):
            body = line[len("adapt"):].strip()
            if "=" not in body:
                raise ParseError("expected: adapt <weight> = <expr>", line=lineno)
            w, src = body.split("=", 1)
            adapt_src[w.strip()] = src.strip()
        else:
            raise ParseError(f"unrecognized line: {line!r}", line=lineno)

    if name is None:
        raise ParseError("missing system header")
    if not nodes:
        raise ParseError("missing nodes declaration")
    table = SymbolTable([(n, ROLE_STATE) for n in nodes]
                        + [(p, ROLE_PARAMETER) for p in params])
    internal = {n: parse_expression(src, table) for n, src in internal_src.items()}
    interactions = []
    for target, source, weight, src in couple_src:
        if target not in nodes or source not in nodes:
            raise ParseError(f"couple endpoints must be nodes: {target} <- {source}")
        w: str | Fraction = weight if re.match(r"[A-Za-z]", weight) else as_fraction(weight)
        if isinstance(w, str) and w not in params:
            raise ParseError(f"weight symbol {w!r} is not a declared parameter")
        interactions.append(Interaction(target, source, w, parse_expression(src, table)))
    adaptation = {w: parse_expression(src, table) for w, src in adapt_src.items()}
    return NetworkSystem(name=name, node_symbols=tuple(nodes),
                         parameter_symbols=tuple(params), internal=internal,
                         interactions=tuple(interactions), adaptation=adaptation,
                         slow_symbol=slow)


def emit_system_file(ns: NetworkSystem) -> str:
    lines = [f'system "{ns.name}"',
             "nodes: " + " ".join(ns.node_symbols),
             "params: " + " ".join(ns.parameter_symbols)]
    if ns.slow_symbol:
        lines.append(f"slow: {ns.slow_symbol}")
    for node in ns.node_symbols:
        if node in ns.internal:
            lines.append(f"internal {node} = {ns.internal[node]}")
    for rec in ns.interactions:
        lines.append(f"couple {rec.target} <- {rec.source} : {rec.weight} * ({rec.coupling})")
    for w, g in ns.adaptation.items():
        lines.append(f"adapt {w} = {g}")
    return "\n".join(lines) + "\n"
