"""Built-in example systems.

Each entry builds a symbolic NetworkSystem plus the default parameter point
used throughout the test suite and the CLI `verify` bundles.  Two helpers
live alongside the registry: an exact quarter-turn Jacobian for the 4-node
phase-locked oscillator block (its nilpotency check needs exact values of
sin and cos at multiples of pi/2, which the float evaluator cannot certify),
and the phase-difference reduction of the adaptive oscillator network (the
co-rotating system has a line of equilibria from the common phase shift, so
point stability is only meaningful on the quotient).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .errors import SymbolError
from .expr import Expression, parse_expression
from .netsys import Interaction, NetworkSystem, diffusive_weights_2node
from .nilpotent import RationalMatrix
from .poly import ROLE_PARAMETER, ROLE_STATE, SymbolTable


@dataclass(frozen=True)
class ExampleEntry:
    id: str
    builder: Callable[..., NetworkSystem]
    default_params: Mapping[str, Fraction]
    notes: str

    def build(self, **kwargs) -> NetworkSystem:
        return self.builder(**kwargs)


def _table(nodes, params):
    return SymbolTable([(n, ROLE_STATE) for n in nodes]
                       + [(p, ROLE_PARAMETER) for p in params])


def _expr(text: str, table: SymbolTable) -> Expression:
    return parse_expression(text, table)


# ---- two linearly coupled diffusive nodes -----------------------------------------


def build_diffusive2() -> NetworkSystem:
    nodes = ("x1", "x2")
    params = ("a1", "a2", "w12", "w21")
    t = _table(nodes, params)
    return NetworkSystem(
        name="diffusive2",
        node_symbols=nodes, parameter_symbols=params,
        internal={"x1": _expr("a1*x1", t), "x2": _expr("a2*x2", t)},
        interactions=(
            Interaction("x1", "x2", "w12", _expr("x2 - x1", t)),
            Interaction("x2", "x1", "w21", _expr("x1 - x2", t)),
        ))


def build_diffusive2_hot() -> NetworkSystem:
    # cubic self-terms stabilize the nilpotent origin for w < 0
    nodes = ("x1", "x2")
    params = ("a1", "a2", "w12", "w21", "w")
    t = _table(nodes, params)
    return NetworkSystem(
        name="diffusive2-hot",
        node_symbols=nodes, parameter_symbols=params,
        internal={"x1": _expr("a1*x1", t), "x2": _expr("a2*x2 + w*x2^3", t)},
        interactions=(
            Interaction("x1", "x2", "w12", _expr("x2 - x1", t)),
            Interaction("x1", "x2", Fraction(1),
                        _expr("w*(x1 + x2)^3 - w*x2^3", t)),
            Interaction("x2", "x1", "w21", _expr("x1 - x2", t)),
        ))


def build_cubic(n: int = 3) -> NetworkSystem:
    """Weakly diffusively coupled nodes with cubic internal dynamics on a ring."""
    nodes = tuple(f"x{i}" for i in range(1, n + 1))
    weights = tuple(f"w{i}{i % n + 1}" for i in range(1, n + 1))  # i <- i+1 ring
    params = tuple(f"a{i}" for i in range(1, n + 1)) + weights + ("eps",)
    t = _table(nodes, params)
    internal = {f"x{i}": _expr(f"a{i}*x{i}^3*(1 - x{i})", t)
                for i in range(1, n + 1)}
    interactions = []
    for i in range(1, n + 1):
        j = i % n + 1
        interactions.append(Interaction(
            f"x{i}", f"x{j}", f"w{i}{j}", _expr(f"eps*(x{j} - x{i})", t)))
    return NetworkSystem(name=f"cubic{n}", node_symbols=nodes,
                         parameter_symbols=params, internal=internal,
                         interactions=tuple(interactions))


def build_kuramoto_adaptive(n: int = 4) -> NetworkSystem:
    """Adaptive phase oscillators in co-rotating coordinates at the antipodal
    cluster (common phases shifted away, so every offset symbol mixes through
    sin(ps_i - ps_j + alpha) only)."""
    nodes = tuple(f"ps{i}" for i in range(1, n + 1))
    sigmas = tuple(f"sg{i}{j}" for i in range(1, n + 1) for j in range(1, n + 1))
    params = ("alpha", "beta", "eps") + sigmas
    t = _table(nodes, params)
    inv_n = Fraction(1, n)
    internal = {f"ps{i}": _expr("0 - sin(alpha)*sin(beta)", t)
                for i in range(1, n + 1)}
    interactions = []
    adaptation = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            diff = f"ps{i} - ps{j}" if i != j else "0"
            interactions.append(Interaction(
                f"ps{i}", f"ps{j}", inv_n,
                _expr(f"sin(beta)*sin({diff} + alpha)", t)))
            interactions.append(Interaction(
                f"ps{i}", f"ps{j}", f"sg{i}{j}",
                _expr(f"(0 - {inv_n})*sin({diff} + alpha)", t)))
            adaptation[f"sg{i}{j}"] = _expr(
                f"0 - sin({diff} + beta) + sin(beta) - sg{i}{j}", t)
    return NetworkSystem(name=f"kuramoto-adaptive{n}", node_symbols=nodes,
                         parameter_symbols=params, internal=internal,
                         interactions=tuple(interactions),
                         adaptation=adaptation, slow_symbol="eps")


def build_kuramoto4_motivating() -> NetworkSystem:
    """Four adaptive oscillators in the lab frame with common frequency Omega."""
    n = 4
    nodes = tuple(f"ph{i}" for i in range(1, n + 1))
    kappas = tuple(f"k{i}{j}" for i in range(1, n + 1) for j in range(1, n + 1))
    params = ("Omega", "alpha", "beta", "eps") + kappas
    t = _table(nodes, params)
    inv_n = Fraction(1, n)
    internal = {f"ph{i}": _expr("Omega", t) for i in range(1, n + 1)}
    interactions = []
    adaptation = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            diff = f"ph{i} - ph{j}" if i != j else "0"
            interactions.append(Interaction(
                f"ph{i}", f"ph{j}", f"k{i}{j}",
                _expr(f"(0 - {inv_n})*sin({diff} + alpha)", t)))
            adaptation[f"k{i}{j}"] = _expr(f"0 - sin({diff} + beta) - k{i}{j}", t)
    return NetworkSystem(name="kuramoto4-motivating", node_symbols=nodes,
                         parameter_symbols=params, internal=internal,
                         interactions=tuple(interactions),
                         adaptation=adaptation, slow_symbol="eps")


def build_adaptive3() -> NetworkSystem:
    """Three linear nodes, all-to-all coupling, polynomial adaptation rules."""
    nodes = ("x1", "x2", "x3")
    weights = tuple(f"w{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3) if i != j)
    params = ("a1", "a2", "a3") + weights + ("eps",)
    t = _table(nodes, params)
    internal = {f"x{i}": _expr(f"a{i}*x{i}", t) for i in (1, 2, 3)}
    interactions = []
    adaptation = {}
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            if i == j:
                continue
            interactions.append(Interaction(
                f"x{i}", f"x{j}", f"w{i}{j}", _expr(f"x{j} - x{i}", t)))
            adaptation[f"w{i}{j}"] = _expr(f"0 - (x{i} - x{j}) - w{i}{j}", t)
    return NetworkSystem(name="adaptive3", node_symbols=nodes,
                         parameter_symbols=params, internal=internal,
                         interactions=tuple(interactions),
                         adaptation=adaptation, slow_symbol="eps")


def build_gradient2() -> NetworkSystem:
    """Nilpotent linear part plus the gradient tail -grad((x1^4 + x2^4)/4)."""
    nodes = ("x1", "x2")
    params = ("a1", "a2", "w12", "w21")
    t = _table(nodes, params)
    return NetworkSystem(
        name="gradient2",
        node_symbols=nodes, parameter_symbols=params,
        internal={"x1": _expr("a1*x1 - x1^3", t), "x2": _expr("a2*x2 - x2^3", t)},
        interactions=(
            Interaction("x1", "x2", "w12", _expr("x2 - x1", t)),
            Interaction("x2", "x1", "w21", _expr("x1 - x2", t)),
        ))


# exact values of sin(k*pi/2), cos(k*pi/2)
_SIN_QUARTER = {0: Fraction(0), 1: Fraction(1), 2: Fraction(0), 3: Fraction(-1)}
_COS_QUARTER = {0: Fraction(1), 1: Fraction(0), 2: Fraction(-1), 3: Fraction(0)}


def _diffusive2_defaults() -> dict[str, Fraction]:
    w12, w21 = diffusive_weights_2node(2, 1)
    return {"a1": Fraction(2), "a2": Fraction(1), "w12": w12, "w21": w21}


def _hot_defaults() -> dict[str, Fraction]:
    w12, w21 = diffusive_weights_2node(1, -1)
    return {"a1": Fraction(1), "a2": Fraction(-1), "w12": w12, "w21": w21,
            "w": Fraction(-1, 10)}


def _cubic_defaults() -> dict[str, Fraction]:
    out = {f"a{i}": Fraction(-1) for i in (1, 2, 3)}
    out.update({"w12": Fraction(1), "w23": Fraction(1), "w31": Fraction(1),
                "eps": Fraction(1, 20)})
    return out


def _kuramoto_defaults() -> dict[str, Fraction]:
    out = {"alpha": Fraction(1, 10), "beta": Fraction(-1, 5), "eps": Fraction(1, 50)}
    for i in range(1, 5):
        for j in range(1, 5):
            out[f"sg{i}{j}"] = Fraction(0)
    return out


def _kuramoto4_defaults() -> dict[str, Fraction]:
    # phase-locked weights k*_ij = -sin(psi_i - psi_j) for quarter-turn phases
    out = {"Omega": Fraction(-1, 2), "alpha": Fraction(0), "beta": Fraction(0),
           "eps": Fraction(1, 50)}
    q = (0, 1, 2, 3)
    for i in range(1, 5):
        for j in range(1, 5):
            out[f"k{i}{j}"] = -_SIN_QUARTER[(q[i - 1] - q[j - 1]) % 4]
    return out


def _adaptive3_defaults() -> dict[str, Fraction]:
    out = {f"a{i}": Fraction(-1) for i in (1, 2, 3)}
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            if i != j:
                out[f"w{i}{j}"] = Fraction(1, 2)
    out["eps"] = Fraction(1, 20)
    return out


def _gradient2_defaults() -> dict[str, Fraction]:
    w12, w21 = diffusive_weights_2node(2, 1)
    return {"a1": Fraction(2), "a2": Fraction(1), "w12": w12, "w21": w21}


REGISTRY: dict[str, ExampleEntry] = {}


def _register(entry: ExampleEntry):
    REGISTRY[entry.id] = entry


_register(ExampleEntry(
    "diffusive2", build_diffusive2, _diffusive2_defaults(),
    "two diffusively coupled linear nodes; the default weights w_ij = "
    "a_i^2/(a_i - a_j) make the origin nilpotent"))
_register(ExampleEntry(
    "diffusive2-hot", build_diffusive2_hot, _hot_defaults(),
    "the two-node diffusive system with cubic higher-order interaction terms "
    "that stabilize the nilpotent origin when w < 0"))
_register(ExampleEntry(
    "cubic3", build_cubic, _cubic_defaults(),
    "ring of scalar nodes with cubic internal dynamics a_i x_i^3 (1 - x_i) and "
    "weak diffusive coupling of strength eps"))
_register(ExampleEntry(
    "kuramoto-adaptive", build_kuramoto_adaptive, _kuramoto_defaults(),
    "adaptive phase-oscillator network in co-rotating coordinates about the "
    "antipodal cluster; the origin is nilpotent at alpha = beta = eps = 0"))
_register(ExampleEntry(
    "kuramoto4-motivating", build_kuramoto4_motivating, _kuramoto4_defaults(),
    "four adaptive oscillators in the lab frame; at quarter-turn phase locking "
    "the phase-block Jacobian vanishes identically"))
_register(ExampleEntry(
    "adaptive3", build_adaptive3, _adaptive3_defaults(),
    "three-node adaptive network with polynomial adaptation rules; the test "
    "bed for edge-directional blow-ups"))
_register(ExampleEntry(
    "gradient2", build_gradient2, _gradient2_defaults(),
    "nilpotent linear part plus the gradient interaction -grad V with "
    "V = (x1^4 + x2^4)/4"))


def get_example(example_id: str) -> ExampleEntry:
    try:
        return REGISTRY[example_id]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise SymbolError(f"unknown example {example_id!r}; known: {known}") from None


def list_examples() -> list[ExampleEntry]:
    return [REGISTRY[k] for k in sorted(REGISTRY)]


# ---- exact quarter-turn helpers ----------------------------------------------------


def kuramoto4_phase_jacobian(quarter_phases=(0, 1, 2, 3), alpha_quarter: int = 0,
                             beta_quarter: int = 0) -> RationalMatrix:
    """Exact phase-block Jacobian at a phase-locked state with quarter-pi phases.

    Phases are psi_i = q_i * pi/2 and alpha, beta likewise quarter multiples,
    so every sin/cos value is 0 or +-1 and the matrix is exactly rational.
    Weights sit at their locked values k_ij = -sin(psi_i - psi_j + beta).
    """
    q = tuple(int(v) % 4 for v in quarter_phases)
    n = len(q)

    def sin_q(k: int) -> Fraction:
        return _SIN_QUARTER[k % 4]

    def cos_q(k: int) -> Fraction:
        return _COS_QUARTER[k % 4]

    rows = []
    for i in range(n):
        row = [Fraction(0)] * n
        diag = Fraction(0)
        for j in range(n):
            if j == i:
                continue
            k_ij = -sin_q(q[i] - q[j] + beta_quarter)
            c = cos_q(q[i] - q[j] + alpha_quarter)
            row[j] = Fraction(1, n) * k_ij * c
            diag -= Fraction(1, n) * k_ij * c
        row[i] = diag
        rows.append(tuple(row))
    return RationalMatrix(tuple(rows))


def kuramoto_reduced_field(n: int = 4):
    """Phase-difference reduction of the adaptive oscillator network.

    Variables are eta_i = ps_i - ps_n for i < n followed by all sg_ij; the
    common-phase direction (a whole line of equilibria) is quotiented out, so
    the origin is isolated and point-stability probes are meaningful.
    Returns (expressions, variables); parameters alpha, beta, eps stay free.
    """
    etas = tuple(f"eta{i}" for i in range(1, n))
    sigmas = tuple(f"sg{i}{j}" for i in range(1, n + 1) for j in range(1, n + 1))
    t = SymbolTable([(e, ROLE_STATE) for e in etas]
                    + [(s, ROLE_STATE) for s in sigmas]
                    + [("alpha", ROLE_PARAMETER), ("beta", ROLE_PARAMETER),
                       ("eps", ROLE_PARAMETER)])

    def eta_of(i: int) -> str:
        return f"eta{i}" if i < n else "0"

    def psidot(i: int) -> str:
        terms = []
        for j in range(1, n + 1):
            d = f"{eta_of(i)} - {eta_of(j)}" if i != j else "0"
            terms.append(f"sin(beta)*sin({d} + alpha) - sg{i}{j}*sin({d} + alpha)")
        body = " + ".join(terms)
        return f"(1/{n})*({body}) - sin(alpha)*sin(beta)"

    exprs = []
    for i in range(1, n):
        exprs.append(_expr(f"({psidot(i)}) - ({psidot(n)})", t))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            d = f"{eta_of(i)} - {eta_of(j)}" if i != j else "0"
            exprs.append(_expr(
                f"0 - eps*(sin({d} + beta) - sin(beta) + sg{i}{j})", t))
    return exprs, etas + sigmas
