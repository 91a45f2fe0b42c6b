"""Exact sparse multivariate polynomials over the rationals.

Coefficients are `fractions.Fraction` throughout; floats never enter symbolic
work.  One distinguished *radial* symbol may carry negative (Laurent) powers,
which is what blow-up derivations transit through before the chart fields are
divided back to regular form.  Every polynomial carries a symbol table that
records each symbol's role:

  state      ordinary dynamical variable
  parameter  frozen scalar (weights, coupling constants, aux trig constants)
  radial     the single Laurent-capable symbol (conventionally ``r``)
  trig_cos   stand-in for cos(theta) in polar charts
  trig_sin   stand-in for sin(theta) in polar charts

Term order is graded lexicographic with symbols compared by name, so equal
polynomials always serialize to the same string.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import DivisionError, LaurentError, SymbolError

ROLE_STATE = "state"
ROLE_PARAMETER = "parameter"
ROLE_RADIAL = "radial"
ROLE_TRIG_COS = "trig_cos"
ROLE_TRIG_SIN = "trig_sin"

_ROLES = (ROLE_STATE, ROLE_PARAMETER, ROLE_RADIAL, ROLE_TRIG_COS, ROLE_TRIG_SIN)
_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and decimal/rational strings to an exact Fraction.

    Floats are rejected: binary floats silently misrepresent decimal input
    (0.2 != 1/5), and exactness is the whole point of this module.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational value")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)  # handles "3", "3/4" and "0.2" exactly
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


class SymbolTable:
    """Ordered set of declared symbols with roles.

    At most one radial, one trig_cos and one trig_sin symbol may be declared.
    ``pairs`` records (sin_name, cos_name) links created during Taylor
    expansion of trig functions at symbolic centers; they satisfy
    sin^2 + cos^2 = 1 but the identity is metadata, not enforced rewriting.
    """

    __slots__ = ("_names", "_roles", "pairs")

    def __init__(self, roles: Mapping[str, str] | Iterable[tuple[str, str]] = (),
                 pairs: Iterable[tuple[str, str]] = ()):
        items = list(roles.items()) if isinstance(roles, Mapping) else list(roles)
        names: list[str] = []
        table: dict[str, str] = {}
        for name, role in items:
            if not _NAME_RE.match(name):
                raise SymbolError(f"invalid symbol name {name!r}")
            if role not in _ROLES:
                raise SymbolError(f"unknown role {role!r} for symbol {name!r}")
            if name in table:
                if table[name] != role:
                    raise SymbolError(f"symbol {name!r} declared with conflicting roles")
                continue
            table[name] = role
            names.append(name)
        for unique_role in (ROLE_RADIAL, ROLE_TRIG_COS, ROLE_TRIG_SIN):
            owners = [n for n in names if table[n] == unique_role]
            if len(owners) > 1:
                raise SymbolError(f"more than one {unique_role} symbol: {owners}")
        self._names = tuple(names)
        self._roles = table
        self.pairs = tuple(pairs)

    def __contains__(self, name: str) -> bool:
        return name in self._roles

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SymbolTable)
                and self._names == other._names and self._roles == other._roles)

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}:{self._roles[n]}" for n in self._names)
        return f"SymbolTable({inner})"

    def role(self, name: str) -> str:
        try:
            return self._roles[name]
        except KeyError:
            raise SymbolError(f"undeclared symbol {name!r}") from None

    def symbols(self, role: str | None = None) -> tuple[str, ...]:
        if role is None:
            return self._names
        return tuple(n for n in self._names if self._roles[n] == role)

    def _unique(self, role: str) -> str | None:
        for n in self._names:
            if self._roles[n] == role:
                return n
        return None

    @property
    def radial(self) -> str | None:
        return self._unique(ROLE_RADIAL)

    @property
    def trig_cos(self) -> str | None:
        return self._unique(ROLE_TRIG_COS)

    @property
    def trig_sin(self) -> str | None:
        return self._unique(ROLE_TRIG_SIN)

    def merge(self, other: "SymbolTable") -> "SymbolTable":
        """Union of two tables; conflicting roles raise SymbolError."""
        if other is self or other == self:
            return self
        merged = list(zip(self._names, (self._roles[n] for n in self._names)))
        for name in other._names:
            role = other._roles[name]
            if name in self._roles:
                if self._roles[name] != role:
                    raise SymbolError(
                        f"symbol {name!r} has role {self._roles[name]!r} here "
                        f"but {role!r} in the merged table")
            else:
                merged.append((name, role))
        pairs = self.pairs + tuple(p for p in other.pairs if p not in self.pairs)
        return SymbolTable(merged, pairs)

    def extended(self, extra: Iterable[tuple[str, str]],
                 pairs: Iterable[tuple[str, str]] = ()) -> "SymbolTable":
        base = list(zip(self._names, (self._roles[n] for n in self._names)))
        return SymbolTable(base + list(extra), self.pairs + tuple(pairs))


class Monomial:
    """Product of symbol powers; exponents keyed by symbol name.

    Stored as a name-sorted tuple of (name, exponent) with no zero exponents,
    so monomials hash and compare structurally.
    """

    __slots__ = ("exps",)

    def __init__(self, exps: Iterable[tuple[str, int]] = ()):
        acc: dict[str, int] = {}
        for name, e in exps:
            if e:
                acc[name] = acc.get(name, 0) + e
        self.exps = tuple(sorted((n, e) for n, e in acc.items() if e))

    @staticmethod
    def of(name: str, power: int = 1) -> "Monomial":
        return Monomial(((name, power),))

    def __eq__(self, other) -> bool:
        return isinstance(other, Monomial) and self.exps == other.exps

    def __hash__(self) -> int:
        return hash(self.exps)

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(self.exps + other.exps)

    def __pow__(self, k: int) -> "Monomial":
        return Monomial((n, e * k) for n, e in self.exps)

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.exps)

    def degree_over(self, names) -> int:
        return sum(e for n, e in self.exps if n in names)

    def exp_of(self, name: str) -> int:
        for n, e in self.exps:
            if n == name:
                return e
        return 0

    def symbols(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.exps)

    def divides(self, other: "Monomial") -> bool:
        return all(0 <= e <= other.exp_of(n) for n, e in self.exps)

    def divide(self, other: "Monomial") -> "Monomial":
        return Monomial(self.exps + tuple((n, -e) for n, e in other.exps))

    def is_constant(self) -> bool:
        return not self.exps

    def __repr__(self) -> str:
        if not self.exps:
            return "1"
        return "*".join(n if e == 1 else f"{n}^{e}" for n, e in self.exps)


_ONE = Monomial()


def _grlex_key(m: Monomial, alphabet: tuple[str, ...]):
    # graded lex: total degree first, then exponent vector in alphabet order
    return (m.degree, tuple(m.exp_of(n) for n in alphabet))


class Polynomial:
    """Immutable-by-convention sparse polynomial with Fraction coefficients."""

    __slots__ = ("terms", "table")

    def __init__(self, terms: Mapping[Monomial, Fraction], table: SymbolTable):
        clean: dict[Monomial, Fraction] = {}
        radial = table.radial
        for mono, coeff in terms.items():
            coeff = as_fraction(coeff)
            if not coeff:
                continue
            for name, e in mono.exps:
                if name not in table:
                    raise SymbolError(f"undeclared symbol {name!r} in monomial {mono!r}")
                if e < 0 and name != radial:
                    raise LaurentError(
                        f"negative power on {name!r}; only the radial symbol "
                        f"({radial!r}) may be Laurent")
            clean[mono] = coeff
        self.terms = clean
        self.table = table

    # ---- constructors -------------------------------------------------

    @staticmethod
    def zero(table: SymbolTable) -> "Polynomial":
        return Polynomial({}, table)

    @staticmethod
    def constant(value, table: SymbolTable) -> "Polynomial":
        return Polynomial({_ONE: as_fraction(value)}, table)

    @staticmethod
    def symbol(name: str, table: SymbolTable) -> "Polynomial":
        if name not in table:
            raise SymbolError(f"undeclared symbol {name!r}")
        return Polynomial({Monomial.of(name): Fraction(1)}, table)

    # ---- ring structure ------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial.constant(other, self.table)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        table = self.table.merge(other.table)
        acc = dict(self.terms)
        for m, c in other.terms.items():
            acc[m] = acc.get(m, Fraction(0)) + c
        return Polynomial(acc, table)

    __radd__ = __add__

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self.terms.items()}, self.table)

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        table = self.table.merge(other.table)
        acc: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1 * m2
                acc[m] = acc.get(m, Fraction(0)) + c1 * c2
        return Polynomial(acc, table)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int):
            raise TypeError("polynomial powers must be integers")
        if k < 0:
            if len(self.terms) != 1:
                raise LaurentError("negative power on a non-monomial polynomial")
            ((mono, coeff),) = self.terms.items()
            inv = Monomial((n, e * k) for n, e in mono.exps)
            return Polynomial({inv: coeff ** k}, self.table)
        result = Polynomial.constant(1, self.table)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other, self.table)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    # ---- inspection ----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(m.degree for m in self.terms)

    def free_symbols(self) -> set[str]:
        out: set[str] = set()
        for m in self.terms:
            out.update(m.symbols())
        return out

    def constant_term(self) -> Fraction:
        return self.terms.get(_ONE, Fraction(0))

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def linear_part(self) -> tuple[Fraction, dict[str, Fraction]]:
        """Constant term plus the coefficients of the degree-1 monomials."""
        lin: dict[str, Fraction] = {}
        for m, c in self.terms.items():
            if m.degree == 1:
                lin[m.exps[0][0]] = c
        return self.constant_term(), lin

    def collect(self, name: str) -> dict[int, "Polynomial"]:
        """Split into coefficient polynomials keyed by the power of `name`."""
        buckets: dict[int, dict[Monomial, Fraction]] = {}
        for m, c in self.terms.items():
            e = m.exp_of(name)
            rest = Monomial(tuple((n, k) for n, k in m.exps if n != name))
            buckets.setdefault(e, {})[rest] = c
        return {e: Polynomial(t, self.table) for e, t in buckets.items()}

    def truncated(self, max_degree: int, counted: set[str] | None = None) -> "Polynomial":
        """Drop terms whose (restricted) total degree exceeds max_degree."""
        if counted is None:
            keep = {m: c for m, c in self.terms.items() if m.degree <= max_degree}
        else:
            keep = {m: c for m, c in self.terms.items()
                    if m.degree_over(counted) <= max_degree}
        return Polynomial(keep, self.table)

    # ---- calculus and substitution --------------------------------------

    def differentiate(self, name: str) -> "Polynomial":
        if name not in self.table:
            raise SymbolError(f"undeclared symbol {name!r}")
        acc: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            e = m.exp_of(name)
            if not e:
                continue
            lowered = Monomial(tuple((n, k) for n, k in m.exps if n != name)
                               + ((name, e - 1),))
            acc[lowered] = acc.get(lowered, Fraction(0)) + c * e
        return Polynomial(acc, self.table)

    def substitute(self, bindings: Mapping[str, "Polynomial | Fraction | int | str"]) -> "Polynomial":
        """Ring homomorphism replacing symbols by polynomials.

        Negative (radial) powers require the replacement to be an invertible
        monomial.  Symbols introduced by the bindings must be declared in the
        binding polynomials' own tables.
        """
        polys: dict[str, Polynomial] = {}
        table = self.table
        for name, value in bindings.items():
            if name not in self.table:
                raise SymbolError(f"cannot substitute undeclared symbol {name!r}")
            p = value if isinstance(value, Polynomial) else Polynomial.constant(value, self.table)
            polys[name] = p
            table = table.merge(p.table)
        result = Polynomial.zero(table)
        for m, c in self.terms.items():
            term = Polynomial.constant(c, table)
            passthrough: list[tuple[str, int]] = []
            for name, e in m.exps:
                if name in polys:
                    term = term * (polys[name] ** e)
                else:
                    passthrough.append((name, e))
            if passthrough:
                term = term * Polynomial({Monomial(passthrough): Fraction(1)}, table)
            result = result + term
        return result

    def evaluate(self, point: Mapping[str, object]):
        """Evaluate at a point; exact Fraction unless any value is a float."""
        missing = self.free_symbols() - set(point)
        if missing:
            raise SymbolError(f"unbound symbols in evaluation: {sorted(missing)}")
        exact = all(not isinstance(point[n], float) for n in self.free_symbols())
        if exact:
            total = Fraction(0)
            for m, c in self.terms.items():
                term = c
                for n, e in m.exps:
                    term *= as_fraction(point[n]) ** e
                total += term
            return total
        total_f = 0.0
        for m, c in self.terms.items():
            term_f = float(c)
            for n, e in m.exps:
                term_f *= float(point[n]) ** e
            total_f += term_f
        return total_f

    # ---- radial (Laurent) support ---------------------------------------

    def r_valuation(self) -> int:
        """Minimal exponent of the radial symbol across terms."""
        if not self.terms:
            raise ValueError("r-valuation of the zero polynomial is undefined")
        radial = self.table.radial
        if radial is None:
            raise SymbolError("no radial symbol declared")
        return min(m.exp_of(radial) for m in self.terms)

    def divide_r_power(self, k: int, require_regular: bool = True) -> "Polynomial":
        """Multiply every term by r^(-k); exact shift of radial exponents."""
        radial = self.table.radial
        if radial is None:
            raise SymbolError("no radial symbol declared")
        if k == 0:
            return self
        if require_regular and self.terms and self.r_valuation() < k:
            raise DivisionError(
                f"dividing by {radial}^{k} would leave negative powers "
                f"(valuation {self.r_valuation()})")
        acc = {}
        for m, c in self.terms.items():
            shifted = Monomial(tuple((n, e) for n, e in m.exps if n != radial)
                               + ((radial, m.exp_of(radial) - k),))
            acc[shifted] = c
        return Polynomial(acc, self.table)

    # ---- trig ring -------------------------------------------------------

    def trig_normalize(self) -> "Polynomial":
        """Canonical form with sin-degree <= 1 via S^2 -> 1 - C^2."""
        cos_sym = self.table.trig_cos
        sin_sym = self.table.trig_sin
        if sin_sym is None:
            return self
        one = Polynomial.constant(1, self.table)
        c2 = Polynomial.symbol(cos_sym, self.table) ** 2 if cos_sym else None
        if c2 is None:
            raise SymbolError("trig_sin declared without a trig_cos partner")
        pyth = one - c2
        result = Polynomial.zero(self.table)
        for m, coeff in self.terms.items():
            e = m.exp_of(sin_sym)
            q, rem = divmod(e, 2)
            rest = Monomial(tuple((n, k) for n, k in m.exps if n != sin_sym)
                            + ((sin_sym, rem),))
            term = Polynomial({rest: coeff}, self.table)
            if q:
                term = term * (pyth ** q)
            result = result + term
        return result

    # ---- rendering -------------------------------------------------------

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        alphabet = tuple(sorted(self.free_symbols()))
        return sorted(self.terms.items(),
                      key=lambda item: _grlex_key(item[0], alphabet), reverse=True)

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts: list[str] = []
        for m, c in self.sorted_terms():
            mono = repr(m)
            if m.is_constant():
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    __str__ = to_str

    def __repr__(self) -> str:
        return f"<Polynomial {self.to_str()}>"


# ---- exact division and relation arithmetic --------------------------------


def _leading(p: Polynomial, alphabet: tuple[str, ...]) -> tuple[Monomial, Fraction]:
    mono = max(p.terms, key=lambda m: _grlex_key(m, alphabet))
    return mono, p.terms[mono]


def exact_divide(p: Polynomial, divisor: Polynomial) -> Polynomial:
    """Exact multivariate division; DivisionError when the remainder is nonzero."""
    if divisor.is_zero:
        raise DivisionError("division by the zero polynomial")
    table = p.table.merge(divisor.table)
    alphabet = tuple(sorted(p.free_symbols() | divisor.free_symbols()))
    lead_m, lead_c = _leading(divisor, alphabet)
    quotient = Polynomial.zero(table)
    rem = p
    while not rem.is_zero:
        m, c = _leading(rem, alphabet)
        if not lead_m.divides(m):
            raise DivisionError("polynomial division left a nonzero remainder")
        t = Polynomial({m.divide(lead_m): c / lead_c}, table)
        quotient = quotient + t
        rem = rem - t * divisor
    return quotient


def reduce_by_relation(p: Polynomial, relation: Polynomial) -> Polynomial:
    """Normal form of p modulo a single polynomial relation.

    A one-element basis is automatically a Groebner basis of the ideal it
    generates, so this normal form is canonical: p == q in the quotient ring
    iff their reduced forms are identical polynomials.
    """
    if relation.is_zero:
        return p
    table = p.table.merge(relation.table)
    alphabet = tuple(sorted(p.free_symbols() | relation.free_symbols()))
    lead_m, lead_c = _leading(relation, alphabet)
    tail = relation - Polynomial({lead_m: lead_c}, table)
    result = p
    while True:
        reducible = [(m, c) for m, c in result.terms.items() if lead_m.divides(m)]
        if not reducible:
            return result
        m, c = max(reducible, key=lambda item: _grlex_key(item[0], alphabet))
        factor = Polynomial({m.divide(lead_m): c / lead_c}, table)
        result = result - factor * Polynomial({lead_m: lead_c}, table) - factor * tail


def equal_given_inverses(p: Polynomial, q: Polynomial,
                         inverses: Mapping[str, Polynomial]) -> bool:
    """Decide p == q modulo relations  sym * base == 1.

    Helper symbols standing for 1/base (e.g. d = 1/(a1-a2)) are eliminated by
    clearing denominators: collect by powers of sym and fold base back in.
    Bases must not contain any of the helper symbols.
    """
    diff = p - q
    for sym, base in inverses.items():
        if base.is_zero:
            raise DivisionError(f"inverse base for {sym!r} is the zero polynomial")
        buckets = diff.collect(sym)
        top = max(buckets) if buckets else 0
        cleared = Polynomial.zero(diff.table.merge(base.table))
        for power, coeff_poly in buckets.items():
            cleared = cleared + coeff_poly * (base ** (top - power))
        diff = cleared
    return diff.is_zero
