"""Expression trees, the input grammar, and Taylor expansion.

Grammar (whitespace insignificant, symbols match [A-Za-z][A-Za-z0-9_]*):

    expr     := ["-"] term (("+"|"-") term)*
    term     := factor ("*" factor)*
    factor   := base ("^" ["-"] int)?
    base     := rational | decimal | symbol
              | "sin(" affine ")" | "cos(" affine ")" | "(" expr ")"
    rational := int ("/" posint)?

sin/cos arguments must be affine in declared symbols.  A trig-free tree
converts losslessly to a Polynomial; trig-bearing trees evaluate as floats
and polynomialize through `taylor_expand`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import LaurentError, ParseError, SymbolError
from .poly import (ROLE_PARAMETER, Polynomial, SymbolTable, as_fraction)


@dataclass(frozen=True)
class Affine:
    """const + sum of coeff*symbol, the only admissible trig argument."""

    const: Fraction
    coeffs: tuple[tuple[str, Fraction], ...]  # name-sorted, nonzero coeffs

    @staticmethod
    def build(const, coeffs: Mapping[str, Fraction]) -> "Affine":
        items = tuple(sorted((n, as_fraction(c)) for n, c in coeffs.items() if c))
        return Affine(as_fraction(const), items)

    def free_symbols(self) -> set[str]:
        return {n for n, _ in self.coeffs}

    def evaluate(self, point: Mapping[str, object]):
        exact = all(not isinstance(point[n], float) for n, _ in self.coeffs)
        if exact:
            total = self.const
            for n, c in self.coeffs:
                total += c * as_fraction(point[n])
            return total
        total_f = float(self.const)
        for n, c in self.coeffs:
            total_f += float(c) * float(point[n])
        return total_f

    def __str__(self) -> str:
        parts: list[str] = []
        for n, c in self.coeffs:
            if c == 1:
                body = n
            elif c == -1:
                body = n
            else:
                body = f"{abs(c)}*{n}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        if self.const or not parts:
            c = self.const
            if not parts:
                parts.append(str(c))
            else:
                parts.append(f"+ {c}" if c > 0 else f"- {abs(c)}")
        return " ".join(parts)


class Expression:
    """Base node; subclasses are Const, Sym, Sum, Prod, Pow and Trig."""

    def free_symbols(self) -> set[str]:
        raise NotImplementedError

    def contains_trig(self) -> bool:
        return False

    def evaluate(self, point: Mapping[str, object]):
        raise NotImplementedError

    def to_polynomial(self, table: SymbolTable) -> Polynomial:
        raise NotImplementedError

    def __str__(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(Expression):
    value: Fraction

    def free_symbols(self):
        return set()

    def evaluate(self, point):
        return self.value

    def to_polynomial(self, table):
        return Polynomial.constant(self.value, table)

    def __str__(self):
        v = self.value
        return str(v) if v >= 0 else f"(0 - {-v})"


@dataclass(frozen=True)
class Sym(Expression):
    name: str

    def free_symbols(self):
        return {self.name}

    def evaluate(self, point):
        try:
            v = point[self.name]
        except KeyError:
            raise SymbolError(f"unbound symbol {self.name!r}") from None
        return v if isinstance(v, float) else as_fraction(v)

    def to_polynomial(self, table):
        return Polynomial.symbol(self.name, table)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Sum(Expression):
    parts: tuple[Expression, ...]

    def free_symbols(self):
        out = set()
        for p in self.parts:
            out |= p.free_symbols()
        return out

    def contains_trig(self):
        return any(p.contains_trig() for p in self.parts)

    def evaluate(self, point):
        values = [p.evaluate(point) for p in self.parts]
        if any(isinstance(v, float) for v in values):
            return math.fsum(float(v) for v in values)
        return sum(values, Fraction(0))

    def to_polynomial(self, table):
        acc = Polynomial.zero(table)
        for p in self.parts:
            acc = acc + p.to_polynomial(table)
        return acc

    def __str__(self):
        return "(" + " + ".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class Prod(Expression):
    parts: tuple[Expression, ...]

    def free_symbols(self):
        out = set()
        for p in self.parts:
            out |= p.free_symbols()
        return out

    def contains_trig(self):
        return any(p.contains_trig() for p in self.parts)

    def evaluate(self, point):
        values = [p.evaluate(point) for p in self.parts]
        if any(isinstance(v, float) for v in values):
            out = 1.0
            for v in values:
                out *= float(v)
            return out
        out = Fraction(1)
        for v in values:
            out *= v
        return out

    def to_polynomial(self, table):
        acc = Polynomial.constant(1, table)
        for p in self.parts:
            acc = acc * p.to_polynomial(table)
        return acc

    def __str__(self):
        return "*".join(str(p) for p in self.parts)


@dataclass(frozen=True)
class Pow(Expression):
    base: Expression
    exponent: int

    def free_symbols(self):
        return self.base.free_symbols()

    def contains_trig(self):
        return self.base.contains_trig()

    def evaluate(self, point):
        v = self.base.evaluate(point)
        if isinstance(v, float):
            return v ** self.exponent
        if self.exponent < 0 and v == 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return v ** self.exponent

    def to_polynomial(self, table):
        return self.base.to_polynomial(table) ** self.exponent

    def __str__(self):
        return f"{self.base}^{self.exponent}"


@dataclass(frozen=True)
class Trig(Expression):
    fn: str  # "sin" | "cos"
    arg: Affine

    def free_symbols(self):
        return self.arg.free_symbols()

    def contains_trig(self):
        return True

    def evaluate(self, point):
        v = float(self.arg.evaluate(point))
        return math.sin(v) if self.fn == "sin" else math.cos(v)

    def to_polynomial(self, table):
        raise SymbolError(f"{self.fn}(...) node cannot convert to a polynomial; "
                          "use taylor_expand")

    def __str__(self):
        return f"{self.fn}({self.arg})"


# ---- parser -----------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<num>\d+\.\d+|\d+)
  | (?P<name>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>[-+*^/()])
  | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", position=pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, table: SymbolTable):
        self.text = text
        self.table = table
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.peek()
        if text != value:
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}",
                             position=pos)
        return self.advance()

    def parse(self) -> Expression:
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {text!r}", position=pos)
        return e

    def expr(self) -> Expression:
        parts: list[Expression] = []
        negate = False
        if self.peek()[1] == "-":
            self.advance()
            negate = True
        first = self.term()
        if negate:
            first = Prod((Const(Fraction(-1)), first))
        parts.append(first)
        while self.peek()[1] in {"+", "-"}:
            op = self.advance()[1]
            nxt = self.term()
            if op == "-":
                nxt = Prod((Const(Fraction(-1)), nxt))
            parts.append(nxt)
        return parts[0] if len(parts) == 1 else Sum(tuple(parts))

    def term(self) -> Expression:
        parts = [self.factor()]
        while self.peek()[1] == "*":
            self.advance()
            parts.append(self.factor())
        return parts[0] if len(parts) == 1 else Prod(tuple(parts))

    def factor(self) -> Expression:
        base = self.base()
        if self.peek()[1] == "^":
            self.advance()
            sign = 1
            if self.peek()[1] == "-":
                self.advance()
                sign = -1
            kind, text, pos = self.advance()
            if kind != "num" or "." in text:
                raise ParseError("exponent must be an integer", position=pos)
            exponent = sign * int(text)
            if exponent < 0:
                self._check_laurent(base, pos)
            return Pow(base, exponent)
        return base

    def _check_laurent(self, base: Expression, pos: int):
        ok = isinstance(base, Sym) and self.table.role(base.name) == "radial"
        if not ok:
            raise LaurentError(
                "negative power allowed only on the radial symbol "
                f"(at column {pos})")

    def base(self) -> Expression:
        kind, text, pos = self.advance()
        if kind == "num":
            value = Fraction(text)  # decimal literals convert exactly
            if self.peek()[1] == "/":
                self.advance()
                dkind, dtext, dpos = self.advance()
                if dkind != "num" or "." in dtext or int(dtext) == 0:
                    raise ParseError("denominator must be a positive integer",
                                     position=dpos)
                value = value / int(dtext)
            return Const(value)
        if kind == "name":
            if text in {"sin", "cos"} and self.peek()[1] == "(":
                self.advance()
                inner = self.expr()
                self.expect(")")
                return Trig(text, self._as_affine(inner, pos))
            if text not in self.table:
                raise ParseError(f"undeclared symbol {text!r}", position=pos)
            return Sym(text)
        if text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected token {text or 'end of input'!r}", position=pos)

    def _as_affine(self, inner: Expression, pos: int) -> Affine:
        if inner.contains_trig():
            raise ParseError("trig argument must be an affine combination of symbols",
                             position=pos)
        p = inner.to_polynomial(self.table)
        if p.degree() > 1:
            raise ParseError("trig argument must be affine in the symbols",
                             position=pos)
        const, lin = p.linear_part()
        return Affine.build(const, lin)


def parse_expression(text: str, table: SymbolTable) -> Expression:
    """Parse grammar-conformant text against a symbol-role declaration."""
    return _Parser(text, table).parse()


# ---- Taylor expansion --------------------------------------------------------


def _series_coeffs(fn: str, degree: int) -> list[Fraction]:
    # Maclaurin coefficients of sin/cos up to the requested degree.
    out = [Fraction(0)] * (degree + 1)
    fact = 1
    for k in range(degree + 1):
        if k:
            fact *= k
        if fn == "sin" and k % 2 == 1:
            out[k] = Fraction((-1) ** ((k - 1) // 2), fact)
        if fn == "cos" and k % 2 == 0:
            out[k] = Fraction((-1) ** (k // 2), fact)
    return out


def _trig_series(fn: str, u: Polynomial, degree: int, counted: set[str]) -> Polynomial:
    coeffs = _series_coeffs(fn, degree)
    acc = Polynomial.constant(coeffs[0], u.table)
    power = Polynomial.constant(1, u.table)
    for k in range(1, degree + 1):
        power = (power * u).truncated(degree, counted)
        if coeffs[k]:
            acc = acc + coeffs[k] * power
    return acc


def taylor_expand(expr: Expression, center: Mapping[str, object], degree: int,
                  table: SymbolTable) -> Polynomial:
    """Truncated Taylor polynomial of `expr` about `center`.

    Symbols listed in `center` are the expansion variables; total degree is
    counted over them alone, and everything else rides along symbolically.
    Trig nodes whose argument keeps a symbolic offset (a lone symbol such as
    `beta` outside the center) expand through fresh parameter symbols
    sin_beta / cos_beta, recorded as a linked pair on the returned table.
    The result is written back in the original symbols, so for nonzero
    centers it is the recentered series re-expanded about zero.
    """
    if degree < 0:
        raise ValueError("taylor degree must be nonnegative")
    centered = {name: as_fraction(v) for name, v in center.items()}
    for name in centered:
        if name not in table:
            raise SymbolError(f"center binds undeclared symbol {name!r}")
    counted = set(centered)

    work_table = table
    pairs: list[tuple[str, str]] = []

    def aux_pair(sym: str) -> tuple[Polynomial, Polynomial]:
        nonlocal work_table
        sin_name, cos_name = f"sin_{sym}", f"cos_{sym}"
        extra = [(n, ROLE_PARAMETER) for n in (sin_name, cos_name) if n not in work_table]
        if extra:
            work_table = work_table.extended(extra)
        if (sin_name, cos_name) not in pairs:
            pairs.append((sin_name, cos_name))
        return (Polynomial.symbol(sin_name, work_table),
                Polynomial.symbol(cos_name, work_table))

    def rec(node: Expression) -> Polynomial:
        # Works in deviation coordinates: each centered symbol stands for
        # (symbol - center value); the shift is undone at the end.
        if isinstance(node, Const):
            return Polynomial.constant(node.value, work_table)
        if isinstance(node, Sym):
            p = Polynomial.symbol(node.name, work_table)
            if node.name in centered:
                return p + Polynomial.constant(centered[node.name], work_table)
            return p
        if isinstance(node, Sum):
            acc = Polynomial.zero(work_table)
            for part in node.parts:
                acc = acc + rec(part)
            return acc.truncated(degree, counted)
        if isinstance(node, Prod):
            acc = Polynomial.constant(1, work_table)
            for part in node.parts:
                acc = (acc * rec(part)).truncated(degree, counted)
            return acc
        if isinstance(node, Pow):
            base = rec(node.base)
            if node.exponent >= 0:
                acc = Polynomial.constant(1, work_table)
                for _ in range(node.exponent):
                    acc = (acc * base).truncated(degree, counted)
                return acc
            return base ** node.exponent
        if isinstance(node, Trig):
            offset = node.arg.const
            deviation = Polynomial.zero(work_table)
            symbolic: list[tuple[str, Fraction]] = []
            for name, coeff in node.arg.coeffs:
                if name in centered:
                    offset += coeff * centered[name]
                    deviation = deviation + coeff * Polynomial.symbol(name, work_table)
                else:
                    symbolic.append((name, coeff))
            if symbolic:
                if len(symbolic) > 1 or symbolic[0][1] != 1:
                    raise SymbolError(
                        "trig offset must be a single uncentered symbol with "
                        f"coefficient 1, got {node.arg}")
                if offset != 0:
                    raise SymbolError(
                        "mixed rational + symbolic trig offset is not supported")
                sin_s, cos_s = aux_pair(symbolic[0][0])
                sin_u = _trig_series("sin", deviation, degree, counted)
                cos_u = _trig_series("cos", deviation, degree, counted)
                if node.fn == "sin":
                    out = sin_s * cos_u + cos_s * sin_u
                else:
                    out = cos_s * cos_u - sin_s * sin_u
                return out.truncated(degree, counted)
            if offset != 0:
                raise SymbolError(
                    "trig expansion about a nonzero rational angle is not "
                    "supported; shift coordinates so the angle offset vanishes")
            return _trig_series(node.fn, deviation, degree, counted)
        raise TypeError(f"unknown expression node {type(node).__name__}")

    result = rec(expr).truncated(degree, counted)
    shift = {name: Polynomial.symbol(name, result.table) - value
             for name, value in centered.items() if value != 0}
    if shift:
        result = result.substitute(shift)
    if pairs:
        result = Polynomial(result.terms, result.table.extended((), pairs))
    return result
