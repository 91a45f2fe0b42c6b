"""Exact nilpotency detection and spectrum classification.

Nilpotency lives on a measure-zero stratum, so it is decided exactly from
the characteristic polynomial (Faddeev-LeVerrier over Fractions), never by
thresholding numeric eigenvalues.  Numeric eigenvalues are computed from the
exact characteristic polynomial afterwards, purely for reporting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import SymbolError
from .netsys import VectorField
from .poly import as_fraction

CLASS_HYPERBOLIC = "hyperbolic"
CLASS_SEMI_HYPERBOLIC = "semi-hyperbolic"
CLASS_NILPOTENT = "nilpotent"
CLASS_OTHER = "non-hyperbolic-non-nilpotent"


@dataclass(frozen=True)
class RationalMatrix:
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ValueError("matrix must be square")

    @staticmethod
    def from_rows(rows: Sequence[Sequence]) -> "RationalMatrix":
        return RationalMatrix(tuple(tuple(as_fraction(v) for v in r) for r in rows))

    @staticmethod
    def identity(n: int) -> "RationalMatrix":
        return RationalMatrix(tuple(
            tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)))

    @staticmethod
    def zero(n: int) -> "RationalMatrix":
        return RationalMatrix(tuple(
            tuple(Fraction(0) for _ in range(n)) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i][j]

    def trace(self) -> Fraction:
        return sum((self.rows[i][i] for i in range(self.n)), Fraction(0))

    def add(self, other: "RationalMatrix") -> "RationalMatrix":
        return RationalMatrix(tuple(
            tuple(a + b for a, b in zip(ra, rb))
            for ra, rb in zip(self.rows, other.rows)))

    def scale(self, c) -> "RationalMatrix":
        c = as_fraction(c)
        return RationalMatrix(tuple(tuple(c * v for v in r) for r in self.rows))

    def matmul(self, other: "RationalMatrix") -> "RationalMatrix":
        n = self.n
        return RationalMatrix(tuple(
            tuple(sum((self.rows[i][k] * other.rows[k][j] for k in range(n)),
                      Fraction(0)) for j in range(n))
            for i in range(n)))

    def power(self, k: int) -> "RationalMatrix":
        out = RationalMatrix.identity(self.n)
        for _ in range(k):
            out = out.matmul(self)
        return out

    def is_zero(self) -> bool:
        return all(v == 0 for r in self.rows for v in r)

    def to_lists(self) -> list[list[str]]:
        return [[str(v) for v in r] for r in self.rows]


def char_poly(m: RationalMatrix) -> tuple[Fraction, ...]:
    """Monic characteristic polynomial, coefficients descending by degree.

    Faddeev-LeVerrier recursion: M_1 = M, c_{n-k} = -tr(M_k)/k,
    M_{k+1} = M (M_k + c_{n-k} I).  All arithmetic exact.
    """
    n = m.n
    coeffs = [Fraction(1)]
    mk = m
    ident = RationalMatrix.identity(n)
    for k in range(1, n + 1):
        c = -mk.trace() / k
        coeffs.append(c)
        if k < n:
            mk = m.matmul(mk.add(ident.scale(c)))
    return tuple(coeffs)


def is_nilpotent(m: RationalMatrix) -> bool:
    """True iff the characteristic polynomial is lambda^n exactly."""
    return all(c == 0 for c in char_poly(m)[1:])


@dataclass(frozen=True)
class SpectrumReport:
    char_poly: tuple[Fraction, ...]
    eigenvalues: tuple[complex, ...]
    klass: str
    zero_tolerance: float

    def inertia(self) -> tuple[int, int, int]:
        """Counts of eigenvalues with negative / near-zero / positive real part."""
        neg = sum(1 for ev in self.eigenvalues if ev.real < -self.zero_tolerance)
        pos = sum(1 for ev in self.eigenvalues if ev.real > self.zero_tolerance)
        return neg, len(self.eigenvalues) - neg - pos, pos

    def to_dict(self) -> dict:
        return {
            "char_poly": [str(c) for c in self.char_poly],
            "eigenvalues": [[ev.real, ev.imag] for ev in self.eigenvalues],
            "class": self.klass,
            "zero_tolerance": self.zero_tolerance,
        }


def spectrum_classify(m: RationalMatrix, zero_tolerance: float = 1e-9) -> SpectrumReport:
    cp = char_poly(m)
    if m.n:
        roots = np.roots([float(c) for c in cp])
        eigenvalues = tuple(complex(z) for z in roots)
    else:
        eigenvalues = ()
    if all(c == 0 for c in cp[1:]):
        klass = CLASS_NILPOTENT
    else:
        small = sum(1 for ev in eigenvalues if abs(ev.real) <= zero_tolerance)
        if small == 0:
            klass = CLASS_HYPERBOLIC
        elif small == len(eigenvalues):
            klass = CLASS_OTHER
        else:
            klass = CLASS_SEMI_HYPERBOLIC
    return SpectrumReport(cp, eigenvalues, klass, zero_tolerance)


def jacobian(vf: VectorField, point: Mapping[str, object]) -> RationalMatrix:
    """Exact Jacobian of the field at a rational point (parameters included)."""
    needed = set()
    for c in vf.components:
        needed |= c.free_symbols()
    unbound = needed - set(point)
    if unbound:
        raise SymbolError(f"jacobian point leaves symbols unbound: {sorted(unbound)}")
    values = {k: as_fraction(v) for k, v in point.items()}
    rows = []
    for comp in vf.components:
        rows.append(tuple(comp.differentiate(v).evaluate(values)
                          for v in vf.variables))
    return RationalMatrix(tuple(rows))
