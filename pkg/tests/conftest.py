import random
from fractions import Fraction

import pytest

from netblow.poly import (ROLE_PARAMETER, ROLE_RADIAL, ROLE_STATE, Monomial,
                          Polynomial, SymbolTable)


@pytest.fixture
def basic_table():
    return SymbolTable([
        ("x1", ROLE_STATE), ("x2", ROLE_STATE),
        ("a1", ROLE_PARAMETER), ("a2", ROLE_PARAMETER),
        ("w12", ROLE_PARAMETER), ("w21", ROLE_PARAMETER),
        ("r", ROLE_RADIAL),
    ])


def sym(name, table):
    return Polynomial.symbol(name, table)


def const(value, table):
    return Polynomial.constant(value, table)


def random_rational(rng: random.Random, num=9, den=5) -> Fraction:
    return Fraction(rng.randint(-num, num), rng.randint(1, den))


def random_polynomial(rng: random.Random, table, symbols, max_terms=5,
                      max_degree=3) -> Polynomial:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        mono = []
        for _ in range(rng.randint(0, max_degree)):
            mono.append((rng.choice(symbols), 1))
        terms[Monomial(mono)] = random_rational(rng)
    return Polynomial(terms, table)
