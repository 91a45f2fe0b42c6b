"""Exception types shared across the package."""


class NetblowError(Exception):
    """Base class for package-specific errors."""


class ParseError(NetblowError):
    """Syntax error in an expression or system file, with a position."""

    def __init__(self, message: str, position: int | None = None, line: int | None = None):
        self.position = position
        self.line = line
        where = ""
        if line is not None:
            where += f" (line {line})"
        if position is not None:
            where += f" (column {position})"
        super().__init__(message + where)


class SymbolError(NetblowError):
    """Undeclared symbol, or conflicting role declarations."""


class LaurentError(NetblowError):
    """Negative power on a symbol other than the registered radial one."""


class DivisionError(NetblowError):
    """Exact polynomial division failed (nonzero remainder)."""


class ChartError(NetblowError):
    """Blow-up chart inconsistent with the vector field."""


class InvariantError(NetblowError):
    """Requested restriction subset is not invariant."""


class EquilibriumError(NetblowError):
    """Supplied point is not an equilibrium."""


class IntegrationError(NetblowError):
    """Numerical integration failed (non-finite field evaluation)."""
