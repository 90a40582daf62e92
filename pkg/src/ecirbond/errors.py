"""Exception hierarchy shared by the library and the command line front end."""

from __future__ import annotations


class ECIRError(Exception):
    """Base class for all errors raised by ecirbond."""

    exit_code = 1


class ConfigError(ECIRError, ValueError):
    """Invalid configuration text or parameter value.

    ``code`` is one of ``"syntax"``, ``"unknown-key"``, ``"constraint"`` or
    ``"type"``; ``field`` and ``line`` locate the offending entry when known.
    """

    exit_code = 2

    def __init__(self, message: str, code: str = "constraint", field: str | None = None,
                 line: int | None = None):
        self.code = code
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(field)
        prefix = f"[{code}] " + (f"{', '.join(where)}: " if where else "")
        super().__init__(prefix + message)


class ExpressionError(ConfigError):
    """Coefficient expression failed to parse; ``offset`` is the byte offset."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}", code="syntax")


class CoefficientError(ECIRError, ValueError):
    """A coefficient function produced a non-finite value."""


class CapacityError(ECIRError):
    """A configured capacity (order cap, evaluation budget) would be exceeded."""

    exit_code = 3


class QuadratureError(ECIRError, ArithmeticError):
    """Integrand returned a non-finite value at a quadrature node."""

    def __init__(self, message: str, node=None):
        self.node = node
        super().__init__(message)


class SeriesDivergenceError(ECIRError, ArithmeticError):
    """A_0 became non-positive: the truncated series left its convergence domain."""


class StructuralError(ECIRError, AssertionError):
    """A generated derivative term does not fit the partition catalog."""
