"""Exceptions raised by dyncover."""

from typing import Any, Optional


class DyncoverError(Exception):
    """Base class for all dyncover errors."""


class ParseError(DyncoverError, ValueError):
    """A malformed line in an instance file."""

    def __init__(self, message, line_number=None):
        # type: (str, Optional[int]) -> None
        if line_number is not None:
            message = f'line {line_number}: {message}'
        super().__init__(message)
        self.line_number = line_number


class ValidationError(DyncoverError, ValueError):
    """An instance that violates a SetSystem invariant."""


class TraceError(DyncoverError, ValueError):
    """An update that is illegal for the current universe."""


class InfeasibleError(DyncoverError, ValueError):
    """An alive element that no set can cover."""

    def __init__(self, element):
        # type: (int) -> None
        super().__init__(f'element {element} is not contained in any set')
        self.element = element


class ParameterError(DyncoverError, ValueError):
    """A parameter outside the range an operation supports."""


class BudgetExhausted(DyncoverError, RuntimeError):
    """The exact search ran out of nodes before proving optimality."""

    def __init__(self, incumbent, bound, nodes):
        # type: (Any, float, int) -> None
        super().__init__(
            f'node budget of {nodes} exhausted;'
            f' best cover costs {incumbent.total_cost}, lower bound {bound}'
        )
        self.incumbent = incumbent
        self.bound = bound
        self.nodes = nodes


class ConsistencyError(DyncoverError, RuntimeError):
    """An internal invariant failed; indicates a bug, not bad input."""


class AuditFailure(DyncoverError, AssertionError):
    """An audit found violations."""

    def __init__(self, message, findings=()):
        # type: (str, Any) -> None
        super().__init__(message)
        self.findings = list(findings)
