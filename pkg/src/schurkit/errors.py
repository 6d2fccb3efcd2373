"""Exception types shared across the package."""

from __future__ import annotations


class SchurKitError(Exception):
    """Base class for all errors raised by schurkit."""


class InvalidArgument(SchurKitError, ValueError):
    pass


class BudgetExceeded(SchurKitError):
    """A search or enumeration ran past its configured budget.

    ``partial`` carries whatever was found before the cut-off, when the
    caller can make use of it.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class PropertyViolation(SchurKitError, AssertionError):
    """A structural property that must hold for valid input did not hold."""


class InternalError(SchurKitError, RuntimeError):
    pass


class NotApplicable(SchurKitError):
    pass


class AxiomViolation(InvalidArgument):
    """A candidate partition fails one of the S-ring axioms."""

    axiom = 0

    def __init__(self, message: str, sets=()):
        super().__init__(message)
        self.sets = tuple(sets)


class Axiom1Violation(AxiomViolation):
    axiom = 1


class Axiom2Violation(AxiomViolation):
    axiom = 2


class Axiom3Violation(AxiomViolation):
    axiom = 3


class NotASection(InvalidArgument):
    pass


class SectionMismatch(InvalidArgument):
    pass
