"""Exceptions raised by the library.

``DomainError`` subclasses are mathematical dead ends (the CLI maps them to
exit code 1); ``ScenarioError`` covers malformed or inconsistent input
(exit code 2).
"""


class DomainError(ValueError):
    pass


class Unreachable(DomainError):
    """Target entropy lies below what the deformation can reach."""


class NoMass(DomainError):
    """The driving measure puts no mass on the chosen coordinate."""


class Infeasible(DomainError):
    """No budget sequence satisfies the constraints."""


class UnreachableElement(DomainError):
    """A group element is not a word in the declared generators."""


class ScenarioError(ValueError):
    """Parse or validation failure for a scenario file."""
