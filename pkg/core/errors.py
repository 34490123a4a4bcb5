"""Domain error hierarchy shared by every layer.

Every error carries the process exit code the CLI maps it to. Kernels raise
these; orchestration layers translate them into exit codes or failed rows.
"""

from __future__ import annotations


class LabError(ValueError):
    """Base class for all toolkit errors.

    Input contract:
    - `message` names the failing object (cell, triple, field, cap).

    Output contract:
    - `exit_code` is the CLI exit status for this failure class.

    Side effects:
    - None.
    """

    exit_code: int = 1


class GroupTableError(LabError):
    """A Cayley table violates a group axiom."""


class NotLatinSquare(GroupTableError):
    pass


class NotAssociative(GroupTableError):
    pass


class NoIdentity(GroupTableError):
    pass


class CapExceeded(LabError):
    """A configured enumeration cap would be exceeded."""

    exit_code = 3


class DimensionCap(CapExceeded):
    pass


class GroupMismatch(LabError):
    """Operands live on different groups."""


class NotNormal(LabError):
    pass


class ChainMismatch(LabError):
    """A quotient chain does not start at the walk's group."""


class NotGenerating(LabError):
    pass


class NotNormalInQuotient(LabError):
    pass


class BInfinite(LabError):
    """A hom count was requested into an infinite abelian group."""


class ExponentMismatch(LabError):
    pass


class HypothesisViolated(LabError):
    pass


class PreconditionViolated(LabError):
    pass


class ConfigInvalid(LabError):
    """Experiment configuration failed schema validation."""

    exit_code = 2


EXIT_IO_ERROR = 4
