"""Exception hierarchy shared by all modules.

The CLI maps these onto its exit codes: 2 for rejected input, 3 for
instances that are too large or genuinely undecided within the configured
bounds, 4 for violated internal contracts (which are defects, never
expected at runtime).
"""

from __future__ import annotations

__all__ = [
    "ToolkitError",
    "ValidationError",
    "InfeasibleError",
    "UndecidedError",
    "InternalFault",
]


class ToolkitError(Exception):
    """Base class; `where` names the originating module and operation."""

    exit_code = 1

    def __init__(self, message: str, *, where: str = ""):
        super().__init__(message)
        self.where = where


class ValidationError(ToolkitError):
    """Rejected input or violated operation precondition."""

    exit_code = 2


class InfeasibleError(ToolkitError):
    """Instance exceeds configured bounds; never silently approximated."""

    exit_code = 3


class UndecidedError(InfeasibleError):
    """Explicit undecided status from a bounded decision procedure."""


class InternalFault(ToolkitError):
    """A violated internal consistency contract (treated as a defect)."""

    exit_code = 4
