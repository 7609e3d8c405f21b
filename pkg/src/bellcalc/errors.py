"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so the distinctions matter:
validation/parse problems, resource guards, and genuinely undefined
quantities are different failure modes.
"""


class BellError(Exception):
    """Base class for all package errors."""


class ScenarioMismatchError(BellError):
    """Two objects living in different scenarios were combined."""


class ValidationError(BellError):
    """An object or input violates a structural invariant.

    ``report`` carries the individual violations when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = tuple(report) if report else ()

    def __str__(self):
        base = super().__str__()
        if not self.report:
            return base
        shown = "; ".join(str(v) for v in self.report[:3])
        more = len(self.report) - 3
        if more > 0:
            shown += f"; and {more} more"
        return f"{base}: {shown}"


class GuardExceededError(BellError):
    """An enumeration or problem size exceeded its resource guard."""


class UndefinedQuantityError(BellError):
    """The requested quantity is mathematically undefined for this input."""


class SignalingBehaviorError(UndefinedQuantityError):
    """Maximal violation is undefined because the behavior signals."""


class DocumentError(BellError):
    """A JSON document failed to parse or has the wrong structure."""
