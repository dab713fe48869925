"""Exception types shared across the package.

The CLI maps these onto exit codes, so raising the right class matters:
config/validation problems, numeric failures, and resource limits are
distinguishable by callers.
"""


class VnpsError(Exception):
    """Base class for all package-specific errors."""


class ParseError(VnpsError, ValueError):
    """Malformed input text (FCIDUMP, Pauli-sum files, containers).

    Carries the 1-based line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConvergenceError(VnpsError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class ResourceLimitError(VnpsError, RuntimeError):
    """A request exceeded a configured size limit (dense windows, qubit caps)."""
