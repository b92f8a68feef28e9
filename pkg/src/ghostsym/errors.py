"""Exception hierarchy shared by every ghostsym module.

``SyntaxError`` here deliberately shadows the builtin inside this module;
import it as ``errors.SyntaxError`` or via the ``MiniCSyntaxError`` alias.
"""

import builtins


class GhostsymError(Exception):
    """Base class for all errors raised by ghostsym."""


class MiniCSyntaxError(GhostsymError):
    """Malformed MiniC source.

    ``offset`` is 1-based over the whole text, ``line``/``col`` are 1-based.
    """

    def __init__(self, message, offset, line, col, expected=None):
        self.offset = offset
        self.line = line
        self.col = col
        self.expected = expected
        where = f"line {line}, col {col} (offset {offset})"
        if expected:
            message = f"{message}; expected {expected}"
        super().__init__(f"{where}: {message}")


SyntaxError = MiniCSyntaxError  # noqa: A001


class SortError(GhostsymError):
    """Ill-typed MiniC expression or statement."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}, col {col}: {message}"
        super().__init__(message)


class StepBudgetExceeded(GhostsymError):
    pass


class RuntimeFault(GhostsymError):
    """Concrete execution fault: null dereference, zero divisor, failed assert."""

    def __init__(self, kind, message, location=None):
        self.kind = kind
        self.location = location
        loc = f" at {location}" if location else ""
        super().__init__(f"{kind}{loc}: {message}")


class UnknownLabel(GhostsymError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class SortMismatch(GhostsymError, TypeError):
    pass


class UnsatAssignment(GhostsymError):
    pass


class UnboundSymbol(GhostsymError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class PathBudgetExceeded(GhostsymError):
    pass


class SolverFailure(GhostsymError):
    pass


class BackendError(SolverFailure):
    """The SMT child process died or replied with something unparsable."""


class CutNotOnPath(GhostsymError):
    pass


class MultipleCutOccurrences(GhostsymError):
    pass


class EmptyWriteSet(GhostsymError, ValueError):
    pass


class ProviderUnavailable(GhostsymError):
    pass


class UnparsableGhost(GhostsymError):
    pass


class GhostRuntimeFault(GhostsymError):
    pass


class NotAPointerCall(GhostsymError, ValueError):
    pass


class ContradictoryTopology(GhostsymError):
    pass


class ConfigError(GhostsymError, ValueError):
    pass


__all__ = [name for name, obj in list(globals().items())
           if isinstance(obj, type) and issubclass(obj, builtins.BaseException)]
