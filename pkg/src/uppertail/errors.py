"""Exception hierarchy shared by every module."""


class UpperTailError(Exception):
    """Base class for library errors."""


class GraphError(UpperTailError, ValueError):
    """Invalid graph input or an argument outside a graph's vertex range."""


class EdgeListError(GraphError):
    """Malformed edge-list document; carries the offending 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class FeasibilityError(UpperTailError):
    """A plan or computation cannot run at the requested size."""


class CountingGuardError(FeasibilityError):
    """Exact subgraph counting would exceed the configured search volume."""


class InternalCheckError(UpperTailError, AssertionError):
    """A proved property or construction certificate was violated at runtime."""


class ParameterError(UpperTailError, ValueError):
    """Numeric parameter outside its valid range (n, p, eps, trials, grid)."""
