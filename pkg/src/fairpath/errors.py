"""Exception hierarchy shared across the package."""


class FairpathError(Exception):
    """Base class for all errors raised by fairpath."""


class GraphError(FairpathError):
    """Malformed graph, cyclic input, or an operation on an unsupported view."""


class DataError(FairpathError):
    """Bad input data: missing values, wrong column types, degenerate columns."""


class ConvergenceError(FairpathError):
    """An iterative procedure failed to converge within its budget."""
