"""Exception types shared across the toolkit.

Everything derives from DlnLpError so callers can catch the library's
failures with a single except clause; IO failures use the builtin OSError
and oversized mirror-descent exponents use the builtin OverflowError.
"""


class DlnLpError(Exception):
    """Base class for all toolkit-specific errors."""


class DimensionMismatch(DlnLpError):
    """Operands have incompatible shapes."""


class NonFiniteData(DlnLpError):
    """Problem data lies outside its numeric domain (NaN/Inf anywhere,
    or a cost component that is not strictly positive)."""


class ParseError(DlnLpError):
    """A problem file is malformed; carries the offending line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class MarginalMismatch(DlnLpError):
    """Transport marginals do not sum consistently."""


class ShiftTooSmall(DlnLpError):
    """The cost shift leaves a nonpositive component."""


class NonFinite(DlnLpError):
    """An iterate overflowed to NaN/Inf."""


class PositivityLost(DlnLpError):
    """A step produced a nonpositive component of u (stepsize too large
    for the componentwise positivity guarantee)."""


class StepUnderflow(DlnLpError):
    """The flow integrator's step fell below the representable floor."""


class MissingSnapshots(DlnLpError):
    """A trace lacks the per-iteration snapshots an analysis needs."""


class KernelUnderflow(DlnLpError):
    """exp(-cost/lambda) underflowed to zero; lambda too small for the
    cost scale (log-domain rescue is out of scope)."""


class SingularHessian(DlnLpError):
    """The dual Newton Hessian is numerically rank deficient."""


class NoConvergence(DlnLpError):
    """An iterative oracle exhausted its iteration budget."""


class Infeasible(DlnLpError):
    """No basic feasible solution exists."""


class TooLarge(DlnLpError):
    """Problem exceeds an enumeration cap."""


class OracleUnavailable(DlnLpError):
    """No ground-truth oracle applies at this problem size."""
