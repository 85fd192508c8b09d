"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: invalid input -> 1, guard exceeded -> 2,
numerical failure -> 3.  Everything user-facing derives from GptSteerError so
callers can catch one base class.
"""


class GptSteerError(Exception):
    pass


class InvalidInput(GptSteerError):
    """Input violates a documented invariant.  args[0] names the invariant."""


class MalformedProblem(InvalidInput):
    """LP assembly rejected: shape mismatch, non-finite data, lower > upper."""


class SystemMismatch(InvalidInput):
    """Operands tagged with different systems were combined."""


class NotInterior(InvalidInput):
    """A reference state required to be interior sits on (or outside) the boundary."""


class NotDichotomic(InvalidInput):
    """Operation requires a two-outcome-per-setting assemblage."""


class NotASymmetry(InvalidInput):
    """Supplied linear map does not permute the state-space vertices."""


class MarginalNotInterior(NotInterior):
    """A bipartite marginal required to be interior is not; face restriction
    is out of scope, so the caller must supply a state with interior margins."""


class GuardExceeded(GptSteerError):
    """A size/dimension guard tripped.  Raise the guard via GPTSTEER_GUARDS."""


class NumericalFailure(GptSteerError):
    """Solver could not certify its own answer (cycling guard, residuals)."""
