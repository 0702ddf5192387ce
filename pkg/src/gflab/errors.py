"""Exception types shared across the library."""


class GflabError(Exception):
    """Base class for all library errors."""


class DomainError(GflabError):
    """Point outside (or on the boundary of) the domain it must be inside."""


class PoleError(GflabError):
    """Evaluation requested at a pole."""


class ArgumentError(GflabError):
    """Structurally invalid arguments (coincident poles, bad config...)."""


class PathError(GflabError):
    """An integration path could not be planned or passes too close to a pole."""


class CriticalPointError(GflabError):
    """Vanishing derivative where conformality is required."""


class GateError(GflabError):
    """A smallness precondition (sup-norm gate) is violated."""


class DivergenceError(GflabError):
    """Adaptive quadrature detected a divergent integral."""


class TruncationError(GflabError):
    """Not enough series coefficients for the requested order."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class NotInSigmaError(GflabError):
    """A map fails the exterior normalization check (leading coefficient != 1)."""


class NumericError(GflabError):
    """A numeric routine failed to reach its target accuracy."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InvariantViolation(GflabError):
    """A mathematical invariant check failed; carries the witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
