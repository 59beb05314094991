"""Exception hierarchy shared by all cuspforge modules."""


class CuspforgeError(Exception):
    """Base class for all library errors."""


class DegenerateShapeError(CuspforgeError, ValueError):
    """A tetrahedron shape is 0, 1, infinite or otherwise unusable."""


class ParseError(CuspforgeError, ValueError):
    """A triangulation document could not be parsed.

    ``line`` and ``column`` are 1-based when known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class ValidationError(CuspforgeError, ValueError):
    """A triangulation violates a structural invariant.

    ``invariant`` names the violated rule, e.g. ``"gluing-involution"``.
    """

    def __init__(self, invariant, message):
        self.invariant = invariant
        super().__init__(f"[{invariant}] {message}")


class OrientableInputError(CuspforgeError, ValueError):
    """The orientation double cover was requested for an orientable input."""


class SolverError(CuspforgeError, RuntimeError):
    """Base class for numerical solver failures."""


class DivergenceError(SolverError):
    pass


class SingularJacobianError(SolverError):
    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


class DegenerationError(SolverError):
    """A shape left the upper half-plane and damping could not recover."""


class CaptureRadiusError(SolverError):
    """The initial residual is too large for the local solver."""


class StepTooLargeError(SolverError):
    """A continuation step failed; ``index`` is the failing target."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class BranchJumpError(CuspforgeError, ValueError):
    """A logarithm increment is too large to be continued unambiguously."""


class NonUniqueSolutionError(CuspforgeError, ValueError):
    """Dehn coefficients are not determined (u and v real-proportional)."""


class InconsistentClassificationError(CuspforgeError, ValueError):
    """Trace invariants have a sign pattern no Klein-bottle group realizes."""


class DegenerateTypeError(CuspforgeError, ValueError):
    """A degenerate Klein type has no associated completion geometry."""


class RepresentationUnavailableError(CuspforgeError, LookupError):
    """No holonomy matrices are known for this triangulation."""
