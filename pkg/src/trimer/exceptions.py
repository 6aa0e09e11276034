"""Exception hierarchy shared by all trimer modules."""


class TrimerError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(TrimerError, ValueError):
    """A physical parameter is outside its allowed domain."""


class CapacityError(TrimerError):
    """A requested object exceeds a hard size guard."""


class StructureError(TrimerError):
    """An operator violates a structural assumption (e.g. sector leakage)."""


class SolverError(TrimerError):
    """Iterative eigensolver failed to converge.

    Attributes
    ----------
    residual : float or None
        Best residual achieved before giving up.
    """

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class ConvergenceError(TrimerError):
    """Cutoff-convergence protocol hit its ceiling.

    Attributes
    ----------
    worst_deficit : float or None
        Largest overlap deficit observed at the final cutoff pair.
    """

    def __init__(self, msg, worst_deficit=None):
        super().__init__(msg)
        self.worst_deficit = worst_deficit


class InputError(TrimerError, ValueError):
    """A state or argument fails a precondition (e.g. not normalized)."""


class UndefinedObservableError(TrimerError):
    """The requested observable is undefined on the given state."""


class SymmetryViolationError(TrimerError):
    """A state violates a symmetry assumption required by an observable."""


class TruncationError(TrimerError):
    """State norm collapsed below tolerance; the Fock cutoff is too small."""


class InfeasiblePlanError(TrimerError):
    """No physical drive plan exists for the requested frequencies."""


class SteadyStateDegenerateError(TrimerError):
    """The Liouvillian null space has dimension > 1.

    Attributes
    ----------
    states : list of ndarray
        Orthonormalized basis of the (numerically) degenerate null space.
    """

    def __init__(self, msg, states=None):
        super().__init__(msg)
        self.states = states or []
