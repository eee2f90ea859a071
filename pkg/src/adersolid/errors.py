"""Exception hierarchy shared by the solver modules."""


class AdersolidError(Exception):
    """Base class for all package errors."""


class StateError(AdersolidError, ValueError):
    """A state vector is not usable (non-finite entries)."""


class DegenerateCellError(StateError):
    """Volume fraction too small to recover primitive variables."""


class InadmissibleStateError(StateError):
    """Density or shifted pressure is not positive."""


class ResonanceError(StateError):
    """Eigenvectors requested at a sonic resonance |(v - v_s).n| = a."""


class UnsupportedCaseError(AdersolidError):
    """Exact solver asked for a configuration it does not cover (vacuum)."""


class ConvergenceError(AdersolidError, ArithmeticError):
    """An iterative root solve did not converge."""


class ConfigError(AdersolidError, ValueError):
    """Invalid mesh, scenario or run configuration."""


class SolverAbort(AdersolidError, RuntimeError):
    """The time loop cannot continue (non-finite wave speed, dead state)."""

    def __init__(self, message, element=None, state=None):
        super().__init__(message)
        self.element = element
        self.state = state
