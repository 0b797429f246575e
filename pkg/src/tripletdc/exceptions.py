"""Error types with enough payload to diagnose a failed run."""


class TripletDCError(Exception):
    """Base class for package errors."""


class InvalidParameterError(TripletDCError, ValueError):
    """Physical parameters outside their allowed domain."""


class ConfigurationError(TripletDCError, ValueError):
    """A run configuration that cannot be executed as requested."""


class IntegrationError(TripletDCError, RuntimeError):
    """ODE integration failed; carries the last valid state."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class ConvergenceError(TripletDCError, RuntimeError):
    """Root finding failed; carries the best iterate and its residual."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class StatisticsError(TripletDCError, RuntimeError):
    """Ensemble statistics inconsistent beyond sampling tolerance."""


class InvalidRunError(TripletDCError, RuntimeError):
    """Too many diverged trajectories for the ensemble average to be trusted."""


class ConsistencyError(TripletDCError, RuntimeError):
    """An internal cross-check (residue, identity) exceeded its tolerance."""


class StepSizeError(TripletDCError, RuntimeError):
    """Discrete step too coarse for the first-order jump expansion."""
