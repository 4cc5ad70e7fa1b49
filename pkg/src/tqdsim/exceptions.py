"""Exception hierarchy for the simulator.

Exit-code mapping used by the CLI: ConfigError -> 2, numerical failures
(StabilityError, PositivityError, NonUniqueSteadyStateError,
TrajectoryDivergedError, EnsembleError) -> 3, EstimatorError -> 4.
"""


class TqdsimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(TqdsimError, ValueError):
    """Invalid parameter or configuration input."""


class StabilityError(TqdsimError):
    """Time step too coarse for the requested rates."""


class PositivityError(TqdsimError):
    """Density matrix eigenvalue fell below the monitoring floor."""


class NonUniqueSteadyStateError(TqdsimError):
    """Liouvillian null space has dimension > 1; no unique stationary state."""


class TrajectoryDivergedError(TqdsimError):
    """Non-finite state element encountered during stochastic integration."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class EnsembleError(TqdsimError):
    """Too many invalid trajectories in an ensemble run."""


class EstimatorError(TqdsimError):
    """Insufficient data for the requested statistical estimate."""
