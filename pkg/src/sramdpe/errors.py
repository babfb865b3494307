"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class InvalidInputError(SimulationError):
    """Bad argument: non-finite value, range violation, dimension mismatch."""


class ConfigError(SimulationError):
    """Experiment configuration failed schema validation."""


class SolverError(SimulationError):
    """An iterative solve failed to converge.

    Carries diagnostic state: the residual history for Newton solves, or the
    last bisection bracket for stack solves.
    """

    def __init__(self, message, *, residual_history=None, bracket=None):
        super().__init__(message)
        self.residual_history = residual_history
        self.bracket = bracket


class TopologyError(SolverError):
    """The assembled network is ill-posed (singular system, bad merge)."""
