"""Exception hierarchy shared by all simulator modules."""


class SimulationError(Exception):
    """Base class for all simulator-specific failures."""


class ConfigurationError(SimulationError):
    """Invalid or inconsistent configuration values."""


class MappingError(SimulationError):
    """Resource-grid mapping failed (stream underflow or count mismatch)."""


class EstimationError(SimulationError):
    """Channel estimation could not be performed on the given inputs."""


class InterpolationError(EstimationError):
    """Too few pilot estimates to interpolate over the grid."""


class NumericalError(SimulationError):
    """A numerical routine failed (singular system, eigendecomposition, ...)."""
