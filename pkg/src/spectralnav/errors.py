"""Exception types shared across the package."""


class SpectralNavError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SpectralNavError):
    """Invalid generator or policy parameters."""


class GenerationError(SpectralNavError):
    """The procedural generator could not satisfy its postconditions."""


class NoPathError(SpectralNavError):
    """No path exists between the requested nodes."""


class ShapeError(SpectralNavError):
    """Feature shapes do not match."""


class EmptyInputError(SpectralNavError):
    """An operation received an empty collection it cannot handle."""


class MissingStatsError(SpectralNavError):
    """Category statistics are unavailable for the requested category."""


class DegenerateBoxError(SpectralNavError):
    """A bounding box with zero area cannot be projected."""


class ControlError(SpectralNavError):
    """The control loop reached a state it cannot act from."""


class SchemaVersionError(SpectralNavError):
    """A document's schema name or version is not supported."""
