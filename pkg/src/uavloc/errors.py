class UavLocError(Exception):
    """Base class for all package errors."""


class ZeroRange(UavLocError):
    """UAV and emitter coincide; Doppler and ToA are undefined."""


class DegenerateVelocity(UavLocError):
    """Frame velocity is zero, so Doppler carries no position information."""


class SingularSystem(UavLocError):
    """The constrained normal equations are singular for every admissible multiplier."""


class NoConstraintRoot(UavLocError):
    """The constraint function has no root on the admissible multiplier interval."""


class DegenerateGeometry(UavLocError):
    """UAV is directly above the emitter estimate; no heading is preferred."""


class ConfigError(UavLocError):
    """Invalid scenario configuration."""

    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")
