"""Exception types raised by the design and simulation routines."""


class MmwsnError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(MmwsnError):
    """Invalid scenario configuration (bad dimensions, signs, unknown keys)."""


class DegenerateChannel(MmwsnError):
    """Concatenated channel has fewer usable streams than parameters."""


class AllStreamsInactive(MmwsnError):
    """Water-filling clipped every stream to zero power."""


class NonConvergence(MmwsnError):
    """Iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class RankCollapse(MmwsnError):
    """Selected dictionary atoms became numerically dependent during pursuit."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
