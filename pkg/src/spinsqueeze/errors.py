"""Exception types shared across the package."""


class IntegrationError(RuntimeError):
    """An ODE integration failed or produced an unphysical result."""


class BasisSizeError(ValueError):
    """Requested basis exceeds the supported (dense) problem size."""


class ZeroSensitivityError(ValueError):
    """Signal slope vanishes; phase accuracy is undefined at this phase."""


class NoInteriorMinimumError(ValueError):
    """A trajectory has no interior variance minimum to locate."""
