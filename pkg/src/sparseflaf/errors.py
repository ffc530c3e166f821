"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised when sizes, schedules or parameter ranges are inconsistent."""
