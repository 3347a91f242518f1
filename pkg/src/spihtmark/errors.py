class WatermarkError(Exception):
    """Base class for data errors raised by spihtmark."""


class DimensionError(WatermarkError, ValueError):
    pass


class PyramidError(WatermarkError, ValueError):
    pass


class CapacityError(WatermarkError, ValueError):
    pass


class PlanError(WatermarkError, ValueError):
    """Plan file is malformed or does not match the image it is applied to."""


class FormatError(WatermarkError, ValueError):
    """Unreadable or malformed image file."""


class SelectionError(WatermarkError):
    """A band cannot supply the requested number of coefficients."""
