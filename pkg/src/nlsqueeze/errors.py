"""Exception types shared across the package."""


class BasisMismatchError(ValueError):
    """Operands live in different bases (or have incompatible dimensions)."""


class ZeroSignalError(ValueError):
    """The observable carries no signal for the requested generator."""


class CalibrationError(ValueError):
    """The calibration curve cannot be inverted on the declared window."""
