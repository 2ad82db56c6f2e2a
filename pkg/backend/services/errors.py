"""
Exception hierarchy for the viscous scheme services
"""
from typing import Optional, Tuple


class SchemeError(Exception):
    """Base class for every error raised by the services package"""


class UnsupportedSchemeError(SchemeError, ValueError):
    """Unknown scheme, order, location or term kind"""


class FieldShapeError(SchemeError, ValueError):
    """Field too short for the stencil, or operand shapes disagree"""


class NumericalInstabilityError(SchemeError, RuntimeError):
    """Non-finite or blown-up state during time marching"""

    def __init__(self, message: str, step: Optional[int] = None,
                 location: Optional[Tuple[int, ...]] = None):
        super().__init__(message)
        self.step = step
        self.location = location

    def as_record(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": str(self),
            "step": self.step,
            "location": list(self.location) if self.location is not None else None,
        }


class StateValidityError(NumericalInstabilityError):
    """Density or pressure became non-positive"""
