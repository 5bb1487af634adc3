"""
Error hierarchy for bridgeflow.

Every error carries a machine-readable ``code``, a human message and a
``details`` dict, and serializes to the same ``{code, message, details}``
payload the command line tool prints on failure.
"""

from typing import Any, Dict, Optional


class BridgeflowError(Exception):
    """Base class for all bridgeflow errors."""

    code = "bridgeflow_error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "code": self.code,
            "message": self.message,
            "details": self.details,
        }


class InputError(BridgeflowError):
    """Invalid user-provided data (empty pair sets, zero-norm rows, ...)."""

    code = "invalid_input"


class ShapeError(InputError):
    """Matrix dimensions do not agree."""

    code = "shape_mismatch"


class DegenerateInputError(InputError):
    """Input is well-formed but carries no usable signal (e.g. all-zero costs)."""

    code = "degenerate_input"


class ConnectivityError(InputError):
    """The fused graph leaves some source/target pair unreachable."""

    code = "disconnected_graph"


class ParseError(InputError):
    """A file could not be decoded."""

    code = "parse_error"


class ValidationError(InputError):
    """A decoded file or config violates a domain invariant."""

    code = "validation_error"


class NumericalError(BridgeflowError):
    """A numerical routine produced non-finite values or failed to factorize."""

    code = "numerical_failure"


class SingularityError(NumericalError):
    code = "singularity"


class IntegrationError(NumericalError):
    """ODE integration left the finite range."""

    code = "integration_failure"


class TrainingError(NumericalError):
    """Non-finite loss or gradient during training."""

    code = "training_failure"


__all__ = [
    "BridgeflowError",
    "InputError",
    "ShapeError",
    "DegenerateInputError",
    "ConnectivityError",
    "ParseError",
    "ValidationError",
    "NumericalError",
    "SingularityError",
    "IntegrationError",
    "TrainingError",
]
