"""Entanglement, teleportation-fidelity and Bell-CHSH metrics for two-qubit mixed states."""
from ._backend import BACKEND
from .linalg import DensityMatrix, DensityValidationError, validate_density
from .metrics import MetricsReport, compute_metrics, concurrence, teleport_fidelity
from .states import BellKind, Family, StateFamily, materialize, parse_family

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BellKind",
    "DensityMatrix",
    "DensityValidationError",
    "Family",
    "MetricsReport",
    "StateFamily",
    "compute_metrics",
    "concurrence",
    "materialize",
    "parse_family",
    "teleport_fidelity",
    "validate_density",
]
