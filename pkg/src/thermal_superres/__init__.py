"""Quantum-limited separation estimation for two thermal point sources seen by a two-telescope interferometer."""
from .scene import ParaxialWarning, PhasePair, SceneParams, phases_from_positions
from .gaussian import GaussianState, ModeTransform, two_telescope_state
from .fisher import (
    QuadraticObservable,
    SingularMetricError,
    qfi_centroid_closed,
    qfi_numeric,
    qfi_separation_closed,
    two_telescope_qfi,
)
from .povm import ConvergenceError, IntegrationConfig, PhotonCountDistribution, aligned_pmn, misaligned_pmn
from .multi import MultiScene, multi_covariance, multi_qfi

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "GaussianState",
    "IntegrationConfig",
    "ModeTransform",
    "MultiScene",
    "ParaxialWarning",
    "PhasePair",
    "PhotonCountDistribution",
    "QuadraticObservable",
    "SceneParams",
    "SingularMetricError",
    "aligned_pmn",
    "misaligned_pmn",
    "multi_covariance",
    "multi_qfi",
    "phases_from_positions",
    "qfi_centroid_closed",
    "qfi_numeric",
    "qfi_separation_closed",
    "two_telescope_qfi",
    "two_telescope_state",
]
