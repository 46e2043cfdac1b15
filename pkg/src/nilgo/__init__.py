"""Construction and verification of geodesic orbit data for 2-step nilpotent Lie algebras."""

__version__ = "0.1.0"

from .linalg import DEFAULT_TOL, Tolerances
from .model import MetricNilpotentAlgebra, SoSubspace, read_algebra, write_algebra
from .structure import NormalizerSet, normalizers
from .verify import GoVerdict, Mode, NonsingularReport, Verdict, go_verdict, nonsingular_report
from .classify import Decomposition, TypeLabel, TypeName, classify_type, invariant_decomposition, radon_hurwitz, theta_invariant

__all__ = [
    "DEFAULT_TOL", "Tolerances", "MetricNilpotentAlgebra", "SoSubspace", "read_algebra", "write_algebra",
    "NormalizerSet", "normalizers", "GoVerdict", "Mode", "NonsingularReport", "Verdict", "go_verdict",
    "nonsingular_report", "Decomposition", "TypeLabel", "TypeName", "classify_type",
    "invariant_decomposition", "radon_hurwitz", "theta_invariant",
]
