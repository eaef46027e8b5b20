"""Numerical Bergman and Szegő kernels of positive line bundles on curves.

Level-N orthonormal section bases on a perturbed round sphere and on flat
tori, the Bergman density and its asymptotic expansion, Fubini–Study
pullbacks, distortion functions, and exact model Szegő kernels with their
phase diagnostics.
"""

from .asymptotics import ExpansionFit, convergence_rate, fit_expansion
from .estimators import BergmanKernel, ExpansionRegressor
from .exceptions import (
    BasePointError,
    BergmanLabError,
    CholeskyBreakdownError,
    ConfigError,
    DegenerateMetricError,
    DomainError,
    FourierMismatchWarning,
    IllConditionedFitError,
    PoleError,
    PositivityError,
    QuadratureOrderError,
    UnsupportedModelError,
)
from .geometry import (
    BackgroundMetric,
    ChartPoint,
    FlatTorus,
    QuadratureRule,
    SpherePerturbed,
    defining_function,
    kahler_density,
    potential,
    quadrature_rule,
    relative_eigenvalues,
)
from .inner_product import GramMatrix, OrthonormalTransform, gram, orthonormalize
from .kernel_ops import density, distortion, fs_pullback, kernel
from .sections import CirclePoint, basis, lift_value, rotate
from .szego_models import ball_fourier, ball_kernel, model_phase, phase_hessian, phase_psi

__version__ = "0.1.0"

__all__ = [
    "BackgroundMetric",
    "BasePointError",
    "BergmanKernel",
    "BergmanLabError",
    "ChartPoint",
    "CholeskyBreakdownError",
    "CirclePoint",
    "ConfigError",
    "DegenerateMetricError",
    "DomainError",
    "ExpansionFit",
    "ExpansionRegressor",
    "FlatTorus",
    "FourierMismatchWarning",
    "GramMatrix",
    "IllConditionedFitError",
    "OrthonormalTransform",
    "PoleError",
    "PositivityError",
    "QuadratureOrderError",
    "QuadratureRule",
    "SpherePerturbed",
    "UnsupportedModelError",
    "ball_fourier",
    "ball_kernel",
    "basis",
    "convergence_rate",
    "defining_function",
    "density",
    "distortion",
    "fit_expansion",
    "fs_pullback",
    "gram",
    "kahler_density",
    "kernel",
    "lift_value",
    "model_phase",
    "orthonormalize",
    "phase_hessian",
    "phase_psi",
    "potential",
    "quadrature_rule",
    "relative_eigenvalues",
    "rotate",
]
