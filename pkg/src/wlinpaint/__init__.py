"""Weighted-Laplacian inpainting ``c (u - f) - (1 - c) Δu = 0`` with admissibility checks on ``c``."""

from .analysis import (
    CapacityResult,
    ConstantEstimates,
    alpha_capacity,
    annulus_convergence,
    annulus_exact,
    constant_estimates,
    friedrichs_constant,
    sparsify_mask,
    stability_check,
)
from .discretization import SparseSystem, assemble, assemble_collocation, assemble_dirichlet, assemble_weak
from .estimators import AdmissibilityChecker, MaskInpainter, WeightedLaplaceInpainter
from .exceptions import (
    BreakdownError,
    DomainError,
    ExhaustionEmptyError,
    FieldFormatError,
    MethodMismatchError,
    NoDirichletDataError,
    SingularWeightError,
)
from .grid import DomainSpec, PixelKind, ScalarField, build_domain, classify_pixel
from .inpainting import inpaint
from .solvers import SolveReport, detect_singularity, solve
from .weights import (
    WeightField,
    check_admissibility,
    estimate_A,
    growth_kappa,
    quadratic_kappa_prime,
    v_inner,
    v_norm,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityChecker",
    "BreakdownError",
    "CapacityResult",
    "ConstantEstimates",
    "DomainError",
    "DomainSpec",
    "ExhaustionEmptyError",
    "FieldFormatError",
    "MaskInpainter",
    "MethodMismatchError",
    "NoDirichletDataError",
    "PixelKind",
    "ScalarField",
    "SingularWeightError",
    "SolveReport",
    "SparseSystem",
    "WeightField",
    "WeightedLaplaceInpainter",
    "alpha_capacity",
    "annulus_convergence",
    "annulus_exact",
    "assemble",
    "assemble_collocation",
    "assemble_dirichlet",
    "assemble_weak",
    "build_domain",
    "check_admissibility",
    "classify_pixel",
    "constant_estimates",
    "detect_singularity",
    "estimate_A",
    "friedrichs_constant",
    "growth_kappa",
    "inpaint",
    "quadratic_kappa_prime",
    "solve",
    "sparsify_mask",
    "stability_check",
    "v_inner",
    "v_norm",
]
