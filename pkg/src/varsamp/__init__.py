"""Learning from random linear measurements: variation, Christoffel sampling and diagnostics."""

from .hilbert import InnerProductSpace, inner, norm, truncate
from .classes import (GenerativeRange, SparseClass, Subspace, UnionOfSubspaces, difference_set,
                      project)
from .sampling import (BernoulliRow, BlockSampler, ConstantOp, DegenerateFamilyError,
                       FiniteRowDiscrete, PointwiseDensity, RowSampler, SamplingFamily,
                       build_bernoulli_family, build_half_half, nondegeneracy_constants)
from .variation import (bernoulli_pi, christoffel, christoffel_measure, leverage_scores,
                        local_coherences, optimal_pi)
from .estimators import FitResult, finalize, solve
from .diagnostics import chernoff_bound_m, delta_U, empirical_nondegeneracy, verify_error_bound

__version__ = "0.1.0"

__all__ = [
    "InnerProductSpace", "inner", "norm", "truncate",
    "GenerativeRange", "SparseClass", "Subspace", "UnionOfSubspaces", "difference_set", "project",
    "BernoulliRow", "BlockSampler", "ConstantOp", "DegenerateFamilyError", "FiniteRowDiscrete",
    "PointwiseDensity", "RowSampler", "SamplingFamily", "build_bernoulli_family", "build_half_half",
    "nondegeneracy_constants",
    "bernoulli_pi", "christoffel", "christoffel_measure", "leverage_scores", "local_coherences",
    "optimal_pi",
    "FitResult", "finalize", "solve",
    "chernoff_bound_m", "delta_U", "empirical_nondegeneracy", "verify_error_bound",
]
