"""Polynomial sublevel-set approximation of semialgebraic sets.

Fits a polynomial f whose 1-sublevel set F and its dilation sF sandwich a
compact set X (F <= X <= sF) while minimizing the scaling s, and certifies
or refutes star-convexity through polytopic kernel approximations.
"""

from .approx import (
    ApproximationResult,
    approximate,
    find_approx,
    find_l1_outer,
    scaling_lower_bound_estimate,
)
from .kernel import (
    Polytope,
    add_cutting_plane,
    chebyshev_center,
    find_support,
    inner_kernel,
    is_empty,
    kernel_intersection_inner,
    outer_kernel,
    vertices_2d,
)
from .metrics import (
    VolumeEstimate,
    hausdorff_scaled,
    max_norm_sublevel,
    percent_error,
    support_function,
    volume_grid,
    volume_star,
)
from .poly import Monomial, Polynomial, monomial_basis
from .semialg import BoundaryPoint, SemialgebraicSet, ray_boundary_crossings, sample_boundary

__all__ = [
    "ApproximationResult",
    "BoundaryPoint",
    "Monomial",
    "Polynomial",
    "Polytope",
    "SemialgebraicSet",
    "VolumeEstimate",
    "add_cutting_plane",
    "approximate",
    "chebyshev_center",
    "find_approx",
    "find_l1_outer",
    "find_support",
    "hausdorff_scaled",
    "inner_kernel",
    "is_empty",
    "kernel_intersection_inner",
    "max_norm_sublevel",
    "monomial_basis",
    "outer_kernel",
    "percent_error",
    "ray_boundary_crossings",
    "sample_boundary",
    "scaling_lower_bound_estimate",
    "support_function",
    "vertices_2d",
    "volume_grid",
    "volume_star",
]

__version__ = "0.1.0"
