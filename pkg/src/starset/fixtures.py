"""Built-in test sets in the g_i(x) <= 1 convention.

``example_a`` is a quartic set given originally by a 2x2 polynomial matrix
inequality, expanded here into the two exact scalar conditions det >= 0 and
trace >= 0.  ``example_b`` is a discrete-time stabilizability region with
four polynomial constraints.  ``example_e`` is an eccentric annulus wedge
(unit disk around (c, 0) minus a forbidden inner disk of radius r, cut by
x1 <= c); it is not star-convex and its kernel is empty.
"""

from __future__ import annotations

import math

import numpy as np

from ._geom import chebyshev_lp, convex_hull_2d, polygon_area, polygon_halfspaces
from .poly import Polynomial
from .semialg import SemialgebraicSet


def unit_disk() -> SemialgebraicSet:
    return SemialgebraicSet(2, [Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0})])


def example_a() -> SemialgebraicSet:
    """Matrix inequality [[1-16*x1*x2, x1], [x1, 1-x1^2-x2^2]] >= 0 expanded
    into the PSD conditions on both diagonal entries and the determinant."""
    g_diag1 = Polynomial(2, {(1, 1): 16.0})
    g_diag2 = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0})
    g_det = Polynomial(
        2, {(2, 0): 2.0, (0, 2): 1.0, (1, 1): 16.0, (3, 1): -16.0, (1, 3): -16.0}
    )
    return SemialgebraicSet(2, [g_diag1, g_diag2, g_det])


def example_b() -> SemialgebraicSet:
    g1 = Polynomial(2, {(0, 1): -2.0})
    g2 = Polynomial(2, {(1, 0): 2.0, (0, 1): 1.5})
    g3 = Polynomial(2, {(1, 0): 2.8, (0, 1): 0.5, (1, 1): 2.4, (0, 2): 1.8})
    g4 = Polynomial(
        2,
        {(0, 1): 1.0, (2, 0): 8.0, (1, 1): 2.0, (0, 2): 1.0, (2, 1): 8.0, (1, 2): 6.0},
    )
    return SemialgebraicSet(2, [g1, g2, g3, g4])


def example_e(c: float = 0.9, r: float = 0.4) -> SemialgebraicSet:
    if not 0.0 < r < c < 1.0:
        raise ValueError(f"need 0 < r < c < 1, got c={c}, r={r}")
    outer = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0, (1, 0): -2.0 * c, (0, 0): c * c})
    inner = Polynomial(
        2, {(0, 0): 1.0 + r * r - c * c, (1, 0): 2.0 * c, (2, 0): -1.0, (0, 2): -1.0}
    )
    halfplane = Polynomial(2, {(1, 0): 1.0 / c})
    return SemialgebraicSet(2, [outer, inner, halfplane])


def example_e_scaling_lower_bound(c: float, r: float) -> float:
    """Closed-form lower bound on the scaling for the eccentric annulus.

    The segment from the origin toward (c, r) leaves the set where it enters
    the forbidden disk and returns exactly at (c, r); the ratio of those two
    distances bounds any inner/outer scaling from below.
    """
    phi = 0.5 * math.pi + 2.0 * math.atan2(r, c)
    p2 = np.array([c, r])
    p1 = np.array([c + r * math.cos(phi), r * math.sin(phi)])
    return float(np.linalg.norm(p2) / np.linalg.norm(p1))


_NAMED = {"disk": unit_disk, "exampleA": example_a, "exampleB": example_b}


def by_name(name: str, c: float = 0.9, r: float = 0.4) -> SemialgebraicSet:
    """Look up a named fixture; exampleE takes the (c, r) parameters."""
    if name == "exampleE":
        return example_e(c, r)
    if name in _NAMED:
        return _NAMED[name]()
    raise KeyError(f"unknown fixture {name!r} (have disk, exampleA, exampleB, exampleE)")


def random_convex_polytope(seed: int, n_points: int = 8):
    """Random 2D convex polytope, Chebyshev-centered at the origin.

    Returns (set, vertices, area): the set uses one linear g per edge,
    normalized so g(x) <= 1, vertices are counterclockwise after centering.
    """
    rng = np.random.default_rng(seed)
    while True:
        pts = rng.uniform(-1.0, 1.0, size=(n_points, 2)) * rng.uniform(0.5, 1.5)
        hull = convex_hull_2d(pts)
        if len(hull) >= 3 and abs(polygon_area(hull)) > 0.1:
            break
    A, b = polygon_halfspaces(hull)
    res = chebyshev_lp(A, b)
    hull = hull - res.center
    A, b = polygon_halfspaces(hull)
    constraints = [
        Polynomial(2, {(1, 0): A[i, 0] / b[i], (0, 1): A[i, 1] / b[i]}) for i in range(len(b))
    ]
    return SemialgebraicSet(2, constraints), hull, abs(polygon_area(hull))
