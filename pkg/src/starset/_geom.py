"""Internal 2D geometry helpers: hulls, polygon conversions, Chebyshev LP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import conic


def convex_hull_2d(points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Monotone-chain convex hull; counterclockwise, collinear points dropped."""
    pts = np.unique(np.asarray(points, dtype=float).round(12), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= tol:
            lower.pop()
        lower.append(p)
    upper = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= tol:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def polygon_area(verts: np.ndarray) -> float:
    """Signed shoelace area (positive for counterclockwise order)."""
    v = np.asarray(verts, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_halfspaces(verts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Edge halfspaces a^T x <= b of a counterclockwise convex polygon."""
    v = np.asarray(verts, dtype=float)
    A, b = [], []
    for i in range(len(v)):
        p, q = v[i], v[(i + 1) % len(v)]
        d = q - p
        a = np.array([d[1], -d[0]])  # outward normal for CCW order
        A.append(a)
        b.append(float(a @ p))
    return np.array(A), np.array(b)


def point_polygon_distance(p: np.ndarray, verts: np.ndarray) -> float:
    """Distance from a point to a convex polygon (0 if inside)."""
    v = np.asarray(verts, dtype=float)
    p = np.asarray(p, dtype=float)
    if len(v) == 1:
        return float(np.linalg.norm(p - v[0]))
    A, b = polygon_halfspaces(v)
    if np.all(A @ p <= b + 1e-12):
        return 0.0
    best = np.inf
    for i in range(len(v)):
        a, c = v[i], v[(i + 1) % len(v)]
        d = c - a
        t = float(np.clip(np.dot(p - a, d) / max(np.dot(d, d), 1e-300), 0.0, 1.0))
        best = min(best, float(np.linalg.norm(p - (a + t * d))))
    return best


def polygon_hausdorff(verts_a: np.ndarray, verts_b: np.ndarray) -> float:
    """Hausdorff distance between two convex polygons given by vertices."""
    ha = max(point_polygon_distance(p, verts_b) for p in np.asarray(verts_a, float))
    hb = max(point_polygon_distance(p, verts_a) for p in np.asarray(verts_b, float))
    return max(ha, hb)


@dataclass
class ChebyshevResult:
    status: str  # "optimal" | "unbounded"
    center: np.ndarray | None
    radius: float
    duals: np.ndarray | None  # per input row, aligned with A


def chebyshev_lp(A: np.ndarray, b: np.ndarray) -> ChebyshevResult:
    """max rho s.t. a_i^T x + rho*||a_i|| <= b_i over (x, rho).

    The optimum is the inradius; rho < 0 certifies emptiness and the row
    duals are then a Farkas combination.  Rows with a = 0 are handled
    directly (0 <= b is vacuous or immediately contradictory).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    norms = np.linalg.norm(A, axis=1)
    duals = np.zeros(m)
    zero = norms <= 0.0
    if np.any(zero & (b < 0)):
        i = int(np.nonzero(zero & (b < 0))[0][0])
        duals[i] = 1.0
        return ChebyshevResult(status="optimal", center=None, radius=-np.inf, duals=duals)
    keep = np.nonzero(~zero)[0]
    if len(keep) == 0:
        return ChebyshevResult(status="unbounded", center=None, radius=np.inf, duals=None)

    prob = conic.ConicProblem(n_scalars=n + 1)
    for i in keep:
        coeffs = {j: float(A[i, j]) for j in range(n) if A[i, j] != 0.0}
        coeffs[n] = float(norms[i])
        prob.inequalities.append((coeffs, float(b[i])))
    prob.objective = {n: -1.0}
    sol = conic.solve(prob)
    if sol.status == conic.Status.UNBOUNDED:
        return ChebyshevResult(status="unbounded", center=None, radius=np.inf, duals=None)
    if sol.status != conic.Status.OPTIMAL:
        raise conic.SolverIndeterminate(f"Chebyshev LP returned {sol.status.value}")
    duals[keep] = sol.ineq_duals
    return ChebyshevResult(
        status="optimal",
        center=np.array(sol.scalars[:n]),
        radius=float(sol.scalars[n]),
        duals=duals,
    )


def vertex_enumeration_2d(A: np.ndarray, b: np.ndarray, interior: np.ndarray) -> np.ndarray:
    """Vertices of {x | Ax <= b} in R^2, counterclockwise.

    Uses the polar transform about a strict interior point to find the
    non-redundant halfspaces in angular order, intersects angularly adjacent
    pairs, and keeps only intersections feasible for every halfspace.
    Raises on unbounded polytopes.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    c = b - A @ interior
    if np.any(c <= 0):
        raise ValueError("interior point is not strictly interior")
    U = A / c[:, None]
    hull = convex_hull_2d(U)
    if len(hull) < 3:
        raise ValueError("polytope is unbounded (dual hull degenerate)")
    # bounded iff the origin is strictly inside the dual hull
    for i in range(len(hull)):
        u, v = hull[i], hull[(i + 1) % len(hull)]
        if (v[0] - u[0]) * (-u[1]) - (v[1] - u[1]) * (-u[0]) <= 1e-12:
            raise ValueError("polytope is unbounded")
    verts = []
    for i in range(len(hull)):
        u, v = hull[i], hull[(i + 1) % len(hull)]
        M = np.array([u, v])
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if abs(det) < 1e-14:
            continue
        y = np.linalg.solve(M, np.ones(2))
        if np.all(U @ y <= 1.0 + 1e-9):
            verts.append(y + interior)
    out = []
    for p in verts:
        if not out or np.linalg.norm(p - out[-1]) > 1e-9:
            out.append(p)
    if len(out) > 1 and np.linalg.norm(out[0] - out[-1]) <= 1e-9:
        out.pop()
    return np.array(out)
