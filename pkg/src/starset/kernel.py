"""Polytopic kernel approximation for star-convexity certification.

The kernel of X = {g_i <= 1} sits inside every halfspace
grad g_i(x_b)^T (x - x_b) <= 0 taken at boundary points x_b with active
constraint i.  Accumulating such cutting planes from boundary samples gives
an outer polytope (empty => X is not star-convex, by Farkas).  Conversely, a
support-style SOS program produces points guaranteed to lie in the kernel;
their hull is an inner polytope (nonempty => X is star-convex).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import conic, soscomp
from ._geom import (
    chebyshev_lp,
    convex_hull_2d,
    polygon_halfspaces,
    vertex_enumeration_2d,
)
from .poly import Polynomial
from .semialg import BoundaryPoint, SemialgebraicSet, boundary_points_along, sample_boundary
from .soscomp import Certificate, LinExpr, LinPoly, SosProgram

logger = logging.getLogger(__name__)


class PolytopeUnbounded(RuntimeError):
    pass


class PolytopeEmpty(RuntimeError):
    pass


class Polytope:
    """Convex polytope with a halfspace and/or vertex representation."""

    def __init__(self, n: int, halfspaces=None, vertices=None):
        if halfspaces is None and vertices is None:
            raise ValueError("need at least one representation")
        self.n = int(n)
        self.halfspaces = None
        if halfspaces is not None:
            self.halfspaces = [(np.asarray(a, dtype=float), float(c)) for a, c in halfspaces]
        self.vertices = None
        if vertices is not None:
            self.vertices = [np.asarray(v, dtype=float) for v in vertices]
        self.farkas: conic.FarkasCertificate | None = None
        self._empty: bool | None = None

    @classmethod
    def whole_space(cls, n: int) -> "Polytope":
        return cls(n, halfspaces=[])

    @classmethod
    def empty(cls, n: int) -> "Polytope":
        p = cls(n, vertices=[])
        p._empty = True
        return p

    def halfspace_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        if self.halfspaces is None:
            raise ValueError("no halfspace representation present")
        if not self.halfspaces:
            return np.zeros((0, self.n)), np.zeros(0)
        A = np.array([a for a, _ in self.halfspaces])
        b = np.array([c for _, c in self.halfspaces])
        return A, b

    def with_rows(self, rows) -> "Polytope":
        out = Polytope(self.n, halfspaces=[*(self.halfspaces or []), *rows])
        return out

    def to_dict(self) -> dict:
        d: dict = {"n": self.n}
        if self.halfspaces is not None:
            d["halfspaces"] = [{"a": list(a), "b": c} for a, c in self.halfspaces]
        if self.vertices is not None:
            d["vertices"] = [list(v) for v in self.vertices]
        if self._empty is not None:
            d["empty"] = self._empty
        if self.farkas is not None:
            d["farkas"] = {
                "y": list(self.farkas.y_ineq),
                "margin": self.farkas.margin,
                "residual": self.farkas.residual,
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Polytope":
        hs = [(h["a"], h["b"]) for h in d["halfspaces"]] if "halfspaces" in d else None
        vs = d.get("vertices")
        return cls(d["n"], halfspaces=hs, vertices=vs)

    def __repr__(self) -> str:
        h = len(self.halfspaces) if self.halfspaces is not None else None
        v = len(self.vertices) if self.vertices is not None else None
        return f"Polytope(n={self.n}, halfspaces={h}, vertices={v})"


def add_cutting_plane(K: Polytope, bp: BoundaryPoint) -> Polytope:
    """Append grad^T x <= grad^T x_b for every active gradient of the sample."""
    rows = [(g, float(g @ bp.point)) for g in bp.gradients]
    return K.with_rows(rows)


def _farkas_from_duals(A, b, duals) -> conic.FarkasCertificate | None:
    nrm = float(np.abs(duals).max()) if len(duals) else 0.0
    if nrm <= 0:
        return None
    y = np.maximum(duals / nrm, 0.0)
    margin = -float(b @ y)
    residual = float(np.abs(A.T @ y).max()) if len(y) else math.inf
    if margin < conic.INFEAS_TOL or residual > 1e-6 * margin:
        return None
    return conic.FarkasCertificate(y_eq=np.zeros(0), y_ineq=y, y_psd={}, margin=margin, residual=residual)


def is_empty(K: Polytope, cache: bool = True) -> bool:
    """Emptiness via the Chebyshev LP; stores a Farkas certificate when empty."""
    if K._empty is not None and cache:
        return K._empty
    if K.halfspaces is None:
        empty = len(K.vertices or []) == 0
        K._empty = empty
        return empty
    if not K.halfspaces:
        K._empty = False
        return False
    A, b = K.halfspace_matrix()
    res = chebyshev_lp(A, b)
    if res.status == "unbounded":
        K._empty = False
        return False
    if res.radius >= 0.0:
        K._empty = False
        return False
    cert = _farkas_from_duals(A, b, res.duals)
    if cert is None:
        raise conic.SolverIndeterminate("negative inradius but Farkas certificate failed to verify")
    K.farkas = cert
    K._empty = True
    return True


def verify_farkas(K: Polytope) -> bool:
    """Independent re-check of the stored emptiness certificate."""
    if K.farkas is None:
        return False
    A, b = K.halfspace_matrix()
    y = K.farkas.y_ineq
    if y.min() < -1e-12:
        return False
    comb = A.T @ y
    return float(np.abs(comb).max()) <= 1e-6 * K.farkas.margin and float(b @ y) < 0


def chebyshev_center(K: Polytope) -> tuple[np.ndarray, float]:
    """Center and radius of the largest inscribed ball."""
    if K.halfspaces is None:
        if K.n != 2:
            raise ValueError("vertex-only input is converted via hull in 2D only")
        hull = convex_hull_2d(np.array(K.vertices))
        if len(hull) < 3:
            raise PolytopeEmpty("polytope has no interior")
        A, b = polygon_halfspaces(hull)
    else:
        A, b = K.halfspace_matrix()
        if len(b) == 0:
            raise PolytopeUnbounded("whole space has no Chebyshev center")
    res = chebyshev_lp(A, b)
    if res.status == "unbounded":
        raise PolytopeUnbounded("Chebyshev radius is unbounded")
    if res.radius < 0.0:
        raise PolytopeEmpty("polytope is empty")
    return res.center, res.radius


def kernel_intersection_inner(KA: Polytope, KB: Polytope) -> Polytope:
    """Halfspace concatenation: an inner bound for the kernel of a union or
    intersection of two sets given kernel approximations of each."""
    if KA.n != KB.n:
        raise ValueError("dimension mismatch")
    parts = []
    for K in (KA, KB):
        if is_empty(K):
            return Polytope.empty(KA.n)
        if K.halfspaces is not None:
            parts.extend(K.halfspaces)
        else:
            if K.n != 2:
                raise ValueError("vertex-only operand requires n = 2")
            hull = convex_hull_2d(np.array(K.vertices))
            A, b = polygon_halfspaces(hull)
            parts.extend((a, float(c)) for a, c in zip(A, b))
    return Polytope(KA.n, halfspaces=parts)


def vertices_2d(K: Polytope) -> np.ndarray:
    """Vertices in convex position, counterclockwise (2D only).

    Halfspace input goes through interior-point polar enumeration with a
    feasibility filter; vertex input through a monotone-chain hull.
    Duplicates merge within 1e-9.
    """
    if K.n != 2:
        raise ValueError("vertex enumeration implemented for n = 2 only")
    if is_empty(K):
        raise PolytopeEmpty("cannot enumerate vertices of an empty polytope")
    if K.halfspaces is None:
        return convex_hull_2d(np.array(K.vertices))
    A, b = K.halfspace_matrix()
    if len(b) == 0:
        raise PolytopeUnbounded("whole space is unbounded")
    res = chebyshev_lp(A, b)
    if res.status == "unbounded":
        raise PolytopeUnbounded("polytope is unbounded")
    if res.radius <= 1e-12:
        raise ValueError("polytope has empty interior; vertex enumeration unsupported")
    try:
        return vertex_enumeration_2d(A, b, res.center)
    except ValueError as exc:
        raise PolytopeUnbounded(str(exc)) from None


def prune_redundant(K: Polytope, tol: float = 1e-9) -> Polytope:
    """Drop halfspaces that do not change the polytope (one LP per row)."""
    A, b = K.halfspace_matrix()
    keep = list(range(len(b)))
    i = 0
    while i < len(keep):
        row = keep[i]
        others = [r for r in keep if r != row]
        prob = conic.ConicProblem(n_scalars=K.n)
        for r in others:
            prob.inequalities.append(({j: float(A[r, j]) for j in range(K.n)}, float(b[r])))
        prob.objective = {j: -float(A[row, j]) for j in range(K.n)}
        sol = conic.solve(prob)
        if sol.status == conic.Status.OPTIMAL and -sol.objective_value <= b[row] + tol:
            keep = others
        else:
            i += 1
    return Polytope(K.n, halfspaces=[K.halfspaces[r] for r in keep])


def outer_kernel(
    X: SemialgebraicSet,
    n_s: int,
    seed: int = 0,
    forced_directions=(),
    check_every: int = 1,
    prune: bool = False,
) -> Polytope:
    """Accumulate cutting planes from boundary samples; early-return on empty.

    The result is a superset of the kernel of X.  ``forced_directions`` are
    processed first, contributing cuts from every crossing along each ray.
    Emptiness is decided after each batch of cuts; a cached interior witness
    skips the LP when it trivially remains feasible.  ``prune`` drops
    redundant halfspaces from the final polytope (one LP per row, so off by
    default; correctness never depends on it).
    """
    rng = np.random.default_rng(seed)
    K = Polytope.whole_space(X.n)
    witness: np.ndarray | None = None

    def absorb(K: Polytope, bps: list[BoundaryPoint]) -> tuple[Polytope, bool]:
        nonlocal witness
        for bp in bps:
            K = add_cutting_plane(K, bp)
        if witness is not None:
            A, b = K.halfspace_matrix()
            if np.all(A @ witness <= b):
                K._empty = False
                return K, False
            witness = None
        if is_empty(K):
            return K, True
        A, b = K.halfspace_matrix()
        if len(b):
            res = chebyshev_lp(A, b)
            if res.status == "optimal" and res.radius > 0:
                witness = res.center
        return K, False

    for d in forced_directions:
        K, done = absorb(K, boundary_points_along(X, d))
        if done:
            return K
    batch: list[BoundaryPoint] = []
    for j in range(n_s):
        batch.append(sample_boundary(X, rng))
        if len(batch) >= check_every or j == n_s - 1:
            K, done = absorb(K, batch)
            batch = []
            if done:
                return K
    if prune and K.halfspaces:
        K = prune_redundant(K)
    return K


@dataclass
class SupportResult:
    status: conic.Status
    point: np.ndarray | None = None
    value: float = math.nan
    certificate: Certificate | None = None

    @property
    def feasible(self) -> bool:
        return self.status == conic.Status.OPTIMAL


def _poly_times_var(p: Polynomial, var: int) -> LinPoly:
    return LinPoly(p.n, {m: LinExpr({var: c}) for m, c in p.terms.items()})


def find_support(
    X: SemialgebraicSet,
    c,
    mult_degree: int = 2,
    verbose: bool = False,
) -> SupportResult:
    """Furthest certified kernel point along direction c.

    Maximizes c^T x_k subject to, for every boundary family i,

        -grad g_i(x)^T (x_k - x) - sum_j lam_j^i(x) (1 - g_j(x))  is SOS

    with lam_j^i SOS for j != i and lam_i^i free (the factor it multiplies
    vanishes where constraint i is active).  ``mult_degree`` sets the degree
    budget max_j deg(g_j) + 2*mult_degree shared by every product
    lam_j^i * (1 - g_j).  On success x_k lies in the kernel of X and
    c^T x_k lower-bounds the kernel's support function; the bound grows
    with mult_degree.
    """
    c = np.asarray(c, dtype=float)
    if abs(np.linalg.norm(c) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    n = X.n
    prog = SosProgram()
    xk = [prog.new_scalar(f"xk{l}") for l in range(n)]

    # One shared degree budget per identity; each multiplier fills it, so
    # low-degree constraints get correspondingly richer multipliers.
    budget = max(g.degree() for g in X.constraints) + 2 * mult_degree

    for i, gi in enumerate(X.constraints):
        grad = gi.gradient()
        target = LinPoly(n)
        for l in range(n):
            target = target.plus(_poly_times_var(-1.0 * grad[l], xk[l]))
        grad_dot_x = Polynomial.zero(n)
        for l in range(n):
            grad_dot_x = grad_dot_x + grad[l] * Polynomial.variable(n, l)
        target = target.plus_const_poly(grad_dot_x)
        for j, gj in enumerate(X.constraints):
            dj = max(0, budget - gj.degree())
            dj -= dj % 2
            if j == i:
                lam = prog.new_free_poly(n, dj, f"lam[{i},{i}]")
            else:
                _, lam = prog.new_sos_poly(n, dj, f"lam[{i},{j}]")
            target = target.minus(lam.times_poly(1.0 - gj))
        prog.require_sos(target, f"boundary[{i}]")

    prog.maximize(LinExpr({xk[l]: float(c[l]) for l in range(n)}))
    sol = prog.solve(verbose=verbose)
    if sol.status == conic.Status.OPTIMAL:
        point = np.array([sol.scalars[v] for v in xk])
        cert = prog.certificate(sol)
        _, _, valid = soscomp.verify_certificate(cert)
        if not valid:
            return SupportResult(status=conic.Status.UNKNOWN)
        return SupportResult(
            status=sol.status, point=point, value=float(c @ point), certificate=cert
        )
    if sol.status == conic.Status.INFEASIBLE:
        return SupportResult(status=sol.status)
    return SupportResult(status=conic.Status.UNKNOWN)


def direction_set(n: int, count: int, seed: int = 0) -> np.ndarray:
    """Reproducible unit directions: uniform angles in 2D, Fibonacci sphere
    in 3D, seeded-random beyond."""
    if n == 2:
        ang = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if n == 3:
        k = np.arange(count, dtype=float) + 0.5
        phi = np.arccos(1.0 - 2.0 * k / count)
        theta = np.pi * (1.0 + math.sqrt(5.0)) * k
        return np.column_stack(
            [np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)]
        )
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((count, n))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def inner_kernel(
    X: SemialgebraicSet,
    directions,
    mult_degree: int = 2,
    verbose: bool = False,
) -> Polytope:
    """Hull of certified kernel points, one support solve per direction.

    Any infeasible direction makes the inner approximation give up (empty
    result); solver-indeterminate directions raise instead of being
    conflated with infeasibility.
    """
    points = []
    unknown = []
    for d in directions:
        d = np.asarray(d, dtype=float)
        d = d / np.linalg.norm(d)
        res = find_support(X, d, mult_degree=mult_degree, verbose=verbose)
        if res.status == conic.Status.INFEASIBLE:
            return Polytope.empty(X.n)
        if res.status != conic.Status.OPTIMAL:
            unknown.append(d)
            continue
        points.append(res.point)
    if unknown:
        raise conic.SolverIndeterminate(
            f"support program indeterminate for directions: {[list(d) for d in unknown]}"
        )
    return Polytope(X.n, vertices=points)
