"""Semialgebraic sets g_i(x) <= 1 with membership and boundary sampling.

The boundary oracle walks rays from the origin: a scan grid locates sign
changes of max_i g_i(t*dir) - 1 and each bracket is refined by bisection.
Sampling is pure given a seed; for parallel sampling give each worker its own
seeded generator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .poly import Polynomial

logger = logging.getLogger(__name__)

# Default tolerances for the boundary oracle (plotting-precision cuts).
ACTIVE_TOL = 1e-7
GRAD_TOL = 1e-8
SCAN_GRID = 512
BISECT_TOL = 1e-10
T_MAX_CAP = 2.0**30


class OriginNotInterior(ValueError):
    """The origin is not strictly inside the set."""


class UnboundedRay(RuntimeError):
    """No exit from the set was found along a ray."""


class DegenerateSample(RuntimeError):
    """Too many consecutive gradient-degenerate boundary draws."""


class SemialgebraicSet:
    """Intersection of 1-sublevel sets of m polynomials in n variables."""

    def __init__(self, n: int, constraints: Sequence[Polynomial]):
        if not constraints:
            raise ValueError("need at least one constraint polynomial")
        for g in constraints:
            if g.n != n:
                raise ValueError("constraint dimension mismatch")
        self.n = int(n)
        self.constraints = list(constraints)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def gvalues(self, x: Sequence[float]) -> np.ndarray:
        pt = np.asarray(x, dtype=float)[None, :]
        return np.array([g.eval_many(pt)[0] for g in self.constraints])

    def max_g(self, x: Sequence[float]) -> float:
        # routed through eval_many so scalar and batched queries agree bitwise
        return float(self.max_g_many(np.asarray(x, dtype=float)[None, :])[0])

    def max_g_many(self, pts: np.ndarray) -> np.ndarray:
        vals = self.constraints[0].eval_many(pts)
        for g in self.constraints[1:]:
            np.maximum(vals, g.eval_many(pts), out=vals)
        return vals

    def membership(self, x: Sequence[float], tol: float = 0.0) -> bool:
        """True iff max_i g_i(x) <= 1 + tol."""
        if tol < 0:
            raise ValueError("tol must be >= 0")
        return self.max_g(x) <= 1.0 + tol

    def membership_many(self, pts: np.ndarray, tol: float = 0.0) -> np.ndarray:
        return self.max_g_many(pts) <= 1.0 + tol

    def scaled(self, alpha: float) -> "SemialgebraicSet":
        """The set alpha*X, via g_i(x/alpha)."""
        return SemialgebraicSet(self.n, [g.substitute_scale(alpha) for g in self.constraints])

    def translated(self, t: Sequence[float]) -> "SemialgebraicSet":
        """The set X + t, via g_i(x - t)."""
        return SemialgebraicSet(self.n, [g.translate(t) for g in self.constraints])

    def to_dict(self) -> dict:
        return {"n": self.n, "constraints": [g.to_dict() for g in self.constraints]}

    @classmethod
    def from_dict(cls, d: dict) -> "SemialgebraicSet":
        return cls(d["n"], [Polynomial.from_dict(g) for g in d["constraints"]])

    def __repr__(self) -> str:
        return f"SemialgebraicSet(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class BoundaryPoint:
    """A boundary sample with its active constraint indices and gradients."""

    point: np.ndarray
    active: tuple[int, ...]
    gradients: list[np.ndarray]


def _require_origin_interior(X: SemialgebraicSet) -> None:
    if not X.max_g(np.zeros(X.n)) < 1.0:
        raise OriginNotInterior("origin is not in the strict interior (max_i g_i(0) >= 1)")


def _find_t_exit(X: SemialgebraicSet, direction: np.ndarray) -> float:
    t = 1.0
    while X.max_g(t * direction) <= 1.0:
        t *= 2.0
        if t > T_MAX_CAP:
            raise UnboundedRay(f"no exit along direction {direction} up to t={T_MAX_CAP:g}")
    return t


def _bisect_crossing(X: SemialgebraicSet, direction, lo, hi, bisect_tol):
    # indicator max_i g_i - 1 changes sign on [lo, hi]
    flo = X.max_g(lo * direction) - 1.0
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        fmid = X.max_g(mid * direction) - 1.0
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ray_boundary_crossings(
    X: SemialgebraicSet,
    direction: Sequence[float],
    t_max: float | None = None,
    grid: int = SCAN_GRID,
    bisect_tol: float = BISECT_TOL,
) -> list[float]:
    """All t > 0 where the ray origin + t*dir crosses the boundary of X.

    Crossings are sign changes of max_i g_i(t*dir) - 1 on the scan grid, each
    refined by bisection; returned sorted ascending.  The first entry is the
    star-boundary radius along the direction.
    """
    direction = np.asarray(direction, dtype=float)
    _require_origin_interior(X)
    if t_max is None:
        t_max = _find_t_exit(X, direction)
    elif X.max_g(t_max * direction) <= 1.0:
        raise UnboundedRay(f"t_max={t_max} still lies inside X along {direction}")

    ts = np.linspace(0.0, t_max, grid + 1)
    vals = X.max_g_many(ts[:, None] * direction[None, :]) - 1.0
    inside = vals <= 0.0
    flips = np.nonzero(inside[:-1] != inside[1:])[0]
    if len(flips) == 0:
        raise UnboundedRay("no boundary crossing found on scan grid")
    return [_bisect_crossing(X, direction, ts[k], ts[k + 1], bisect_tol) for k in flips]


def bounding_box(X: SemialgebraicSet, n_dirs: int = 720, pad: float = 0.05) -> list[tuple[float, float]]:
    """Axis-aligned box covering X, from the outermost ray crossings.

    Directions are swept uniformly in 2D and drawn from a fixed seed beyond;
    the box is padded by ``pad`` relative to its extent.
    """
    rng = np.random.default_rng(0)
    lo = np.zeros(X.n)
    hi = np.zeros(X.n)
    for k in range(n_dirs):
        if X.n == 2:
            th = 2.0 * np.pi * k / n_dirs
            d = np.array([np.cos(th), np.sin(th)])
        else:
            d = rng.standard_normal(X.n)
            d /= np.linalg.norm(d)
        pt = ray_boundary_crossings(X, d)[-1] * d
        lo = np.minimum(lo, pt)
        hi = np.maximum(hi, pt)
    width = np.maximum(hi - lo, 1e-9)
    return [(float(l - pad * w), float(h + pad * w)) for l, h, w in zip(lo, hi, width)]


def _classify_boundary(X: SemialgebraicSet, point: np.ndarray, active_tol: float):
    gv = X.gvalues(point)
    active = tuple(i for i, v in enumerate(gv) if abs(v - 1.0) <= active_tol)
    return active


def boundary_points_along(
    X: SemialgebraicSet,
    direction: Sequence[float],
    *,
    active_tol: float = ACTIVE_TOL,
    grad_tol: float = GRAD_TOL,
    grid: int = SCAN_GRID,
    bisect_tol: float = BISECT_TOL,
) -> list[BoundaryPoint]:
    """Boundary points at every crossing along one direction.

    Gradient-degenerate crossings are dropped with a warning (the kernel
    cutting-plane condition assumes nonzero active gradients).
    """
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    out = []
    for t in ray_boundary_crossings(X, direction, grid=grid, bisect_tol=bisect_tol):
        point = t * direction
        active = _classify_boundary(X, point, active_tol)
        if not active:
            logger.warning("crossing at t=%g has empty active set; skipped", t)
            continue
        grads = [np.array([dg.eval(point) for dg in X.constraints[i].gradient()]) for i in active]
        if any(np.linalg.norm(g) <= grad_tol for g in grads):
            logger.warning("degenerate gradient at boundary point %s; skipped", point)
            continue
        out.append(BoundaryPoint(point=point, active=active, gradients=grads))
    return out


def sample_boundary(
    X: SemialgebraicSet,
    rng: int | np.random.Generator,
    *,
    pick: str | int = "uniform",
    active_tol: float = ACTIVE_TOL,
    grad_tol: float = GRAD_TOL,
    max_retries: int = 50,
    grid: int = SCAN_GRID,
    bisect_tol: float = BISECT_TOL,
) -> BoundaryPoint:
    """Draw one boundary point: uniform direction, then one crossing.

    ``pick`` selects among the crossings found along the ray: "uniform"
    (default), "first", "last", or an explicit index.  Crossings other than
    the first must be reachable, otherwise inner boundary faces would never
    be sampled and star-convexity could not be refuted.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    for _ in range(max_retries):
        direction = rng.standard_normal(X.n)
        nrm = np.linalg.norm(direction)
        if nrm < 1e-12:
            continue
        direction /= nrm
        crossings = ray_boundary_crossings(X, direction, grid=grid, bisect_tol=bisect_tol)
        if pick == "uniform":
            t = crossings[rng.integers(len(crossings))]
        elif pick == "first":
            t = crossings[0]
        elif pick == "last":
            t = crossings[-1]
        else:
            t = crossings[int(pick)]
        point = t * direction
        active = _classify_boundary(X, point, active_tol)
        if not active:
            logger.warning("empty active set at t=%g; redrawing", t)
            continue
        grads = [np.array([dg.eval(point) for dg in X.constraints[i].gradient()]) for i in active]
        if any(np.linalg.norm(g) <= grad_tol for g in grads):
            logger.warning("gradient-degenerate sample at %s; redrawing", point)
            continue
        return BoundaryPoint(point=point, active=active, gradients=grads)
    raise DegenerateSample(f"exceeded {max_retries} retries drawing a boundary point")
