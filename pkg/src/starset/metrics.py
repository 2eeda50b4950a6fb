"""Quality measurement: volumes, percent error, Hausdorff of scaled sets.

Regions are vectorized membership predicates: callables taking an (N, n)
array of points and returning a boolean array.  Adapters for semialgebraic
sets and polynomial sublevel sets are provided.  Polar volume assumes
star-convexity about the chosen center and is deterministic in 2D (no RNG).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .poly import Polynomial
from .semialg import SemialgebraicSet

Region = Callable[[np.ndarray], np.ndarray]

RAY_CAP = 2.0**30


class UnboundedRegion(RuntimeError):
    pass


def set_region(X: SemialgebraicSet, tol: float = 0.0) -> Region:
    return lambda pts: X.membership_many(pts, tol)


def sublevel_region(f: Polynomial, level: float = 1.0) -> Region:
    return lambda pts: f.eval_many(pts) <= level


def superlevel_region(f: Polynomial, level: float = 1.0) -> Region:
    return lambda pts: f.eval_many(pts) >= level


def box_region(box) -> Region:
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return lambda pts: np.all((pts >= lo) & (pts <= hi), axis=1)


def intersect_regions(*regions: Region) -> Region:
    def inside(pts):
        out = regions[0](pts)
        for r in regions[1:]:
            out &= r(pts)
        return out

    return inside


@dataclass
class VolumeEstimate:
    value: float
    method: str  # "polar" | "grid"
    resolution: int
    error_bound: float  # heuristic, never used for pass/fail decisions

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "resolution": self.resolution,
            "error_bound": self.error_bound,
        }


def _ray_radii(region: Region, center: np.ndarray, dirs: np.ndarray, iters: int = 60) -> np.ndarray:
    """Boundary radius along each direction by doubling then bisection."""
    n_rays = len(dirs)
    hi = np.ones(n_rays)
    inside = region(center + hi[:, None] * dirs)
    while np.any(inside):
        hi[inside] *= 2.0
        if hi.max() > RAY_CAP:
            raise UnboundedRegion("ray never exits the region (cap 2^30)")
        inside = region(center + hi[:, None] * dirs)
    lo = np.zeros(n_rays)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = region(center + mid[:, None] * dirs)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def _sphere_directions(n: int, count: int) -> np.ndarray:
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
    rng = np.random.default_rng(0)
    d = rng.standard_normal((count, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def volume_star(region: Region, center: Sequence[float], resolution: int = 10_000) -> VolumeEstimate:
    """Volume by radial integration about a center (star-convex regions).

    2D uses the trapezoid rule on R(theta)^2/2; higher dimensions average
    R(w)^n/n over quasi-uniform sphere directions times the sphere measure.
    """
    center = np.asarray(center, dtype=float)
    n = len(center)
    if not region(center[None, :])[0]:
        raise ValueError("center is not inside the region")
    dirs = _sphere_directions(n, resolution)
    R = _ray_radii(region, center, dirs)
    if n == 2:
        f = 0.5 * R**2
        f_closed = np.append(f, f[0])
        dtheta = 2.0 * np.pi / resolution
        value = float(np.trapezoid(f_closed, dx=dtheta))
        err = float(np.abs(np.diff(f_closed, 2)).sum() * dtheta / 12.0)
    else:
        sphere = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
        vals = R**n / n
        value = float(vals.mean() * sphere)
        err = float(vals.std(ddof=1) / math.sqrt(resolution) * sphere * 3.0)
    return VolumeEstimate(value=value, method="polar", resolution=resolution, error_bound=err)


def volume_grid(region: Region, box, resolution: int = 2000) -> VolumeEstimate:
    """Cell-center indicator sum over a regular grid on the box."""
    n = len(box)
    res = [resolution] * n if np.isscalar(resolution) else list(resolution)
    if any(r < 1 for r in res):
        raise ValueError("grid resolution must be >= 1 per axis")
    centers = []
    cell = 1.0
    for (lo, hi), r in zip(box, res):
        if not lo < hi:
            raise ValueError(f"degenerate box axis ({lo}, {hi})")
        step = (hi - lo) / r
        centers.append(lo + step * (np.arange(r) + 0.5))
        cell *= step
    shape = tuple(res)
    total = int(np.prod(shape))
    count = 0
    flips = 0
    prev_tail = None
    chunk = 1 << 18
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        coords = np.unravel_index(idx, shape)
        pts = np.column_stack([centers[ax][coords[ax]] for ax in range(n)])
        inside = region(pts)
        count += int(inside.sum())
        # boundary-layer heuristic along the flattened order
        if prev_tail is not None:
            flips += int(inside[0] != prev_tail)
        flips += int(np.count_nonzero(inside[1:] != inside[:-1]))
        prev_tail = inside[-1]
    return VolumeEstimate(
        value=count * cell,
        method="grid",
        resolution=max(res),
        error_bound=flips * cell,
    )


def percent_error(vol_approx: float, vol_true: float) -> float:
    """100 * (vol_approx - vol_true) / vol_true."""
    if vol_true <= 0:
        raise ValueError(f"reference volume must be positive, got {vol_true}")
    return 100.0 * (vol_approx - vol_true) / vol_true


def max_norm_sublevel(f: Polynomial, resolution: int = 10_000) -> float:
    """max ||x|| over the 1-sublevel set of f (star-convex about 0)."""
    region = sublevel_region(f)
    if not region(np.zeros((1, f.n)))[0]:
        raise ValueError("the origin is not in the 1-sublevel set")
    dirs = _sphere_directions(f.n, resolution)
    try:
        R = _ray_radii(region, np.zeros(f.n), dirs)
    except UnboundedRegion:
        raise UnboundedRegion("sublevel set is unbounded") from None
    return float(R.max())


def hausdorff_scaled(f: Polynomial, s: float, resolution: int = 10_000) -> float:
    """Hausdorff distance between {f<=1} and its s-dilation (convex f<=1)."""
    if s < 1.0:
        raise ValueError(f"scaling must satisfy s >= 1, got {s}")
    return (s - 1.0) * max_norm_sublevel(f, resolution)


def support_function(region: Region, c: Sequence[float], resolution: int = 10_000) -> float:
    """max c^T x over a region star-convex about the origin."""
    c = np.asarray(c, dtype=float)
    if abs(np.linalg.norm(c) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    n = len(c)
    dirs = _sphere_directions(n, resolution)
    R = _ray_radii(region, np.zeros(n), dirs)
    return float(((R[:, None] * dirs) @ c).max())


TABLE_FIELDS = [
    "example",
    "degree",
    "objective",
    "s_star",
    "s_lb",
    "vol_inner",
    "vol_outer",
    "percent_error",
]


def write_table_csv(path: str, rows: list[dict]) -> None:
    """Emit per-run rows in the benchmark-table column layout."""
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=TABLE_FIELDS, restval="")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row.get(k)) for k in TABLE_FIELDS})


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.9g}"
    return v
