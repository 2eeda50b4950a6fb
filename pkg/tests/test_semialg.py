import math

import numpy as np
import pytest

from starset import fixtures
from starset.poly import Polynomial
from starset.semialg import (
    ACTIVE_TOL,
    BISECT_TOL,
    OriginNotInterior,
    SemialgebraicSet,
    bounding_box,
    boundary_points_along,
    ray_boundary_crossings,
    sample_boundary,
)


def square():
    return SemialgebraicSet(
        2,
        [
            Polynomial(2, {(1, 0): 1.0}),
            Polynomial(2, {(1, 0): -1.0}),
            Polynomial(2, {(0, 1): 1.0}),
            Polynomial(2, {(0, 1): -1.0}),
        ],
    )


def ray_circle_entry(c, r, direction):
    """Distance along `direction` from the origin to the circle |x-(c,0)|=r."""
    d = np.asarray(direction) / np.linalg.norm(direction)
    proj = c * d[0]
    disc = proj * proj - (c * c - r * r)
    return proj - math.sqrt(disc)


def test_membership_disk():
    disk = fixtures.unit_disk()
    assert disk.membership([0.0, 0.0])
    assert not disk.membership([2.0, 0.0])
    with pytest.raises(ValueError):
        disk.membership([0.0, 0.0], tol=-1.0)


def test_membership_example_e_excluded_disk():
    X = fixtures.example_e(0.9, 0.4)
    # (0.9, 0) sits inside the forbidden inner disk: its constraint reads
    # 1 + r^2 - (x1-c)^2 - x2^2 <= 1, violated there by r^2.
    g_inner = X.constraints[1]
    assert g_inner.eval([0.9, 0.0]) == pytest.approx(1.0 + 0.16)
    assert not X.membership([0.9, 0.0])


def test_ray_crossings_disk():
    disk = fixtures.unit_disk()
    ts = ray_boundary_crossings(disk, [1.0, 0.0])
    assert len(ts) == 1
    assert abs(ts[0] - 1.0) < 10 * BISECT_TOL


def test_ray_crossings_scaled_disk():
    scaled = SemialgebraicSet(2, [Polynomial(2, {(2, 0): 0.25, (0, 2): 0.25})])
    ts = ray_boundary_crossings(scaled, [0.0, 1.0])
    assert len(ts) == 1
    assert abs(ts[0] - 2.0) < 1e-8


def test_ray_crossings_example_e_three_crossings():
    c, r = 0.9, 0.4
    X = fixtures.example_e(c, r)
    d = np.array([c, r]) / math.hypot(c, r)
    # exactly along the critical ray the set is only touched at (c, r), so
    # probe a slightly steeper ray that passes through the forbidden disk
    d = np.array([c, r + 1e-2])
    d /= np.linalg.norm(d)
    ts = ray_boundary_crossings(X, d)
    assert len(ts) == 3
    assert abs(ts[0] - ray_circle_entry(c, r, d)) < 1e-8


def test_ray_errors():
    disk = fixtures.unit_disk()
    shifted = disk.translated([5.0, 0.0])  # origin not interior
    with pytest.raises(OriginNotInterior):
        ray_boundary_crossings(shifted, [1.0, 0.0])
    with pytest.raises(Exception):
        ray_boundary_crossings(disk, [1.0, 0.0], t_max=0.5)


def test_boundary_points_square_corner():
    bps = boundary_points_along(square(), [1.0, 1.0])
    assert len(bps) == 1
    bp = bps[0]
    assert np.allclose(bp.point, [1.0, 1.0], atol=1e-8)
    assert bp.active == (0, 2)
    assert np.allclose(bp.gradients[0], [1.0, 0.0])
    assert np.allclose(bp.gradients[1], [0.0, 1.0])


def test_boundary_point_disk_gradient():
    bps = boundary_points_along(fixtures.unit_disk(), [0.0, 1.0])
    assert len(bps) == 1
    assert np.allclose(bps[0].point, [0.0, 1.0], atol=1e-8)
    assert bps[0].active == (0,)
    assert np.allclose(bps[0].gradients[0], [0.0, 2.0], atol=1e-8)


def test_boundary_point_example_e_inner_circle():
    c, r = 0.9, 0.4
    X = fixtures.example_e(c, r)
    d = np.array([c, r])  # critical direction: single detectable crossing
    bps = boundary_points_along(X, d)
    bp = bps[-1]
    assert bp.active == (1,)
    # the point lies on the inner excluded circle
    assert abs((bp.point[0] - c) ** 2 + bp.point[1] ** 2 - r * r) < 1e-6


def test_sample_boundary_invariants():
    X = fixtures.example_e(0.9, 0.4)
    rng = np.random.default_rng(42)
    for _ in range(50):
        bp = sample_boundary(X, rng)
        assert X.membership(bp.point, 2 * ACTIVE_TOL)
        assert X.max_g(bp.point) >= 1.0 - 2 * ACTIVE_TOL
        for g in bp.gradients:
            assert np.linalg.norm(g) > 1e-8


def test_sample_boundary_determinism():
    X = fixtures.example_a()
    a = [sample_boundary(X, np.random.default_rng(7)).point for _ in range(1)]
    b = [sample_boundary(X, np.random.default_rng(7)).point for _ in range(1)]
    assert np.array_equal(a[0], b[0])
    pts1 = [tuple(sample_boundary(X, rng).point) for rng in [np.random.default_rng(3)] for _ in range(5)]
    rng = np.random.default_rng(3)
    pts2 = [tuple(sample_boundary(X, rng).point) for _ in range(5)]
    assert pts1 == pts2


def test_boundary_radius_membership_property():
    disk = fixtures.unit_disk()
    rng = np.random.default_rng(11)
    delta = 10 * BISECT_TOL
    for _ in range(100):
        d = rng.standard_normal(2)
        d /= np.linalg.norm(d)
        R = ray_boundary_crossings(disk, d)[0]
        assert disk.membership((R - delta) * d)
        assert not disk.membership((R + delta) * d)


def test_bounding_box_covers_example_e():
    X = fixtures.example_e(0.9, 0.4)
    box = bounding_box(X)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1.5, 1.5, size=(20000, 2))
    members = pts[X.membership_many(pts)]
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    assert np.all(members >= lo) and np.all(members <= hi)


def test_set_json_round_trip():
    X = fixtures.example_b()
    Y = SemialgebraicSet.from_dict(X.to_dict())
    assert Y.n == X.n and Y.constraints == X.constraints


def test_validation():
    with pytest.raises(ValueError):
        SemialgebraicSet(2, [])
    with pytest.raises(ValueError):
        SemialgebraicSet(2, [Polynomial(1, {(1,): 1.0})])
