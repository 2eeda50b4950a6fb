import numpy as np
import pytest

from starset import conic, fixtures, kernel
from starset.kernel import Polytope, PolytopeEmpty, PolytopeUnbounded
from starset.poly import Polynomial
from starset.semialg import BoundaryPoint, SemialgebraicSet, boundary_points_along


def square_set():
    return SemialgebraicSet(
        2,
        [
            Polynomial(2, {(1, 0): 1.0}),
            Polynomial(2, {(1, 0): -1.0}),
            Polynomial(2, {(0, 1): 1.0}),
            Polynomial(2, {(0, 1): -1.0}),
        ],
    )


def square_polytope():
    return Polytope(
        2,
        halfspaces=[
            (np.array([1.0, 0.0]), 1.0),
            (np.array([-1.0, 0.0]), 1.0),
            (np.array([0.0, 1.0]), 1.0),
            (np.array([0.0, -1.0]), 1.0),
        ],
    )


def test_add_cutting_plane_disk():
    bp = BoundaryPoint(point=np.array([1.0, 0.0]), active=(0,), gradients=[np.array([2.0, 0.0])])
    K = kernel.add_cutting_plane(Polytope.whole_space(2), bp)
    (a, b), = K.halfspaces
    assert np.allclose(a, [2.0, 0.0]) and b == pytest.approx(2.0)
    # i.e. the halfspace x1 <= 1
    assert np.allclose(a / b, [1.0, 0.0])


def test_add_cutting_plane_example_e_inner_circle():
    c, r = 0.9, 0.4
    X = fixtures.example_e(c, r)
    grad = np.array([g.eval([c, r]) for g in X.constraints[1].gradient()])
    bp = BoundaryPoint(point=np.array([c, r]), active=(1,), gradients=[grad])
    K = kernel.add_cutting_plane(Polytope.whole_space(2), bp)
    (a, b), = K.halfspaces
    # inward-oriented gradient of the excluded disk yields x2 >= r
    assert np.allclose(a, [0.0, -2 * r])
    assert b == pytest.approx(-2 * r * r)


def test_add_cutting_plane_square_corner():
    bps = boundary_points_along(square_set(), [1.0, 1.0])
    K = kernel.add_cutting_plane(Polytope.whole_space(2), bps[0])
    assert len(K.halfspaces) == 2
    A, b = K.halfspace_matrix()
    assert np.allclose(A, [[1.0, 0.0], [0.0, 1.0]]) and np.allclose(b, [1.0, 1.0])


def test_is_empty_strip():
    r = 0.4
    K = Polytope(2, halfspaces=[(np.array([0.0, 1.0]), -r), (np.array([0.0, -1.0]), -r)])
    assert kernel.is_empty(K)
    assert K.farkas is not None and kernel.verify_farkas(K)


def test_is_empty_square_and_whole_space():
    K = square_polytope()
    assert not kernel.is_empty(K)
    center, radius = kernel.chebyshev_center(K)
    assert np.allclose(center, [0.0, 0.0], atol=1e-7)
    assert radius == pytest.approx(1.0, abs=1e-7)
    assert not kernel.is_empty(Polytope.whole_space(2))


def test_chebyshev_center_asymmetric():
    K = Polytope(
        2,
        halfspaces=[
            (np.array([1.0, 0.0]), 1.0),
            (np.array([-1.0, 0.0]), 0.0),
            (np.array([0.0, 1.0]), 1.0),
            (np.array([0.0, -1.0]), 1.0),
        ],
    )
    center, radius = kernel.chebyshev_center(K)
    assert np.allclose(center, [0.5, 0.0], atol=1e-7)
    assert radius == pytest.approx(0.5, abs=1e-7)


def test_chebyshev_center_errors():
    with pytest.raises(PolytopeUnbounded):
        kernel.chebyshev_center(Polytope.whole_space(2))
    K = Polytope(2, halfspaces=[(np.array([0.0, 1.0]), -1.0), (np.array([0.0, -1.0]), -1.0)])
    with pytest.raises(PolytopeEmpty):
        kernel.chebyshev_center(K)


def test_vertices_2d_square():
    verts = kernel.vertices_2d(square_polytope())
    assert len(verts) == 4
    assert sorted(map(tuple, np.round(verts, 8))) == [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]


def test_vertices_2d_triangle_and_redundancy():
    tri_rows = [
        (np.array([0.0, -1.0]), 0.5),
        (np.array([1.0, 1.0]), 1.0),
        (np.array([-1.0, 1.0]), 1.0),
    ]
    K = Polytope(2, halfspaces=tri_rows)
    v1 = kernel.vertices_2d(K)
    assert len(v1) == 3
    K2 = Polytope(2, halfspaces=tri_rows + [(np.array([0.0, 1.0]), 5.0)])
    v2 = kernel.vertices_2d(K2)
    assert len(v2) == 3
    assert np.allclose(sorted(map(tuple, v1)), sorted(map(tuple, v2)), atol=1e-9)


def test_vertices_2d_unbounded():
    K = Polytope(2, halfspaces=[(np.array([1.0, 0.0]), 1.0)])
    with pytest.raises(PolytopeUnbounded):
        kernel.vertices_2d(K)


def test_vertices_2d_from_vertex_rep():
    K = Polytope(2, vertices=[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.5, 0.5], [0.0, 1.0]])
    verts = kernel.vertices_2d(K)
    assert len(verts) == 4  # interior point dropped by the hull


def test_prune_redundant():
    rows = square_polytope().halfspaces + [(np.array([1.0, 1.0]), 5.0)]
    K = kernel.prune_redundant(Polytope(2, halfspaces=rows))
    assert len(K.halfspaces) == 4


def test_kernel_intersection_inner():
    KA = square_polytope()
    KB = Polytope(2, halfspaces=[(a, b + float(a @ np.array([0.5, 0.0]))) for a, b in KA.halfspaces])
    K = kernel.kernel_intersection_inner(KA, KB)
    verts = kernel.vertices_2d(K)
    assert np.allclose(verts.min(axis=0), [-0.5, -1.0], atol=1e-8)
    assert np.allclose(verts.max(axis=0), [1.0, 1.0], atol=1e-8)

    assert kernel.is_empty(kernel.kernel_intersection_inner(Polytope.empty(2), KA))

    K_same = kernel.kernel_intersection_inner(KA, KA)
    assert np.allclose(
        sorted(map(tuple, kernel.vertices_2d(K_same))),
        sorted(map(tuple, kernel.vertices_2d(KA))),
        atol=1e-8,
    )


def test_outer_kernel_disk_tangents():
    disk = fixtures.unit_disk()
    K = kernel.outer_kernel(disk, 500, seed=1)
    assert not kernel.is_empty(K)
    A, b = K.halfspace_matrix()
    dist = b / np.linalg.norm(A, axis=1)
    # every cutting plane is tangent to the unit circle
    assert np.all(np.abs(dist - 1.0) < 1e-6)
    verts = kernel.vertices_2d(K)
    norms = np.linalg.norm(verts, axis=1)
    assert norms.max() <= 1.01 and norms.min() >= 0.99


def test_find_support_disk():
    res = kernel.find_support(fixtures.unit_disk(), np.array([1.0, 0.0]), mult_degree=2)
    assert res.feasible
    assert np.allclose(res.point, [1.0, 0.0], atol=1e-5)


def test_find_support_requires_unit_direction():
    with pytest.raises(ValueError):
        kernel.find_support(fixtures.unit_disk(), np.array([2.0, 0.0]))


def test_find_support_example_a_height():
    res = kernel.find_support(fixtures.example_a(), np.array([0.0, 1.0]), mult_degree=2)
    assert res.feasible
    assert abs(res.value - 0.3335) < 1e-3


def test_find_support_example_e_infeasible():
    X = fixtures.example_e(0.9, 0.4)
    for d in ([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]):
        res = kernel.find_support(X, np.array(d), mult_degree=2)
        assert res.status == conic.Status.INFEASIBLE


def test_support_points_are_kernel_points():
    X = fixtures.example_a()
    rng = np.random.default_rng(4)
    pts = rng.uniform(-1, 1, (4000, 2))
    members = pts[X.membership_many(pts)][:200]
    for d in kernel.direction_set(2, 4):
        res = kernel.find_support(X, d, mult_degree=2)
        assert res.feasible
        for t in (0.25, 0.5, 0.75):
            seg = t * res.point[None, :] + (1 - t) * members
            assert np.all(X.membership_many(seg, tol=1e-6))


def test_support_monotone_in_degree():
    X = fixtures.example_a()
    for d in kernel.direction_set(2, 8):
        v2 = kernel.find_support(X, d, mult_degree=2).value
        v4 = kernel.find_support(X, d, mult_degree=4).value
        assert v4 >= v2 - 1e-6


def test_inner_kernel_disk_16gon():
    disk = fixtures.unit_disk()
    K = kernel.inner_kernel(disk, kernel.direction_set(2, 16), mult_degree=2)
    assert not kernel.is_empty(K)
    verts = kernel.vertices_2d(K)
    assert len(verts) == 16
    assert np.all(np.abs(np.linalg.norm(verts, axis=1) - 1.0) < 1e-3)


def test_inner_kernel_example_e_empty():
    X = fixtures.example_e(0.9, 0.4)
    K = kernel.inner_kernel(X, kernel.direction_set(2, 4), mult_degree=2)
    assert kernel.is_empty(K)


def test_direction_set_shapes():
    d2 = kernel.direction_set(2, 8)
    d3 = kernel.direction_set(3, 32)
    d5 = kernel.direction_set(5, 16, seed=3)
    for d in (d2, d3, d5):
        assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    assert np.array_equal(kernel.direction_set(5, 16, seed=3), d5)


def test_polytope_json_round_trip():
    K = square_polytope()
    K2 = Polytope.from_dict(K.to_dict())
    assert np.allclose(K.halfspace_matrix()[0], K2.halfspace_matrix()[0])
    Ki = Polytope(2, vertices=[[0.0, 1.0], [1.0, 0.0], [-1.0, 0.0]])
    Ki2 = Polytope.from_dict(Ki.to_dict())
    assert len(Ki2.vertices) == 3
