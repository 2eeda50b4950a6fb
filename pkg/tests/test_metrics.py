import math

import numpy as np
import pytest

from starset import fixtures, metrics
from starset._geom import polygon_halfspaces
from starset.poly import Polynomial


def square_region():
    return metrics.box_region([(-1.0, 1.0), (-1.0, 1.0)])


def test_volume_star_disk():
    est = metrics.volume_star(metrics.set_region(fixtures.unit_disk()), [0.0, 0.0])
    assert est.method == "polar"
    assert abs(est.value - math.pi) < 1e-3


def test_volume_star_square():
    est = metrics.volume_star(square_region(), [0.0, 0.0])
    assert abs(est.value - 4.0) < 1e-3


def test_volume_star_scaling_law():
    # dilating by s multiplies the volume by s^n
    disk = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0})
    base = metrics.volume_star(metrics.sublevel_region(disk), [0.0, 0.0], 4000).value
    scaled = metrics.volume_star(
        metrics.sublevel_region(disk.substitute_scale(1.5)), [0.0, 0.0], 4000
    ).value
    assert abs(scaled / base - 1.5**2) < 0.01 * 1.5**2


def test_volume_star_center_must_be_inside():
    with pytest.raises(ValueError):
        metrics.volume_star(metrics.set_region(fixtures.unit_disk()), [5.0, 0.0])


def test_volume_star_3d_ball():
    ball = Polynomial(3, {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0})
    est = metrics.volume_star(metrics.sublevel_region(ball), [0.0, 0.0, 0.0], 20000)
    assert abs(est.value - 4.0 * math.pi / 3.0) < 0.01


def test_volume_grid_disk():
    est = metrics.volume_grid(
        metrics.set_region(fixtures.unit_disk()), [(-1.0, 1.0), (-1.0, 1.0)], 2000
    )
    assert est.method == "grid"
    assert abs(est.value - math.pi) < 0.005


def test_volume_grid_example_e_half_annulus():
    # the set is the annulus around (c, 0) cut at x1 <= c: exactly half of it
    c, r = 0.9, 0.4
    X = fixtures.example_e(c, r)
    oracle = math.pi * (1.0 - r * r) / 2.0
    est = metrics.volume_grid(metrics.set_region(X), [(-0.2, 1.0), (-1.05, 1.05)], 2000)
    assert abs(est.value - oracle) < 0.005


def test_volume_grid_empty_region():
    est = metrics.volume_grid(lambda pts: np.zeros(len(pts), dtype=bool), [(-1, 1), (-1, 1)], 100)
    assert est.value == 0.0


def test_polar_grid_agreement():
    X = fixtures.example_b()
    polar = metrics.volume_star(metrics.set_region(X), [0.0, 0.0]).value
    from starset.semialg import bounding_box

    grid = metrics.volume_grid(metrics.set_region(X), bounding_box(X), 2000).value
    assert abs(polar - grid) < 0.01 * max(polar, grid)


def test_percent_error():
    assert metrics.percent_error(math.pi, math.pi) == 0.0
    assert metrics.percent_error(2.0, 1.0) == 100.0
    # affine in the first argument
    a, b = metrics.percent_error(1.3, 2.0), metrics.percent_error(1.7, 2.0)
    assert abs(metrics.percent_error(1.5, 2.0) - 0.5 * (a + b)) < 1e-12
    with pytest.raises(ValueError):
        metrics.percent_error(1.0, 0.0)


def test_max_norm_sublevel():
    assert abs(metrics.max_norm_sublevel(Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0})) - 1.0) < 1e-6
    ell = Polynomial(2, {(2, 0): 0.25, (0, 2): 1.0})
    assert abs(metrics.max_norm_sublevel(ell) - 2.0) < 1e-6
    eps = 1e-3
    shrunk = Polynomial(2, {(2, 0): 1 + eps, (0, 2): 1 + eps})
    assert abs(metrics.max_norm_sublevel(shrunk) - 1 / math.sqrt(1 + eps)) < 1e-6


def test_max_norm_unbounded():
    with pytest.raises(metrics.UnboundedRegion):
        metrics.max_norm_sublevel(Polynomial(2, {(2, 0): 1.0}), resolution=64)


def test_hausdorff_scaled():
    disk = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0})
    assert abs(metrics.hausdorff_scaled(disk, 2.0) - 1.0) < 1e-6
    assert metrics.hausdorff_scaled(disk, 1.0) == 0.0
    ell = Polynomial(2, {(2, 0): 0.25, (0, 2): 1.0})
    assert abs(metrics.hausdorff_scaled(ell, 1.5) - 1.0) < 1e-6
    with pytest.raises(ValueError):
        metrics.hausdorff_scaled(disk, 0.9)


def test_support_function_square_disk():
    assert abs(metrics.support_function(square_region(), [1.0, 0.0]) - 1.0) < 1e-6
    disk = metrics.set_region(fixtures.unit_disk())
    for c in ([1.0, 0.0], [0.6, 0.8]):
        assert abs(metrics.support_function(disk, c) - 1.0) < 1e-5


def test_support_function_kernel_quadrilateral():
    # counterclockwise order expected by the halfspace conversion
    verts = np.array([(0.1268, 0.2213), (-0.1752, 0.3335), (-0.1268, -0.2213), (0.1752, -0.3335)])
    A, b = polygon_halfspaces(verts)

    def region(pts):
        return np.all(pts @ A.T <= b + 1e-12, axis=1)

    val = metrics.support_function(region, [0.0, 1.0])
    assert abs(val - 0.3335) < 1e-3


def test_write_table_csv(tmp_path):
    rows = [
        {"example": "disk", "degree": 2, "objective": "s", "s_star": 1.001, "percent_error": 0.2},
    ]
    path = tmp_path / "table.csv"
    metrics.write_table_csv(str(path), rows)
    text = path.read_text().splitlines()
    assert text[0] == ",".join(metrics.TABLE_FIELDS)
    assert text[1].startswith("disk,2,s,1.001")
