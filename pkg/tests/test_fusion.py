import math

import numpy as np
import pytest

from pickpoint import camera as cm
from pickpoint import geometry as geo
from pickpoint.errors import CoincidentPoint, ZeroRotation
from pickpoint.fusion import (DirectionMode, analytical_centre, direction_vector, fuse, midpoint,
                              single_camera_estimate)
from pickpoint.geometry import RigidTransform
from pickpoint.scene import Fruit, surface_point

from conftest import random_rotation

IDENT = cm.camera_from_pose(RigidTransform.identity())


def cam_at(origin, rotation=None):
    return cm.camera_from_pose(RigidTransform(np.eye(3) if rotation is None else rotation, origin))


def test_midpoint_examples():
    assert midpoint([0, 0, 0], [2, 4, 6]).tolist() == [1, 2, 3]
    assert midpoint([5, 5, 5], [5, 5, 5]).tolist() == [5, 5, 5]
    assert midpoint([1, 9, 2], [3, 0, 7]).tolist() == midpoint([3, 0, 7], [1, 9, 2]).tolist()


def test_direction_examples():
    assert direction_vector(IDENT, None, DirectionMode.OPTICAL_AXIS).tolist() == [0, 0, 1]
    np.testing.assert_allclose(direction_vector(IDENT, np.array([0, 0, 465.0]), "line-of-sight"), [0, 0, 1])
    cam = cm.camera_from_pose(RigidTransform(geo.rotation_about_y(-math.pi / 3), [0, 0, 0]))
    d = direction_vector(cam, None, DirectionMode.RODRIGUES_AXIS)
    assert abs(abs(d[1]) - 1) < 1e-12 and abs(d[0]) < 1e-12 and abs(d[2]) < 1e-12


def test_direction_errors():
    with pytest.raises(ZeroRotation):
        direction_vector(IDENT, None, DirectionMode.RODRIGUES_AXIS)
    with pytest.raises(CoincidentPoint):
        direction_vector(IDENT, np.zeros(3), DirectionMode.LINE_OF_SIGHT)


def test_directions_unit_length(rng):
    for _ in range(50):
        cam = cam_at(rng.normal(size=3) * 100, random_rotation(rng))
        for mode in DirectionMode:
            d = direction_vector(cam, rng.normal(size=3) * 900, mode)
            assert abs(np.linalg.norm(d) - 1) < 1e-12


def test_mode_parsing():
    assert DirectionMode.parse("LineOfSight") is DirectionMode.LINE_OF_SIGHT
    assert DirectionMode.parse("optical_axis") is DirectionMode.OPTICAL_AXIS
    with pytest.raises(ValueError):
        DirectionMode.parse("sideways")


def test_two_camera_example_is_exact():
    g = np.array([500.0, 0, 500])
    fix, eih = cam_at([0, 0, 0]), cam_at([1000, 0, 0])
    cf, ce = surface_point(fix, Fruit(g, 35)), surface_point(eih, Fruit(g, 35))
    np.testing.assert_allclose(cf, [475.251, 0, 475.251], atol=1e-3)
    np.testing.assert_allclose(ce, [524.749, 0, 475.251], atol=1e-3)
    np.testing.assert_allclose(fuse(fix, eih, cf, ce, 35), g, atol=1e-12)


def test_analytical_degenerate_and_symmetric():
    c, d = np.array([1.0, 2, 3]), np.array([0, 0.6, 0.8])
    np.testing.assert_allclose(analytical_centre(c, c, 35, d, d), c + 35 * d)
    a = analytical_centre([1, 2, 3], [7, 1, 0], 35, [1, 0, 0], [0, 1, 0])
    b = analytical_centre([7, 1, 0], [1, 2, 3], 35, [0, 1, 0], [1, 0, 0])
    assert a.tolist() == b.tolist()


def test_average_direction_not_renormalised():
    out = analytical_centre([0, 0, 0], [0, 0, 0], 10, [1, 0, 0], [0, 1, 0])
    np.testing.assert_allclose(out, [5, 5, 0])
    out = analytical_centre([0, 0, 0], [0, 0, 0], 10, [1, 0, 0], [0, 1, 0], normalise=True)
    np.testing.assert_allclose(out, [10 / math.sqrt(2)] * 2 + [0])


def test_line_of_sight_exact_for_all_geometries(rng):
    for _ in range(500):
        fix = cam_at(rng.normal(size=3) * 800, random_rotation(rng))
        eih = cam_at(rng.normal(size=3) * 800, random_rotation(rng))
        fruit = Fruit(rng.normal(size=3) * 300 + [3000, 0, 0], rng.uniform(5, 80))
        cf, ce = surface_point(fix, fruit), surface_point(eih, fruit)
        np.testing.assert_allclose(fuse(fix, eih, cf, ce, fruit.radius), fruit.centre, atol=1e-9, rtol=0)


def test_vectorised_fuse_matches_rowwise(rng):
    fix, eih = cam_at([0, 0, 0]), cam_at([1000, 0, 0])
    cf, ce = rng.uniform(300, 700, (6, 3)), rng.uniform(300, 700, (6, 3))
    for mode in DirectionMode:
        if mode is DirectionMode.RODRIGUES_AXIS:
            continue
        rows = np.stack([fuse(fix, eih, a, b, 35, mode) for a, b in zip(cf, ce)])
        np.testing.assert_allclose(fuse(fix, eih, cf, ce, 35, mode), rows, atol=1e-12)


@pytest.mark.parametrize("mode", list(DirectionMode))
def test_translation_equivariance(rng, mode):
    r1, r2 = random_rotation(rng), random_rotation(rng)
    o1, o2 = rng.normal(size=3) * 500, rng.normal(size=3) * 500
    cf, ce = rng.normal(size=3) * 300 + 2000, rng.normal(size=3) * 300 + 2000
    delta = rng.normal(size=3) * 1000
    base = fuse(cam_at(o1, r1), cam_at(o2, r2), cf, ce, 35, mode)
    moved = fuse(cam_at(o1 + delta, r1), cam_at(o2 + delta, r2), cf + delta, ce + delta, 35, mode)
    np.testing.assert_allclose(moved, base + delta, atol=1e-9)
    single = single_camera_estimate(cam_at(o1, r1), cf, 35)
    np.testing.assert_allclose(single_camera_estimate(cam_at(o1 + delta, r1), cf + delta, 35), single + delta)


def test_single_camera_examples():
    np.testing.assert_allclose(single_camera_estimate(IDENT, [0, 0, 465], 35), [0, 0, 500])
    assert single_camera_estimate(IDENT, [3, 4, 5], 0).tolist() == [3, 4, 5]
    cam = cm.camera_from_pose(cm.fixed_camera_pose([1500, 0, 100]))
    g = cam.origin + 900 * cam.optical_axis
    np.testing.assert_allclose(single_camera_estimate(cam, surface_point(cam, Fruit(g, 35)), 35), g, atol=1e-9)


@pytest.mark.parametrize("theta_deg", [0.5, 5, 15, 30, 60])
def test_single_camera_off_axis_error(theta_deg):
    th = math.radians(theta_deg)
    g = 800 * np.array([math.sin(th), 0, math.cos(th)])
    est = single_camera_estimate(IDENT, surface_point(IDENT, Fruit(g, 35)), 35)
    assert np.linalg.norm(est - g) == pytest.approx(2 * 35 * math.sin(th / 2), abs=1e-9)
