import json

import numpy as np
import pytest

from kpose.camera import CameraPose, Multiplex, multiplex_init, multiplex_weights, project
from kpose.errors import EmptyMultiplex, KposeError
from kpose.rotation import euler_from_matrix, geodesic_angle

from conftest import random_pose


def test_project_origin_and_arithmetic(rng):
    pose = random_pose(rng)
    np.testing.assert_allclose(project(CameraPose(1, [0, 0], pose.R), [0, 0, 0]), [[0, 0]])
    out = project(CameraPose(2, [0.1, 0.2], np.eye(3)), [0.3, 0.4, 5])
    np.testing.assert_allclose(out, [[0.7, 1.0]], atol=1e-15)


def test_project_translation_equivariance(rng):
    pose = random_pose(rng)
    X = rng.normal(size=(20, 3))
    delta = np.array([0.25, -0.5])
    moved = CameraPose(pose.s, pose.t + delta, pose.R)
    np.testing.assert_allclose(project(moved, X), project(pose, X) + delta, rtol=0, atol=1e-15)


def test_project_scale(rng):
    pose = random_pose(rng)
    X = rng.normal(size=(20, 3))
    a = project(CameraPose(pose.s * 3, [0, 0], pose.R), X)
    b = project(CameraPose(pose.s, [0, 0], pose.R), X)
    np.testing.assert_allclose(a, 3 * b, rtol=1e-14)


def test_pose_validation_and_json(rng):
    with pytest.raises(KposeError):
        CameraPose(0.0, [0, 0], np.eye(3))
    pose = random_pose(rng)
    d = json.loads(json.dumps(pose.to_dict()))
    assert set(d) == {"s", "t", "q"} and len(d["q"]) == 4
    back = CameraPose.from_dict(d)
    assert back.s == pose.s
    np.testing.assert_allclose(back.R, pose.R, atol=1e-12)


def test_multiplex_init_count_and_determinism():
    poses = multiplex_init(8, 5, seed=3)
    assert len(poses) == 40
    again = multiplex_init(8, 5, seed=3)
    for a, b in zip(poses, again):
        assert np.array_equal(a.R, b.R) and a.s == b.s and np.array_equal(a.t, b.t)
    assert not np.array_equal(multiplex_init(8, 5, seed=4)[0].R, poses[0].R)


def test_multiplex_init_grid_layout():
    az_step, el_step = 2 * np.pi / 8, np.deg2rad(160) / 5
    for k, pose in enumerate(multiplex_init(8, 5, seed=11)):
        i, j = divmod(k, 5)
        az, el, cyclo = euler_from_matrix(pose.R)
        az = az % (2 * np.pi)
        assert abs(cyclo) < 1e-12
        assert pose.s == 0.7 and not pose.t.any()
        assert abs(az - (i + 0.5) * az_step) <= az_step / 2 + 1e-12
        assert abs(el - (np.deg2rad(-80) + (j + 0.5) * el_step)) <= el_step / 2 + 1e-12
        assert abs(el) <= np.deg2rad(80) + 1e-12


def test_multiplex_init_single_camera():
    (pose,) = multiplex_init(1, 1, seed=5)
    az, el, _ = euler_from_matrix(pose.R)
    # one cell: centre (pi, 0) plus at most half a cell of jitter
    assert 0 <= az % (2 * np.pi) < 2 * np.pi
    assert abs(el) <= np.deg2rad(80)
    assert np.array_equal(pose.R, multiplex_init(1, 1, seed=5)[0].R)


def test_multiplex_weights_examples():
    np.testing.assert_allclose(multiplex_weights([2.0] * 4, 1.0), [0.25] * 4, atol=1e-15)
    w = multiplex_weights([0.0, 100.0], 1.0)
    assert w[0] == pytest.approx(1.0)
    assert w[1] == pytest.approx(np.exp(-100.0), rel=1e-9)
    assert w[0] > w[1] > 0
    np.testing.assert_allclose(multiplex_weights([0.1, 5.0, 3.0], 1e9), [1 / 3] * 3, atol=1e-6)
    with pytest.raises(EmptyMultiplex):
        multiplex_weights([], 1.0)


def test_multiplex_weights_properties(rng):
    for _ in range(200):
        losses = rng.uniform(0, 5, size=rng.integers(1, 40))
        sigma = rng.uniform(0.01, 3)
        w = multiplex_weights(losses, sigma)
        assert (w > 0).all()
        assert abs(w.sum() - 1) < 1e-12
        np.testing.assert_allclose(multiplex_weights(losses + 7.3, sigma), w, atol=1e-12)
        assert np.argmax(w) == np.argmin(losses)


def test_multiplex_container():
    mp = Multiplex(multiplex_init(2, 2, 0), [0.1, 0.2, 0.3, 0.4], sigma=0.5)
    assert mp.weights.sum() == pytest.approx(1.0)
    with pytest.raises(KposeError):
        Multiplex(multiplex_init(2, 2, 0), [0.1], sigma=0.5)


def test_geodesic_between_grid_neighbours():
    poses = multiplex_init(8, 1, seed=0)
    assert geodesic_angle(poses[0].R, poses[1].R) > 0
