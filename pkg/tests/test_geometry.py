import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from hrmap.errors import BehindCamera, Degenerate, InsufficientData, InvalidInput, NoConvergence
from hrmap.geometry import (
    IDENTITY_QUAT,
    PinholeCamera,
    RigidTransform,
    compose,
    fit_rigid,
    matrix_to_quat,
    quat_from_axis_angle,
    quat_mul,
    quat_to_matrix,
    reprojection_rmse,
    rot_distance,
    rot_distance_matrix,
    slerp,
    solve_pnp,
)

from oracles import kabsch, quat_wxyz_to_scipy, scipy_to_wxyz

quat_st = hnp.arrays(float, 4, elements=st.floats(-1, 1)).filter(lambda q: np.linalg.norm(q) > 0.1).map(
    lambda q: q / np.linalg.norm(q))


def random_transform(rng, max_angle=math.pi):
    return RigidTransform(quat_from_axis_angle(rng.normal(size=3), rng.uniform(0, max_angle)),
                          rng.uniform(-2, 2, size=3))


# ----- rotations


def test_rot_distance_examples():
    q = quat_from_axis_angle([1, 2, 3], 0.7)
    assert rot_distance(q, q) == 0.0
    assert rot_distance(q, -q) == 0.0
    assert rot_distance(IDENTITY_QUAT, quat_from_axis_angle([0, 0, 1], math.pi)) == pytest.approx(math.pi, abs=1e-12)
    with pytest.raises(InvalidInput):
        rot_distance([np.nan, 0, 0, 1], IDENTITY_QUAT)


@given(quat_st, quat_st)
def test_rot_distance_metric_properties(a, b):
    d = rot_distance(a, b)
    assert 0.0 <= d <= math.pi + 1e-12
    assert d == pytest.approx(rot_distance(b, a), abs=1e-12)
    assert d == pytest.approx(rot_distance(-a, b), abs=1e-12)
    ref = 2 * math.acos(min(1.0, abs(float(np.dot(a, b)))))
    assert d == pytest.approx(ref, abs=1e-6)


@given(quat_st, quat_st, quat_st)
def test_rot_distance_triangle(a, b, c):
    assert rot_distance(a, c) <= rot_distance(a, b) + rot_distance(b, c) + 1e-9


def test_rot_distance_matches_scipy(rng):
    qa = rng.normal(size=(20, 4))
    qb = rng.normal(size=(30, 4))
    D = rot_distance_matrix(qa, qb)
    ra, rb = quat_wxyz_to_scipy(qa), quat_wxyz_to_scipy(qb)
    for i in range(20):
        ref = (ra[i].inv() * rb).magnitude()
        assert np.allclose(D[i], ref, atol=1e-9)


def test_quaternion_matrix_round_trip(rng):
    for _ in range(200):
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        R = quat_to_matrix(q)
        assert np.allclose(R, quat_wxyz_to_scipy(q).as_matrix(), atol=1e-12)
        assert rot_distance(matrix_to_quat(R), q) < 1e-7


@given(quat_st, quat_st, quat_st)
def test_quat_mul_associative(a, b, c):
    assert np.allclose(quat_mul(quat_mul(a, b), c), quat_mul(a, quat_mul(b, c)), atol=1e-12)


@given(quat_st, quat_st, st.floats(0, 1))
def test_slerp_matches_scipy(a, b, u):
    from scipy.spatial.transform import Slerp

    if abs(np.dot(a, b)) > 1 - 1e-12:
        return
    ref = scipy_to_wxyz(Slerp([0, 1], quat_wxyz_to_scipy(np.stack([a, b])))(u))
    assert rot_distance(slerp(a, b, u), ref) < 1e-6


def test_slerp_endpoints(rng):
    a, b = rng.normal(size=(2, 4))
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    assert rot_distance(slerp(a, b, 0.0), a) == 0.0
    assert rot_distance(slerp(a, b, 1.0), b) < 1e-12


# ----- rigid transforms


def test_compose_examples(rng):
    T = random_transform(rng)
    I = compose(T, T.inverse())
    assert rot_distance(I.rotation, IDENTITY_QUAT) < 1e-9
    assert np.allclose(I.translation, 0, atol=1e-9)
    J = compose(RigidTransform.identity(), T)
    assert np.allclose(J.matrix(), T.matrix(), atol=1e-12)


def test_compose_matches_matrix_product(rng):
    a, b = random_transform(rng), random_transform(rng)
    pts = rng.normal(size=(100, 3))
    ref = (a.matrix() @ b.matrix() @ np.c_[pts, np.ones(100)].T).T[:, :3]
    assert np.allclose(compose(a, b).apply(pts), ref, atol=1e-9, rtol=0)
    assert np.allclose((a @ b).apply(pts), a.apply(b.apply(pts)), atol=1e-9, rtol=0)


@given(st.integers(0, 2**31 - 1))
def test_compose_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_transform(rng) for _ in range(3))
    assert np.allclose(((a @ b) @ c).matrix(), (a @ (b @ c)).matrix(), atol=1e-9)


def test_transform_quaternion_unit(rng):
    T = RigidTransform([3.0, 0, 0, 4.0], [0, 0, 0])
    assert abs(np.linalg.norm(T.rotation) - 1) < 1e-9


# ----- calibration


def test_fit_rigid_examples(rng):
    P = rng.normal(size=(10, 3))
    T, rmse = fit_rigid(P, P)
    assert rot_distance(T.rotation, IDENTITY_QUAT) < 1e-9 and np.allclose(T.translation, 0, atol=1e-9)
    assert rmse < 1e-9
    T, rmse = fit_rigid(P, P + [1, 2, 3])
    assert rot_distance(T.rotation, IDENTITY_QUAT) < 1e-9
    assert np.allclose(T.translation, [1, 2, 3], atol=1e-9)
    assert rmse < 1e-9


def test_fit_rigid_matches_kabsch(rng):
    for _ in range(50):
        truth = random_transform(rng)
        P = rng.uniform(-1, 1, size=(20, 3))
        Q = truth.apply(P)
        T, rmse = fit_rigid(P, Q)
        R_ref, t_ref = kabsch(P, Q)
        assert np.allclose(T.R, R_ref, atol=1e-6)
        assert np.allclose(T.translation, t_ref, atol=1e-6)
        assert rmse < 1e-6


def test_fit_rigid_errors(rng):
    with pytest.raises(InsufficientData):
        fit_rigid(rng.normal(size=(2, 3)), rng.normal(size=(2, 3)))
    line = np.outer(np.arange(5.0), [1, 2, 3])
    with pytest.raises(Degenerate):
        fit_rigid(line, line)
    with pytest.raises(InvalidInput):
        fit_rigid(rng.normal(size=(5, 3)), rng.normal(size=(4, 3)))


def test_fit_rigid_noisy_matches_kabsch(rng):
    truth = random_transform(rng)
    P = rng.uniform(-1, 1, size=(50, 3))
    Q = truth.apply(P) + rng.normal(0, 0.01, size=P.shape)
    T, _ = fit_rigid(P, Q)
    R_ref, t_ref = kabsch(P, Q)
    assert np.allclose(T.R, R_ref, atol=1e-8)
    assert np.allclose(T.translation, t_ref, atol=1e-8)


# ----- PnP

CAM = PinholeCamera(500.0, 500.0, 320.0, 240.0)


def pnp_instance(rng, n=10):
    truth = RigidTransform(quat_from_axis_angle(rng.normal(size=3), rng.uniform(0, 0.6)),
                           rng.uniform([-0.3, -0.3, 2.0], [0.3, 0.3, 4.0]))
    obj = rng.uniform(-0.5, 0.5, size=(n, 3))
    return truth, obj, CAM.project(truth.apply(obj))


def test_pnp_identity():
    obj = np.array([[0, 0, 2], [1, 0, 3], [0, 1, 2.5], [1, 1, 4], [-1, 0.5, 3]], float)
    img = CAM.project(obj)
    pose = solve_pnp(obj, img, CAM, RigidTransform(quat_from_axis_angle([0, 1, 0], 0.05), [0.02, 0, 0]))
    assert rot_distance(pose.rotation, IDENTITY_QUAT) < 1e-8
    assert np.allclose(pose.translation, 0, atol=1e-8)


def test_pnp_recovers_pose(rng):
    for _ in range(20):
        truth, obj, img = pnp_instance(rng)
        init = RigidTransform(quat_mul(quat_from_axis_angle(rng.normal(size=3), 0.1), truth.rotation),
                              truth.translation + rng.normal(0, 0.05, 3))
        pose = solve_pnp(obj, img, CAM, init)
        assert reprojection_rmse(obj, img, CAM, pose) < 1e-6


def test_pnp_errors(rng):
    truth, obj, img = pnp_instance(rng)
    with pytest.raises(InsufficientData):
        solve_pnp(obj[:3], img[:3], CAM, truth)
    behind = RigidTransform(IDENTITY_QUAT, [0, 0, -5])
    with pytest.raises(BehindCamera):
        solve_pnp(obj, img, CAM, behind)
    with pytest.raises(InvalidInput):
        PinholeCamera(0, 1, 0, 0)


def test_pnp_no_convergence_carries_best(rng):
    truth, obj, img = pnp_instance(rng)
    img = img + rng.normal(0, 2.0, size=img.shape)
    init = RigidTransform(truth.rotation, truth.translation + [0.2, 0, 0.3])
    with pytest.raises(NoConvergence) as info:
        solve_pnp(obj, img, CAM, init, max_iters=1)
    best = info.value.best
    assert reprojection_rmse(obj, img, CAM, best) <= reprojection_rmse(obj, img, CAM, init)


@given(st.integers(0, 2**31 - 1), st.floats(0.0, 3.0))
def test_pnp_never_worse_than_initial(seed, noise):
    rng = np.random.default_rng(seed)
    truth, obj, img = pnp_instance(rng)
    img = img + rng.normal(0, noise, size=img.shape)
    init = RigidTransform(quat_mul(quat_from_axis_angle(rng.normal(size=3), 0.3), truth.rotation),
                          truth.translation + rng.normal(0, 0.1, 3))
    try:
        pose = solve_pnp(obj, img, CAM, init)
    except NoConvergence as exc:
        pose = exc.best
    assert reprojection_rmse(obj, img, CAM, pose) <= reprojection_rmse(obj, img, CAM, init) + 1e-12


def test_fit_rigid_residual_non_increasing(rng):
    truth = random_transform(rng)
    P = rng.uniform(-1, 1, size=(30, 3))
    Q = truth.apply(P) + rng.normal(0, 0.05, size=P.shape)
    errs = [fit_rigid(P, Q, max_iters=k)[1] for k in range(1, 12)]
    assert all(b <= a + 1e-15 for a, b in zip(errs, errs[1:]))
