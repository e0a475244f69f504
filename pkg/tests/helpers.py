"""Small builders shared by the test modules."""
import numpy as np

from hrmap.core import FeatureSequence, Source, Trajectory
from hrmap.geometry import quat_from_axis_angle
from hrmap.mixup import Demo


def random_quats(rng, n):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def random_traj(rng, T, n_joints=2, source=Source.ROBOT, demo_id="d", dt=1 / 30):
    return Trajectory(rng.normal(size=(T, 3)), random_quats(rng, T), rng.normal(size=(T, n_joints)), dt,
                      source, demo_id)


def smooth_traj(rng, T, n_joints=2, source=Source.ROBOT, demo_id="d", dt=1 / 30):
    u = np.linspace(0, 1, T)[:, None]
    a, b = rng.normal(size=(2, 3))
    trans = a + (b - a) * u + 0.05 * np.sin(6 * u + rng.normal(size=3))
    ang = 0.5 * np.sin(3 * u[:, 0])
    axis = rng.normal(size=3)
    quats = np.stack([quat_from_axis_angle(axis, x) for x in ang])
    joints = np.cos(2 * u + rng.normal(size=n_joints))
    return Trajectory(trans, quats, joints, dt, source, demo_id)


def demo(rng, T, d_a=4, d_w=3, n_joints=2, source=Source.ROBOT, demo_id="d"):
    traj = random_traj(rng, T, n_joints, source, demo_id)
    agent = FeatureSequence(rng.normal(size=(T, d_a)), demo_id)
    wrist = FeatureSequence(rng.normal(size=(T, d_w)), demo_id) if source is Source.ROBOT else None
    return Demo(traj, agent, wrist)


# criterion number -> one-line PASS/FAIL verdict, filled by the acceptance tests
ACCEPTANCE = {}
