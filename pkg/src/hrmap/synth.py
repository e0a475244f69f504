"""Synthetic instances with known ground truth."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureSequence, Source, Trajectory
from .errors import InvalidInput
from .geometry import RigidTransform, quat_from_axis_angle, quat_mul
from .mixup import Demo


def min_jerk_profile(u) -> np.ndarray:
    """Normalized minimum-jerk position ``10u^3 - 15u^4 + 6u^5``."""
    u = np.asarray(u, dtype=float)
    return u**3 * (10.0 - 15.0 * u + 6.0 * u * u)


def min_jerk_speed(u) -> np.ndarray:
    """Derivative of :func:`min_jerk_profile`, ``30 u^2 (1-u)^2``."""
    u = np.asarray(u, dtype=float)
    return 30.0 * u * u * (1.0 - u) ** 2


@dataclass(frozen=True)
class MinJerk:
    start: tuple = (0.0, 0.0, 0.0)
    end: tuple = (0.3, 0.0, 0.0)
    T: int = 200
    dt: float = 1.0 / 30.0
    n_joints: int = 0
    seed: int = 0


@dataclass(frozen=True)
class PlantedSegments:
    """Copies of one robot motion planted in a long, unrelated human motion.

    ``segments`` lists ``(offset, noise_sigma)``; the noise is added to the
    planted translations; ``feature_noise`` is added to the planted visual
    features.
    """

    base_len: int = 600
    segments: tuple = ((60, 0.0), (260, 0.0), (450, 0.0))
    query_len: int = 40
    n_joints: int = 2
    feature_dim: int = 16
    feature_noise: float = 0.02
    seed: int = 0


@dataclass(frozen=True)
class RigidScene:
    n_points: int = 20
    rotation_angle: float | None = None  # random in [0, pi) when None
    translation: tuple | None = None  # random in [-1, 1)^3 when None
    noise_sigma: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class FeatureBlob:
    T: int = 100
    d: int = 16
    cluster_count: int = 4
    spread: float = 0.05
    seed: int = 0


@dataclass(frozen=True)
class DemoSet:
    """Human and robot demos of one task with random timing and small noise.

    Robot demos carry agent and wrist features, human demos agent features only.
    """

    n_humans: int = 3
    n_robots: int = 2
    length: int = 40
    length_jitter: int = 8
    n_joints: int = 2
    feature_dim: int = 8
    noise: float = 0.005
    seed: int = 0


def _smooth_curve(rng, T: int, dim: int, amp: float, n_waves: int = 3) -> np.ndarray:
    u = np.linspace(0.0, 1.0, T)[:, None]
    out = np.zeros((T, dim))
    for _ in range(n_waves):
        f = rng.uniform(0.3, 1.5, size=dim)
        ph = rng.uniform(0, 2 * np.pi, size=dim)
        out += rng.uniform(0.3, 1.0, size=dim) * np.sin(2 * np.pi * f * u + ph)
    return amp * out / n_waves


def _rotating_quats(rng, T: int, max_angle: float) -> np.ndarray:
    axis = rng.normal(size=3)
    base = quat_from_axis_angle(rng.normal(size=3), rng.uniform(0, np.pi))
    angles = max_angle * np.sin(np.linspace(0, np.pi, T) * rng.uniform(0.5, 1.5))
    return np.stack([quat_mul(base, quat_from_axis_angle(axis, a)) for a in angles])


def _gen_minjerk(params: MinJerk):
    if params.T < 2:
        raise InvalidInput("MinJerk needs T >= 2")
    u = np.linspace(0.0, 1.0, params.T)
    s, e = np.asarray(params.start, float), np.asarray(params.end, float)
    trans = s + (e - s) * min_jerk_profile(u)[:, None]
    traj = Trajectory(trans, np.tile([1.0, 0, 0, 0], (params.T, 1)), np.zeros((params.T, params.n_joints)),
                      params.dt, Source.ROBOT, f"minjerk{params.seed}")
    return traj, {"start": s.tolist(), "end": e.tolist(), "T": params.T, "duration": params.dt * (params.T - 1)}


def _gen_planted(params: PlantedSegments):
    rng = np.random.default_rng(params.seed)
    Tq, Th = params.query_len, params.base_len
    if Tq < 1 or Th < 1:
        raise InvalidInput("lengths must be >= 1")
    spans = sorted((int(o), int(o) + Tq - 1, float(sig)) for o, sig in params.segments)
    for (s0, e0, _), (s1, _, _) in zip(spans, spans[1:]):
        if s1 <= e0:
            raise InvalidInput("planted segments overlap")
    if spans and (spans[0][0] < 0 or spans[-1][1] >= Th):
        raise InvalidInput("planted segment outside the base sequence")
    if any(sig < 0 for _, _, sig in spans):
        raise InvalidInput("noise sigma must be non-negative")

    q_trans = np.array([0.4, 0.0, 0.3]) + _smooth_curve(rng, Tq, 3, 0.15)
    q_quat = _rotating_quats(rng, Tq, 0.8)
    q_joint = 0.6 + _smooth_curve(rng, Tq, params.n_joints, 0.5)
    q_feat = _smooth_curve(rng, Tq, params.feature_dim, 1.0)
    robot = Trajectory(q_trans, q_quat, q_joint, 1.0 / 30.0, Source.ROBOT, "robot")

    # background lives in a distant region of both action and feature space
    h_trans = np.array([2.0, 2.0, 0.3]) + _smooth_curve(rng, Th, 3, 0.3, n_waves=6)
    h_quat = _rotating_quats(rng, Th, 2.0)
    h_joint = -0.6 + _smooth_curve(rng, Th, params.n_joints, 0.5, n_waves=6)
    h_feat = 3.0 + _smooth_curve(rng, Th, params.feature_dim, 1.0, n_waves=6)
    for s, e, sig in spans:
        h_trans[s : e + 1] = q_trans + (rng.normal(0.0, sig, size=(Tq, 3)) if sig > 0 else 0.0)
        h_quat[s : e + 1] = q_quat
        h_joint[s : e + 1] = q_joint
        fn = params.feature_noise
        h_feat[s : e + 1] = q_feat + (rng.normal(0.0, fn, size=q_feat.shape) if fn > 0 else 0.0)
    human = Trajectory(h_trans, h_quat, h_joint, 1.0 / 30.0, Source.HUMAN, "human")
    data = {
        "human": human,
        "robot": robot,
        "human_features": FeatureSequence(h_feat, "human"),
        "robot_features": FeatureSequence(q_feat, "robot"),
    }
    return data, {"spans": [(s, e) for s, e, _ in spans]}


def _gen_rigid(params: RigidScene):
    rng = np.random.default_rng(params.seed)
    if params.n_points < 1:
        raise InvalidInput("n_points must be >= 1")
    angle = rng.uniform(0, np.pi) if params.rotation_angle is None else params.rotation_angle
    trans = rng.uniform(-1, 1, size=3) if params.translation is None else np.asarray(params.translation, float)
    truth = RigidTransform(quat_from_axis_angle(rng.normal(size=3), angle), trans)
    cam = rng.uniform(-1, 1, size=(params.n_points, 3))
    rob = truth.apply(cam)
    if params.noise_sigma > 0:
        rob = rob + rng.normal(0.0, params.noise_sigma, size=rob.shape)
    return {"cam_points": cam, "rob_points": rob}, {"transform": truth}


def _gen_blob(params: FeatureBlob):
    rng = np.random.default_rng(params.seed)
    if params.T < 1 or params.d < 1 or params.cluster_count < 1:
        raise InvalidInput("T, d and cluster_count must be >= 1")
    centres = rng.normal(0.0, 1.0, size=(params.cluster_count, params.d))
    cuts = np.sort(rng.choice(np.arange(1, params.T), size=min(params.cluster_count - 1, params.T - 1), replace=False))
    labels = np.zeros(params.T, dtype=int)
    for c, cut in enumerate(cuts, 1):
        labels[cut:] = c
    rows = centres[labels] + rng.normal(0.0, params.spread, size=(params.T, params.d))
    return FeatureSequence(rows, f"blob{params.seed}"), {"labels": labels.tolist(), "centres": centres}


def _warp(base: np.ndarray, T: int, rng) -> np.ndarray:
    """Resample ``base`` (T0, d) at T monotone, randomly warped phases."""
    inc = rng.uniform(0.5, 1.5, size=T - 1)
    phase = np.concatenate([[0.0], np.cumsum(inc)])
    phase = phase / phase[-1] * (len(base) - 1)
    grid = np.arange(len(base))
    return np.stack([np.interp(phase, grid, base[:, c]) for c in range(base.shape[1])], axis=1)


def _gen_demos(params: DemoSet):
    rng = np.random.default_rng(params.seed)
    if params.n_humans < 1 or params.n_robots < 1 or params.length < 2:
        raise InvalidInput("need at least one demo of each kind and length >= 2")
    T0 = 4 * params.length
    trans = np.array([0.4, 0.0, 0.3]) + _smooth_curve(rng, T0, 3, 0.15)
    angle = _smooth_curve(rng, T0, 1, 0.8)
    joints = 0.6 + _smooth_curve(rng, T0, params.n_joints, 0.5)
    agent = _smooth_curve(rng, T0, params.feature_dim, 1.0)
    wrist = _smooth_curve(rng, T0, params.feature_dim, 1.0)
    axis = rng.normal(size=3)
    base = np.concatenate([trans, angle, joints, agent, wrist], axis=1)
    out = {"humans": [], "robots": []}
    for kind, n in (("human", params.n_humans), ("robot", params.n_robots)):
        for i in range(n):
            lo, hi = max(2, params.length - params.length_jitter), params.length + params.length_jitter
            T = int(rng.integers(lo, hi + 1))
            w = _warp(base, T, rng)
            w = w + rng.normal(0.0, params.noise, size=w.shape)
            quats = np.stack([quat_from_axis_angle(axis, a) for a in w[:, 3]])
            nj, d = params.n_joints, params.feature_dim
            traj = Trajectory(w[:, :3], quats, w[:, 4 : 4 + nj], 1.0 / 30.0, Source(kind), f"{kind}{i}")
            feats = FeatureSequence(w[:, 4 + nj : 4 + nj + d], traj.demo_id)
            wrist = FeatureSequence(w[:, 4 + nj + d :], traj.demo_id) if kind == "robot" else None
            out[kind + "s"].append(Demo(traj, feats, wrist))
    return out, {"base_length": T0}


def generate(params):
    """Return ``(data, ground_truth)`` for a params; a pure function of the params and its seed."""
    if isinstance(params, MinJerk):
        return _gen_minjerk(params)
    if isinstance(params, PlantedSegments):
        return _gen_planted(params)
    if isinstance(params, RigidScene):
        return _gen_rigid(params)
    if isinstance(params, FeatureBlob):
        return _gen_blob(params)
    if isinstance(params, DemoSet):
        return _gen_demos(params)
    raise InvalidInput(f"unknown synth params {params!r}")


def disturb(x, mode: str, sigma: float, seed: int = 0):
    """Add seeded Gaussian noise.

    ``mode="visual"`` perturbs every entry of a :class:`FeatureSequence`;
    ``mode="action"`` perturbs the translations and joints of a
    :class:`Trajectory`.
    """
    if sigma < 0:
        raise InvalidInput("sigma must be non-negative")
    rng = np.random.default_rng(seed)
    if mode == "visual":
        if not isinstance(x, FeatureSequence):
            raise InvalidInput("visual disturbance applies to feature sequences")
        if sigma == 0:
            return x
        return FeatureSequence(x.rows + rng.normal(0.0, sigma, size=x.rows.shape), x.demo_id)
    if mode == "action":
        if not isinstance(x, Trajectory):
            raise InvalidInput("action disturbance applies to trajectories")
        if sigma == 0:
            return x
        return Trajectory(
            x.translations + rng.normal(0.0, sigma, size=x.translations.shape),
            x.quaternions,
            x.joints + rng.normal(0.0, sigma, size=x.joints.shape),
            x.dt, x.source, x.demo_id,
        )
    raise InvalidInput(f"unknown disturbance mode {mode!r}")
