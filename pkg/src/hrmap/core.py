"""Trajectory data model and the time-base utilities shared by the other modules."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidInput, NotCovered, OutOfRange
from .geometry import IDENTITY_QUAT, quat_normalize, slerp


class Source(str, enum.Enum):
    HUMAN = "human"
    ROBOT = "robot"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _finite(name: str, a: np.ndarray):
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} has non-finite values")


@dataclass(frozen=True)
class ActionFrame:
    """End-effector state at one timestep: position, orientation and hand joints."""

    translation: np.ndarray
    orientation: np.ndarray
    joints: np.ndarray

    def __post_init__(self):
        t = np.array(self.translation, dtype=float).reshape(3)
        q = np.array(self.orientation, dtype=float).reshape(4)
        j = np.array(self.joints, dtype=float).reshape(-1)
        for name, a in (("translation", t), ("orientation", q), ("joints", j)):
            _finite(name, a)
        object.__setattr__(self, "translation", _frozen(t))
        object.__setattr__(self, "orientation", _frozen(quat_normalize(q)))
        object.__setattr__(self, "joints", _frozen(j))

    def vector(self) -> np.ndarray:
        """Flat ``[translation, quaternion, joints]`` action vector."""
        return np.concatenate([self.translation, self.orientation, self.joints])


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled sequence of action frames stored column-wise.

    ``translations`` is (T, 3), ``quaternions`` (T, 4) and ``joints`` (T, J).
    """

    translations: np.ndarray
    quaternions: np.ndarray
    joints: np.ndarray
    dt: float
    source: Source = Source.ROBOT
    demo_id: str = ""

    def __post_init__(self):
        t = np.array(self.translations, dtype=float)
        if t.ndim != 2 or t.shape[1] != 3 or len(t) < 1:
            raise InvalidInput(f"translations must be (T>=1, 3), got {t.shape}")
        T = len(t)
        q = np.array(self.quaternions, dtype=float)
        if q.shape != (T, 4):
            raise InvalidInput(f"quaternions must be ({T}, 4), got {q.shape}")
        j = np.array(self.joints, dtype=float)
        if j.ndim == 1 and j.size == 0:
            j = j.reshape(T, 0)
        if j.ndim != 2 or len(j) != T:
            raise InvalidInput(f"joints must be ({T}, J), got {j.shape}")
        for name, a in (("translations", t), ("quaternions", q), ("joints", j)):
            _finite(name, a)
        dt = float(self.dt)
        if not (math.isfinite(dt) and dt > 0):
            raise InvalidInput(f"dt must be positive and finite, got {self.dt}")
        object.__setattr__(self, "translations", _frozen(t))
        object.__setattr__(self, "quaternions", _frozen(quat_normalize(q)))
        object.__setattr__(self, "joints", _frozen(j))
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "source", Source(self.source))
        object.__setattr__(self, "demo_id", str(self.demo_id))

    @classmethod
    def from_frames(cls, frames: Sequence[ActionFrame], dt: float, source=Source.ROBOT, demo_id: str = ""):
        if not frames:
            raise InvalidInput("trajectory needs at least one frame")
        dims = {f.joints.shape[0] for f in frames}
        if len(dims) != 1:
            raise InvalidInput(f"frames disagree on joint dimension: {sorted(dims)}")
        return cls(
            np.stack([f.translation for f in frames]),
            np.stack([f.orientation for f in frames]),
            np.stack([f.joints for f in frames]),
            dt,
            source,
            demo_id,
        )

    def __len__(self) -> int:
        return len(self.translations)

    @property
    def n_joints(self) -> int:
        return self.joints.shape[1]

    @property
    def duration(self) -> float:
        return self.dt * (len(self) - 1)

    def frame(self, i: int) -> ActionFrame:
        return ActionFrame(self.translations[i], self.quaternions[i], self.joints[i])

    @property
    def frames(self) -> list[ActionFrame]:
        return [self.frame(i) for i in range(len(self))]

    def __iter__(self) -> Iterator[ActionFrame]:
        return iter(self.frames)

    def action_vectors(self) -> np.ndarray:
        """(T, 7 + J) array of ``[translation, quaternion, joints]`` rows."""
        return np.concatenate([self.translations, self.quaternions, self.joints], axis=1)

    def take(self, indices, dt: float | None = None) -> "Trajectory":
        idx = np.asarray(indices, dtype=int)
        return Trajectory(
            self.translations[idx],
            self.quaternions[idx],
            self.joints[idx],
            self.dt if dt is None else dt,
            self.source,
            self.demo_id,
        )


@dataclass(frozen=True)
class FeatureSequence:
    """Per-frame feature vectors, (T, d)."""

    rows: np.ndarray
    demo_id: str = ""

    def __post_init__(self):
        r = np.array(self.rows, dtype=float)
        if r.ndim != 2 or r.shape[0] < 1 or r.shape[1] < 1:
            raise InvalidInput(f"feature rows must be (T>=1, d>=1), got {r.shape}")
        _finite("features", r)
        object.__setattr__(self, "rows", _frozen(r))
        object.__setattr__(self, "demo_id", str(self.demo_id))

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def compute_gamma(human_durations, robot_durations) -> float:
    """Ratio of mean robot demo duration to mean human demo duration."""
    h = np.asarray(human_durations, dtype=float).reshape(-1)
    r = np.asarray(robot_durations, dtype=float).reshape(-1)
    if h.size == 0 or r.size == 0:
        raise InvalidInput("duration lists must be non-empty")
    if not (np.all(np.isfinite(h)) and np.all(np.isfinite(r))) or np.any(h <= 0) or np.any(r <= 0):
        raise InvalidInput("durations must be positive and finite")
    return float(r.mean() / h.mean())


def subsample(traj: Trajectory, gamma: float, k: int) -> Trajectory:
    """``k`` frames at indices ``round(i * gamma)``; ``dt`` is scaled by ``gamma``."""
    if not (gamma > 0 and math.isfinite(gamma)) or k < 1:
        raise InvalidInput(f"need gamma > 0 and k >= 1, got gamma={gamma}, k={k}")
    idx = [_round_half_up(i * gamma) for i in range(k)]
    if idx[-1] >= len(traj):
        raise OutOfRange(f"window of {k} frames at rate {gamma} needs index {idx[-1]} but T={len(traj)}")
    return traj.take(idx, dt=traj.dt * gamma)


def resample_indices(n: int, gamma: float) -> list[int]:
    """Frame indices kept when a length-``n`` sequence is resampled at spacing ``gamma``."""
    if not (gamma > 0 and math.isfinite(gamma)):
        raise InvalidInput(f"gamma must be positive, got {gamma}")
    if n < 1:
        raise InvalidInput("cannot resample an empty sequence")
    k = int(math.floor((n - 1) / gamma + 1e-12)) + 1
    idx = [_round_half_up(i * gamma) for i in range(k)]
    # rounding can step one past the end when gamma does not divide n - 1
    while idx[-1] >= n:
        idx.pop()
    return idx


def resample(traj: Trajectory, gamma: float) -> Trajectory:
    """Subsample the whole trajectory at spacing ``gamma``."""
    idx = resample_indices(len(traj), gamma)
    return traj.take(idx, dt=traj.dt * gamma)


def upsample(actions: Sequence[ActionFrame] | Trajectory, gamma: float) -> list[ActionFrame]:
    """Stretch a ``k``-frame action chunk to ``round(gamma * k)`` frames.

    Output frame ``m`` samples the chunk at fractional position
    ``min(m / gamma, k - 1)``: linear interpolation for translation and joints,
    slerp for orientation. Positions past the last frame hold it, and the
    final output frame is always the last input frame, so both endpoints are
    reproduced exactly.
    """
    frames = actions.frames if isinstance(actions, Trajectory) else list(actions)
    k = len(frames)
    if k < 2:
        raise InvalidInput("upsampling needs at least two frames")
    if not (gamma >= 1 and math.isfinite(gamma)):
        raise InvalidInput(f"upsample rate must be >= 1, got {gamma}")
    n_out = _round_half_up(gamma * k)
    out = []
    for m in range(n_out):
        u = k - 1.0 if m == n_out - 1 else min(m / gamma, k - 1.0)
        i = min(int(math.floor(u)), k - 2)
        f = u - i
        a, b = frames[i], frames[i + 1]
        if f == 0.0:
            out.append(a)
        elif f == 1.0:
            out.append(b)
        else:
            out.append(
                ActionFrame(
                    a.translation + f * (b.translation - a.translation),
                    slerp(a.orientation, b.orientation, f),
                    a.joints + f * (b.joints - a.joints),
                )
            )
    return out


def low_pass(seq, smoothing: float = 0.2) -> np.ndarray:
    """First-order exponential smoother ``y_t = s x_t + (1 - s) y_{t-1}``, ``y_0 = x_0``."""
    if not (0.0 < smoothing <= 1.0):
        raise InvalidInput(f"smoothing must lie in (0, 1], got {smoothing}")
    x = np.asarray(seq, dtype=float)
    if x.shape[0] < 1:
        raise InvalidInput("low_pass needs at least one sample")
    if smoothing == 1.0:
        return x.copy()
    y = np.empty_like(x)
    y[0] = x[0]
    for t in range(1, len(x)):
        y[t] = smoothing * x[t] + (1.0 - smoothing) * y[t - 1]
    return y


def temporal_ensemble(predictions, query_step: int, decay: float = 0.1) -> ActionFrame:
    """Blend overlapping action chunks at ``query_step``.

    ``predictions`` is a sequence of ``(start_step, frames)``; chunk frame ``i``
    is the action for step ``start_step + i``. Each covering chunk is weighted
    by ``exp(-decay * (query_step - start_step))``. Orientations are
    sign-aligned to the heaviest contributor before the weighted chordal mean.
    """
    if not decay > 0:
        raise InvalidInput(f"decay must be positive, got {decay}")
    covering = []
    for start, frames in predictions:
        age = query_step - start
        if 0 <= age < len(frames):
            covering.append((age, frames[age]))
    if not covering:
        raise NotCovered(f"no prediction covers step {query_step}")
    if len(covering) == 1:
        return covering[0][1]
    w = np.array([math.exp(-decay * age) for age, _ in covering])
    w = w / w.sum()
    trans = sum(wi * f.translation for wi, (_, f) in zip(w, covering))
    joints = sum(wi * f.joints for wi, (_, f) in zip(w, covering))
    ref = covering[int(np.argmax(w))][1].orientation
    quat = np.zeros(4)
    for wi, (_, f) in zip(w, covering):
        q = f.orientation
        quat += wi * (q if np.dot(q, ref) >= 0 else -q)
    if np.linalg.norm(quat) == 0:
        quat = IDENTITY_QUAT
    return ActionFrame(trans, quat / np.linalg.norm(quat), joints)
