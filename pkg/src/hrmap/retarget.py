"""Keypoint retargeting onto a serial kinematic chain.

Position mode fits ``scale * p_i`` to the chain keypoints, vector mode fits
``scale * v_i`` to the rotated link vectors. Both add a ``smooth * |q - q_prev|^2``
penalty and keep ``q`` inside the joint box.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Source, Trajectory, low_pass
from .errors import DimensionMismatch, InvalidInput, NumericalFailure
from .geometry import IDENTITY_QUAT, quat_to_matrix

log = logging.getLogger(__name__)

FD_STEP = 1e-6


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    C = 1.0 - c
    return np.array(
        [
            [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
            [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
            [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
        ]
    )


@dataclass(frozen=True)
class KinematicChain:
    """Serial chain: joint ``i`` turns about ``axes[i]`` (in the frame of link
    ``i-1``), then link ``i`` extends ``lengths[i]`` along its local x axis."""

    axes: np.ndarray
    lengths: np.ndarray
    q_lower: np.ndarray
    q_upper: np.ndarray

    def __post_init__(self):
        axes = np.array(self.axes, dtype=float).reshape(-1, 3)
        n = len(axes)
        lengths = np.array(self.lengths, dtype=float).reshape(-1)
        lo = np.array(self.q_lower, dtype=float).reshape(-1)
        hi = np.array(self.q_upper, dtype=float).reshape(-1)
        if n == 0 or not (len(lengths) == len(lo) == len(hi) == n):
            raise DimensionMismatch("axes, lengths and joint bounds must have one entry per link")
        norms = np.linalg.norm(axes, axis=1)
        if np.any(norms == 0):
            raise InvalidInput("joint axes must be non-zero")
        if np.any(lengths <= 0):
            raise InvalidInput("link lengths must be positive")
        if np.any(lo > hi):
            raise InvalidInput("q_lower must not exceed q_upper")
        # leave unit axes untouched so JSON round trips are exact
        scale = np.where(np.abs(norms - 1.0) > 1e-12, norms, 1.0)
        object.__setattr__(self, "axes", axes / scale[:, None])
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "q_lower", lo)
        object.__setattr__(self, "q_upper", hi)

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self.q_lower + self.q_upper)

    def clip(self, q) -> np.ndarray:
        return np.clip(q, self.q_lower, self.q_upper)

    @classmethod
    def from_dict(cls, d: dict) -> "KinematicChain":
        try:
            links = d["links"]
            return cls([l["axis"] for l in links], [l["length"] for l in links], d["q_lower"], d["q_upper"])
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed chain description: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "links": [{"axis": a.tolist(), "length": float(l)} for a, l in zip(self.axes, self.lengths)],
            "q_lower": self.q_lower.tolist(),
            "q_upper": self.q_upper.tolist(),
        }

    @classmethod
    def read(cls, path) -> "KinematicChain":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def planar(cls, lengths, limit: float = np.pi) -> "KinematicChain":
        n = len(lengths)
        return cls([[0.0, 0.0, 1.0]] * n, lengths, [-limit] * n, [limit] * n)


def _fk(chain: KinematicChain, q) -> tuple[np.ndarray, np.ndarray]:
    """Keypoints (N, 3) and world-frame link vectors (N, 3), no clamping."""
    R = np.eye(3)
    p = np.zeros(3)
    pts = np.empty((chain.n, 3))
    vecs = np.empty((chain.n, 3))
    for i in range(chain.n):
        R = R @ _axis_rotation(chain.axes[i], q[i])
        v = R[:, 0] * chain.lengths[i]
        p = p + v
        pts[i] = p
        vecs[i] = v
    return pts, vecs


def forward_kinematics(chain: KinematicChain, q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if len(q) != chain.n:
        raise DimensionMismatch(f"chain has {chain.n} joints, got {len(q)} angles")
    clipped = chain.clip(q)
    if np.any(clipped != q):
        log.warning("joint angles outside bounds were clamped")
    return _fk(chain, clipped)[0]


@dataclass(frozen=True)
class RetargetConfig:
    scale: float = 1.0
    smooth: float = 0.0
    max_iters: int = 200
    tol: float = 1e-10

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise InvalidInput(f"scale must be positive, got {self.scale}")
        if not (np.isfinite(self.smooth) and self.smooth >= 0):
            raise InvalidInput(f"smooth must be non-negative, got {self.smooth}")
        if self.max_iters < 1 or not self.tol > 0:
            raise InvalidInput("max_iters must be >= 1 and tol > 0")


def _solve(chain, residual, q_prev, cfg: RetargetConfig) -> np.ndarray:
    """Projected Levenberg-Marquardt on ``|residual(q)|^2`` with central-difference Jacobians."""
    q = chain.clip(np.asarray(q_prev, dtype=float))
    r = residual(q)
    f = float(r @ r)
    if not np.isfinite(f):
        raise NumericalFailure("objective is not finite at the starting point")
    lam = 1e-3
    eye = np.eye(chain.n)
    for _ in range(cfg.max_iters):
        if f == 0.0:
            break
        J = np.empty((len(r), chain.n))
        for k in range(chain.n):
            dq = np.zeros(chain.n)
            dq[k] = FD_STEP
            J[:, k] = (residual(q + dq) - residual(q - dq)) / (2 * FD_STEP)
        A = J.T @ J
        g = J.T @ r
        accepted = False
        while lam < 1e12:
            q_new = chain.clip(q + np.linalg.solve(A + lam * eye, -g))
            r_new = residual(q_new)
            f_new = float(r_new @ r_new)
            if not np.isfinite(f_new):
                raise NumericalFailure("objective became non-finite")
            # ignore "improvements" at rounding-noise level
            if f_new < f * (1.0 - 1e-14):
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break
        step = np.linalg.norm(q_new - q)
        q, r, f = q_new, r_new, f_new
        lam = max(lam / 10.0, 1e-15)
        if step < cfg.tol:
            break
    return q


def objective_position(chain, targets, q, q_prev, cfg, weights=None) -> float:
    pts = _fk(chain, q)[0]
    w = np.ones(chain.n) if weights is None else np.asarray(weights, dtype=float)
    data = np.sum(w * np.sum((cfg.scale * targets - pts) ** 2, axis=1))
    return float(data + cfg.smooth * np.sum((q - q_prev) ** 2))


def objective_vector(chain, target_vectors, q, q_prev, cfg, frame_rotation=IDENTITY_QUAT) -> float:
    R = quat_to_matrix(frame_rotation)
    vecs = _fk(chain, q)[1] @ R.T
    data = np.sum((cfg.scale * target_vectors - vecs) ** 2)
    return float(data + cfg.smooth * np.sum((q - q_prev) ** 2))


def _check_targets(chain, targets, q_prev):
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (chain.n, 3):
        raise DimensionMismatch(f"expected ({chain.n}, 3) targets, got {targets.shape}")
    if not np.all(np.isfinite(targets)):
        raise InvalidInput("targets must be finite")
    q_prev = np.asarray(q_prev, dtype=float).reshape(-1)
    if len(q_prev) != chain.n:
        raise DimensionMismatch(f"q_prev must have {chain.n} entries")
    return targets, q_prev


def retarget_position(chain: KinematicChain, targets, q_prev, cfg: RetargetConfig = RetargetConfig(),
                      weights=None) -> np.ndarray:
    """Joint angles whose keypoints best match ``cfg.scale * targets``.

    ``weights`` optionally weights each keypoint's squared error (default
    uniform). The solve starts at ``q_prev`` and only accepts descending
    steps, so the objective never ends above its value at ``q_prev``.
    """
    targets, q_prev = _check_targets(chain, targets, q_prev)
    sw = np.ones(chain.n) if weights is None else np.sqrt(np.asarray(weights, dtype=float))
    sb = np.sqrt(cfg.smooth)
    goal = cfg.scale * targets
    q_ref = chain.clip(q_prev)

    def residual(q):
        pts = _fk(chain, q)[0]
        return np.concatenate([((goal - pts) * sw[:, None]).reshape(-1), sb * (q - q_ref)])

    return _solve(chain, residual, q_ref, cfg)


def retarget_vector(chain: KinematicChain, target_vectors, q_prev, cfg: RetargetConfig = RetargetConfig(),
                    frame_rotation=IDENTITY_QUAT) -> np.ndarray:
    """Joint angles whose link vectors, rotated by ``frame_rotation``, follow ``target_vectors``."""
    target_vectors, q_prev = _check_targets(chain, target_vectors, q_prev)
    R = quat_to_matrix(frame_rotation)
    goal = cfg.scale * target_vectors
    sb = np.sqrt(cfg.smooth)
    q_ref = chain.clip(q_prev)

    def residual(q):
        vecs = _fk(chain, q)[1] @ R.T
        return np.concatenate([(goal - vecs).reshape(-1), sb * (q - q_ref)])

    return _solve(chain, residual, q_ref, cfg)


def retarget_trajectory(chain: KinematicChain, keypoint_traj, cfg: RetargetConfig = RetargetConfig(),
                        mode: str = "position", smoothing: float = 0.2, dt: float = 1.0 / 30.0,
                        base_translations=None, base_quaternions=None, frame_rotation=IDENTITY_QUAT,
                        demo_id: str = "", source=Source.HUMAN) -> Trajectory:
    """Retarget a keypoint sequence frame by frame with warm starts.

    Keypoints are first low-pass filtered with ``smoothing`` (1.0 disables
    it). Frame 0 starts from mid-range joints, every later frame from the
    previous solution.
    """
    kp = np.asarray(keypoint_traj, dtype=float)
    if kp.ndim != 3 or kp.shape[1:] != (chain.n, 3) or len(kp) < 1:
        raise DimensionMismatch(f"expected (T, {chain.n}, 3) keypoints, got {kp.shape}")
    if mode not in ("position", "vector"):
        raise InvalidInput(f"mode must be 'position' or 'vector', got {mode!r}")
    T = len(kp)
    kp = low_pass(kp.reshape(T, -1), smoothing).reshape(T, chain.n, 3)
    qs = np.empty((T, chain.n))
    q = chain.mid
    for t in range(T):
        if mode == "position":
            q = retarget_position(chain, kp[t], q, cfg)
        else:
            q = retarget_vector(chain, kp[t], q, cfg, frame_rotation)
        qs[t] = q
    trans = np.zeros((T, 3)) if base_translations is None else base_translations
    quats = np.tile(IDENTITY_QUAT, (T, 1)) if base_quaternions is None else base_quaternions
    return Trajectory(trans, quats, qs, dt, source, demo_id)
