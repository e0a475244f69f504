"""Frame distances used to build DTW cost matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ActionFrame, FeatureSequence, Trajectory
from .errors import DimensionMismatch, InvalidInput
from .geometry import rot_distance_matrix


@dataclass(frozen=True)
class ActionDistanceWeights:
    lambda1: float = 1.0  # hand pose
    lambda2: float = 0.5  # orientation

    def __post_init__(self):
        for name in ("lambda1", "lambda2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise InvalidInput(f"{name} must be finite and non-negative, got {v}")


@dataclass(frozen=True)
class ActionMetric:
    weights: ActionDistanceWeights = ActionDistanceWeights()
    name = "action"


@dataclass(frozen=True)
class VisualMetric:
    name = "visual"


def _action_cost(ta, qa, ja, tb, qb, jb, w: ActionDistanceWeights) -> np.ndarray:
    if ja.shape[1] != jb.shape[1]:
        raise DimensionMismatch(f"joint dimensions differ: {ja.shape[1]} vs {jb.shape[1]}")
    cost = np.abs(ta[:, None, :] - tb[None, :, :]).sum(axis=-1)
    if ja.shape[1]:
        cost = cost + w.lambda1 * np.abs(ja[:, None, :] - jb[None, :, :]).sum(axis=-1)
    return cost + w.lambda2 * rot_distance_matrix(qa, qb)


def d_act(h: ActionFrame, r: ActionFrame, w: ActionDistanceWeights = ActionDistanceWeights()) -> float:
    """``|t_h - t_r|_1 + lambda1 |p_h - p_r|_1 + lambda2 * angle(o_h, o_r)``."""
    return float(
        _action_cost(
            h.translation[None], h.orientation[None], h.joints[None],
            r.translation[None], r.orientation[None], r.joints[None], w,
        )[0, 0]
    )


def d_vis(f1, f2) -> float:
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    if f1.shape != f2.shape:
        raise DimensionMismatch(f"feature dimensions differ: {f1.shape} vs {f2.shape}")
    return float(np.sqrt(np.sum((f1 - f2) ** 2)))


def _rows(x) -> np.ndarray:
    if isinstance(x, FeatureSequence):
        return x.rows
    if isinstance(x, Trajectory):
        raise InvalidInput("visual metric needs feature sequences, got a trajectory")
    return np.atleast_2d(np.asarray(x, dtype=float))


def cost_matrix(a, b, metric=ActionMetric(), block: int = 256) -> np.ndarray:
    """Pairwise frame distances, shape ``(len(a), len(b))``.

    ``a``/``b`` are trajectories for :class:`ActionMetric` and feature
    sequences (or 2-D arrays) for :class:`VisualMetric`. Rows are evaluated in
    blocks of ``block`` to bound memory; each entry depends only on its own
    pair of frames, so blocking does not change the result.
    """
    if isinstance(metric, ActionMetric):
        if not (isinstance(a, Trajectory) and isinstance(b, Trajectory)):
            raise InvalidInput("action metric needs trajectories")
        out = np.empty((len(a), len(b)))
        for s in range(0, len(a), block):
            e = min(s + block, len(a))
            out[s:e] = _action_cost(
                a.translations[s:e], a.quaternions[s:e], a.joints[s:e],
                b.translations, b.quaternions, b.joints, metric.weights,
            )
        return out
    if isinstance(metric, VisualMetric):
        ra, rb = _rows(a), _rows(b)
        if ra.shape[1] != rb.shape[1]:
            raise DimensionMismatch(f"feature dimensions differ: {ra.shape[1]} vs {rb.shape[1]}")
        out = np.empty((len(ra), len(rb)))
        for s in range(0, len(ra), block):
            e = min(s + block, len(ra))
            diff = ra[s:e, None, :] - rb[None, :, :]
            out[s:e] = np.sqrt(np.sum(diff * diff, axis=-1))
        return out
    raise InvalidInput(f"unknown metric {metric!r}")
