"""Quaternion algebra, rigid transforms, point-set calibration and PnP refinement.

Quaternions are ``[w, x, y, z]``, right-handed, and describe active rotations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BehindCamera,
    Degenerate,
    InsufficientData,
    InvalidInput,
    NoConvergence,
)

IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


def _as_quat(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 4:
        raise InvalidInput(f"quaternion must have 4 components, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise InvalidInput("quaternion has non-finite components")
    return q


def quat_normalize(q) -> np.ndarray:
    """Normalize along the last axis.

    Rows already within 1e-12 of unit norm are returned untouched so that
    repeated normalization is bit-stable.
    """
    q = np.array(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise InvalidInput("zero-norm quaternion")
    fix = np.abs(n - 1.0) > 1e-12
    return np.where(fix, q / n, q)


def quat_conj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_mul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w1, x1, y1, z1 = np.moveaxis(a, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0:
        raise InvalidInput("rotation axis must be non-zero")
    axis = axis / n
    return np.concatenate([[np.cos(angle / 2.0)], np.sin(angle / 2.0) * axis])


def quat_from_rotvec(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v)
    if theta < 1e-8:
        # second-order series of cos/sinc keeps tiny increments accurate
        return quat_normalize(np.concatenate([[1.0 - theta**2 / 8.0], 0.5 * v]))
    return np.concatenate([[np.cos(theta / 2.0)], np.sin(theta / 2.0) / theta * v])


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(R) -> np.ndarray:
    """Shepperd's method; returns the representative with ``w >= 0``."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0:
        s = 2.0 * np.sqrt(tr + 1.0)
        q = [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
    elif R[1, 1] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
    else:
        s = 2.0 * np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
    q = np.asarray(q)
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


def rot_distance_matrix(qa, qb) -> np.ndarray:
    """Pairwise geodesic angles between rows of ``qa`` (n, 4) and ``qb`` (m, 4).

    Evaluated as ``2*atan2(|vec(conj(a) b)|, |<a, b>|)``, which equals
    ``2*acos(|<a, b>|)`` for unit quaternions but is exactly zero for equal
    inputs and well conditioned near 0 and pi.
    """
    qa = np.asarray(qa, dtype=float)
    qb = np.asarray(qb, dtype=float)
    wa, va = qa[:, None, 0], qa[:, None, 1:]
    wb, vb = qb[None, :, 0], qb[None, :, 1:]
    dot = wa * wb + np.sum(va * vb, axis=-1)
    vec = wa[..., None] * vb - wb[..., None] * va - np.cross(va, vb)
    return 2.0 * np.arctan2(np.linalg.norm(vec, axis=-1), np.abs(dot))


def rot_distance_rows(qa, qb) -> np.ndarray:
    """Element-wise angles between matching rows of two (n, 4) arrays."""
    qa = np.asarray(qa, dtype=float)
    qb = np.asarray(qb, dtype=float)
    wa, va = qa[:, 0], qa[:, 1:]
    wb, vb = qb[:, 0], qb[:, 1:]
    dot = wa * wb + np.sum(va * vb, axis=-1)
    vec = wa[:, None] * vb - wb[:, None] * va - np.cross(va, vb)
    return 2.0 * np.arctan2(np.linalg.norm(vec, axis=-1), np.abs(dot))


def rot_distance(q1, q2) -> float:
    """Angle in radians, in ``[0, pi]``, of the rotation taking ``q1`` to ``q2``."""
    q1 = _as_quat(q1)
    q2 = _as_quat(q2)
    return float(rot_distance_matrix(q1[None], q2[None])[0, 0])


def slerp(q0, q1, u: float) -> np.ndarray:
    """Shortest-arc spherical interpolation; ``u=0`` gives ``q0`` and ``u=1`` gives ``q1``."""
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    if u == 0.0:
        return q0.copy()
    dot = float(np.dot(q0, q1))
    if dot < 0.0:
        q1 = -q1
        dot = -dot
    if u == 1.0:
        return q1.copy()
    if dot > 1.0 - 1e-12:
        out = q0 + u * (q1 - q0)
        return out / np.linalg.norm(out)
    theta = np.arccos(min(dot, 1.0))
    s = np.sin(theta)
    return (np.sin((1.0 - u) * theta) * q0 + np.sin(u * theta) * q1) / s


def skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen=True)
class RigidTransform:
    """Rotation followed by translation: ``x -> R x + t``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        q = quat_normalize(_as_quat(self.rotation).reshape(4))
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not np.all(np.isfinite(t)):
            raise InvalidInput("translation has non-finite components")
        q.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(IDENTITY_QUAT, np.zeros(3))

    @classmethod
    def from_matrix(cls, T) -> "RigidTransform":
        T = np.asarray(T, dtype=float)
        return cls(matrix_to_quat(T[:3, :3]), T[:3, 3])

    @property
    def R(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.R
        T[:3, 3] = self.translation
        return T

    def apply(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return points @ self.R.T + self.translation

    def inverse(self) -> "RigidTransform":
        q_inv = quat_conj(self.rotation)
        return RigidTransform(q_inv, -(quat_to_matrix(q_inv) @ self.translation))

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return compose(self, other)

    def to_dict(self) -> dict:
        return {"quaternion": self.rotation.tolist(), "translation": self.translation.tolist()}


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Transform equivalent to applying ``b`` first, then ``a``."""
    q = quat_mul(a.rotation, b.rotation)
    t = a.R @ b.translation + a.translation
    return RigidTransform(q, t)


def _check_pairs(P, Q, min_n: int):
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3 or P.shape != Q.shape:
        raise InvalidInput(f"expected two (N, 3) arrays of equal shape, got {P.shape} and {Q.shape}")
    if len(P) < min_n:
        raise InsufficientData(f"need at least {min_n} correspondences, got {len(P)}")
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(Q))):
        raise InvalidInput("non-finite point coordinates")
    return P, Q


def fit_rigid(cam_points, rob_points, max_iters: int = 200, tol: float = 1e-12):
    """Least-squares rigid fit ``rob ~ R cam + t`` by damped Gauss-Newton.

    The rotation is carried as a unit quaternion updated multiplicatively by a
    3-vector increment and renormalized after every accepted step. Damping
    starts at 1e-3, is multiplied by 10 on a rejected step and divided by 10 on
    an accepted one, so the residual never increases.

    Returns
    -------
    transform : RigidTransform
    rmse : float
        Root mean square over all residual coordinates,
        ``sqrt(sum ||r_i||^2 / (3 N))``.
    """
    P, Q = _check_pairs(cam_points, rob_points, 3)
    Pc = P - P.mean(axis=0)
    sv = np.linalg.svd(Pc, compute_uv=False)
    if sv[0] == 0.0 or sv[1] <= 1e-9 * sv[0]:
        raise Degenerate("camera points are collinear or coincident")

    q = IDENTITY_QUAT.copy()
    t = Q.mean(axis=0) - P.mean(axis=0)

    def residual(q, t):
        return Q - (P @ quat_to_matrix(q).T + t)

    r = residual(q, t)
    cost = float(np.sum(r * r))
    lam = 1e-3
    n = len(P)
    for _ in range(max_iters):
        if cost == 0.0:
            break
        R = quat_to_matrix(q)
        J = np.zeros((3 * n, 6))
        for i in range(n):
            J[3 * i : 3 * i + 3, :3] = R @ skew(P[i])
            J[3 * i : 3 * i + 3, 3:] = -np.eye(3)
        rf = r.reshape(-1)
        A = J.T @ J
        g = J.T @ rf
        accepted = False
        while lam < 1e16:
            step = np.linalg.solve(A + lam * np.eye(6), -g)
            q_new = quat_normalize(quat_mul(q, quat_from_rotvec(step[:3])))
            t_new = t + step[3:]
            r_new = residual(q_new, t_new)
            cost_new = float(np.sum(r_new * r_new))
            if cost_new < cost:
                q, t, r, cost = q_new, t_new, r_new, cost_new
                lam = max(lam / 10.0, 1e-15)
                accepted = True
                break
            lam *= 10.0
        if not accepted or np.linalg.norm(step) < tol:
            break
    return RigidTransform(q, t), float(np.sqrt(cost / (3 * n)))


@dataclass(frozen=True)
class PinholeCamera:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise InvalidInput("focal lengths must be positive")
        if not all(np.isfinite([self.fx, self.fy, self.cx, self.cy])):
            raise InvalidInput("camera parameters must be finite")

    def project(self, pc) -> np.ndarray:
        pc = np.asarray(pc, dtype=float)
        return np.stack(
            [self.fx * pc[:, 0] / pc[:, 2] + self.cx, self.fy * pc[:, 1] / pc[:, 2] + self.cy], axis=1
        )


def reprojection_rmse(object_points, image_points, camera: PinholeCamera, pose: RigidTransform) -> float:
    """RMS pixel distance between observed and reprojected points."""
    pc = pose.apply(object_points)
    e = np.asarray(image_points, dtype=float) - camera.project(pc)
    return float(np.sqrt(np.mean(np.sum(e * e, axis=1))))


def solve_pnp(
    object_points,
    image_points,
    camera: PinholeCamera,
    initial: RigidTransform,
    max_iters: int = 100,
    step_tol: float = 1e-10,
) -> RigidTransform:
    """Refine a camera-from-object pose by minimizing the reprojection error.

    Gauss-Newton with a backtracking line search: a trial step that raises the
    error or pushes any point to non-positive depth is halved. The initial guess
    must put every point in front of the camera.
    """
    P = np.asarray(object_points, dtype=float)
    p = np.asarray(image_points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3 or p.shape != (len(P), 2):
        raise InvalidInput(f"expected (N, 3) object and (N, 2) image points, got {P.shape} and {p.shape}")
    if len(P) < 4:
        raise InsufficientData(f"PnP needs at least 4 points, got {len(P)}")

    q = initial.rotation.copy()
    t = initial.translation.copy()

    def evaluate(q, t):
        pc = P @ quat_to_matrix(q).T + t
        if np.any(pc[:, 2] <= 0):
            return pc, None, np.inf
        e = p - camera.project(pc)
        return pc, e, float(np.sum(e * e))

    pc, e, cost = evaluate(q, t)
    if e is None:
        raise BehindCamera("initial pose places points at or behind the camera")

    for _ in range(max_iters):
        x, y, z = pc[:, 0], pc[:, 1], pc[:, 2]
        n = len(P)
        J = np.zeros((2 * n, 6))
        rp = pc - t
        for i in range(n):
            dproj = np.array(
                [
                    [camera.fx / z[i], 0.0, -camera.fx * x[i] / z[i] ** 2],
                    [0.0, camera.fy / z[i], -camera.fy * y[i] / z[i] ** 2],
                ]
            )
            # pc' = exp(w) R P + t + v  =>  d pc / dw = -[R P]x,  d pc / dv = I
            J[2 * i : 2 * i + 2, :3] = -dproj @ -skew(rp[i])
            J[2 * i : 2 * i + 2, 3:] = -dproj
        delta = np.linalg.lstsq(J, -e.reshape(-1), rcond=None)[0]
        scale = 1.0
        improved = False
        for _ in range(40):
            step = scale * delta
            q_new = quat_normalize(quat_mul(quat_from_rotvec(step[:3]), q))
            t_new = t + step[3:]
            pc_new, e_new, cost_new = evaluate(q_new, t_new)
            if e_new is not None and cost_new <= cost:
                improved = True
                break
            scale *= 0.5
        if not improved:
            # no descent direction left at working precision
            return RigidTransform(q, t)
        q, t, pc, e, cost = q_new, t_new, pc_new, e_new, cost_new
        if np.linalg.norm(step) < step_tol or cost == 0.0:
            return RigidTransform(q, t)
    raise NoConvergence(f"PnP did not converge in {max_iters} iterations", best=RigidTransform(q, t))
