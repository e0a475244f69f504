"""Independent reference implementations used only by the tests.

Each one is written from the defining formula, deliberately naive, and shares
no code with the package.
"""
import itertools
import math

import numpy as np
from scipy.spatial.transform import Rotation, Slerp

STEPS = ((1, 0), (0, 1), (1, 1))


def enumerate_paths(n, m):
    """Every monotone path from (0, 0) to (n-1, m-1) under the three-step pattern."""

    def rec(i, j, acc):
        if (i, j) == (n - 1, m - 1):
            yield acc
            return
        for di, dj in STEPS:
            a, b = i + di, j + dj
            if a < n and b < m:
                yield from rec(a, b, acc + [(a, b)])

    yield from rec(0, 0, [(0, 0)])


def dtw_bruteforce(cost):
    """Minimum path cost by exhaustive enumeration."""
    cost = np.asarray(cost)
    return min(sum(cost[i, j] for i, j in p) for p in enumerate_paths(*cost.shape))


def dtw_plain(cost):
    """Textbook O(nm) recursion, python loops, cumulative cost at the corner."""
    n, m = len(cost), len(cost[0])
    D = [[math.inf] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                D[i][j] = float(cost[0][0])
                continue
            best = math.inf
            if i > 0:
                best = min(best, D[i - 1][j])
            if j > 0:
                best = min(best, D[i][j - 1])
            if i > 0 and j > 0:
                best = min(best, D[i - 1][j - 1])
            D[i][j] = float(cost[i][j]) + best
    return D[n - 1][m - 1]


def sdtw_spans(cost):
    """Best open-ended match by trying every column span with a full DTW.

    Returns ``(raw_cost, start, end)``; ties go to the earliest end, then the
    latest start.
    """
    cost = np.asarray(cost)
    T = cost.shape[1]
    best = None
    for b in range(T):
        for a in range(b, -1, -1):
            c = dtw_plain(cost[:, a : b + 1])
            if best is None or c < best[0]:
                best = (c, a, b)
    return best


def sdtw_table_path(cost):
    """Open-ended DTW with its own table and backtracker.

    Ties on the end column go left; backtracking prefers diagonal, then
    vertical, then horizontal. Returns ``(raw, start, end, path_len)``.
    """
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    D = np.full((n, m), np.inf)
    D[0, :] = cost[0, :]
    for i in range(1, n):
        D[i, 0] = D[i - 1, 0] + cost[i, 0]
        for j in range(1, m):
            D[i, j] = cost[i, j] + min(D[i - 1, j - 1], D[i - 1, j], D[i, j - 1])
    end = int(np.argmin(D[n - 1]))
    i, j, steps = n - 1, end, 1
    while i > 0:
        if j == 0:
            i -= 1
        else:
            cands = [(D[i - 1, j - 1], 0), (D[i - 1, j], 1), (D[i, j - 1], 2)]
            best = min(c for c, _ in cands)
            move = next(k for c, k in cands if c == best)
            i, j = (i - 1, j - 1) if move == 0 else (i - 1, j) if move == 1 else (i, j - 1)
        steps += 1
    # leftover horizontal steps on row 0 are not part of the match
    return float(D[n - 1, end]), j, end, steps


def gms_exhaustive(cost, l_min, l_max, eps):
    """Greedy multi-segment scan that solves every window from scratch."""
    Th = cost.shape[0]
    out = []
    t = 0
    while t <= Th - l_min:
        best = None
        for L in range(l_min, min(l_max, Th - t) + 1):
            raw, a, b, steps = sdtw_table_path(cost[t : t + L])
            d = raw / steps
            if best is None or d <= best[0]:
                best = (d, L, a, b)
        d, L, a, b = best
        if d < eps:
            out.append((t, t + L - 1, a, b, d))
            t += L
        else:
            t += 1
    return out


def kabsch(P, Q):
    """Closed-form R, t minimizing sum |Q - (R P + t)|^2 (SVD with reflection fix)."""
    P, Q = np.asarray(P, float), np.asarray(Q, float)
    pc, qc = P.mean(0), Q.mean(0)
    H = (P - pc).T @ (Q - qc)
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    return R, qc - R @ pc


def homogeneous(R, t):
    T = np.eye(4)
    T[:3, :3] = R
    T[:3, 3] = t
    return T


def fk_matrices(axes, lengths, q):
    """Keypoints from a product of 4x4 joint and link transforms (scipy rotations)."""
    T = np.eye(4)
    pts = []
    for a, l, qi in zip(axes, lengths, q):
        a = np.asarray(a, float) / np.linalg.norm(a)
        T = T @ homogeneous(Rotation.from_rotvec(a * qi).as_matrix(), np.zeros(3))
        T = T @ homogeneous(np.eye(3), [l, 0.0, 0.0])
        pts.append(T[:3, 3].copy())
    return np.array(pts)


def two_link_ik(x, y, l1, l2):
    """Both elbow branches of the planar two-link inverse kinematics."""
    c2 = (x * x + y * y - l1 * l1 - l2 * l2) / (2 * l1 * l2)
    c2 = min(1.0, max(-1.0, c2))
    sols = []
    for s in (1.0, -1.0):
        q2 = s * math.acos(c2)
        q1 = math.atan2(y, x) - math.atan2(l2 * math.sin(q2), l1 + l2 * math.cos(q2))
        sols.append(np.array([q1, q2]))
    return sols


def wrap(a):
    return (np.asarray(a) + np.pi) % (2 * np.pi) - np.pi


def quat_wxyz_to_scipy(q):
    q = np.asarray(q, float)
    return Rotation.from_quat(q[..., [1, 2, 3, 0]])


def scipy_to_wxyz(r):
    q = r.as_quat()
    return q[..., [3, 0, 1, 2]]


def dense_interp(translations, quats, joints, positions):
    """Evaluate the piecewise-linear / slerp interpolant at fractional frame positions."""
    k = len(translations)
    grid = np.arange(k)
    trans = np.stack([np.interp(positions, grid, translations[:, c]) for c in range(3)], axis=1)
    if joints.shape[1]:
        jts = np.stack([np.interp(positions, grid, joints[:, c]) for c in range(joints.shape[1])], axis=1)
    else:
        jts = np.zeros((len(positions), 0))
    slerp = Slerp(grid, quat_wxyz_to_scipy(quats))
    return trans, scipy_to_wxyz(slerp(positions)), jts


def iou_pairs(pred, truth):
    """Greedy one-to-one matching over all pairs, highest IoU first."""
    def iou(a, b):
        inter = max(0, min(a[1], b[1]) - max(a[0], b[0]) + 1)
        return inter / ((a[1] - a[0] + 1) + (b[1] - b[0] + 1) - inter)

    cands = sorted(((iou(p, t), pi, ti) for pi, p in enumerate(pred) for ti, t in enumerate(truth)), reverse=True)
    used_p, used_t, got = set(), set(), [0.0] * len(truth)
    for v, pi, ti in cands:
        if v > 0 and pi not in used_p and ti not in used_t:
            used_p.add(pi)
            used_t.add(ti)
            got[ti] = v
    return float(np.mean(got)), float(np.mean([g >= 0.5 for g in got]))


def all_pairs(n):
    return list(itertools.combinations(range(n), 2))
