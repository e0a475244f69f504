"""Pure-Python dynamic-programming kernels.

Reference implementation and import-time fallback for ``_ckernels``. Both
modules expose the same functions with the same tie-breaking, so results are
bit-identical.

Predecessor order on ties is diagonal, then vertical ``(i-1, j)``, then
horizontal ``(i, j-1)``.
"""
import numpy as np

BACKEND = "python"


def dtw_accumulate(cost):
    c = np.asarray(cost, dtype=np.float64).tolist()
    n, m = len(c), len(c[0])
    D = [[0.0] * m for _ in range(n)]
    row = D[0]
    acc = 0.0
    for j in range(m):
        acc = acc + c[0][j]
        row[j] = acc
    for i in range(1, n):
        prev, row, ci = D[i - 1], D[i], c[i]
        row[0] = prev[0] + ci[0]
        for j in range(1, m):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = ci[j] + best
    return np.array(D)


def _backtrack(D, i, j, stop_at_row0):
    path_i = [i]
    path_j = [j]
    while i > 0 or (j > 0 and not stop_at_row0):
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            best = D[i - 1][j - 1]
            move = 0
            if D[i - 1][j] < best:
                best = D[i - 1][j]
                move = 1
            if D[i][j - 1] < best:
                move = 2
            if move == 0:
                i -= 1
                j -= 1
            elif move == 1:
                i -= 1
            else:
                j -= 1
        path_i.append(i)
        path_j.append(j)
    path_i.reverse()
    path_j.reverse()
    return np.array(path_i, dtype=np.intp), np.array(path_j, dtype=np.intp)


def dtw_backtrack(D):
    D = np.asarray(D, dtype=np.float64)
    return _backtrack(D.tolist(), D.shape[0] - 1, D.shape[1] - 1, False)


def sdtw_accumulate(cost):
    c = np.asarray(cost, dtype=np.float64).tolist()
    n, m = len(c), len(c[0])
    D = [list(c[0])] + [[0.0] * m for _ in range(n - 1)]
    for i in range(1, n):
        prev, row, ci = D[i - 1], D[i], c[i]
        row[0] = prev[0] + ci[0]
        for j in range(1, m):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = ci[j] + best
    return np.array(D)


def sdtw_backtrack(D, j_end):
    D = np.asarray(D, dtype=np.float64)
    return _backtrack(D.tolist(), D.shape[0] - 1, int(j_end), True)


def gms_scan(cost, l_min, l_max, epsilon):
    """Greedy multi-segment subsequence scan over a (T_h, T_r) cost matrix.

    For each start ``t`` one subsequence table is grown row by row, so every
    window length ``L`` reads its result off row ``L - 1``. The start column and
    path length of the optimal path into each cell are carried forward with
    the same predecessor rule the backtracker uses.

    Returns a list of ``(h_start, h_end, r_start, r_end, d)`` with ``d`` the
    cumulative cost divided by path length.
    """
    c = np.asarray(cost, dtype=np.float64).tolist()
    T_h, T_r = len(c), len(c[0])
    out = []
    t = 0
    while t + l_min <= T_h:
        top = min(l_max, T_h - t)
        D = list(c[t])
        S = list(range(T_r))
        N = [1] * T_r
        d_best = float("inf")
        best = None
        for i in range(top):
            if i > 0:
                ci = c[t + i]
                nD = [0.0] * T_r
                nS = [0] * T_r
                nN = [0] * T_r
                nD[0] = D[0] + ci[0]
                nS[0] = S[0]
                nN[0] = N[0] + 1
                for j in range(1, T_r):
                    b = D[j - 1]
                    s = S[j - 1]
                    k = N[j - 1]
                    if D[j] < b:
                        b = D[j]
                        s = S[j]
                        k = N[j]
                    if nD[j - 1] < b:
                        b = nD[j - 1]
                        s = nS[j - 1]
                        k = nN[j - 1]
                    nD[j] = ci[j] + b
                    nS[j] = s
                    nN[j] = k + 1
                D, S, N = nD, nS, nN
            if i + 1 < l_min:
                continue
            j_star = 0
            for j in range(1, T_r):
                if D[j] < D[j_star]:
                    j_star = j
            d = D[j_star] / N[j_star]
            if d <= d_best:
                d_best = d
                best = (i + 1, S[j_star], j_star)
        if best is not None and d_best < epsilon:
            L, js, je = best
            out.append((t, t + L - 1, js, je, d_best))
            t += L
        else:
            t += 1
    return out
