# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dynamic-programming kernels. Mirrors ``_pykernels`` exactly."""
import numpy as np

from libc.math cimport INFINITY

BACKEND = "cython"


def dtw_accumulate(cost):
    cdef double[:, ::1] c = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], m = c.shape[1], i, j
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] D = out
    cdef double best, acc = 0.0
    with nogil:
        for j in range(m):
            acc = acc + c[0, j]
            D[0, j] = acc
        for i in range(1, n):
            D[i, 0] = D[i - 1, 0] + c[i, 0]
            for j in range(1, m):
                best = D[i - 1, j - 1]
                if D[i - 1, j] < best:
                    best = D[i - 1, j]
                if D[i, j - 1] < best:
                    best = D[i, j - 1]
                D[i, j] = c[i, j] + best
    return out


def sdtw_accumulate(cost):
    cdef double[:, ::1] c = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], m = c.shape[1], i, j
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] D = out
    cdef double best
    with nogil:
        for j in range(m):
            D[0, j] = c[0, j]
        for i in range(1, n):
            D[i, 0] = D[i - 1, 0] + c[i, 0]
            for j in range(1, m):
                best = D[i - 1, j - 1]
                if D[i - 1, j] < best:
                    best = D[i - 1, j]
                if D[i, j - 1] < best:
                    best = D[i, j - 1]
                D[i, j] = c[i, j] + best
    return out


cdef Py_ssize_t _backtrack(double[:, ::1] D, Py_ssize_t i, Py_ssize_t j, bint stop_at_row0,
                           Py_ssize_t[::1] pi, Py_ssize_t[::1] pj) noexcept nogil:
    cdef Py_ssize_t n = 0
    cdef double best
    cdef int move
    pi[n] = i
    pj[n] = j
    n += 1
    while i > 0 or (j > 0 and not stop_at_row0):
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            best = D[i - 1, j - 1]
            move = 0
            if D[i - 1, j] < best:
                best = D[i - 1, j]
                move = 1
            if D[i, j - 1] < best:
                move = 2
            if move == 0:
                i -= 1
                j -= 1
            elif move == 1:
                i -= 1
            else:
                j -= 1
        pi[n] = i
        pj[n] = j
        n += 1
    return n


def _run_backtrack(D_in, Py_ssize_t i, Py_ssize_t j, bint stop):
    cdef double[:, ::1] D = np.ascontiguousarray(D_in, dtype=np.float64)
    cap = D.shape[0] + D.shape[1]
    ai = np.empty(cap, dtype=np.intp)
    aj = np.empty(cap, dtype=np.intp)
    cdef Py_ssize_t[::1] pi = ai
    cdef Py_ssize_t[::1] pj = aj
    cdef Py_ssize_t n
    with nogil:
        n = _backtrack(D, i, j, stop, pi, pj)
    return ai[:n][::-1].copy(), aj[:n][::-1].copy()


def dtw_backtrack(D):
    D = np.asarray(D)
    return _run_backtrack(D, D.shape[0] - 1, D.shape[1] - 1, False)


def sdtw_backtrack(D, j_end):
    D = np.asarray(D)
    return _run_backtrack(D, D.shape[0] - 1, int(j_end), True)


def gms_scan(cost, Py_ssize_t l_min, Py_ssize_t l_max, double epsilon):
    cdef double[:, ::1] c = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t T_h = c.shape[0], T_r = c.shape[1]
    buf_d = np.empty((2, T_r), dtype=np.float64)
    buf_s = np.empty((2, T_r), dtype=np.intp)
    buf_n = np.empty((2, T_r), dtype=np.intp)
    cdef double[:, ::1] D = buf_d
    cdef Py_ssize_t[:, ::1] S = buf_s
    cdef Py_ssize_t[:, ::1] N = buf_n
    cdef Py_ssize_t t = 0, top, i, j, j_star, cur, prv, s, k
    cdef Py_ssize_t best_L, best_js, best_je
    cdef double b, d, d_best
    out = []
    while t + l_min <= T_h:
        top = l_max if l_max < T_h - t else T_h - t
        d_best = INFINITY
        best_L = -1
        best_js = 0
        best_je = 0
        with nogil:
            for j in range(T_r):
                D[0, j] = c[t, j]
                S[0, j] = j
                N[0, j] = 1
            for i in range(top):
                cur = i & 1
                if i > 0:
                    prv = cur ^ 1
                    D[cur, 0] = D[prv, 0] + c[t + i, 0]
                    S[cur, 0] = S[prv, 0]
                    N[cur, 0] = N[prv, 0] + 1
                    for j in range(1, T_r):
                        b = D[prv, j - 1]
                        s = S[prv, j - 1]
                        k = N[prv, j - 1]
                        if D[prv, j] < b:
                            b = D[prv, j]
                            s = S[prv, j]
                            k = N[prv, j]
                        if D[cur, j - 1] < b:
                            b = D[cur, j - 1]
                            s = S[cur, j - 1]
                            k = N[cur, j - 1]
                        D[cur, j] = c[t + i, j] + b
                        S[cur, j] = s
                        N[cur, j] = k + 1
                if i + 1 < l_min:
                    continue
                j_star = 0
                for j in range(1, T_r):
                    if D[cur, j] < D[cur, j_star]:
                        j_star = j
                d = D[cur, j_star] / N[cur, j_star]
                if d <= d_best:
                    d_best = d
                    best_L = i + 1
                    best_js = S[cur, j_star]
                    best_je = j_star
        if best_L > 0 and d_best < epsilon:
            out.append((t, t + best_L - 1, best_js, best_je, d_best))
            t += best_L
        else:
            t += 1
    return out
