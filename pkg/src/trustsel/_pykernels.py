"""Pure numpy versions of the compiled kernels, same signatures and results."""

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITER_LIMIT = 2


def pivot(tab, r, c):
    tab[r] /= tab[r, c]
    tab[r, c] = 1.0
    col = tab[:, c].copy()
    col[r] = 0.0
    rows = np.flatnonzero(col)
    if rows.size:
        prow = tab[r]
        nz = np.flatnonzero(prow)
        tab[np.ix_(rows, nz)] -= np.outer(col[rows], prow[nz])
        tab[rows, c] = 0.0


def simplex_loop(tab, basis, n_enter, tol, max_iter, rule=0):
    m = tab.shape[0] - 1
    it = 0
    stall = 0
    while it < max_iter:
        red = tab[m, :n_enter]
        if rule == 1 and stall < 8:
            enter = int(np.argmin(red))
            if red[enter] >= -tol:
                return OPTIMAL, it
        else:
            cand = np.flatnonzero(red < -tol)
            if cand.size == 0:
                return OPTIMAL, it
            enter = int(cand[0])
        colv = tab[:m, enter]
        rows = np.flatnonzero(colv > tol)
        if rows.size == 0:
            return UNBOUNDED, it
        ratios = tab[rows, -1] / colv[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12]
        leave = int(tied[np.argmin(basis[tied])])
        stall = stall + 1 if best <= 1e-12 else 0
        pivot(tab, leave, enter)
        basis[leave] = enter
        it += 1
    return ITER_LIMIT, it


def dp_forward(A, B, R):
    A = np.asarray(A, dtype=np.int32)
    M, T = A.shape
    val = np.full((T, M, B + 1, R), -1, dtype=np.int32)
    val[0, :, 0, 0] = A[:, 0]
    for j in range(T - 1):
        cur = val[j]
        gain = A[:, j + 1][:, None, None]
        nxt = np.full((M, B + 1, R), -1, dtype=np.int32)
        # stay: dwell advances and saturates at R
        stay = np.where(cur >= 0, cur + gain, -1)
        if R > 1:
            nxt[:, :, 1:] = stay[:, :, :-1]
            nxt[:, :, R - 1] = np.maximum(nxt[:, :, R - 1], stay[:, :, R - 1])
        else:
            nxt[:, :, 0] = stay[:, :, 0]
        # switch: from a saturated state of any other model
        if B > 0 and M > 1:
            sat = cur[:, :B, R - 1]  # (M, B)
            order = np.argsort(-sat, axis=0, kind="stable")
            best1 = np.take_along_axis(sat, order[:1], axis=0)[0]
            best2 = np.take_along_axis(sat, order[1:2], axis=0)[0]
            src = np.where(np.arange(M)[:, None] == order[0][None, :], best2[None, :], best1[None, :])
            sw = np.where(src >= 0, src + A[:, j + 1][:, None], -1)
            nxt[:, 1:, 0] = np.maximum(nxt[:, 1:, 0], sw)
        val[j + 1] = nxt
    return val
