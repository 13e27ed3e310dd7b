"""Independent reference implementations used only by the tests.

None of these share code with the package solvers: the DP is checked against
two enumerations, the simplex against scipy, vertex enumeration and a
Lagrangian envelope argument.
"""

import itertools

import numpy as np


def compositions(T, max_parts, R):
    """Run-length tuples summing to T: at most max_parts parts, all >= R but the last."""
    out = []

    def rec(prefix, left):
        if len(prefix) + 1 <= max_parts:
            out.append(prefix + (left,))
        if len(prefix) + 1 < max_parts:
            for w in range(R, left):
                rec(prefix + (w,), left - w)

    rec((), T)
    return out


def brute_force_score(V, B, R):
    """Best score over all run-length compositions and all model labelings.

    Labelings are enumerated explicitly when small; otherwise each run takes
    its best row, which is equivalent because equal adjacent labels only
    merge runs into a longer (still feasible) one.
    """
    V = np.asarray(V)
    M, T = V.shape
    csum = np.concatenate([np.zeros((M, 1), dtype=np.int64), np.cumsum(V, axis=1)], axis=1)
    best = -1
    for comp in compositions(T, B + 1, R):
        edges = np.concatenate([[0], np.cumsum(comp)])
        part = csum[:, edges[1:]] - csum[:, edges[:-1]]  # (M, parts)
        if M ** len(comp) <= 256:
            for lab in itertools.product(range(M), repeat=len(comp)):
                if any(lab[k] == lab[k + 1] for k in range(len(lab) - 1)):
                    continue
                best = max(best, int(part[list(lab), range(len(comp))].sum()))
        else:
            best = max(best, int(part.max(axis=0).sum()))
    return best


def exhaustive_score(V, B, R, limit=400_000):
    """Score by scanning every one of the M**T assignments (None if too many)."""
    V = np.asarray(V)
    M, T = V.shape
    if M**T > limit:
        return None
    X = np.array(list(itertools.product(range(M), repeat=T)), dtype=np.int64)
    change = np.zeros_like(X, dtype=bool)
    change[:, 1:] = X[:, 1:] != X[:, :-1]
    ok = change.sum(axis=1) <= B
    last = np.zeros(len(X), dtype=np.int64)
    for j in range(1, T):
        c = change[:, j]
        ok &= ~c | (j - last >= R)
        last = np.where(c, j, last)
    scores = V[X, np.arange(T)].sum(axis=1)
    return int(scores[ok].max())


def feasible_independent(assignment, B, R):
    a = list(assignment)
    runs = [len(list(g)) for _, g in itertools.groupby(a)]
    return len(runs) - 1 <= B and all(r >= R for r in runs[:-1])


def scipy_lp_value(V, B, R=None, windows=False):
    """Budget LP with the two-sided absolute-value linearization, solved by HiGHS."""
    from scipy.optimize import linprog

    V = np.asarray(V, dtype=float)
    M, T = V.shape
    na, ns = M * T, M * (T - 1)
    n = na + ns
    A_eq = np.zeros((T, n))
    for j in range(T):
        A_eq[j, [i * T + j for i in range(M)]] = 1
    ub = []
    for i in range(M):
        for j in range(1, T):
            s = na + i * (T - 1) + j - 1
            for sign in (1, -1):
                r = np.zeros(n)
                r[i * T + j], r[i * T + j - 1], r[s] = sign, -sign, -1
                ub.append((r, 0.0))
    r = np.zeros(n)
    r[na:] = 0.5
    ub.append((r, B))
    if windows:
        w = int(np.ceil(T / B))
        for k in range(1, T - w + 1):
            r = np.zeros(n)
            for j in range(max(k, 2), min(k + w, T) + 1):
                for i in range(M):
                    r[na + i * (T - 1) + j - 2] = 0.5
            ub.append((r, R))
    c = np.zeros(n)
    c[:na] = -V.ravel()
    res = linprog(
        c,
        A_ub=np.array([u[0] for u in ub]),
        b_ub=np.array([u[1] for u in ub]),
        A_eq=A_eq,
        b_eq=np.ones(T),
        bounds=[(0, 1)] * na + [(0, None)] * ns,
        method="highs",
    )
    assert res.status == 0, res.message
    return -res.fun


def switch_profile(V):
    """f[b] = best score with at most b switches and no dwell restriction."""
    V = np.asarray(V, dtype=np.int64)
    M, T = V.shape
    neg = -(10**9)
    f = []
    prev_level = None
    for b in range(T):
        level = np.full((T, M), neg, dtype=np.int64)
        level[0] = V[:, 0]
        for j in range(1, T):
            for m in range(M):
                best = level[j - 1, m]
                if prev_level is not None:
                    for k in range(M):
                        if k != m:
                            best = max(best, prev_level[j - 1, k])
                level[j, m] = best + V[m, j]
        f.append(int(level[T - 1].max()))
        prev_level = level
    return f


def concave_envelope_at(f, B):
    """Upper concave envelope of the points (b, f[b]) evaluated at B."""
    pts = list(enumerate(f))
    best = -np.inf
    for (b1, v1), (b2, v2) in itertools.combinations_with_replacement(pts, 2):
        if b1 <= B <= b2:
            val = v1 if b1 == b2 else v1 + (v2 - v1) * (B - b1) / (b2 - b1)
            best = max(best, val)
    return best


def vertex_enumeration_max(c, A, senses, b, lower, upper):
    """Maximise c.x over a bounded polyhedron by solving every basis."""
    c, A, b = (np.asarray(x, dtype=float) for x in (c, A, b))
    n = c.size
    eq = [k for k, s in enumerate(senses) if s == "="]
    ineq_rows = [(A[k], b[k]) for k, s in enumerate(senses) if s == "<="]
    for v in range(n):
        e = np.zeros(n)
        e[v] = -1
        ineq_rows.append((e, -lower[v]))
        if np.isfinite(upper[v]):
            e = np.zeros(n)
            e[v] = 1
            ineq_rows.append((e, upper[v]))
    G = np.array([r for r, _ in ineq_rows])
    h = np.array([v for _, v in ineq_rows])
    Aeq, beq = A[eq], b[eq]
    need = n - len(eq)
    best = -np.inf
    combos = itertools.combinations(range(len(G)), need)
    while True:
        chunk = list(itertools.islice(combos, 20000))
        if not chunk:
            break
        idx = np.array(chunk)
        mats = np.concatenate([np.broadcast_to(Aeq, (len(idx),) + Aeq.shape), G[idx]], axis=1)
        rhs = np.concatenate([np.broadcast_to(beq, (len(idx), len(eq))), h[idx]], axis=1)
        det = np.linalg.det(mats)
        good = np.abs(det) > 1e-9
        if not good.any():
            continue
        x = np.linalg.solve(mats[good], rhs[good][..., None])[..., 0]
        feas = np.all(x @ G.T <= h + 1e-9, axis=1)
        if eq:
            feas &= np.all(np.abs(x @ Aeq.T - beq) <= 1e-9, axis=1)
        if feas.any():
            best = max(best, float((x[feas] @ c).max()))
    return best
