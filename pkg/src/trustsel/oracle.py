"""Exact selection by dynamic programming, and competitive-ratio diagnostics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .core import BinaryTrustMatrix, BudgetConfig, SelectionPlan
from .errors import SizeError

MAX_STATES = 10**7


def exact_select(A: BinaryTrustMatrix, config: BudgetConfig, backend=None) -> SelectionPlan:
    """Optimal plan over at most ``B`` switches with minimum dwell ``R``.

    State per slot is (model, switches used, dwell capped at R). The final
    run may end before reaching ``R``.
    """
    kern = backend or kernels
    M, T = A.shape
    B, R = config.B, config.R
    config.check_feasible(T)
    if M * T * (B + 1) * R > MAX_STATES:
        raise SizeError(f"DP table of {M * T * (B + 1) * R} states exceeds {MAX_STATES}")
    V = np.ascontiguousarray(A.values, dtype=np.int8)
    val = kern.dp_forward(V, B, R)

    # lexicographically smallest (model, b, d) among optimal end states
    last = val[T - 1]
    m, b, d = (int(x) for x in np.argwhere(last == last.max())[0])
    assignment = np.empty(T, dtype=np.int64)
    assignment[T - 1] = m
    for j in range(T - 1, 0, -1):
        prev = val[j - 1]
        want = val[j, m, b, d] - V[m, j]
        if d == 0:
            if R == 1 and prev[m, b, 0] == want:
                pass
            else:
                cands = [k for k in range(M) if k != m and prev[k, b - 1, R - 1] == want]
                m, b, d = cands[0], b - 1, R - 1
        elif d < R - 1:
            d -= 1
        elif prev[m, b, R - 2] == want:
            d = R - 2
        # else: stayed saturated at R - 1
        assignment[j - 1] = m
    return SelectionPlan.from_assignment(assignment, A)


def splice_ratio_bound(T: int, B: int, R: int) -> float:
    """Worst-case splice/optimum ratio claimed for the splice heuristic."""
    return (T + R * (B + 1)) / (2 * T)


@dataclass(frozen=True)
class RatioReport:
    splice_score: int
    fixing_score: int
    oracle_score: int
    lp_bound: float
    ratio: float | None
    ratio_bound: float
    below_bound: bool

    def as_dict(self) -> dict:
        return asdict(self)


def competitive_ratio_report(A: BinaryTrustMatrix, config: BudgetConfig) -> RatioReport:
    from .fixing import fixing_select
    from .relaxation import build_lp, solve_lp
    from .splice import splice_select

    M, T = A.shape
    splice = splice_select(A, config)
    frac = solve_lp(build_lp(A, config))
    fixing = fixing_select(A, config, frac=frac, baseline=splice)
    exact = exact_select(A, config)
    ratio = splice.trust_score / exact.trust_score if exact.trust_score > 0 else None
    bound = splice_ratio_bound(T, config.B, config.R)
    return RatioReport(
        splice.trust_score,
        fixing.trust_score,
        exact.trust_score,
        frac.objective,
        ratio,
        bound,
        ratio is not None and ratio < bound - 1e-12,
    )


def adversarial_instance(T: int, R: int, B: int, kind: str = "decoy") -> BinaryTrustMatrix:
    """Structured instances that stress the splice heuristic.

    ``"decoy"``: ``B+1`` rows each hold a single anchor run of exactly ``R``
    ones, spread evenly; one extra row is ones everywhere except every
    ``R``-th slot, so its runs never reach ``R`` and splice cannot anchor it,
    although deploying it throughout scores about ``T (R-1)/R``.

    ``"halves"``: anchors as above separated by gaps; in every gap the first
    half is covered by one fresh row and the second half by another. When a
    gap is shorter than ``2R`` both halves are narrower than ``R``, so no
    anchor forms there and the fill phase (restricted to the neighbouring
    anchor rows) scores nothing in the gap. Under the same budget the
    optimum cannot afford the extra switches either, so splice stays optimal
    here; the instance illustrates the worst-case picture rather than
    breaking it.
    """
    if (B + 1) * R > T:
        raise ValueError("need (B+1)*R <= T")
    n_anchor = B + 1
    gap_total = T - n_anchor * R
    gaps = [gap_total // max(B, 1) + (1 if g < gap_total % max(B, 1) else 0) for g in range(B)]
    starts = []
    pos = 0
    for a in range(n_anchor):
        starts.append(pos)
        pos += R + (gaps[a] if a < B else 0)
    if kind == "decoy":
        mat = np.zeros((n_anchor + 1, T), dtype=np.int8)
        for a, s in enumerate(starts):
            mat[a, s : s + R] = 1
        mat[n_anchor] = 1
        if R > 1:
            mat[n_anchor, R - 1 :: R] = 0
        else:
            mat[n_anchor] = 0
        return BinaryTrustMatrix(mat)
    if kind == "halves":
        mat = np.zeros((n_anchor + 2 * B, T), dtype=np.int8)
        for a, s in enumerate(starts):
            mat[a, s : s + R] = 1
        for g in range(B):
            lo = starts[g] + R
            hi = starts[g + 1]
            mid = lo + math.ceil((hi - lo) / 2)
            mat[n_anchor + 2 * g, lo:mid] = 1
            mat[n_anchor + 2 * g + 1, mid:hi] = 1
        return BinaryTrustMatrix(mat)
    raise ValueError(f"unknown adversarial kind {kind!r}")
