"""Fixing heuristic: threshold rounding of the LP relaxation with a falling H."""

from __future__ import annotations

import math

import numpy as np

from .core import BinaryTrustMatrix, BudgetConfig, SelectionPlan, is_feasible
from .relaxation import FractionalSolution, build_lp, solve_lp
from .splice import splice_select


def rounded_by_max(frac: FractionalSolution, H: float) -> np.ndarray:
    """Boolean mask of slots whose fractional column maximum reaches ``H``."""
    return frac.values.max(axis=0) >= H


def round_assignment(values: np.ndarray, H: float) -> np.ndarray:
    """Left-to-right threshold rounding with carry-forward.

    A slot whose column maximum reaches ``H`` takes that row and becomes the
    new carry. Below threshold, the carried row is reused; before any carry
    exists the column maximum is taken and becomes the carry.
    """
    X = np.asarray(values)
    T = X.shape[1]
    top = np.argmax(X, axis=0)  # lowest row wins ties
    hit = X[top, np.arange(T)] >= H
    out = np.empty(T, dtype=np.int64)
    carry = -1
    for t in range(T):
        if hit[t] or carry < 0:
            carry = int(top[t])
        out[t] = carry
    return out


def round_fractional(frac: FractionalSolution, H: float, A: BinaryTrustMatrix) -> SelectionPlan:
    return SelectionPlan.from_assignment(round_assignment(frac.values, H), A)


def fixing_select(
    A: BinaryTrustMatrix,
    config: BudgetConfig,
    frac: FractionalSolution | None = None,
    baseline: SelectionPlan | None = None,
) -> SelectionPlan:
    """Best of the splice plan and the feasible roundings along the H sweep.

    ``H`` runs ``H0, H0 - eps, ...`` while positive. Infeasible roundings are
    skipped. After the first feasible rounding, the sweep stops as soon as a
    feasible rounding fails to beat the previous feasible one.

    ``frac`` and ``baseline`` let callers reuse an LP solve or splice run.
    """
    config.check_feasible(A.shape[1])
    best = baseline if baseline is not None else splice_select(A, config)
    if frac is None:
        frac = solve_lp(build_lp(A, config))
    previous = None
    for k in range(math.ceil(config.H0 / config.eps) + 1):
        H = config.H0 - k * config.eps
        if H <= 1e-12:
            break
        plan = round_fractional(frac, H, A)
        if not is_feasible(plan, config):
            continue
        if plan.trust_score > best.trust_score:
            best = plan
        if previous is not None and plan.trust_score <= previous:
            break
        previous = plan.trust_score
    return best
