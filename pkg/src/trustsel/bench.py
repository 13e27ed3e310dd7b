"""Seeded benchmark suites: synthetic gap study and random-instance checks."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .attack import InstanceSpec, generate_instance
from .core import BinaryTrustMatrix, BudgetConfig, exclude_outliers, is_feasible
from .fixing import fixing_select
from .oracle import exact_select, splice_ratio_bound
from .pipeline import pct_gap, plan_rmse
from .relaxation import build_lp, solve_lp
from .splice import splice_select


def random_binary_instance(
    seed: int,
    M_range=(3, 7),
    T_range=(12, 48),
    B_range=(1, 5),
    R_range=(2, 5),
) -> tuple[BinaryTrustMatrix, BudgetConfig]:
    """Random 0/1 matrix and a feasible budget drawn from inclusive ranges.

    The density of ones is drawn per instance so both sparse and dense
    matrices appear. ``B`` is lowered if ``(B+1)*R`` would exceed ``T``.
    """
    rng = np.random.default_rng(seed)
    M = int(rng.integers(M_range[0], M_range[1] + 1))
    T = int(rng.integers(T_range[0], T_range[1] + 1))
    B = int(rng.integers(B_range[0], B_range[1] + 1))
    R = int(rng.integers(R_range[0], R_range[1] + 1))
    while (B + 1) * R > T and B > 0:
        B -= 1
    while (B + 1) * R > T:
        R -= 1
    density = rng.uniform(0.3, 0.9)
    A = BinaryTrustMatrix((rng.random((M, T)) < density).astype(np.int8))
    return A, BudgetConfig(B=B, R=R)


@dataclass
class ChainRow:
    seed: int
    M: int
    T: int
    B: int
    R: int
    splice: int
    fixing: int
    oracle: int
    lp_bound: float
    feasible: bool

    @property
    def ordered(self) -> bool:
        return self.splice <= self.fixing <= self.oracle <= self.lp_bound + 1e-6


def solve_chain(A: BinaryTrustMatrix, config: BudgetConfig, seed: int = -1) -> ChainRow:
    splice = splice_select(A, config)
    frac = solve_lp(build_lp(A, config))
    fixing = fixing_select(A, config, frac=frac, baseline=splice)
    exact = exact_select(A, config)
    M, T = A.shape
    return ChainRow(
        seed,
        M,
        T,
        config.B,
        config.R,
        splice.trust_score,
        fixing.trust_score,
        exact.trust_score,
        frac.objective,
        all(is_feasible(p, config) for p in (splice, fixing, exact)),
    )


def ordering_suite(n: int = 1000, seed0: int = 0) -> list[ChainRow]:
    return [solve_chain(*random_binary_instance(seed0 + k), seed=seed0 + k) for k in range(n)]


def ratio_suite(n: int = 200, seed0: int = 0) -> dict:
    """Observed splice/optimum ratios against the claimed worst-case bound."""
    rows = ordering_suite(n, seed0)
    ratios = []
    violations = []
    for r in rows:
        if r.oracle == 0:
            continue
        ratio = r.splice / r.oracle
        bound = splice_ratio_bound(r.T, r.B, r.R)
        ratios.append(ratio)
        if ratio < bound - 1e-12:
            violations.append({"seed": r.seed, "ratio": ratio, "bound": bound, "M": r.M, "T": r.T, "B": r.B, "R": r.R})
    return {
        "instances": len(rows),
        "min_ratio": min(ratios) if ratios else None,
        "mean_ratio": statistics.fmean(ratios) if ratios else None,
        "violations": violations,
    }


def synthetic_suite(
    n: int = 200,
    M: int = 7,
    T: int = 96,
    budgets=tuple(range(1, 11)),
    R: int = 4,
    lam: float = 0.85,
    C: int = 1,
    attack_percentile: float = 5.0,
    seed0: int = 0,
    oracle: bool = True,
) -> dict:
    """Gap study on generated ensembles; budget cycles through ``budgets``."""
    rows = []
    t0 = time.perf_counter()
    for k in range(n):
        seed = seed0 + k
        B = budgets[k % len(budgets)]
        inst = generate_instance(InstanceSpec(M=M, T=T, C=C, attack_percentile=attack_percentile, seed=seed))
        A = exclude_outliers(inst.outputs, lam)
        config = BudgetConfig(B=B, R=R, lam=lam)
        splice = splice_select(A, config)
        frac = solve_lp(build_lp(A, config))
        fixing = fixing_select(A, config, frac=frac, baseline=splice)
        row = {
            "seed": seed,
            "B": B,
            "splice": splice.trust_score,
            "fixing": fixing.trust_score,
            "lp_bound": frac.objective,
            "gap_lp_pct": pct_gap(frac.objective, fixing.trust_score),
            "failsafe_slots": len(A.failsafe_slots()),
            "rmse_fixing": plan_rmse(fixing, inst.outputs, inst.ground_truth),
            "rmse_malicious": [_model_rmse(inst, i) for i in sorted(inst.malicious_ids)],
        }
        if oracle:
            exact = exact_select(A, config)
            row["oracle"] = exact.trust_score
            row["gap_oracle_pct"] = pct_gap(exact.trust_score, fixing.trust_score)
        rows.append(row)
    by_budget = {}
    for B in budgets:
        sub = [r for r in rows if r["B"] == B]
        if not sub:
            continue
        by_budget[B] = _gap_stats(sub, oracle)
    summary = _gap_stats(rows, oracle)
    median = summary.get("median_gap_oracle_pct", summary["median_gap_lp_pct"])
    summary["single_digit_band"] = median is not None and 0.0 <= median < 10.0
    return {
        "kind": "bench",
        "suite": "synthetic",
        "params": {"n": n, "M": M, "T": T, "budgets": list(budgets), "R": R, "lambda": lam, "C": C, "x": attack_percentile},
        "summary": summary,
        "by_budget": by_budget,
        "rows": rows,
        "elapsed_s": time.perf_counter() - t0,
    }


def _model_rmse(inst, i: int) -> float:
    return float(np.sqrt(np.mean((inst.outputs.values[i] - inst.ground_truth) ** 2)))


def _gap_stats(rows: list[dict], oracle: bool) -> dict:
    out = {"count": len(rows)}
    keys = ["gap_lp_pct"] + (["gap_oracle_pct"] if oracle else [])
    for key in keys:
        vals = [r[key] for r in rows]
        out[f"median_{key}"] = statistics.median(vals)
        out[f"mean_{key}"] = statistics.fmean(vals)
        out[f"min_{key}"] = min(vals)
        out[f"max_{key}"] = max(vals)
    return out


def format_table(result: dict) -> str:
    has_oracle = "median_gap_oracle_pct" in result["summary"]
    head = f"{'B':>3} {'n':>4} {'med gap LP %':>13} {'max gap LP %':>13}"
    if has_oracle:
        head += f" {'med gap OPT %':>14} {'max gap OPT %':>14}"
    lines = [head]
    for B, s in result["by_budget"].items():
        line = f"{B:>3} {s['count']:>4} {s['median_gap_lp_pct']:>13.3f} {s['max_gap_lp_pct']:>13.3f}"
        if has_oracle:
            line += f" {s['median_gap_oracle_pct']:>14.3f} {s['max_gap_oracle_pct']:>14.3f}"
        lines.append(line)
    s = result["summary"]
    line = f"{'all':>3} {s['count']:>4} {s['median_gap_lp_pct']:>13.3f} {s['max_gap_lp_pct']:>13.3f}"
    if has_oracle:
        line += f" {s['median_gap_oracle_pct']:>14.3f} {s['max_gap_oracle_pct']:>14.3f}"
    lines.append(line)
    return "\n".join(lines)
