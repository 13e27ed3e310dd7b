"""Trust -> binarize -> solve -> validate -> report."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    BinaryTrustMatrix,
    BudgetConfig,
    ModelOutputs,
    SelectionPlan,
    compute_trust_matrix,
    exclude_outliers,
    validate_plan,
)
from .fixing import fixing_select
from .io import SCHEMA_VERSION, config_to_dict, ensure_dir, save_binary, save_json, save_plan, write_matrix_csv
from .oracle import exact_select
from .relaxation import FractionalSolution, build_lp, solve_lp
from .splice import splice_select

SOLVERS = ("splice", "fixing", "oracle", "lp-bound")
EXIT_OK, EXIT_ERROR, EXIT_FAILSAFE = 0, 1, 2


@dataclass
class RunReport:
    instance: dict
    config: dict
    scores: dict
    switches: dict
    gaps: dict
    failsafe_slots: list[int]
    timing_ms: dict
    violations: dict = field(default_factory=dict)
    rmse: dict | None = None
    schema_version: int = SCHEMA_VERSION
    kind: str = "report"

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def exit_code(self) -> int:
        return EXIT_FAILSAFE if self.failsafe_slots else EXIT_OK


def pct_gap(reference: float | None, value: float | None) -> float | None:
    if reference is None or value is None:
        return None
    if reference <= 0:
        return 0.0
    return 100.0 * (reference - value) / reference


def rmse(series: np.ndarray, truth: np.ndarray) -> float:
    return float(np.sqrt(np.mean((np.asarray(series) - np.asarray(truth)) ** 2)))


def plan_rmse(plan: SelectionPlan, outputs: ModelOutputs, truth: np.ndarray) -> float:
    O = outputs.values
    return rmse(O[plan.assignment, np.arange(O.shape[1])], truth)


def solve_all(A: BinaryTrustMatrix, config: BudgetConfig, solvers=SOLVERS, rate_windows: bool = False):
    """Run the requested solvers; returns (plans, lp solution or None, timings in ms)."""
    solvers = tuple(solvers)
    unknown = set(solvers) - set(SOLVERS)
    if unknown:
        raise ValueError(f"unknown solvers {sorted(unknown)}")
    config.check_feasible(A.shape[1])
    plans: dict[str, SelectionPlan] = {}
    timing: dict[str, float] = {}
    frac: FractionalSolution | None = None

    def timed(name, fn):
        t0 = time.perf_counter()
        out = fn()
        timing[name] = 1e3 * (time.perf_counter() - t0)
        return out

    need_splice = "splice" in solvers or "fixing" in solvers
    need_lp = "lp-bound" in solvers or "fixing" in solvers
    if need_splice:
        plans["splice"] = timed("splice", lambda: splice_select(A, config))
    if need_lp:
        # fixing always uses the budget-only relaxation; the reported bound
        # follows --rate-windows
        frac = timed("lp-bound", lambda: solve_lp(build_lp(A, config)))
        if rate_windows and "lp-bound" in solvers:
            frac_w = timed("lp-bound", lambda: solve_lp(build_lp(A, config, include_rate_windows=True)))
        else:
            frac_w = frac
    if "fixing" in solvers:
        plans["fixing"] = timed("fixing", lambda: fixing_select(A, config, frac=frac, baseline=plans["splice"]))
        timing["fixing"] += timing.get("splice", 0.0) + timing.get("lp-bound", 0.0)
    if "oracle" in solvers:
        plans["oracle"] = timed("oracle", lambda: exact_select(A, config))
    if "splice" not in solvers:
        plans.pop("splice", None)
    return plans, (frac_w if "lp-bound" in solvers else None), timing


def run_pipeline(
    outputs: ModelOutputs,
    config: BudgetConfig,
    solvers=SOLVERS,
    truth: np.ndarray | None = None,
    out_dir=None,
    source: str = "",
    rate_windows: bool = False,
) -> RunReport:
    """Full pipeline on raw outputs; writes artifacts when ``out_dir`` is given.

    Artifacts: ``binary.csv``, ``trust.csv``, one ``plan_<solver>.json`` per
    plan and ``report.json``.
    """
    trust = compute_trust_matrix(outputs, config.p_max)
    A = exclude_outliers(outputs, config.lam)
    M, T = A.shape
    plans, frac, timing = solve_all(A, config, solvers, rate_windows)

    scores = {name: plan.trust_score for name, plan in plans.items()}
    lp_bound = frac.objective if frac is not None else None
    scores["lp_bound"] = lp_bound
    gaps = {
        "fixing_vs_oracle_pct": pct_gap(scores.get("oracle"), scores.get("fixing")),
        "fixing_vs_lp_pct": pct_gap(lp_bound, scores.get("fixing")),
    }
    violations = {
        name: [f"{v.kind}: {v.detail}" for v in validate_plan(plan, config)] for name, plan in plans.items()
    }
    report_rmse = None
    if truth is not None:
        truth = np.asarray(truth, dtype=float)
        report_rmse = {
            "plans": {name: plan_rmse(plan, outputs, truth) for name, plan in plans.items()},
            "models": {mid: rmse(outputs.values[i], truth) for i, mid in enumerate(outputs.model_ids)},
        }
    report = RunReport(
        instance={
            "source": source,
            "M": M,
            "T": T,
            "excluded_cells": int((A.values == 0).sum()),
            "mean_trust": float(trust.values.mean()),
        },
        config=config_to_dict(config) | {"rate_windows": rate_windows},
        scores=scores,
        switches={name: plan.switch_count for name, plan in plans.items()},
        gaps=gaps,
        failsafe_slots=sorted(A.failsafe_slots()),
        timing_ms=timing,
        violations=violations,
        rmse=report_rmse,
    )
    if out_dir is not None:
        d = ensure_dir(out_dir)
        save_binary(d / "binary.csv", A, outputs.model_ids)
        write_matrix_csv(d / "trust.csv", trust.values, outputs.model_ids)
        for name, plan in plans.items():
            save_plan(d / f"plan_{name}.json", plan, outputs.model_ids, name)
        save_json(Path(d) / "report.json", report.as_dict())
    return report
