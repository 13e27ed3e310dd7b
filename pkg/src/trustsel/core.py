"""Domain types, agreement-based trust, sigma exclusion and plan checks.

Everything here is a pure function of immutable inputs. Matrices are stored
as read-only numpy arrays with models on rows and time slots on columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, InputError

DEFAULT_P_MAX = 10.0
DEFAULT_LAMBDA = 0.85
DEFAULT_H0 = 0.9
DEFAULT_EPS = 0.05
DEFAULT_BUDGET = 7
DEFAULT_RATE = 4


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ModelOutputs:
    """Raw M x T outputs, one row per model."""

    values: np.ndarray
    model_ids: tuple[str, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InputError(f"outputs must be a non-empty 2-D matrix, got shape {v.shape}")
        bad = np.argwhere(~np.isfinite(v))
        if len(bad):
            i, j = bad[0]
            raise InputError(f"non-finite output at model {i}, slot {j}: {v[i, j]!r}")
        ids = tuple(self.model_ids) or tuple(f"m{i}" for i in range(v.shape[0]))
        if len(ids) != v.shape[0]:
            raise InputError(f"{len(ids)} model ids for {v.shape[0]} rows")
        if len(set(ids)) != len(ids):
            raise InputError("model ids must be unique")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "model_ids", ids)

    @property
    def n_models(self) -> int:
        return self.values.shape[0]

    @property
    def slot_count(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class TrustMatrix:
    values: np.ndarray
    p_max: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not self.p_max > 0:
            raise ConfigError(f"p_max must be positive, got {self.p_max}")
        if v.ndim != 2 or np.any(v < 0) or np.any(v > self.p_max):
            raise InputError("trust values must form a matrix within [0, p_max]")
        object.__setattr__(self, "values", _frozen(v))


@dataclass(frozen=True)
class BinaryTrustMatrix:
    """The 0/1 payoff matrix consumed by every solver."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InputError(f"binary matrix must be non-empty 2-D, got shape {v.shape}")
        if not np.all((v == 0) | (v == 1)):
            bad = np.argwhere((v != 0) & (v != 1))[0]
            raise InputError(f"binary matrix entry at {tuple(bad)} is {v[tuple(bad)]!r}, expected 0 or 1")
        object.__setattr__(self, "values", _frozen(v.astype(np.int8)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def failsafe_slots(self) -> frozenset[int]:
        """Slots where no model is trusted."""
        return frozenset(int(j) for j in np.flatnonzero(self.values.sum(axis=0) == 0))


@dataclass(frozen=True)
class BudgetConfig:
    B: int = DEFAULT_BUDGET
    R: int = DEFAULT_RATE
    p_max: float = DEFAULT_P_MAX
    lam: float = DEFAULT_LAMBDA
    H0: float = DEFAULT_H0
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if int(self.B) != self.B or self.B < 0:
            raise ConfigError(f"budget B must be a nonnegative integer, got {self.B}")
        if int(self.R) != self.R or self.R < 1:
            raise ConfigError(f"rate R must be a positive integer, got {self.R}")
        if not self.p_max > 0:
            raise ConfigError(f"p_max must be positive, got {self.p_max}")
        if not self.lam > 0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")
        if not 0 < self.H0 < 1:
            raise ConfigError(f"H0 must lie in (0, 1), got {self.H0}")
        if not 0 < self.eps < 0.1:
            raise ConfigError(f"eps must lie in (0, 0.1), got {self.eps}")
        object.__setattr__(self, "B", int(self.B))
        object.__setattr__(self, "R", int(self.R))

    def check_feasible(self, T: int) -> None:
        if (self.B + 1) * self.R > T:
            raise ConfigError(f"(B+1)*R = {(self.B + 1) * self.R} exceeds T = {T}")


def count_switches(assignment: Sequence[int]) -> int:
    a = np.asarray(assignment)
    return int(np.count_nonzero(a[1:] != a[:-1]))


def run_lengths(assignment: Sequence[int]) -> list[tuple[int, int, int]]:
    """Maximal same-model runs as (model, start, length)."""
    a = np.asarray(assignment)
    if a.size == 0:
        return []
    cuts = np.flatnonzero(a[1:] != a[:-1]) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts, [a.size]))
    return [(int(a[s]), int(s), int(e - s)) for s, e in zip(starts, ends)]


@dataclass(frozen=True)
class SelectionPlan:
    """One deployed model per slot, with derived bookkeeping."""

    assignment: np.ndarray
    switch_count: int
    trust_score: int
    failsafe_slots: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.ndim != 1 or a.size == 0 or np.any(a < 0):
            raise InputError("assignment must be a non-empty vector of model indices")
        if self.switch_count != count_switches(a):
            raise InputError("switch_count does not match the assignment")
        object.__setattr__(self, "assignment", _frozen(a))
        object.__setattr__(self, "failsafe_slots", frozenset(self.failsafe_slots))

    @classmethod
    def from_assignment(cls, assignment: Sequence[int], A: BinaryTrustMatrix) -> "SelectionPlan":
        a = np.asarray(assignment, dtype=np.int64)
        if a.shape != (A.shape[1],):
            raise InputError(f"assignment length {a.size} does not match T = {A.shape[1]}")
        if np.any(a >= A.shape[0]) or np.any(a < 0):
            raise InputError("assignment refers to a model outside the matrix")
        score = int(A.values[a, np.arange(a.size)].sum())
        return cls(a, count_switches(a), score, A.failsafe_slots())

    def __len__(self) -> int:
        return self.assignment.size


def compute_trust_matrix(outputs: ModelOutputs, p_max: float = DEFAULT_P_MAX) -> TrustMatrix:
    """Reciprocal mean absolute deviation from the ensemble, capped at ``p_max``.

    The mean runs over all M models including the model itself, so the zero
    self-distance counts in the denominator. Zero deviation maps to ``p_max``.
    """
    if not p_max > 0 or not math.isfinite(p_max):
        raise ConfigError(f"p_max must be a positive finite number, got {p_max}")
    O = outputs.values
    M = O.shape[0]
    # D[i, j] = sum_k |O[i, j] - O[k, j]| / M
    D = np.abs(O[:, None, :] - O[None, :, :]).sum(axis=1) / M
    with np.errstate(divide="ignore"):
        inv = np.where(D > 0, 1.0 / np.where(D > 0, D, 1.0), np.inf)
    return TrustMatrix(np.minimum(p_max, inv), p_max)


def exclusion_bounds(column: np.ndarray, lam: float) -> tuple[float, float]:
    mu = float(np.mean(column))
    sigma = float(np.std(column))
    return mu - lam * sigma, mu + lam * sigma


def exclude_outliers(outputs: ModelOutputs, lam: float = DEFAULT_LAMBDA) -> BinaryTrustMatrix:
    """Mark outputs outside ``mu +/- lam * sigma`` of their slot as untrusted.

    ``sigma`` is the population standard deviation of the slot. Bounds are
    inclusive, so a constant column is fully trusted.
    """
    if not lam > 0:
        raise ConfigError(f"lambda must be positive, got {lam}")
    O = outputs.values
    mu = O.mean(axis=0)
    dev = O - mu
    sigma = np.sqrt((dev**2).mean(axis=0))
    # compare deviations, not raw bounds: keeps the test shift-invariant in floats
    keep = np.abs(dev) <= lam * sigma
    return BinaryTrustMatrix(keep.astype(np.int8))


def plan_trust_score(plan: SelectionPlan, A: BinaryTrustMatrix) -> int:
    """Number of slots whose deployed model is trusted."""
    a = plan.assignment
    M, T = A.shape
    if a.size != T:
        raise InputError(f"plan length {a.size} does not match T = {T}")
    if np.any(a >= M):
        raise InputError("plan refers to a model outside the matrix")
    return int(A.values[a, np.arange(T)].sum())


@dataclass(frozen=True)
class Violation:
    kind: str  # "budget" | "dwell" | "length"
    detail: str
    slot: int | None = None


def validate_plan(plan: SelectionPlan, config: BudgetConfig, T: int | None = None) -> list[Violation]:
    """Return every budget and dwell violation; an empty list means feasible.

    Every maximal run must last at least ``R`` slots, except the final run
    which may be cut short by the horizon.
    """
    out: list[Violation] = []
    if T is not None and len(plan) != T:
        out.append(Violation("length", f"plan covers {len(plan)} slots, expected {T}"))
    switches = count_switches(plan.assignment)
    if switches > config.B:
        out.append(Violation("budget", f"{switches} switches exceed budget {config.B}"))
    runs = run_lengths(plan.assignment)
    for model, start, length in runs[:-1]:
        if length < config.R:
            out.append(
                Violation("dwell", f"model {model} runs {length} slots from {start}, below R = {config.R}", start)
            )
    return out


def is_feasible(plan: SelectionPlan, config: BudgetConfig) -> bool:
    return not validate_plan(plan, config)
