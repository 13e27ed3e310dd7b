"""LP relaxation of the selection problem and a dense two-phase simplex.

Variable layout of the selection LP (all flattened row-major):

* ``a[i, j]`` for model ``i`` and slot ``j`` (``M*T`` variables, bounds [0, 1])
* ``s[i, j]`` for ``j = 1..T-1`` (``M*(T-1)`` variables, bounds [0, inf)),
  the switch mass between slot ``j-1`` and ``j``.

Rows, in order: one ``=`` row per slot (column sums), the linearisation rows
for the switch terms, the budget row, then the optional rate windows.

Two linearisations of ``1/2 * sum |a[i, j] - a[i, j-1]|`` are available:

* ``"abs"``: ``s >= d`` and ``s >= -d`` with ``d = a[i, j] - a[i, j-1]``, and
  the budget row ``0.5 * sum s <= B``.
* ``"positive"`` (default): ``s >= d`` only, budget ``sum s <= B``. Since every
  column sums to one, the changes at a slot sum to zero, so half the total
  absolute change equals the total positive change. Same feasible set in
  ``a``, half the rows, and the simplex runs an order of magnitude faster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from . import kernels
from .core import BinaryTrustMatrix, BudgetConfig
from .errors import ConfigError, InputError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-6


@dataclass(frozen=True)
class LinearProgram:
    """``max c.x`` subject to ``A x (<= | =) b`` and ``lower <= x <= upper``."""

    c: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    var_names: tuple[str, ...] = ()
    row_names: tuple[str, ...] = ()
    shape: tuple[int, int] | None = None

    def __post_init__(self):
        m, n = self.A.shape
        if self.c.shape != (n,) or self.b.shape != (m,) or len(self.senses) != m:
            raise InputError("inconsistent LP dimensions")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise InputError("bounds must have one entry per variable")
        if np.any(self.lower > self.upper):
            raise InputError("lower bound exceeds upper bound")
        if any(s not in ("<=", "=") for s in self.senses):
            raise InputError(f"unsupported constraint sense in {set(self.senses)}")
        if not self.var_names:
            object.__setattr__(self, "var_names", tuple(f"x{k}" for k in range(n)))
        if not self.row_names:
            object.__setattr__(self, "row_names", tuple(f"c{k}" for k in range(m)))

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    iterations: int


@dataclass(frozen=True)
class FractionalSolution:
    values: np.ndarray  # (M, T) in [0, 1]
    objective: float
    switch_vars: np.ndarray  # (M, T-1)
    iterations: int = 0

    def is_integral(self, tol: float = FEAS_TOL) -> bool:
        return bool(np.all(np.minimum(self.values, 1 - self.values) <= tol))


def build_lp(
    A: BinaryTrustMatrix,
    config: BudgetConfig,
    include_rate_windows: bool = False,
    linearization: str = "positive",
) -> LinearProgram:
    M, T = A.shape
    if linearization not in ("positive", "abs"):
        raise InputError(f"unknown linearization {linearization!r}")
    weight = 0.5 if linearization == "abs" else 1.0
    signs = ((1.0, "up"), (-1.0, "dn")) if linearization == "abs" else ((1.0, "up"),)
    config.check_feasible(T)
    if include_rate_windows and config.B == 0:
        raise ConfigError("rate windows need B > 0: window width ceil(T/B) is undefined")

    n_a = M * T
    n_s = M * (T - 1)
    n = n_a + n_s

    def a_idx(i, j):
        return i * T + j

    def s_idx(i, j):  # switch between slot j-1 and j, j >= 1
        return n_a + i * (T - 1) + (j - 1)

    rows: list[np.ndarray] = []
    senses: list[str] = []
    rhs: list[float] = []
    names: list[str] = []

    for j in range(T):
        r = np.zeros(n)
        r[[a_idx(i, j) for i in range(M)]] = 1.0
        rows.append(r)
        senses.append("=")
        rhs.append(1.0)
        names.append(f"slot_{j}")
    for i in range(M):
        for j in range(1, T):
            for sign, tag in signs:
                r = np.zeros(n)
                r[a_idx(i, j)] = sign
                r[a_idx(i, j - 1)] = -sign
                r[s_idx(i, j)] = -1.0
                rows.append(r)
                senses.append("<=")
                rhs.append(0.0)
                names.append(f"abs_{tag}_{i}_{j}")
    r = np.zeros(n)
    r[n_a:] = weight
    rows.append(r)
    senses.append("<=")
    rhs.append(float(config.B))
    names.append("budget")

    if include_rate_windows:
        width = math.ceil(T / config.B)
        # 1-based window starts k = 1 .. T - width; terms j = k .. k + width,
        # the j = 1 term has no predecessor and is dropped
        for k in range(1, T - width + 1):
            r = np.zeros(n)
            for j1 in range(max(k, 2), min(k + width, T) + 1):
                for i in range(M):
                    r[s_idx(i, j1 - 1)] = weight
            rows.append(r)
            senses.append("<=")
            rhs.append(float(config.R))
            names.append(f"rate_{k}")

    c = np.zeros(n)
    c[:n_a] = A.values.astype(float).ravel()
    lower = np.zeros(n)
    upper = np.concatenate([np.ones(n_a), np.full(n_s, np.inf)])
    var_names = tuple(f"a_{i}_{j}" for i in range(M) for j in range(T)) + tuple(
        f"s_{i}_{j}" for i in range(M) for j in range(1, T)
    )
    mat = np.vstack(rows) if rows else np.zeros((0, n))
    return LinearProgram(
        c, mat, tuple(senses), np.asarray(rhs), lower, upper, var_names, tuple(names), shape=(M, T)
    )


def _implied_upper(A: np.ndarray, senses, b: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """Mask of finite upper bounds already implied by a nonnegative equality row."""
    implied = ~np.isfinite(ub)
    for r in np.flatnonzero(np.asarray(senses) == "="):
        row = A[r]
        if np.any(row < 0) or b[r] < 0:
            continue
        nz = row > 0
        cap = np.full(row.shape, np.inf)
        cap[nz] = b[r] / row[nz]
        implied |= cap <= ub + 1e-12
    return implied


def simplex_solve(lp: LinearProgram, max_iter: int | None = None, backend=None, rule: int = 1) -> LPResult:
    """Two-phase dense tableau simplex.

    ``rule=0`` is pure Bland's rule; the default ``rule=1`` prices by the most
    negative reduced cost and falls back to Bland's rule on degenerate
    stretches, so it terminates under the same guarantee with far fewer
    pivots. Variables are shifted to ``y = x - lower >= 0``; finite upper bounds not
    implied by an equality row become extra ``<=`` rows.
    """
    kern = backend or kernels
    if np.any(~np.isfinite(lp.lower)):
        raise InputError("simplex_solve needs finite lower bounds")
    n = lp.n_vars
    A = np.asarray(lp.A, dtype=float)
    b = lp.b - A @ lp.lower
    senses = list(lp.senses)
    span = lp.upper - lp.lower
    extra = np.flatnonzero(~_implied_upper(A, senses, b, span))
    if extra.size:
        bound_rows = np.zeros((extra.size, n))
        bound_rows[np.arange(extra.size), extra] = 1.0
        A = np.vstack([A, bound_rows])
        b = np.concatenate([b, span[extra]])
        senses += ["<="] * extra.size

    m = A.shape[0]
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign
    is_le = np.array([s == "<=" for s in senses])
    # <= rows keep a slack (+1, or -1 as a surplus when flipped); rows needing
    # an artificial are equalities and flipped inequalities
    slack_rows = np.flatnonzero(is_le)
    art_rows = np.flatnonzero(~is_le | (sign < 0))
    k, p = slack_rows.size, art_rows.size
    tab = np.zeros((m + 1, n + k + p + 1))
    tab[:m, :n] = A
    tab[slack_rows, n + np.arange(k)] = sign[slack_rows]
    tab[art_rows, n + k + np.arange(p)] = 1.0
    tab[:m, -1] = b
    basis = np.full(m, -1, dtype=np.int64)
    basis[art_rows] = n + k + np.arange(p)
    direct = slack_rows[sign[slack_rows] > 0]
    basis[direct] = n + np.flatnonzero(sign[slack_rows] > 0)

    limit = max_iter or 50 * (m + n + k + p)
    total = 0
    if p:
        tab[m, n + k :] = 0.0
        tab[m, n + k : n + k + p] = 1.0
        tab[m] -= tab[art_rows].sum(axis=0)
        status, it = kern.simplex_loop(tab, basis, n + k + p, PIVOT_TOL, limit, rule)
        total += it
        if status != kernels.OPTIMAL:
            raise RuntimeError(f"phase 1 simplex did not converge (status {status})")
        if tab[m, -1] < -FEAS_TOL * max(1.0, float(np.abs(b).max())):
            raise ConfigError(f"LP infeasible: phase 1 residual {-tab[m, -1]:.3g}")
        keep = np.ones(m, dtype=bool)
        for r in np.flatnonzero(basis >= n + k):
            cand = np.flatnonzero(np.abs(tab[r, : n + k]) > PIVOT_TOL)
            if cand.size:
                kern.pivot(tab, r, int(cand[0]))
                basis[r] = cand[0]
            else:
                keep[r] = False  # redundant row
        tab = np.ascontiguousarray(np.delete(tab, np.s_[n + k : n + k + p], axis=1))
        keep = np.append(keep, True)
        tab = np.ascontiguousarray(tab[keep])
        basis = np.ascontiguousarray(basis[keep[:-1]])
        m = basis.size

    cost = np.zeros(n + k)
    cost[:n] = lp.c
    tab[m, :] = 0.0
    tab[m, : n + k] = -cost
    cb = cost[basis]
    tab[m] += cb @ tab[:m]
    status, it = kern.simplex_loop(tab, basis, n + k, PIVOT_TOL, limit, rule)
    total += it
    if status == kernels.UNBOUNDED:
        raise RuntimeError("LP unbounded")
    if status != kernels.OPTIMAL:
        raise RuntimeError("simplex iteration limit reached")
    y = np.zeros(n + k)
    y[basis] = tab[:m, -1]
    x = lp.lower + np.clip(y[:n], 0.0, None)
    return LPResult(x, float(lp.c @ x), total)


def solve_lp(lp: LinearProgram, backend=None, rule: int = 1) -> FractionalSolution:
    if lp.shape is None:
        raise InputError("solve_lp needs a selection LP built by build_lp")
    M, T = lp.shape
    res = simplex_solve(lp, backend=backend, rule=rule)
    n_a = M * T
    values = np.clip(res.x[:n_a].reshape(M, T), 0.0, 1.0)
    switch = res.x[n_a:].reshape(M, T - 1)
    return FractionalSolution(values, res.objective, switch, res.iterations)


def lp_upper_bound(
    A: BinaryTrustMatrix, config: BudgetConfig, include_rate_windows: bool = False, linearization: str = "positive"
) -> FractionalSolution:
    return solve_lp(build_lp(A, config, include_rate_windows, linearization))


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _terms(coefs: np.ndarray, names) -> list[str]:
    out = []
    for k in np.flatnonzero(coefs):
        c = coefs[k]
        out.append(f"{'-' if c < 0 else '+'} {_fmt(abs(c))} {names[k]}")
    if out and out[0].startswith("+ "):
        out[0] = out[0][2:]
    return out


def _wrap(head: str, terms: list[str], tail: str = "", per_line: int = 8) -> str:
    lines = []
    for k in range(0, max(len(terms), 1), per_line):
        chunk = " ".join(terms[k : k + per_line])
        lines.append((" " + head if k == 0 else "   ") + " " + chunk)
    lines[-1] += tail
    return "\n".join(lines)


def write_lp(lp: LinearProgram, fh: TextIO) -> None:
    """Write ``lp`` in CPLEX LP text format.

    Sections: ``Maximize`` with one ``obj:`` expression, ``Subject To`` with
    one named row per constraint (``<=`` or ``=``), ``Bounds`` with one line
    per variable, then ``End``. Long expressions wrap onto indented lines.
    """
    names = lp.var_names
    fh.write("\\ trustsel selection LP relaxation\n")
    fh.write("Maximize\n")
    obj = _terms(lp.c, names) or [f"0 {names[0]}"]
    fh.write(_wrap("obj:", obj) + "\n")
    fh.write("Subject To\n")
    for r in range(lp.n_rows):
        terms = _terms(lp.A[r], names) or [f"0 {names[0]}"]
        fh.write(_wrap(f"{lp.row_names[r]}:", terms, f" {lp.senses[r]} {_fmt(lp.b[r])}") + "\n")
    fh.write("Bounds\n")
    for k in range(lp.n_vars):
        lo, hi = lp.lower[k], lp.upper[k]
        if np.isfinite(hi):
            fh.write(f" {_fmt(lo)} <= {names[k]} <= {_fmt(hi)}\n")
        else:
            fh.write(f" {names[k]} >= {_fmt(lo)}\n")
    fh.write("End\n")
