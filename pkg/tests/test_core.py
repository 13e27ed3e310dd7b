import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from trustsel.core import (
    BinaryTrustMatrix,
    BudgetConfig,
    ModelOutputs,
    SelectionPlan,
    compute_trust_matrix,
    count_switches,
    exclude_outliers,
    exclusion_bounds,
    plan_trust_score,
    run_lengths,
    validate_plan,
)
from trustsel.errors import ConfigError, InputError


def trust_column(col, p_max=10.0):
    return compute_trust_matrix(ModelOutputs(np.array(col, dtype=float)[:, None]), p_max).values[:, 0]


def binary_column(col, lam):
    return exclude_outliers(ModelOutputs(np.array(col, dtype=float)[:, None]), lam).values[:, 0]


def reference_trust(O, p_max):
    M, T = O.shape
    out = np.empty_like(O)
    for i in range(M):
        for j in range(T):
            D = sum(abs(O[i, j] - O[k, j]) for k in range(M)) / M
            out[i, j] = p_max if D == 0 else min(p_max, 1.0 / D)
    return out


class TestTrustMatrix:
    def test_identical_outputs_saturate(self):
        assert trust_column([5.0, 5.0, 5.0]).tolist() == [10.0, 10.0, 10.0]

    def test_two_models(self):
        np.testing.assert_allclose(trust_column([0.0, 4.0]), [0.5, 0.5], atol=1e-9)

    def test_three_models(self):
        np.testing.assert_allclose(trust_column([0.0, 3.0, 30.0]), [1 / 11, 1 / 10, 1 / 19], atol=1e-9)

    def test_matches_loop_reference(self):
        rng = np.random.default_rng(3)
        O = rng.normal(0, 2, size=(6, 20))
        O[:, 4] = 1.5
        np.testing.assert_allclose(compute_trust_matrix(ModelOutputs(O), 7.0).values, reference_trust(O, 7.0), rtol=1e-12)

    def test_values_within_cap(self):
        rng = np.random.default_rng(1)
        t = compute_trust_matrix(ModelOutputs(rng.normal(size=(5, 50)) * 0.01), 3.0).values
        assert np.all((t >= 0) & (t <= 3.0))

    @pytest.mark.parametrize("p_max", [0.0, -1.0, float("inf"), float("nan")])
    def test_bad_cap(self, p_max):
        with pytest.raises(ConfigError):
            compute_trust_matrix(ModelOutputs(np.ones((2, 2))), p_max)

    def test_non_finite_outputs_rejected(self):
        with pytest.raises(InputError):
            ModelOutputs(np.array([[1.0, np.nan]]))

    def test_duplicate_ids_rejected(self):
        with pytest.raises(InputError):
            ModelOutputs(np.zeros((2, 3)), ("a", "a"))

    def test_arrays_are_read_only(self):
        out = ModelOutputs(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            out.values[0, 0] = 1.0


class TestExclusion:
    def test_constant_column_is_trusted(self):
        assert binary_column([7, 7, 7], 0.1).tolist() == [1, 1, 1]

    def test_single_outlier(self):
        lo, hi = exclusion_bounds(np.array([0, 0, 0, 0, 100.0]), 1.5)
        assert (lo, hi) == pytest.approx((-40.0, 80.0))
        assert binary_column([0, 0, 0, 0, 100], 1.5).tolist() == [1, 1, 1, 1, 0]

    def test_all_excluded_marks_failsafe(self):
        assert binary_column([10, 12], 0.5).tolist() == [0, 0]
        A = exclude_outliers(ModelOutputs(np.array([[10.0, 1.0], [12.0, 1.0]])), 0.5)
        assert A.failsafe_slots() == frozenset({0})

    def test_bad_lambda(self):
        with pytest.raises(ConfigError):
            exclude_outliers(ModelOutputs(np.ones((2, 2))), 0.0)

    # Exact floating point: scaling by powers of two is exact, translation is
    # checked away from the boundary so rounding cannot flip a comparison.
    columns = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=9)

    @settings(max_examples=300, deadline=None)
    @given(columns, st.floats(0.05, 3.0), st.integers(-20, 20))
    def test_power_of_two_scaling(self, col, lam, e):
        assert binary_column(np.array(col) * 2.0**e, lam).tolist() == binary_column(col, lam).tolist()

    @settings(max_examples=300, deadline=None)
    @given(columns, st.floats(0.05, 3.0), st.floats(-1e3, 1e3))
    def test_translation(self, col, lam, c):
        x = np.array(col)
        dev = np.abs(x - x.mean())
        margin = np.abs(dev - lam * x.std())
        assume(np.all(margin > 1e-6 * (1 + np.abs(x).max() + abs(c))))
        assert binary_column(x + c, lam).tolist() == binary_column(x, lam).tolist()

    @settings(max_examples=300, deadline=None)
    @given(columns, st.floats(0.05, 3.0), st.floats(0.05, 3.0))
    def test_lambda_monotone(self, col, l1, l2):
        lo, hi = sorted((l1, l2))
        assert np.all(binary_column(col, lo) <= binary_column(col, hi))


class TestPlans:
    A = BinaryTrustMatrix(np.array([[1, 0], [0, 1]], dtype=np.int8))

    def test_identity_score(self):
        assert plan_trust_score(SelectionPlan.from_assignment([0, 1], self.A), self.A) == 2

    def test_all_one_and_all_zero_rows(self):
        A = BinaryTrustMatrix(np.array([[1, 1, 1], [0, 0, 0]], dtype=np.int8))
        assert SelectionPlan.from_assignment([0, 0, 0], A).trust_score == 3
        assert SelectionPlan.from_assignment([1, 1, 1], A).trust_score == 0

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            SelectionPlan.from_assignment([0, 1, 0], self.A)

    def test_score_invariant_under_row_permutation(self):
        rng = np.random.default_rng(7)
        V = (rng.random((5, 12)) < 0.5).astype(np.int8)
        a = rng.integers(0, 5, 12)
        perm = rng.permutation(5)
        inv = np.argsort(perm)
        A1, A2 = BinaryTrustMatrix(V), BinaryTrustMatrix(V[perm])
        assert SelectionPlan.from_assignment(a, A1).trust_score == SelectionPlan.from_assignment(inv[a], A2).trust_score

    def test_runs_and_switches(self):
        a = [2, 2, 0, 0, 0, 1]
        assert count_switches(a) == 2
        assert run_lengths(a) == [(2, 0, 2), (0, 2, 3), (1, 5, 1)]


class TestValidatePlan:
    A8 = BinaryTrustMatrix(np.ones((2, 8), dtype=np.int8))

    def plan(self, a):
        return SelectionPlan.from_assignment(a, self.A8)

    def test_feasible(self):
        assert validate_plan(self.plan([0] * 4 + [1] * 4), BudgetConfig(B=1, R=4)) == []

    def test_dwell_violation(self):
        v = validate_plan(self.plan([0] * 2 + [1] * 6), BudgetConfig(B=1, R=4))
        assert [x.kind for x in v] == ["dwell"] and v[0].slot == 0

    def test_budget_violation(self):
        v = validate_plan(self.plan([0] * 2 + [1] * 2 + [0] * 4), BudgetConfig(B=1, R=2))
        assert [x.kind for x in v] == ["budget"]

    def test_final_run_exempt(self):
        assert validate_plan(self.plan([0] * 6 + [1] * 2), BudgetConfig(B=1, R=4)) == []

    def test_length_check(self):
        assert [x.kind for x in validate_plan(self.plan([0] * 8), BudgetConfig(B=0, R=1), T=9)] == ["length"]


class TestBudgetConfig:
    @pytest.mark.parametrize("kw", [dict(B=-1), dict(R=0), dict(H0=1.0), dict(eps=0.0), dict(lam=-1.0)])
    def test_rejects_bad_fields(self, kw):
        with pytest.raises(ConfigError):
            BudgetConfig(**kw)

    def test_horizon_too_short(self):
        with pytest.raises(ConfigError):
            BudgetConfig(B=3, R=4).check_feasible(15)
        BudgetConfig(B=3, R=4).check_feasible(16)
