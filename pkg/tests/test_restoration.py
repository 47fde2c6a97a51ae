import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import random_feasible_plan, transport_cost

from snpshare import SnpMatrix, count_query, noisy_counts, normalize, ot_plan, restore
from snpshare.errors import DimensionError, PreconditionError
from snpshare.restoration import (
    apply_plan,
    cdf_cost,
    genotype_counts,
    laplace_noise,
    laplace_scale,
)

simplex3 = st.tuples(*[st.integers(0, 1000)] * 3).filter(lambda c: sum(c) > 0).map(
    lambda c: np.array(c, dtype=float) / sum(c))


class TestCounts:
    def test_worked_example(self):
        d = SnpMatrix.from_array(np.array([[0, 1, 1, 0, 2, 1, 0, 0, 1, 0]]).T)
        assert count_query(d, 0).tolist() == [5, 4, 1]

    def test_all_zero_column(self):
        d = SnpMatrix.from_array(np.zeros((7, 2), dtype=int))
        assert count_query(d, 1).tolist() == [7, 0, 0]

    def test_sum_to_n(self, rng):
        d = SnpMatrix.from_array(rng.integers(0, 3, size=(33, 9)))
        assert np.all(genotype_counts(d.values).sum(axis=1) == 33)

    def test_out_of_range(self, small_matrix):
        with pytest.raises(IndexError):
            count_query(small_matrix, 3)


class TestLaplace:
    def test_scale(self):
        assert laplace_scale(0.8) == pytest.approx(2.5)

    def test_clamped_nonnegative(self, rng):
        d = SnpMatrix.from_array(rng.integers(0, 3, size=(5, 200)))
        assert (noisy_counts(d, 0.1, seed=3) >= 0).all()

    def test_clamp_rule(self):
        # a zero count receiving negative noise ends at exactly 0
        d = SnpMatrix.from_array(np.zeros((4, 300), dtype=int))
        noise = laplace_noise((300, 3), 0.8, seed=5)
        got = noisy_counts(d, 0.8, seed=5)
        neg = noise[:, 2] < 0
        assert neg.any() and np.all(got[neg, 2] == 0.0)

    def test_unbiased_before_clamp(self):
        draws = laplace_noise((100_000,), 0.8, seed=1)
        se = math.sqrt(2) * 2.5 / math.sqrt(draws.size)
        assert abs((7.0 + draws).mean() - 7.0) < 3 * se

    def test_infinite_budget_is_noiseless(self, small_matrix):
        got = noisy_counts(small_matrix, math.inf, seed=0)
        assert np.array_equal(got, genotype_counts(small_matrix.values))


class TestNormalize:
    def test_basic(self):
        assert normalize([5, 4, 1]).tolist() == pytest.approx([0.5, 0.4, 0.1])

    def test_zero_fallback(self):
        assert normalize([0, 0, 0]).tolist() == pytest.approx([1 / 3] * 3)

    @given(st.tuples(*[st.floats(0, 1e6)] * 3))
    def test_sums_to_one(self, c):
        assert normalize(c).sum() == pytest.approx(1.0, abs=1e-12)


class TestOtPlan:
    def test_identity(self):
        a = np.array([0.2, 0.5, 0.3])
        plan = ot_plan(a, a)
        assert np.allclose(plan.t, np.diag(a)) and plan.cost == 0.0

    def test_half_shift(self):
        plan = ot_plan([0.5, 0.5, 0], [0, 0.5, 0.5])
        assert plan.t[0, 1] == pytest.approx(0.5) and plan.t[1, 2] == pytest.approx(0.5)
        assert plan.cost == pytest.approx(1.0)
        assert cdf_cost([0.5, 0.5, 0], [0, 0.5, 0.5]) == pytest.approx(1.0)

    def test_single_atom(self):
        plan = ot_plan([1, 0, 0], [0, 0, 1])
        assert plan.t[0, 2] == 1.0 and plan.cost == 2.0

    def test_rejects_unnormalised(self):
        with pytest.raises(PreconditionError):
            ot_plan([1, 1, 0], [0, 0, 1])

    @given(simplex3, simplex3)
    def test_feasible_and_optimal(self, a, b):
        plan = ot_plan(a, b)
        assert (plan.t >= 0).all()
        assert np.allclose(plan.t.sum(axis=1), a, atol=1e-9)
        assert np.allclose(plan.t.sum(axis=0), b, atol=1e-9)
        assert plan.t.sum() == pytest.approx(1.0, abs=1e-9)
        assert plan.cost == pytest.approx(cdf_cost(a, b), abs=1e-9)

    def test_beats_random_plans(self, rng):
        for _ in range(10):
            a, b = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
            best = ot_plan(a, b).cost
            for _ in range(200):
                t = random_feasible_plan(rng, a, b)
                assert np.allclose(t.sum(axis=1), a) and np.allclose(t.sum(axis=0), b)
                assert best <= transport_cost(t) + 1e-12


def _column(counts):
    return np.repeat(np.arange(3), counts)[:, None].astype(np.int8)


class TestApplyPlan:
    def test_diagonal_plan_leaves_column(self):
        col = _column([4, 3, 3])
        before = col.copy()
        apply_plan(col, 0, ot_plan([0.4, 0.3, 0.3], [0.4, 0.3, 0.3]), seed=0)
        assert np.array_equal(col, before)

    def test_moves_floor_of_mass(self):
        col = _column([10, 0, 0])
        plan = ot_plan([1, 0, 0], [0.5, 0.5, 0])
        moved = apply_plan(col, 0, plan, seed=1)
        assert moved[0, 1] == 5
        assert np.bincount(col[:, 0], minlength=3).tolist() == [5, 5, 0]

    def test_seed_controls_which_rows(self):
        a, b = _column([20, 0, 0]), _column([20, 0, 0])
        plan = ot_plan([1, 0, 0], [0.5, 0.5, 0])
        apply_plan(a, 0, plan, seed=1)
        apply_plan(b, 0, plan, seed=2)
        assert not np.array_equal(a, b)

    def test_rounding_bound_exhaustive(self):
        """Every source composition for n <= 9 against a grid of targets."""
        grid = [np.array(c) / 6 for c in itertools.product(range(7), repeat=3) if sum(c) == 6]
        worst = 0.0
        for n in range(1, 10):
            for c0 in range(n + 1):
                for c1 in range(n - c0 + 1):
                    counts = [c0, c1, n - c0 - c1]
                    for target in grid:
                        col = _column(counts)
                        apply_plan(col, 0, ot_plan(np.array(counts) / n, target), seed=n)
                        assert set(np.unique(col)) <= {0, 1, 2} and col.shape == (n, 1)
                        got = np.bincount(col[:, 0], minlength=3)
                        worst = max(worst, np.abs(got - n * target).sum())
        assert worst <= 9


class TestRestore:
    def test_noiseless_identity(self, rng):
        d = SnpMatrix.from_array(rng.integers(0, 3, size=(30, 12)))
        assert restore(d, d, math.inf, seed=0) == d

    def test_moves_toward_target(self, rng):
        orig = SnpMatrix.from_array(rng.binomial(2, 0.15, size=(200, 25)))
        tilde = SnpMatrix.from_array(rng.integers(0, 3, size=(200, 25)))
        out = restore(tilde, orig, 1.0, seed=8)
        target = np.array([normalize(c) for c in noisy_counts(orig, 1.0, seed=8)])
        gap_before = np.abs(genotype_counts(tilde.values) / 200 - target).sum(axis=1)
        gap_after = np.abs(genotype_counts(out.values) / 200 - target).sum(axis=1)
        assert np.all(gap_after < gap_before)
        assert np.all(gap_after <= 9 / 200)

    def test_deterministic(self, rng):
        orig = SnpMatrix.from_array(rng.integers(0, 3, size=(50, 10)))
        tilde = SnpMatrix.from_array(rng.integers(0, 3, size=(50, 10)))
        assert restore(tilde, orig, 0.5, seed=3) == restore(tilde, orig, 0.5, seed=3)

    def test_diagnostics_records(self, rng):
        orig = SnpMatrix.from_array(rng.integers(0, 3, size=(20, 4)))
        diag = []
        restore(orig, orig, 1.0, seed=0, diagnostics=diag)
        assert len(diag) == 4
        assert set(diag[0]) == {"snp", "raw_counts", "noisy_counts", "perturbed_counts",
                                "plan", "achieved_counts"}

    def test_dimension_mismatch(self, small_matrix):
        other = SnpMatrix.from_array(np.zeros((3, 3), dtype=int))
        with pytest.raises(DimensionError):
            restore(small_matrix, other, 1.0, seed=0)
