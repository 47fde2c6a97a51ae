import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import pearson_chi2

from snpshare import SnpMatrix, chi_square, contingency, odds_ratio, rank_snps, shift_findings, validate
from snpshare.errors import PreconditionError, UndefinedTestError
from snpshare.gwas import CHI2, ODDS_RATIO, ContingencyTable, SnpRanking, retention_window
from snpshare.special import chi2_logsf, chi2_sf, normal_sf

TABLE = ContingencyTable([10, 20, 30], [30, 20, 10])
counts = st.tuples(*[st.integers(0, 60)] * 3)


def _ranking(order):
    m = len(order)
    p = np.empty(m)
    p[np.asarray(order)] = np.linspace(1e-6, 1, m)
    return SnpRanking(np.asarray(order), p, p, np.log(p), np.ones(m, bool))


class TestSpecial:
    def test_chi2_df2_closed_form(self):
        assert chi2_sf(20.0, 2) == pytest.approx(math.exp(-10), rel=1e-12)

    @pytest.mark.parametrize("x", [0.0, 0.5, 3.84, 20.0, 75.0])
    @pytest.mark.parametrize("df", [1, 2, 3])
    def test_chi2_against_mpmath(self, x, df):
        want = float(mpmath.gammainc(mpmath.mpf(df) / 2, mpmath.mpf(x) / 2,
                                     regularized=True)) if x > 0 else 1.0
        assert chi2_sf(x, df) == pytest.approx(want, rel=1e-10)
        assert chi2_logsf(x, df) == pytest.approx(math.log(want), rel=1e-10, abs=1e-14)

    def test_logsf_beyond_underflow(self):
        assert chi2_logsf(3000.0, 2) == -1500.0
        assert np.isfinite(chi2_logsf(3000.0, 1))

    def test_normal_sf(self):
        assert normal_sf(0.0) == 0.5
        assert normal_sf(1.959964) == pytest.approx(0.025, abs=1e-6)
        want = float(mpmath.erfc(mpmath.mpf("3.5") / mpmath.sqrt(2)) / 2)
        assert normal_sf(3.5) == pytest.approx(want, rel=1e-10)

    def test_domain(self):
        with pytest.raises(PreconditionError):
            chi2_sf(-1.0, 2)


class TestContingency:
    def test_counts(self):
        case = SnpMatrix.from_array([[0], [1], [2]])
        control = SnpMatrix.from_array([[2], [2], [0]])
        t = contingency(case, control, 0)
        assert t.case.tolist() == [1, 1, 1] and t.control.tolist() == [1, 0, 2]
        assert t.totals.tolist() == [2, 1, 3] and t.t == 6


class TestChiSquare:
    def test_worked_example(self):
        stat, p = chi_square(TABLE)
        assert stat == pytest.approx(20.0, rel=1e-12)
        assert p == pytest.approx(math.exp(-10), rel=1e-9)

    def test_equal_groups(self):
        assert chi_square(ContingencyTable([3, 5, 2], [3, 5, 2])) == (0.0, 1.0)

    def test_empty_column_reduces_df(self):
        stat, p = chi_square(ContingencyTable([10, 5, 0], [5, 10, 0]))
        want, df = pearson_chi2([10, 5, 0], [5, 10, 0])
        assert df == 1 and stat == pytest.approx(want)
        assert p == pytest.approx(math.erfc(math.sqrt(want / 2)), rel=1e-10)

    def test_undefined(self):
        with pytest.raises(UndefinedTestError):
            chi_square(ContingencyTable([4, 0, 0], [6, 0, 0]))
        with pytest.raises(UndefinedTestError):
            chi_square(ContingencyTable([4, 1, 0], [0, 0, 0]))

    @given(counts, counts)
    def test_properties(self, s, r):
        t = ContingencyTable(s, r)
        if sum(s) == 0 or sum(r) == 0 or sum(1 for a, b in zip(s, r) if a + b) < 2:
            return
        stat, p = chi_square(t)
        want, _ = pearson_chi2(s, r)
        assert stat == pytest.approx(want, rel=1e-9, abs=1e-12)
        assert stat >= 0 and 0 < p <= 1
        assert chi_square(ContingencyTable(r, s)) == pytest.approx((stat, p), rel=1e-12)
        perm = [2, 0, 1]
        swapped = ContingencyTable([s[k] for k in perm], [r[k] for k in perm])
        assert chi_square(swapped)[0] == pytest.approx(stat, rel=1e-9, abs=1e-12)


class TestOddsRatio:
    def test_worked_example(self):
        res = odds_ratio(TABLE)
        se = math.sqrt(1 / 50 + 1 / 10 + 1 / 30 + 1 / 30)
        z = math.log(5.0) / se
        p = float(mpmath.erfc(mpmath.mpf(z) / mpmath.sqrt(2)))
        assert res.odds_ratio == pytest.approx(5.0, rel=1e-12)
        assert res.se == pytest.approx(0.43205, abs=1e-5)
        assert res.z == pytest.approx(3.7251, abs=1e-4)
        assert res.p_value == pytest.approx(p, rel=1e-9)
        assert res.p_value == pytest.approx(1.95e-4, rel=0.01)
        assert res.ci_low == pytest.approx(math.exp(math.log(5) - 1.96 * se))

    def test_symmetric_table(self):
        res = odds_ratio(ContingencyTable([4, 4, 4], [4, 4, 4]))
        assert (res.odds_ratio, res.z, res.p_value) == (1.0, 0.0, 1.0)

    def test_zero_cell_correction(self):
        res = odds_ratio(ContingencyTable([0, 5, 5], [5, 5, 0]))
        assert res.odds_ratio == pytest.approx(5.5 * 10.5 / (0.5 * 5.5))

    @given(counts, counts)
    def test_ci_contains_or(self, s, r):
        if sum(s) == 0 or sum(r) == 0:
            return
        res = odds_ratio(ContingencyTable(s, r))
        assert res.ci_low <= res.odds_ratio <= res.ci_high
        assert 0 < res.p_value <= 1


class TestRanking:
    def test_identical_groups_keep_column_order(self, rng):
        d = SnpMatrix.from_array(rng.integers(0, 3, size=(20, 15)))
        rk = rank_snps(d, d)
        assert rk.order.tolist() == list(range(15))
        assert np.all(rk.p_value == 1.0)

    @pytest.mark.parametrize("test", [CHI2, ODDS_RATIO])
    def test_permutation_and_monotone(self, gwas_data, test):
        case, control = gwas_data
        rk = rank_snps(case, control, test)
        assert sorted(rk.order.tolist()) == list(range(case.m))
        assert np.all(np.diff(rk.log_p[rk.order]) >= 0)

    def test_planted_on_top(self, gwas_data):
        case, control = gwas_data
        assert np.mean(rank_snps(case, control).top(50) < 50) >= 0.9

    def test_untestable_ranked_last(self):
        case = SnpMatrix.from_array([[0, 0, 1], [0, 1, 2]])
        control = SnpMatrix.from_array([[0, 2, 1], [0, 2, 2]])
        rk = rank_snps(case, control)
        assert rk.order[-1] == 0 and rk.p_value[0] == 1.0 and not rk.valid[0]

    def test_idempotent(self, gwas_data):
        case, control = gwas_data
        assert np.array_equal(rank_snps(case, control).order, rank_snps(case, control).order)


class TestShiftAndValidate:
    RANK = _ranking(list(range(10)))

    @pytest.mark.parametrize("delta,want", [(0, [0, 1]), (0.5, [1, 2]), (1.0, [2, 3])])
    def test_worked_examples(self, delta, want):
        assert shift_findings(self.RANK, 0.2, delta) == want

    def test_window_overflow(self):
        with pytest.raises(PreconditionError):
            shift_findings(self.RANK, 0.5, 1.5)

    def test_retention_window(self):
        assert retention_window(1000, 0.05, 0.7) == 71
        assert retention_window(100, 0.05, 0.7) == 7

    def test_full_and_empty_retention(self):
        assert validate([0, 1], self.RANK, 0.2, 0.7, 0.5).retention_ratio == 1.0
        rep = validate([8, 9], self.RANK, 0.2, 0.7, 0.5)
        assert rep.retention_ratio == 0.0 and rep.verdict == "suspicious"

    def test_empty_reported(self):
        with pytest.raises(PreconditionError):
            validate([], self.RANK, 0.2, 0.7, 0.5)

    def test_true_findings_on_original_data(self, gwas_data):
        case, control = gwas_data
        rk = rank_snps(case, control)
        for zeta in (0.3, 0.7, 1.0):
            rep = validate(shift_findings(rk, 0.05, 0.0), rk, 0.05, zeta, 1.0)
            assert rep.retention_ratio == 1.0 and rep.verdict == "reproducible"
