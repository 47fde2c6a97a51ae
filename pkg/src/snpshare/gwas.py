"""Case/control association tests, SNP ranking and finding validation.

All tests work on the 3x2 genotype table of one SNP. The vectorised
``*_arrays`` helpers take (m, 3) case and control count tables and evaluate
every SNP at once; the scalar functions wrap them for a single table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, UndefinedTestError
from .restoration import genotype_counts
from .special import chi2_logsf, normal_two_sided_logp

CHI2 = "chi2"
ODDS_RATIO = "odds_ratio"
TESTS = (CHI2, ODDS_RATIO)
Z_95 = 1.96
_WINDOW_EPS = 1e-9


@dataclass(frozen=True)
class ContingencyTable:
    case: np.ndarray  # S0, S1, S2
    control: np.ndarray  # R0, R1, R2

    def __post_init__(self):
        case = np.asarray(self.case, dtype=np.float64).reshape(3)
        control = np.asarray(self.control, dtype=np.float64).reshape(3)
        if (case < 0).any() or (control < 0).any():
            raise PreconditionError("contingency counts must be non-negative")
        object.__setattr__(self, "case", case)
        object.__setattr__(self, "control", control)

    @property
    def S(self):
        return float(self.case.sum())

    @property
    def R(self):
        return float(self.control.sum())

    @property
    def totals(self):
        return self.case + self.control

    @property
    def t(self):
        return self.S + self.R


@dataclass(frozen=True)
class OddsRatioResult:
    odds_ratio: float
    ci_low: float
    ci_high: float
    z: float
    p_value: float
    se: float

    def __iter__(self):
        return iter((self.odds_ratio, self.ci_low, self.ci_high, self.z, self.p_value))


@dataclass(frozen=True)
class SnpRanking:
    """SNPs ordered from most to least significant.

    ``statistic``, ``p_value`` and ``log_p`` are indexed by column; ``order``
    lists column indices by rank. Untestable SNPs carry p = 1 and come last.
    """

    order: np.ndarray
    statistic: np.ndarray
    p_value: np.ndarray
    log_p: np.ndarray
    valid: np.ndarray
    test: str = CHI2

    @property
    def m(self):
        return self.order.shape[0]

    def top(self, k):
        return self.order[:k]

    def ranks(self):
        """0-based rank of every column."""
        r = np.empty(self.m, dtype=np.int64)
        r[self.order] = np.arange(self.m)
        return r

    def rows(self):
        return [(int(j), float(self.statistic[j]), float(self.p_value[j])) for j in self.order]


@dataclass(frozen=True)
class ValidationReport:
    omega: float
    zeta: float
    window: int
    n_reported: int
    n_retained: int
    retention_ratio: float
    threshold: float
    verdict: str

    def to_dict(self):
        return dict(self.__dict__)


def contingency(case, control, j):
    if case.n < 1 or control.n < 1:
        raise PreconditionError("case and control groups must be non-empty")
    if not (0 <= j < case.m and j < control.m):
        raise IndexError(f"SNP index {j} out of range")
    return ContingencyTable(np.bincount(case.values[:, j], minlength=3),
                            np.bincount(control.values[:, j], minlength=3))


def chi_square_arrays(S, R):
    """Pearson chi-square for (m, 3) tables. Returns (stat, df, log_p, valid).

    Genotype columns with zero total are dropped and df shrinks with them.
    """
    S = np.asarray(S, dtype=np.float64)
    R = np.asarray(R, dtype=np.float64)
    col = S + R
    s_tot = S.sum(axis=1, keepdims=True)
    r_tot = R.sum(axis=1, keepdims=True)
    total = s_tot + r_tot
    keep = col > 0
    df = keep.sum(axis=1) - 1
    valid = (df >= 1) & (s_tot[:, 0] > 0) & (r_tot[:, 0] > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        es = s_tot * col / total
        er = r_tot * col / total
        cells = (S - es) ** 2 / es + (R - er) ** 2 / er
    stat = np.where(keep, cells, 0.0).sum(axis=1)
    stat = np.where(valid, stat, np.nan)
    log_p = np.zeros(stat.shape)
    if valid.any():
        log_p[valid] = np.minimum(chi2_logsf(stat[valid], df[valid]), 0.0)
    return stat, df, log_p, valid


def chi_square(table):
    """(statistic, p_value) of the 3x2 genotype table."""
    stat, df, log_p, valid = chi_square_arrays(table.case[None], table.control[None])
    if not valid[0]:
        raise UndefinedTestError("chi-square needs both groups non-empty and two genotypes observed")
    return float(stat[0]), float(math.exp(log_p[0]))


def odds_ratio_arrays(S, R):
    """Dominant-model odds ratio (carriers of >= 1 minor allele) for (m, 3) tables.

    Returns (or, se, z, log_p, valid). A 0.5 correction is added to all four
    cells of any table with an empty cell.
    """
    S = np.asarray(S, dtype=np.float64)
    R = np.asarray(R, dtype=np.float64)
    s0, s12 = S[:, 0], S[:, 1] + S[:, 2]
    r0, r12 = R[:, 0], R[:, 1] + R[:, 2]
    cells = np.stack([s0, s12, r0, r12], axis=1)
    cells = np.where((cells == 0).any(axis=1, keepdims=True), cells + 0.5, cells)
    valid = (cells > 0).all(axis=1)
    s0, s12, r0, r12 = cells.T
    with np.errstate(divide="ignore", invalid="ignore"):
        or_ = r0 * s12 / (s0 * r12)
        se = np.sqrt(1 / s12 + 1 / s0 + 1 / r12 + 1 / r0)
        z = np.log(or_) / se
    log_p = np.where(valid, normal_two_sided_logp(np.where(valid, z, 0.0)), 0.0)
    return or_, se, z, log_p, valid


def odds_ratio(table):
    or_, se, z, log_p, valid = odds_ratio_arrays(table.case[None], table.control[None])
    if not valid[0]:
        raise UndefinedTestError("odds ratio undefined: empty aggregate cell")
    o, s = float(or_[0]), float(se[0])
    half = Z_95 * s
    return OddsRatioResult(o, math.exp(math.log(o) - half), math.exp(math.log(o) + half),
                           float(z[0]), float(math.exp(log_p[0])), s)


def rank_snps(case, control, test=CHI2):
    """Rank all SNPs by ascending p-value; ties fall back to column index."""
    if case.m != control.m:
        raise PreconditionError(f"case has {case.m} SNPs, control has {control.m}")
    if case.n < 1 or control.n < 1:
        raise PreconditionError("case and control groups must be non-empty")
    S = genotype_counts(case.values)
    R = genotype_counts(control.values)
    if test == CHI2:
        stat, _, log_p, valid = chi_square_arrays(S, R)
    elif test == ODDS_RATIO:
        stat, _, _, log_p, valid = odds_ratio_arrays(S, R)
    else:
        raise PreconditionError(f"unknown test {test!r}; choose from {TESTS}")
    log_p = np.where(valid, log_p, 0.0)
    idx = np.arange(case.m)
    order = np.lexsort((idx, log_p, ~valid))
    return SnpRanking(order, stat, np.exp(log_p), log_p, valid, test)


def _floor_count(x):
    return int(math.floor(x + _WINDOW_EPS))


def shift_findings(ranking, omega, delta):
    """Columns at ranks omega*m*delta + 1 .. omega*m*(1 + delta) (1-based)."""
    if omega <= 0 or delta < 0:
        raise PreconditionError("omega must be > 0 and delta >= 0")
    m = ranking.m
    start = _floor_count(omega * m * delta)
    stop = _floor_count(omega * m * (1 + delta))
    if stop > m:
        raise PreconditionError(f"window ends at rank {stop} > m = {m}")
    return [int(j) for j in ranking.order[start:stop]]


def retention_window(m, omega, zeta):
    if not 0 < zeta <= 1:
        raise PreconditionError(f"zeta must lie in (0, 1], got {zeta}")
    return min(m, _floor_count(omega / zeta * m))


def validate(reported, shared_ranking, omega, zeta, threshold):
    """Share of reported SNPs found in the top (omega / zeta) * m of the shared ranking."""
    if not 0 <= threshold <= 1:
        raise PreconditionError(f"threshold must lie in [0, 1], got {threshold}")
    reported = {int(j) for j in reported}
    if not reported:
        raise PreconditionError("no reported SNPs to validate")
    window = retention_window(shared_ranking.m, omega, zeta)
    retained = len(reported & set(shared_ranking.top(window).tolist()))
    ratio = retained / len(reported)
    return ValidationReport(
        omega=omega, zeta=zeta, window=window, n_reported=len(reported),
        n_retained=retained, retention_ratio=ratio, threshold=threshold,
        verdict="reproducible" if ratio >= threshold else "suspicious",
    )
