import logging
import math
from dataclasses import dataclass
from typing import Sequence
import numpy as np
from scipy.stats import rankdata, norm
from ..Utils.configuration_parser import Alternative, TestMethod, Decision


EXACT_MAX_N = 25


@dataclass(frozen=True)
class TestResult:
    """
    Outcome of one paired signed-rank test.

    Attributes
    ----------
    statistic : float
        W, the sum of the ranks of the positive differences.
    p_value : float
        In [0, 1].
    n_effective : int
        Number of pairs left once zero differences are dropped.
    method : TestMethod
        Exact enumeration or normal approximation.
    alternative : Alternative
        Sidedness of the test, greater meaning the first sample tends to be larger.
    alpha : float
        Level the decision was taken at (already corrected for multiple comparisons when applicable).
    decision : Decision
        Rejected iff p_value < alpha.
    """
    statistic: float
    p_value: float
    n_effective: int
    method: TestMethod
    alternative: Alternative
    alpha: float
    decision: Decision

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError('p value outside [0, 1]: {}.'.format(self.p_value))
        expected = Decision.Rejected if self.p_value < self.alpha else Decision.NotRejected
        if self.decision != expected:
            raise ValueError('Decision {} inconsistent with p = {} at alpha = {}.'.format(self.decision, self.p_value,
                                                                                     self.alpha))


def signed_rank_counts(n: int) -> np.ndarray:
    """
    Number of subsets of {1, ..., n} summing to each s in [0, n(n+1)/2], i.e. the null distribution of W times 2^n.
    """
    counts = np.zeros(n * (n + 1) // 2 + 1, dtype=np.int64)
    counts[0] = 1
    for rank in range(1, n + 1):
        counts[rank:] = counts[rank:] + counts[:-rank].copy()
    return counts


def __exact_p(w: float, n: int, alternative: Alternative) -> float:
    counts = signed_rank_counts(n)
    total = 2 ** n
    w = int(round(w))
    upper = int(counts[w:].sum()) / total
    lower = int(counts[:w + 1].sum()) / total
    if alternative == Alternative.Greater:
        return upper
    if alternative == Alternative.Less:
        return lower
    return min(1.0, 2.0 * min(upper, lower))


def __normal_p(w: float, ranks: np.ndarray, alternative: Alternative) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_sizes ** 3 - tie_sizes) / 48.0
    sd = math.sqrt(variance)
    upper = float(norm.sf((w - mean - 0.5) / sd))
    lower = float(norm.cdf((w - mean + 0.5) / sd))
    if alternative == Alternative.Greater:
        return upper
    if alternative == Alternative.Less:
        return lower
    return min(1.0, 2.0 * min(upper, lower))


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float], alternative: Alternative = Alternative.Greater,
                         alpha: float = 0.1) -> TestResult:
    """
    Paired Wilcoxon signed-rank test of a against b.

    Zero differences are dropped and tied absolute differences share their midrank. The p value is exact (full
    enumeration of the 2^n sign assignments) when at most 25 pairs remain and no absolute differences tie, and uses
    the tie-corrected normal approximation with a 0.5 continuity correction otherwise.

    Parameters
    ----------
    a, b : sequence of float
        Paired samples of equal length.
    alternative : Alternative
        greater tests whether a tends to exceed b, less the reverse, two_sided either.
    alpha : float
        Level of the reported decision.
    Returns
    -------
    TestResult
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError('Paired samples must be 1D and of equal length ({} vs {}).'.format(a.shape, b.shape))
    if len(a) < 1:
        raise ValueError('Paired samples cannot be empty.')
    if not 0.0 < alpha < 1.0:
        raise ValueError('alpha must lie in (0, 1), got {}.'.format(alpha))

    d = a - b
    d = d[d != 0]
    n = len(d)
    if n == 0:
        raise ValueError('Every paired difference is zero, the test has no effective samples.')
    ranks = rankdata(np.abs(d), method='average')
    w = float(np.sum(ranks[d > 0]))
    ties = len(np.unique(np.abs(d))) < n

    if n <= EXACT_MAX_N and not ties:
        method = TestMethod.Exact
        p_value = __exact_p(w, n, alternative)
    else:
        method = TestMethod.NormalApprox
        p_value = __normal_p(w, ranks, alternative)
    p_value = min(max(p_value, 0.0), 1.0)
    logging.debug('Signed-rank test: W = {}, n = {}, {} p = {:.6f}.'.format(w, n, method, p_value))
    return TestResult(statistic=w, p_value=p_value, n_effective=n, method=method, alternative=alternative,
                      alpha=alpha, decision=Decision.Rejected if p_value < alpha else Decision.NotRejected)
