import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple
import numpy as np
import pandas as pd
from ..Utils.configuration_parser import Alternative, TestMethod, Decision
from .wilcoxon import TestResult, wilcoxon_signed_rank


def bonferroni_alpha(alpha: float, m: int) -> float:
    """
    Per-hypothesis level when m hypotheses are tested at family level alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError('alpha must lie in (0, 1), got {}.'.format(alpha))
    if int(m) != m or m < 1:
        raise ValueError('The number of hypotheses must be a positive integer, got {}.'.format(m))
    return alpha / m


@dataclass(frozen=True)
class PairComparison:
    first: str
    second: str
    result: TestResult

    @property
    def pair(self) -> str:
        return '{} vs. {}'.format(self.first, self.second)


@dataclass(frozen=True)
class ComparisonMatrix:
    """
    Pairwise signed-rank tests of one criterion over a family of series, each decided at the Bonferroni level.

    Attributes
    ----------
    criterion : str
        Compared quantity, e.g. 'auc'.
    alpha : float
        Family-wise level before correction.
    corrected_alpha : float
        alpha / m.
    m : int
        Number of pairs tested.
    comparisons : List[PairComparison]
        One entry per unordered pair.
    """
    criterion: str
    alpha: float
    corrected_alpha: float
    m: int
    comparisons: List[PairComparison]

    def __post_init__(self):
        if self.m != len(self.comparisons):
            raise ValueError('m ({}) must equal the number of tested pairs ({}).'.format(self.m,
                                                                                       len(self.comparisons)))

    def result(self, first: str, second: str) -> TestResult:
        for c in self.comparisons:
            if (c.first, c.second) == (first, second) or (c.first, c.second) == (second, first):
                return c.result
        raise ValueError('No comparison between {} and {}.'.format(first, second))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{'Pair': c.pair, 'Criterion': self.criterion, 'Alternative': str(c.result.alternative),
                              'W': c.result.statistic, 'N': c.result.n_effective, 'Method': str(c.result.method),
                              'p value': c.result.p_value, 'Alpha': self.corrected_alpha,
                              'Decision': str(c.result.decision)} for c in self.comparisons])

    def to_markdown(self) -> str:
        """
        Table with one row per pair: pair, criterion, p value (4 decimals) and decision.
        """
        frame = self.to_frame()[['Pair', 'Criterion', 'p value', 'Decision']]
        header = '{} (alpha = {:.4g}, m = {})'.format(self.criterion, self.corrected_alpha, self.m)
        return '{}\n\n{}\n'.format(header, frame.to_markdown(index=False, floatfmt='.4f'))


def pairwise_comparison(series: Dict[str, Sequence[float]], criterion: str, alpha: float = 0.1,
                        alternative: Alternative = Alternative.Greater,
                        orient_by_mean: bool = False) -> ComparisonMatrix:
    """
    Tests every unordered pair of series with the signed-rank test at the Bonferroni-corrected level.

    Parameters
    ----------
    series : dict
        Name -> per-repeat values, all of the same length. Pairs follow the insertion order of the names.
    criterion : str
        Name of the compared metric, reported in the tables.
    alpha : float
        Family-wise level.
    alternative : Alternative
        Sidedness of every test.
    orient_by_mean : bool
        Swaps a pair when the second series has the larger mean, so that directional tests ask whether the
        better-looking series is significantly better.
    Returns
    -------
    ComparisonMatrix
    """
    if len(series) < 2:
        raise ValueError('At least two series are needed for a pairwise comparison.')
    lengths = {name: len(values) for name, values in series.items()}
    if len(set(lengths.values())) != 1:
        raise ValueError('Every series must hold the same number of values, got {}.'.format(lengths))

    pairs = list(itertools.combinations(list(series.keys()), 2))
    corrected = bonferroni_alpha(alpha, len(pairs))
    comparisons = []
    for first, second in pairs:
        if orient_by_mean and np.mean(series[second]) > np.mean(series[first]):
            first, second = second, first
        if np.array_equal(np.asarray(series[first], dtype=np.float64), np.asarray(series[second], dtype=np.float64)):
            logging.warning('{} and {} are identical on {}, reported as not rejected.'.format(first, second, criterion))
            result = TestResult(statistic=0.0, p_value=1.0, n_effective=0, method=TestMethod.Exact,
                                alternative=alternative, alpha=corrected, decision=Decision.NotRejected)
        else:
            result = wilcoxon_signed_rank(series[first], series[second], alternative=alternative, alpha=corrected)
        comparisons.append(PairComparison(first=first, second=second, result=result))
        logging.debug('{} {} vs. {}: p = {:.4f} ({}).'.format(criterion, first, second, result.p_value,
                                                              result.decision))
    return ComparisonMatrix(criterion=criterion, alpha=alpha, corrected_alpha=corrected, m=len(pairs),
                            comparisons=comparisons)


def five_number_summary(values: Sequence[float]) -> Tuple[float, float, float, float, float]:
    """
    Minimum, first quartile, median, third quartile and maximum, as drawn by a box plot.
    """
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        raise ValueError('Cannot summarize an empty series.')
    q = np.percentile(values, [0, 25, 50, 75, 100])
    return float(q[0]), float(q[1]), float(q[2]), float(q[3]), float(q[4])


def summary_frame(series: Dict[str, Sequence[float]]) -> pd.DataFrame:
    rows = []
    for name, values in series.items():
        minimum, q1, median, q3, maximum = five_number_summary(values)
        rows.append({'Series': name, 'Mean': float(np.mean(values)), 'SD': float(np.std(values, ddof=1)),
                     'Min': minimum, 'Q1': q1, 'Median': median, 'Q3': q3, 'Max': maximum})
    return pd.DataFrame(rows)
