import logging
from dataclasses import dataclass
from typing import List
import numpy as np
from scipy.stats import rankdata, chi2_contingency, entropy
from ..Utils.dataset import Dataset
from ..Utils.configuration_parser import FeatureSelectionMethod


SCORED_METHODS = [FeatureSelectionMethod.Gini, FeatureSelectionMethod.ChiSquare, FeatureSelectionMethod.Correlation,
                  FeatureSelectionMethod.Information]
NUMBER_BINS = 10


@dataclass(frozen=True)
class FeatureScore:
    feature: str
    score: float
    method: FeatureSelectionMethod


def discretize(x: np.ndarray, n_bins: int = NUMBER_BINS) -> np.ndarray:
    """
    Equal-frequency binning on ranks, so that any strictly monotone transform of x yields the same bins.
    Features with at most n_bins distinct values keep one bin per distinct value.

    Parameters
    ----------
    x : np.ndarray
        Feature values, without missing entries.
    n_bins : int
        Maximum number of bins.
    Returns
    -------
    np.ndarray
        Bin index per row, consecutive from 0.
    """
    dense = rankdata(x, method='dense').astype(np.int64) - 1
    if dense.max(initial=0) + 1 <= n_bins:
        return dense
    ranks = rankdata(x, method='min').astype(np.int64) - 1
    bins = (ranks * n_bins) // len(x)
    return rankdata(bins, method='dense').astype(np.int64) - 1


def __contingency(bins: np.ndarray, target: np.ndarray) -> np.ndarray:
    table = np.zeros((bins.max() + 1, 2))
    np.add.at(table, (bins, target), 1.0)
    return table


def __gini_impurity(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=-1)
    proportions = counts / totals[..., None]
    return 1.0 - np.sum(proportions ** 2, axis=-1)


def gini_score(x: np.ndarray, target: np.ndarray) -> float:
    """
    Parent Gini impurity minus the size-weighted impurity of the multiway split over the bins of x.
    """
    table = __contingency(discretize(x), target)
    if table.shape[0] < 2:
        return 0.0
    weights = table.sum(axis=1) / table.sum()
    reduction = __gini_impurity(table.sum(axis=0)) - np.sum(weights * __gini_impurity(table))
    return float(max(reduction, 0.0))


def chi_square_score(x: np.ndarray, target: np.ndarray) -> float:
    table = __contingency(discretize(x), target)
    if table.shape[0] < 2:
        return 0.0
    statistic, _, _, _ = chi2_contingency(table, correction=False)
    return float(statistic)


def correlation_score(x: np.ndarray, target: np.ndarray) -> float:
    """
    Absolute Pearson correlation with the 0/1 target, 0 for a constant feature.
    """
    if np.std(x) == 0.0:
        return 0.0
    return float(min(abs(np.corrcoef(x, target)[0, 1]), 1.0))


def information_score(x: np.ndarray, target: np.ndarray) -> float:
    """
    Information gain ratio (log base 2). A single-bin feature has zero split information and scores 0.
    """
    table = __contingency(discretize(x), target)
    weights = table.sum(axis=1) / table.sum()
    split_information = entropy(weights, base=2)
    if table.shape[0] < 2 or split_information <= 0.0:
        return 0.0
    conditional = np.sum([w * entropy(row, base=2) for w, row in zip(weights, table)])
    gain = entropy(table.sum(axis=0), base=2) - conditional
    return float(max(gain, 0.0) / split_information)


__scorers = {
    FeatureSelectionMethod.Gini: gini_score,
    FeatureSelectionMethod.ChiSquare: chi_square_score,
    FeatureSelectionMethod.Correlation: correlation_score,
    FeatureSelectionMethod.Information: information_score,
}


def score_features(ds: Dataset, method: FeatureSelectionMethod) -> List[FeatureScore]:
    """
    Relevance of every feature with respect to the target, larger meaning more relevant.

    Parameters
    ----------
    ds : Dataset
        Fully preprocessed dataset (no missing values) holding both classes.
    method : FeatureSelectionMethod
        One of Gini, ChiSquare, Correlation or Information. Cluster goes through cluster_variables instead.
    Returns
    -------
    List[FeatureScore]
        One score per feature, in the dataset column order.
    """
    if method not in __scorers:
        raise ValueError('Method {} does not produce per-feature scores.'.format(method))
    if ds.has_missing():
        raise ValueError('Feature scoring requires a dataset without missing values, run the preprocessing first.')
    if not ds.has_both_classes():
        raise ValueError('Feature scoring requires both classes in the target.')

    scorer = __scorers[method]
    scores = [FeatureScore(feature=name, score=scorer(ds.values[:, j], ds.target), method=method)
              for j, name in enumerate(ds.feature_names)]
    logging.debug('Scored {} features with {}.'.format(len(scores), method))
    return scores
