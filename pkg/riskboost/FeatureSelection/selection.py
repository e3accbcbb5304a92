import logging
import math
from dataclasses import dataclass
from typing import List
from ..Utils.dataset import Dataset
from ..Utils.configuration_parser import FeatureSelectionMethod
from .feature_scoring import FeatureScore, score_features
from .variable_clustering import VariableClustering, cluster_variables


@dataclass(frozen=True)
class SelectionResult:
    method: FeatureSelectionMethod
    selected: List[str]
    k: int

    def __post_init__(self):
        if len(self.selected) != self.k:
            raise ValueError('Selection holds {} names, expected {}.'.format(len(self.selected), self.k))
        if len(set(self.selected)) != len(self.selected):
            raise ValueError('Selected feature names must be unique.')


def one_minus_r2_ratio(r2_own: float, r2_next: float) -> float:
    """
    (1 - r2_own) / (1 - r2_next), lower meaning a better cluster representative.
    A perfect fit with the next closest cluster (r2_next = 1) returns +inf, deprioritizing the feature.
    """
    if not (0.0 <= r2_own <= 1.0 and 0.0 <= r2_next <= 1.0):
        raise ValueError('Both R-squared values must lie in [0, 1], got ({}, {}).'.format(r2_own, r2_next))
    if r2_next == 1.0:
        return math.inf
    return (1.0 - r2_own) / (1.0 - r2_next)


def select_top_k(scores: List[FeatureScore], k: int = 50) -> SelectionResult:
    """
    The k highest-scoring features, ties broken by ascending feature name.
    """
    if k < 1 or k > len(scores):
        raise ValueError('k must lie in [1, {}], got {}.'.format(len(scores), k))
    methods = set([s.method for s in scores])
    if len(methods) != 1:
        raise ValueError('Scores must all come from the same method.')
    ranked = sorted(scores, key=lambda s: (-s.score, s.feature))
    return SelectionResult(method=methods.pop(), selected=[s.feature for s in ranked[:k]], k=k)


def select_from_clusters(clustering: VariableClustering) -> SelectionResult:
    """
    One representative per cluster: the member with the lowest 1 - R^2 ratio, ties broken by ascending name.
    The result is ordered by ratio, then name.
    """
    representatives = []
    for c, cluster in enumerate(clustering.clusters):
        if len(cluster) == 0:
            raise ValueError('Cluster {} is empty.'.format(c))
        candidates = [(one_minus_r2_ratio(float(clustering.r2_own[j]), float(clustering.r2_next[j])),
                       clustering.feature_names[j]) for j in cluster]
        representatives.append(min(candidates))
    representatives.sort()
    return SelectionResult(method=FeatureSelectionMethod.Cluster, selected=[name for _, name in representatives],
                           k=len(representatives))


def select_features(ds: Dataset, method: FeatureSelectionMethod, k: int) -> SelectionResult:
    """
    Stage-2 entry point: k features of a preprocessed dataset according to one of the five methods.
    Requests for more features than available are clipped to the feature count.
    """
    if k > ds.n_features:
        logging.warning('Requested {} features but only {} are available, keeping all of them.'.format(
            k, ds.n_features))
        k = ds.n_features
    if method == FeatureSelectionMethod.Cluster:
        return select_from_clusters(cluster_variables(ds, target_clusters=k))
    return select_top_k(score_features(ds, method), k=k)
