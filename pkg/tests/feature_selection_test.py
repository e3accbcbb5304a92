import math
import numpy as np
import pytest

from riskboost.Utils.configuration_parser import FeatureSelectionMethod
from riskboost.Utils.dataset import Dataset
from riskboost.PreProcessing.pre_processing import fit_preprocessor, apply_preprocessor
from riskboost.PreProcessing.synthetic_data import SynthSpec, generate, redundant_parent
from riskboost.FeatureSelection.feature_scoring import FeatureScore, score_features, gini_score, \
    chi_square_score, correlation_score, information_score
from riskboost.FeatureSelection.variable_clustering import VariableClustering, cluster_variables, \
    correlation_matrix, variance_explained, variance_explained_curve
from riskboost.FeatureSelection.selection import one_minus_r2_ratio, select_top_k, select_from_clusters, \
    select_features


ALL_METHODS = [FeatureSelectionMethod.Gini, FeatureSelectionMethod.ChiSquare, FeatureSelectionMethod.Cluster,
               FeatureSelectionMethod.Correlation, FeatureSelectionMethod.Information]


def __prepared(ds):
    return apply_preprocessor(ds, fit_preprocessor(ds))


def __duplicate_pairs(n_rows=1000, seed=0):
    rng = np.random.default_rng(seed)
    x1 = rng.standard_normal(n_rows)
    x3 = rng.standard_normal(n_rows)
    values = np.column_stack([x1, x1 + 0.01 * rng.standard_normal(n_rows),
                              x3, x3 + 0.01 * rng.standard_normal(n_rows)])
    target = (rng.random(n_rows) < 0.5).astype(int)
    return Dataset(feature_names=['x1', 'x2', 'x3', 'x4'], values=values, target=target)


def test_scores_on_perfect_binary_feature():
    target = np.array([0, 1] * 20)
    x = target.astype(float)
    assert gini_score(x, target) == pytest.approx(0.5)
    assert chi_square_score(x, target) == pytest.approx(40.0)
    assert correlation_score(x, target) == pytest.approx(1.0)
    assert information_score(x, target) == pytest.approx(1.0)


def test_constant_feature_scores_zero():
    target = np.array([0, 1] * 20)
    x = np.full(40, 3.0)
    for scorer in [gini_score, chi_square_score, correlation_score, information_score]:
        assert scorer(x, target) == 0.0


def test_scores_are_rank_invariant():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(500)
    target = (x + rng.standard_normal(500) > 0).astype(int)
    for scorer in [gini_score, chi_square_score, information_score]:
        assert scorer(np.exp(x), target) == scorer(x, target)
        assert scorer(x ** 3, target) == scorer(x, target)
    assert correlation_score(3.0 * x + 2.0, target) == pytest.approx(correlation_score(x, target))


def test_duplicate_columns_score_identically():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(300)
    target = (x + rng.standard_normal(300) > 0).astype(int)
    ds = Dataset(feature_names=['a', 'b'], values=np.column_stack([x, x]), target=target)
    for method in [FeatureSelectionMethod.Gini, FeatureSelectionMethod.ChiSquare,
                   FeatureSelectionMethod.Correlation, FeatureSelectionMethod.Information]:
        scores = score_features(ds, method)
        assert scores[0].score == scores[1].score


def test_independent_feature_scores_low():
    ds, informative = generate(SynthSpec(n_rows=2000, n_redundant=0, n_noise=0, missing_rate=0.0, seed=3))
    rng = np.random.default_rng(3)
    shuffled = rng.permutation(ds.values[:, 0])
    ds = Dataset(feature_names=informative + ['shuffled'], values=np.column_stack([ds.values, shuffled]),
                 target=ds.target)
    for method in [FeatureSelectionMethod.Gini, FeatureSelectionMethod.ChiSquare,
                   FeatureSelectionMethod.Correlation, FeatureSelectionMethod.Information]:
        scores = [s.score for s in score_features(ds, method)]
        assert scores[-1] < np.percentile(scores[:-1], 5)


def test_score_features_preconditions():
    ds = Dataset(feature_names=['a'], values=[[np.nan], [1.0]], target=[0, 1])
    with pytest.raises(ValueError):
        score_features(ds, FeatureSelectionMethod.Gini)
    ds = Dataset(feature_names=['a'], values=[[0.0], [1.0]], target=[1, 1])
    with pytest.raises(ValueError):
        score_features(ds, FeatureSelectionMethod.Correlation)
    ds = Dataset(feature_names=['a'], values=[[0.0], [1.0]], target=[0, 1])
    with pytest.raises(ValueError):
        score_features(ds, FeatureSelectionMethod.Cluster)


def test_one_minus_r2_ratio():
    assert one_minus_r2_ratio(0.9, 0.5) == pytest.approx(0.2)
    assert one_minus_r2_ratio(1.0, 0.3) == 0.0
    assert one_minus_r2_ratio(0.5, 1.0) == math.inf
    with pytest.raises(ValueError):
        one_minus_r2_ratio(1.2, 0.0)
    with pytest.raises(ValueError):
        one_minus_r2_ratio(0.5, -0.1)


def test_select_top_k_breaks_ties_by_name():
    method = FeatureSelectionMethod.Gini
    scores = [FeatureScore('b', 1.0, method), FeatureScore('c', 2.0, method), FeatureScore('a', 1.0, method)]
    assert select_top_k(scores, k=2).selected == ['c', 'a']
    assert select_top_k(list(reversed(scores)), k=2).selected == ['c', 'a']
    assert select_top_k(scores, k=3).selected == ['c', 'a', 'b']
    with pytest.raises(ValueError):
        select_top_k(scores, k=4)


def test_select_from_clusters_takes_lowest_ratio():
    clustering = VariableClustering(feature_names=['a', 'b', 'c'], clusters=[[0, 1], [2]],
                                    loadings=[np.ones(2) / np.sqrt(2), np.ones(1)], eigenvalues=[1.5, 1.0],
                                    r2_own=np.array([0.9, 0.75, 1.0]), r2_next=np.array([0.5, 0.5, 0.1]))
    result = select_from_clusters(clustering)
    assert result.method == FeatureSelectionMethod.Cluster
    assert result.selected == ['c', 'a']
    assert result.k == 2


def test_cluster_recovers_duplicate_groups():
    ds = __prepared(__duplicate_pairs())
    clustering = cluster_variables(ds, 2)
    assert sorted([sorted(c) for c in clustering.clusters]) == [[0, 1], [2, 3]]
    assert variance_explained(clustering) == pytest.approx(1.0, abs=0.01)
    assert np.all(clustering.r2_own > 0.99)
    assert np.all(clustering.r2_next < 0.05)
    assert len(select_features(ds, FeatureSelectionMethod.Cluster, 2).selected) == 2


def test_single_feature_cluster():
    ds = Dataset(feature_names=['a'], values=[[0.5], [-0.5], [1.0]], target=[0, 1, 0])
    clustering = cluster_variables(ds, 1)
    assert clustering.clusters == [[0]]
    assert clustering.r2_own[0] == pytest.approx(1.0)
    assert clustering.r2_next[0] == 0.0
    with pytest.raises(ValueError):
        cluster_variables(ds, 2)


def test_variance_explained_of_one_cluster_is_leading_eigenvalue():
    rng = np.random.default_rng(8)
    ds = __prepared(Dataset(feature_names=['f{}'.format(i) for i in range(6)], values=rng.standard_normal((200, 6)),
                            target=rng.integers(0, 2, 200)))
    expected = np.linalg.eigvalsh(correlation_matrix(ds.values)).max() / 6
    assert variance_explained(cluster_variables(ds, 1)) == pytest.approx(expected)


def test_variance_explained_is_monotone():
    ds, _ = generate(SynthSpec(n_rows=500, n_informative=6, n_redundant=6, n_noise=8, seed=6))
    ds = __prepared(ds)
    curve = variance_explained_curve(ds, ds.n_features)
    assert [c for c, _ in curve] == list(range(1, ds.n_features + 1))
    fractions = [v for _, v in curve]
    for previous, current in zip(fractions[:-1], fractions[1:]):
        assert current >= previous - 1e-9
    assert 0.0 < fractions[0] <= 1.0
    assert fractions[-1] == pytest.approx(1.0)


def test_select_features_clips_k():
    ds = __prepared(__duplicate_pairs(n_rows=200))
    result = select_features(ds, FeatureSelectionMethod.Correlation, 10)
    assert result.k == 4
    assert sorted(result.selected) == ['x1', 'x2', 'x3', 'x4']


@pytest.mark.slow
@pytest.mark.parametrize('method', ALL_METHODS)
def test_methods_find_informative_features(method):
    spec = SynthSpec(seed=0)
    ds, informative = generate(spec)
    ds = __prepared(ds)
    selected = select_features(ds, method, 50).selected
    assert len(selected) == 50
    represented = set([name for name in selected if name in informative])
    if method == FeatureSelectionMethod.Cluster:
        for i in range(spec.n_redundant):
            if ds.feature_names[spec.n_informative + i] in selected:
                represented.add(redundant_parent(spec, i))
    assert len(represented) >= 8
