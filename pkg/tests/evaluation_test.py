import os
import warnings
import itertools
import numpy as np
import pytest

from riskboost.Utils.configuration_parser import FeatureSelectionMethod, ModelType, HPOStrategy, Decision
from riskboost.Utils.dataset import Dataset
from riskboost.Utils.io import dump_cv_records, load_cv_records
from riskboost.PreProcessing.pre_processing import stratified_kfold
from riskboost.PreProcessing.synthetic_data import SynthSpec, generate
from riskboost.Models.gradient_boosting import GBTConfig
from riskboost.Evaluation.metrics import METRIC_NAMES, ConfusionMatrix, MetricSet, confusion, \
    metrics_from_confusion, roc_auc, mean_metrics
from riskboost.Statistics.wilcoxon import wilcoxon_signed_rank
from riskboost.Evaluation.cross_validation import PipelineSpec, CVRecord, cross_validate, repeated_cv, \
    derive_seed


def __small(seed=0, n_rows=300):
    ds, _ = generate(SynthSpec(n_rows=n_rows, n_informative=4, n_redundant=2, n_noise=4, seed=seed))
    return ds


def __pairwise_auc(labels, scores):
    positives = [s for s, y in zip(scores, labels) if y == 1]
    negatives = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p, n in itertools.product(positives, negatives):
        total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(positives) * len(negatives))


def test_metric_examples():
    metrics = metrics_from_confusion(ConfusionMatrix(tp=40, fp=10, tn=40, fn=10))
    for value in [metrics.accuracy, metrics.recall, metrics.precision, metrics.f1]:
        assert value == pytest.approx(0.8)
    assert metrics.auc is None

    half_precision = metrics_from_confusion(ConfusionMatrix(tp=2, fp=2, tn=0, fn=0))
    assert half_precision.precision == 0.5 and half_precision.recall == 1.0
    assert half_precision.f1 == pytest.approx(2.0 / 3.0)

    perfect = metrics_from_confusion(ConfusionMatrix(tp=3, fp=0, tn=5, fn=0))
    assert perfect.as_dict() == {'accuracy': 1.0, 'auc': None, 'recall': 1.0, 'precision': 1.0, 'f1': 1.0}


def test_metric_errors():
    with pytest.raises(ValueError):
        metrics_from_confusion(ConfusionMatrix(tp=0, fp=2, tn=3, fn=0))
    with pytest.raises(ValueError):
        metrics_from_confusion(ConfusionMatrix(tp=0, fp=0, tn=3, fn=2))
    with pytest.raises(ValueError):
        confusion([0, 1], [0.2])
    with pytest.raises(ValueError):
        confusion([], [])
    with pytest.raises(ValueError):
        confusion([0, 1], [0.2, 1.2])


def test_confusion_threshold_is_inclusive():
    labels = [0, 1, 0, 1]
    cm = confusion(labels, [0.5] * 4)
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (2, 2, 0, 0)
    cm = confusion(labels, [0.0, 1.0, 0.0, 1.0])
    assert cm.fp == 0 and cm.fn == 0
    rng = np.random.default_rng(0)
    labels = rng.integers(0, 2, 100)
    probs = rng.random(100)
    cm = confusion(labels, probs)
    assert cm.n == 100
    hamming = np.mean((probs >= 0.5).astype(int) != labels)
    assert metrics_from_confusion(cm).accuracy == pytest.approx(1.0 - hamming)


def test_auc_examples():
    assert roc_auc([1, 0, 1, 0], [0.9, 0.8, 0.7, 0.1]) == 0.75
    assert roc_auc([0, 0, 1, 1], [0.1, 0.2, 0.3, 0.4]) == 1.0
    assert roc_auc([0, 1, 0, 1], [0.3] * 4) == 0.5
    with pytest.raises(ValueError):
        roc_auc([1, 1], [0.2, 0.3])


def test_auc_properties():
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = int(rng.integers(2, 100))
        labels = rng.integers(0, 2, n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        scores = np.round(rng.random(n), 1)
        auc = roc_auc(labels, scores)
        assert auc == pytest.approx(__pairwise_auc(labels, scores), abs=1e-12)
        assert roc_auc(labels, np.exp(3.0 * scores)) == pytest.approx(auc, abs=1e-12)
        assert roc_auc(1 - labels, -scores) == pytest.approx(auc, abs=1e-12)


def test_mean_metrics():
    sets = [MetricSet(accuracy=0.5, recall=0.4, precision=0.3, f1=0.2, auc=0.6),
            MetricSet(accuracy=0.7, recall=0.6, precision=0.5, f1=0.4, auc=0.8)]
    mean = mean_metrics(sets)
    assert mean.accuracy == pytest.approx(0.6)
    assert mean.auc == pytest.approx(0.7)
    assert mean.f1 == pytest.approx(0.3)


def test_pipeline_keys():
    assert PipelineSpec(FeatureSelectionMethod.Gini, ModelType.LR).key == 'Gini_LR'
    assert PipelineSpec(FeatureSelectionMethod.Cluster, ModelType.GBT).key == 'Cluster_GBT'
    assert PipelineSpec(FeatureSelectionMethod.ChiSquare, ModelType.GBT, HPOStrategy.TPE).key == 'ChiSquare_GBT_TPE'
    with pytest.raises(ValueError):
        PipelineSpec(FeatureSelectionMethod.Gini, ModelType.LR, HPOStrategy.RS)


def test_cross_validate_produces_one_result_per_fold():
    ds = __small()
    pipeline = PipelineSpec(FeatureSelectionMethod.Gini, ModelType.LR, n_features=5)
    result = cross_validate(ds, pipeline, k=10, seed=1)
    assert len(result.folds) == 10
    for name in METRIC_NAMES:
        values = [m.as_dict()[name] for m in result.fold_metrics]
        assert result.mean.as_dict()[name] == pytest.approx(np.mean(values))
    assert not np.array_equal(result.folds[0].stats.mean, result.folds[1].stats.mean)
    assert all([len(f.selection.selected) == 5 for f in result.folds])


def test_cross_validate_does_not_leak_validation_rows():
    ds = __small(seed=4)
    seed = 2
    plan = stratified_kfold(ds, 3, derive_seed(seed, 0))
    garbage = ds.values.copy()
    rows = plan.validation_indices(0)
    garbage[rows] = np.random.default_rng(0).standard_normal((len(rows), ds.n_features)) * 1e3
    corrupted = Dataset(feature_names=ds.feature_names, values=garbage, target=ds.target)

    pipeline = PipelineSpec(FeatureSelectionMethod.Correlation, ModelType.LR, n_features=6)
    clean = cross_validate(ds, pipeline, k=3, seed=seed).folds[0]
    tampered = cross_validate(corrupted, pipeline, k=3, seed=seed).folds[0]
    assert np.array_equal(clean.stats.median, tampered.stats.median)
    assert np.array_equal(clean.stats.sd, tampered.stats.sd)
    assert clean.selection == tampered.selection
    assert clean.model.intercept == tampered.model.intercept
    assert np.array_equal(clean.model.coefficients, tampered.model.coefficients)
    assert clean.metrics != tampered.metrics


def test_cross_validate_with_tuned_boosting():
    ds = __small(seed=5, n_rows=200)
    pipeline = PipelineSpec(FeatureSelectionMethod.Cluster, ModelType.GBT, HPOStrategy.RS, n_features=4, n_trials=2,
                            inner_folds=2, gbt_config=GBTConfig(n_estimators=5))
    result = cross_validate(ds, pipeline, k=3, seed=0)
    assert all([len(f.history) == 2 for f in result.folds])
    assert all([len(f.model.trees) == 5 for f in result.folds])
    assert 0.0 <= result.mean.auc <= 1.0


def test_cross_validate_rejects_single_class_fold():
    ds = Dataset(feature_names=['a'], values=np.arange(12.0)[:, None], target=[1] * 2 + [0] * 10)
    with pytest.raises(ValueError):
        cross_validate(ds, PipelineSpec(FeatureSelectionMethod.Gini, ModelType.LR, n_features=1), k=3)


def test_repeated_cv_records(tmp_path):
    ds = __small(seed=7, n_rows=200)
    pipeline = PipelineSpec(FeatureSelectionMethod.Gini, ModelType.LR, n_features=4)
    records = repeated_cv(ds, pipeline, k=3, repeats=3, seed=11)
    assert sorted(records) == sorted(METRIC_NAMES)
    accuracy = records['accuracy']
    assert accuracy.key == 'Gini_LR_accuracy'
    assert len(accuracy.repeat_means) == 3
    assert accuracy.sd == pytest.approx(np.std(accuracy.repeat_means, ddof=1))
    assert [key for key, _ in accuracy.entries()] == ['Gini_LR_accuracy_1', 'Gini_LR_accuracy_2',
                                                       'Gini_LR_accuracy_3', 'Gini_LR_accuracy',
                                                       'Gini_LR_accuracy_SD']
    assert repeated_cv(ds, pipeline, k=3, repeats=3, seed=11) == records

    filename = os.path.join(str(tmp_path), 'cv_records.csv')
    dump_cv_records([records[name] for name in METRIC_NAMES], filename)
    reloaded = load_cv_records(filename)
    assert reloaded == {r.key: r for r in records.values()}

    with pytest.raises(ValueError):
        repeated_cv(ds, pipeline, k=3, repeats=1)
    with pytest.raises(ValueError):
        CVRecord.from_repeats('Gini_LR_auc', [0.7])


def test_cv_record_validates_before_aggregating():
    with warnings.catch_warnings():
        warnings.simplefilter('error')
        with pytest.raises(ValueError):
            CVRecord.from_repeats('Gini_LR_auc', [])
        with pytest.raises(ValueError):
            CVRecord.from_repeats('Gini_LR_auc', [0.7])


@pytest.mark.slow
def test_boosting_outperforms_logistic_regression_on_interactions():
    base = GBTConfig(n_estimators=40, learning_rate=0.1, max_depth=3)
    lr_pipeline = PipelineSpec(FeatureSelectionMethod.Correlation, ModelType.LR, n_features=20)
    gbt_pipeline = PipelineSpec(FeatureSelectionMethod.Correlation, ModelType.GBT, n_features=20, gbt_config=base)
    significant = 0
    for seed in range(5):
        ds, _ = generate(SynthSpec(n_rows=1000, n_informative=6, n_redundant=4, n_noise=10, seed=seed,
                                   interaction_strength=2.0))
        lr_auc = repeated_cv(ds, lr_pipeline, k=5, repeats=10, seed=seed)['auc']
        gbt_auc = repeated_cv(ds, gbt_pipeline, k=5, repeats=10, seed=seed)['auc']
        assert gbt_auc.mean - lr_auc.mean >= 0.01
        result = wilcoxon_signed_rank(gbt_auc.repeat_means, lr_auc.repeat_means, alpha=0.05)
        significant += int(result.decision == Decision.Rejected)
    assert significant >= 4
