from dataclasses import dataclass, asdict
from typing import Dict, List, Optional, Sequence
import numpy as np
from scipy.stats import rankdata


METRIC_NAMES = ['accuracy', 'auc', 'recall', 'precision', 'f1']


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError('Confusion counts cannot be negative.')

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    recall: float
    precision: float
    f1: float
    auc: Optional[float] = None

    def as_dict(self) -> Dict[str, float]:
        values = asdict(self)
        return {name: values[name] for name in METRIC_NAMES}

    def with_auc(self, auc: float) -> 'MetricSet':
        return MetricSet(accuracy=self.accuracy, recall=self.recall, precision=self.precision, f1=self.f1, auc=auc)


def __check_labels(labels: Sequence[int], values: Sequence[float]):
    labels = np.asarray(labels)
    values = np.asarray(values, dtype=np.float64)
    if labels.shape != values.shape:
        raise ValueError('Labels ({}) and predictions ({}) differ in length.'.format(len(labels), len(values)))
    if len(labels) == 0:
        raise ValueError('Cannot evaluate an empty prediction set.')
    if not np.all(np.isin(labels, [0, 1])):
        raise ValueError('Labels must be 0 or 1.')
    return labels.astype(np.int64), values


def confusion(labels: Sequence[int], probs: Sequence[float], threshold: float = 0.5) -> ConfusionMatrix:
    """
    Counts with a row predicted risky iff its probability is >= threshold.
    """
    labels, probs = __check_labels(labels, probs)
    if np.any(probs < 0) or np.any(probs > 1):
        raise ValueError('Probabilities must lie in [0, 1].')
    predicted = probs >= threshold
    actual = labels == 1
    return ConfusionMatrix(tp=int(np.sum(predicted & actual)), fp=int(np.sum(predicted & ~actual)),
                           tn=int(np.sum(~predicted & ~actual)), fn=int(np.sum(~predicted & actual)))


def metrics_from_confusion(cm: ConfusionMatrix) -> MetricSet:
    """
    Accuracy, recall, precision and F1 from the counts. AUC is left unset.
    """
    if cm.n == 0:
        raise ValueError('Empty confusion matrix.')
    if cm.tp + cm.fn == 0:
        raise ValueError('Recall is undefined without positive rows.')
    if cm.tp + cm.fp == 0:
        raise ValueError('Precision is undefined without predicted positives.')
    accuracy = (cm.tp + cm.tn) / cm.n
    recall = cm.tp / (cm.tp + cm.fn)
    precision = cm.tp / (cm.tp + cm.fp)
    f1 = 0.0 if precision + recall == 0 else 2.0 * precision * recall / (precision + recall)
    return MetricSet(accuracy=accuracy, recall=recall, precision=precision, f1=f1)


def roc_auc(labels: Sequence[int], scores: Sequence[float]) -> float:
    """
    Probability that a random positive outscores a random negative, ties counting one half.
    Computed from midranks (Mann-Whitney U), equal to the trapezoidal area under the ROC curve.
    """
    labels, scores = __check_labels(labels, scores)
    n_pos = int(np.sum(labels))
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError('AUC requires both classes among the labels.')
    ranks = rankdata(scores, method='average')
    u = np.sum(ranks[labels == 1]) - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def evaluate_predictions(labels: Sequence[int], probs: Sequence[float], threshold: float = 0.5) -> MetricSet:
    return metrics_from_confusion(confusion(labels, probs, threshold)).with_auc(roc_auc(labels, probs))


def mean_metrics(metric_sets: List[MetricSet]) -> MetricSet:
    """
    Arithmetic mean of every metric. The mean F1 is the mean of the per-fold F1 values.
    """
    if len(metric_sets) == 0:
        raise ValueError('No metric sets to average.')
    means = {name: float(np.mean([m.as_dict()[name] for m in metric_sets])) for name in METRIC_NAMES}
    return MetricSet(**means)
