from .metrics import ConfusionMatrix, MetricSet, METRIC_NAMES, confusion, metrics_from_confusion, roc_auc, \
    evaluate_predictions, mean_metrics
from .cross_validation import PipelineSpec, FoldResult, CVResult, CVRecord, cross_validate, repeated_cv
