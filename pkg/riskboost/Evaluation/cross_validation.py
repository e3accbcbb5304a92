import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple, Union
import numpy as np
from tqdm import tqdm
from ..Utils.configuration_parser import FeatureSelectionMethod, ModelType, HPOStrategy, model_label
from ..Utils.dataset import Dataset
from ..PreProcessing.pre_processing import PreprocessStats, fit_preprocessor, apply_preprocessor, stratified_kfold
from ..FeatureSelection.selection import SelectionResult, select_features
from ..Models.logistic_regression import LogisticModel, train_logistic, predict_logistic
from ..Models.gradient_boosting import GBTConfig, GBTModel, train_gbt, predict_gbt
from ..Optimization.search_domain import SearchDomain, ParamValue, default_domain
from ..Optimization.tpe import TpeConfig
from ..Optimization.optimization import TrialHistory, optimize
from .metrics import METRIC_NAMES, MetricSet, evaluate_predictions, mean_metrics, roc_auc


Model = Union[LogisticModel, GBTModel]


@dataclass(frozen=True)
class PipelineSpec:
    """
    One (FS method, model, HPO strategy) combination of the experiment, plus the settings its stages need.

    Attributes
    ----------
    fs_method : FeatureSelectionMethod
        Stage-2 selection method.
    model : ModelType
        LR or GBT.
    hpo : HPOStrategy
        none, RS or TPE. Ignored for LR.
    n_features : int
        Size of the selected subset.
    n_trials : int
        Optimization budget per training partition.
    inner_folds : int
        Folds of the nested cross-validation scoring each trial.
    gbt_config : GBTConfig
        Boosting settings of the untuned model, and the base onto which tuned values are applied.
    tpe_config : TpeConfig
        Settings of the TPE strategy.
    domain : SearchDomain
        Tuned hyper-parameters and their bounds.
    """
    fs_method: FeatureSelectionMethod
    model: ModelType
    hpo: HPOStrategy = HPOStrategy.NONE
    n_features: int = 50
    n_trials: int = 50
    inner_folds: int = 5
    gbt_config: GBTConfig = field(default_factory=GBTConfig)
    tpe_config: TpeConfig = field(default_factory=TpeConfig)
    domain: SearchDomain = field(default_factory=default_domain)

    def __post_init__(self):
        if self.n_features < 1:
            raise ValueError('n_features must be at least 1, got {}.'.format(self.n_features))
        if self.model == ModelType.LR and self.hpo != HPOStrategy.NONE:
            raise ValueError('Hyper-parameter optimization only applies to the GBT model.')
        if self.n_trials < 1 or self.inner_folds < 2:
            raise ValueError('n_trials must be >= 1 and inner_folds >= 2.')

    @property
    def model_label(self) -> str:
        return model_label(self.model, self.hpo)

    @property
    def key(self) -> str:
        return '{}_{}'.format(self.fs_method, self.model_label)


@dataclass(frozen=True)
class FoldResult:
    """
    Everything fitted on the training rows of one fold, and the metrics measured on its validation rows.
    """
    fold: int
    stats: PreprocessStats
    selection: SelectionResult
    model: Model
    metrics: MetricSet
    history: Optional[TrialHistory] = None


@dataclass(frozen=True)
class CVResult:
    folds: List[FoldResult]
    mean: MetricSet

    @property
    def fold_metrics(self) -> List[MetricSet]:
        return [f.metrics for f in self.folds]


@dataclass(frozen=True)
class CVRecord:
    """
    Repeated cross-validation outcome of one metric for one combination.

    Attributes
    ----------
    key : str
        '<FS>_<model>_<metric>', e.g. 'Gini_LR_accuracy'.
    repeat_means : List[float]
        Fold-mean of the metric for each repeat, in repeat order.
    mean : float
        Grand mean over the repeats.
    sd : float
        Sample standard deviation (n - 1 denominator) of the repeat means.
    """
    key: str
    repeat_means: List[float]
    mean: float
    sd: float

    def __post_init__(self):
        if len(self.repeat_means) < 2:
            raise ValueError('A CVRecord needs at least two repeats.')

    @classmethod
    def from_repeats(cls, key: str, repeat_means: List[float]) -> 'CVRecord':
        if len(repeat_means) < 2:
            raise ValueError('A CVRecord needs at least two repeats, got {} for {}.'.format(len(repeat_means), key))
        return cls(key=key, repeat_means=[float(x) for x in repeat_means], mean=float(np.mean(repeat_means)),
                   sd=float(np.std(repeat_means, ddof=1)))

    def entries(self) -> List[Tuple[str, float]]:
        """
        Flat (key, value) rows: one per repeat, indexed from 1, then the grand mean and its _SD.
        """
        rows = [('{}_{}'.format(self.key, i + 1), v) for i, v in enumerate(self.repeat_means)]
        rows.append((self.key, self.mean))
        rows.append(('{}_SD'.format(self.key), self.sd))
        return rows


def derive_seed(seed: int, *keys: int) -> int:
    """
    Child seed of (seed, keys...), independent across distinct key tuples.
    """
    return int(np.random.SeedSequence([seed] + list(keys)).generate_state(1)[0])


def predict_probabilities(model: Model, ds: Dataset) -> np.ndarray:
    if isinstance(model, LogisticModel):
        return predict_logistic(model, ds)
    return predict_gbt(model, ds)


def hpo_objective(training: Dataset, base: GBTConfig, inner_folds: int,
                  seed: int) -> Callable[[Dict[str, ParamValue]], float]:
    """
    Loss of a hyper-parameter set: 1 - mean AUC of a stratified inner cross-validation over the (already
    preprocessed and reduced) training partition. The inner folds are fixed for every trial.
    """
    plan = stratified_kfold(training, inner_folds, seed)
    partitions = [(training.subset_rows(plan.training_indices(f)), training.subset_rows(plan.validation_indices(f)))
                  for f in range(plan.k)]

    def objective(params: Dict[str, ParamValue]) -> float:
        cfg = base.with_params(params)
        aucs = []
        for inner_training, inner_validation in partitions:
            model = train_gbt(inner_training, cfg)
            aucs.append(roc_auc(inner_validation.target, predict_gbt(model, inner_validation)))
        return 1.0 - float(np.mean(aucs))
    return objective


def fit_pipeline(training: Dataset, pipeline: PipelineSpec,
                 seed: int) -> Tuple[PreprocessStats, SelectionResult, Model, Optional[TrialHistory]]:
    """
    Stages 1 to 3 on training rows only: preprocessing statistics, feature selection, then model training with
    optional nested hyper-parameter optimization.
    """
    stats = fit_preprocessor(training)
    prepared = apply_preprocessor(training, stats)
    selection = select_features(prepared, pipeline.fs_method, pipeline.n_features)
    reduced = prepared.subset_features(selection.selected)

    history = None
    if pipeline.model == ModelType.LR:
        model = train_logistic(reduced)
    else:
        cfg = replace(pipeline.gbt_config, seed=derive_seed(seed, 1))
        if pipeline.hpo != HPOStrategy.NONE:
            objective = hpo_objective(reduced, cfg, pipeline.inner_folds, derive_seed(seed, 2))
            best, history = optimize(objective, pipeline.domain, pipeline.n_trials, pipeline.hpo,
                                     seed=derive_seed(seed, 3), tpe_config=pipeline.tpe_config)
            logging.debug('Best {} trial #{}: loss {:.4f}, params {}.'.format(pipeline.hpo, best.index, best.loss,
                                                                             best.params))
            cfg = cfg.with_params(best.params)
        model = train_gbt(reduced, cfg)
    return stats, selection, model, history


def score_pipeline(ds: Dataset, stats: PreprocessStats, selection: SelectionResult, model: Model) -> np.ndarray:
    """
    Stages 4 and 5: preprocesses rows with the training statistics, keeps the selected features and scores them.
    """
    prepared = apply_preprocessor(ds, stats)
    return predict_probabilities(model, prepared.subset_features(selection.selected))


def cross_validate(ds: Dataset, pipeline: PipelineSpec, k: int = 10, seed: int = 0) -> CVResult:
    """
    Stratified k-fold evaluation of one pipeline. For each fold, every fitted component only sees the training
    rows; the validation rows are only used for stages 4 to 6.

    Parameters
    ----------
    ds : Dataset
        Raw dataset, missing cells allowed.
    pipeline : PipelineSpec
        Combination to evaluate.
    k : int
        Number of folds.
    seed : int
        Seed of the fold assignment and of every random component inside the folds.
    Returns
    -------
    CVResult
        Per-fold results, in fold order, and their arithmetic mean.
    """
    plan = stratified_kfold(ds, k, derive_seed(seed, 0))
    folds = []
    for f in range(plan.k):
        start = time.time()
        training = ds.subset_rows(plan.training_indices(f))
        validation = ds.subset_rows(plan.validation_indices(f))
        if not training.has_both_classes() or not validation.has_both_classes():
            raise ValueError('Fold {} of {} holds a single class.'.format(f + 1, plan.k))

        stats, selection, model, history = fit_pipeline(training, pipeline, derive_seed(seed, 1, f))
        probs = score_pipeline(validation, stats, selection, model)
        metrics = evaluate_predictions(validation.target, probs)
        folds.append(FoldResult(fold=f, stats=stats, selection=selection, model=model, metrics=metrics,
                                history=history))
        logging.debug('{} fold {}/{}: AUC {:.4f}, accuracy {:.4f} ({:.2f} seconds).'.format(
            pipeline.key, f + 1, plan.k, metrics.auc, metrics.accuracy, time.time() - start))
    return CVResult(folds=folds, mean=mean_metrics([f.metrics for f in folds]))


def repeated_cv(ds: Dataset, pipeline: PipelineSpec, k: int = 10, repeats: int = 10, seed: int = 0,
                progress: bool = False) -> Dict[str, CVRecord]:
    """
    Repeats cross_validate with reshuffled folds, repeat r using a seed derived from (seed, r).

    Returns
    -------
    dict
        Metric name -> CVRecord keyed '<FS>_<model>_<metric>'.
    """
    if repeats < 2:
        raise ValueError('Repeated cross-validation needs at least 2 repeats, got {}.'.format(repeats))
    repeat_means = []
    for r in tqdm(range(repeats), disable=not progress, desc=pipeline.key):
        result = cross_validate(ds, pipeline, k=k, seed=derive_seed(seed, r))
        repeat_means.append(result.mean)
        logging.info('{} repeat {}/{}: mean AUC {:.4f}.'.format(pipeline.key, r + 1, repeats, result.mean.auc))
    return {name: CVRecord.from_repeats('{}_{}'.format(pipeline.key, name), [m.as_dict()[name] for m in repeat_means])
            for name in METRIC_NAMES}
