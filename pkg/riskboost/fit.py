import os
import shutil
import tempfile
import time
import traceback
import logging
import multiprocessing as mp
from typing import Dict, List, Optional, Tuple
import pandas as pd
from .Utils.configuration_parser import ConfigResources, FeatureSelectionMethod, ModelType, HPOStrategy
from .Utils.dataset import Dataset
from .Utils.io import load_csv, dump_cv_records, dump_comparison, dump_model, dump_importance
from .PreProcessing.pre_processing import drop_high_missing, stratified_sample, fit_preprocessor, apply_preprocessor
from .PreProcessing.synthetic_data import SynthSpec, generate
from .FeatureSelection.variable_clustering import variance_explained_curve
from .Models.gradient_boosting import GBTConfig, feature_importance
from .Optimization.tpe import TpeConfig
from .Evaluation.metrics import METRIC_NAMES
from .Evaluation.cross_validation import PipelineSpec, CVRecord, repeated_cv, fit_pipeline
from .Statistics.comparison import ComparisonMatrix, pairwise_comparison, summary_frame


IMPORTANCE_TOP_K = 15
ARTIFACT_MANIFEST = 'manifest.ini'


def build_gbt_config(parameters: ConfigResources) -> GBTConfig:
    return GBTConfig(learning_rate=parameters.boosting_learning_rate, subsample=parameters.boosting_subsample,
                     max_leaves=parameters.boosting_max_leaves, max_depth=parameters.boosting_max_depth,
                     gamma=parameters.boosting_gamma, colsample_bytree=parameters.boosting_colsample_bytree,
                     min_child_weight=parameters.boosting_min_child_weight,
                     n_estimators=parameters.boosting_n_estimators, reg_lambda=parameters.boosting_lambda,
                     seed=parameters.seed)


def build_tpe_config(parameters: ConfigResources) -> TpeConfig:
    return TpeConfig(n_startup=parameters.tpe_startup, gamma_quantile=parameters.tpe_gamma,
                     n_candidates=parameters.tpe_candidates, bandwidth_floor=parameters.tpe_bandwidth_floor)


def build_synth_spec(parameters: ConfigResources) -> SynthSpec:
    return SynthSpec(n_rows=parameters.synth_n_rows, n_informative=parameters.synth_n_informative,
                     n_redundant=parameters.synth_n_redundant, n_noise=parameters.synth_n_noise,
                     positive_rate=parameters.synth_positive_rate, missing_rate=parameters.synth_missing_rate,
                     seed=parameters.seed, interaction_strength=parameters.synth_interaction_strength)


def build_pipeline(parameters: ConfigResources, fs_method: FeatureSelectionMethod, model: ModelType,
                   strategy: HPOStrategy) -> PipelineSpec:
    return PipelineSpec(fs_method=fs_method, model=model, hpo=strategy, n_features=parameters.n_features,
                        n_trials=parameters.n_trials, inner_folds=parameters.inner_folds,
                        gbt_config=build_gbt_config(parameters), tpe_config=build_tpe_config(parameters))


def load_experiment_data(parameters: ConfigResources) -> Dataset:
    """
    Stage-1 data: the configured CSV file, or a synthetic dataset when no input file is given. Columns with too many
    missing cells are dropped, then an optional stratified sample is drawn.
    """
    if parameters.input_filename:
        ds = load_csv(parameters.input_filename, target_name=parameters.target_name)
    else:
        ds, _ = generate(build_synth_spec(parameters))
    ds = drop_high_missing(ds, threshold=parameters.missing_threshold)
    if parameters.sample_size is not None:
        if parameters.sample_size > ds.n_rows:
            raise ValueError('sample_size ({}) exceeds the number of rows ({}).'.format(parameters.sample_size,
                                                                                      ds.n_rows))
        ds = stratified_sample(ds, parameters.sample_size, parameters.seed)
    return ds


def run_experiment(config_filename: Optional[str], overrides: Optional[Dict[Tuple[str, str], str]] = None,
                   logging_filename: Optional[str] = None) -> str:
    """
    Entry point for running the benchmarking experiment.
    All runtime parameters should be specified in a 'config.ini' file, according to the patterns indicated
    in 'blank_main_config.ini'.

    Parameters
    ----------
    config_filename: str
        Complete filepath indicating the configuration file to use for the experiment.
    overrides: dict
        (section, key) -> value pairs taking precedence over the configuration file.
    logging_filename: str
        Complete filepath to a log file on disk, where the logging output will be written.
    Returns
    -------
    str
        Folder holding the produced artifacts.
    """
    config_parameters = ConfigResources()
    config_parameters.init_environment(config_filename, overrides)

    logging_filename = logging_filename or config_parameters.log_filename
    handler = None
    if logging_filename:
        logger = logging.getLogger()
        handler = logging.FileHandler(filename=logging_filename, mode='a', encoding='utf-8')
        handler.setFormatter(logging.Formatter(fmt="%(asctime)s ; %(name)s ; %(levelname)s ; %(message)s",
                                               datefmt='%d/%m/%Y %H.%M'))
        logger.setLevel(logging.DEBUG)
        logger.addHandler(handler)
    try:
        return __benchmark(config_parameters)
    finally:
        if handler is not None:
            logging.getLogger().removeHandler(handler)
            handler.close()


def evaluate_combination(ds: Dataset, pipeline: PipelineSpec, folds: int, repeats: int, seed: int,
                         progress: bool = False) -> Dict[str, CVRecord]:
    return repeated_cv(ds, pipeline, k=folds, repeats=repeats, seed=seed, progress=progress)


def __evaluate_combination_star(args) -> Dict[str, CVRecord]:
    return evaluate_combination(*args)


def __cross_validate_all(ds: Dataset, parameters: ConfigResources) -> Dict[str, Dict[str, CVRecord]]:
    """
    Repeated cross-validation of every combination. All combinations share the seed, hence the fold plans, so
    their repeat means are paired.
    """
    pipelines = [build_pipeline(parameters, *c) for c in parameters.combinations()]
    if parameters.nb_workers > 1 and len(pipelines) > 1:
        logging.info('Evaluating {} combinations over {} processes.'.format(len(pipelines), parameters.nb_workers))
        tasks = [(ds, p, parameters.folds, parameters.repeats, parameters.seed, False) for p in pipelines]
        with mp.get_context('spawn').Pool(processes=min(parameters.nb_workers, len(pipelines))) as pool:
            outcomes = pool.map(__evaluate_combination_star, tasks)
    else:
        outcomes = [evaluate_combination(ds, p, parameters.folds, parameters.repeats, parameters.seed,
                                         parameters.progress) for p in pipelines]
    return {p.key: records for p, records in zip(pipelines, outcomes)}


def best_fs_per_model(records: Dict[str, Dict[str, CVRecord]],
                      pipelines: List[PipelineSpec]) -> Dict[str, PipelineSpec]:
    """
    For every model label, the pipeline whose FS method reaches the highest grand-mean AUC (ties by FS name).
    """
    best = {}
    for p in sorted(pipelines, key=lambda x: (-records[x.key]['auc'].mean, str(x.fs_method))):
        best.setdefault(p.model_label, p)
    return {label: best[label] for label in sorted(best, key=[p.model_label for p in pipelines].index)}


def __compare(records: Dict[str, Dict[str, CVRecord]], pipelines: List[PipelineSpec],
              parameters: ConfigResources) -> Tuple[Dict[str, List[ComparisonMatrix]], List[ComparisonMatrix]]:
    fs_comparisons = {}
    labels = sorted(set([p.model_label for p in pipelines]), key=[p.model_label for p in pipelines].index)
    for label in labels:
        members = [p for p in pipelines if p.model_label == label]
        if len(members) < 2:
            continue
        fs_comparisons[label] = [pairwise_comparison({str(p.fs_method): records[p.key][metric].repeat_means
                                                      for p in members}, criterion=metric, alpha=parameters.alpha,
                                                     alternative=parameters.alternative, orient_by_mean=True)
                                 for metric in METRIC_NAMES]

    model_comparisons = []
    winners = best_fs_per_model(records, pipelines)
    if len(winners) >= 2:
        model_comparisons = [pairwise_comparison({label: records[p.key][metric].repeat_means
                                                  for label, p in winners.items()}, criterion=metric,
                                                 alpha=parameters.alpha, alternative=parameters.alternative,
                                                 orient_by_mean=True)
                             for metric in METRIC_NAMES]
    return fs_comparisons, model_comparisons


def __summary(ds: Dataset, parameters: ConfigResources, records: Dict[str, Dict[str, CVRecord]],
              pipelines: List[PipelineSpec], importance: List[Tuple[str, int]],
              model_comparisons: List[ComparisonMatrix]) -> str:
    lines = ['# Experiment summary', '',
             '{} rows, {} features, positive rate {:.4f}. {}-fold cross-validation repeated {} times, seed {}.'.format(
                 ds.n_rows, ds.n_features, ds.positive_rate, parameters.folds, parameters.repeats, parameters.seed),
             '', '## Mean ± sd of the per-repeat means', '']
    table = pd.DataFrame([{'Combination': p.key, **{m: '{:.4f} ± {:.4f}'.format(records[p.key][m].mean,
                                                                               records[p.key][m].sd)
                                                    for m in METRIC_NAMES}} for p in pipelines])
    lines += [table.to_markdown(index=False), '']

    winners = best_fs_per_model(records, pipelines)
    lines += ['## Best feature selection per model', '']
    lines += [pd.DataFrame([{'Model': label, 'FS': str(p.fs_method), 'AUC': records[p.key]['auc'].mean}
                            for label, p in winners.items()]).to_markdown(index=False, floatfmt='.4f'), '']
    lines += ['## Per-repeat AUC distribution of the best combinations', '']
    lines += [summary_frame({'{}_{}'.format(p.fs_method, label): records[p.key]['auc'].repeat_means
                             for label, p in winners.items()}).to_markdown(index=False, floatfmt='.4f'), '']
    if len(model_comparisons) > 0:
        lines += ['## Model comparison', '']
        lines += [m.to_markdown() for m in model_comparisons if m.criterion == 'auc']
    if len(importance) > 0:
        lines += ['## F score of the winning boosted model (top {})'.format(IMPORTANCE_TOP_K), '']
        lines += [pd.DataFrame(importance, columns=['Feature', 'F score']).to_markdown(index=False), '']
    return '\n'.join(lines)


def __prepare_destination(output_folder: str) -> str:
    """
    Staging folder next to the destination. An existing destination must be empty or a previous run's output.
    """
    output_folder = os.path.abspath(output_folder)
    if os.path.exists(output_folder):
        if not os.path.isdir(output_folder):
            raise ValueError('Output location \'{}\' is not a folder.'.format(output_folder))
        if len(os.listdir(output_folder)) > 0 and not os.path.exists(os.path.join(output_folder, ARTIFACT_MANIFEST)):
            raise ValueError('Output folder \'{}\' is not empty and holds no previous run.'.format(output_folder))
    parent = os.path.dirname(output_folder)
    os.makedirs(parent, exist_ok=True)
    return tempfile.mkdtemp(prefix='.{}-'.format(os.path.basename(output_folder)), dir=parent)


def __publish(staging_folder: str, output_folder: str) -> None:
    output_folder = os.path.abspath(output_folder)
    if os.path.exists(output_folder):
        shutil.rmtree(output_folder)
    os.replace(staging_folder, output_folder)


def __benchmark(parameters: ConfigResources) -> str:
    output_folder = parameters.output_folder
    pipelines = [build_pipeline(parameters, *c) for c in parameters.combinations()]
    logging.info('LOG: Benchmark - {} combinations, 6 steps.'.format(len(pipelines)))
    overall_start = start = time.time()

    logging.info('LOG: Benchmark - Data preparation - Begin (1/6)')
    ds = load_experiment_data(parameters)
    staging_folder = __prepare_destination(output_folder)
    logging.info('LOG: Benchmark - Runtime: {} seconds.'.format(time.time() - start))
    logging.info('LOG: Benchmark - Data preparation - End (1/6)')

    try:
        logging.info('LOG: Benchmark - Cross-validation - Begin (2/6)')
        start = time.time()
        records = __cross_validate_all(ds, parameters)
        logging.info('LOG: Benchmark - Runtime: {} seconds.'.format(time.time() - start))
        logging.info('LOG: Benchmark - Cross-validation - End (2/6)')

        logging.info('LOG: Benchmark - Statistical comparison - Begin (3/6)')
        start = time.time()
        fs_comparisons, model_comparisons = __compare(records, pipelines, parameters)
        logging.info('LOG: Benchmark - Runtime: {} seconds.'.format(time.time() - start))
        logging.info('LOG: Benchmark - Statistical comparison - End (3/6)')

        logging.info('LOG: Benchmark - Feature importance - Begin (4/6)')
        start = time.time()
        importance = []
        winners = best_fs_per_model(records, pipelines)
        boosted = [p for p in winners.values() if p.model == ModelType.GBT]
        if len(boosted) > 0:
            winner = max(boosted, key=lambda p: (records[p.key]['auc'].mean, -pipelines.index(p)))
            logging.info('Winning boosted model: {}.'.format(winner.key))
            _, _, model, _ = fit_pipeline(ds, winner, parameters.seed)
            importance = feature_importance(model, top_k=IMPORTANCE_TOP_K)
            dump_model(model, os.path.join(staging_folder, 'model_{}.json'.format(winner.key)))
            dump_importance(importance, os.path.join(staging_folder, 'importance.csv'))
        logging.info('LOG: Benchmark - Runtime: {} seconds.'.format(time.time() - start))
        logging.info('LOG: Benchmark - Feature importance - End (4/6)')

        logging.info('LOG: Benchmark - Reporting - Begin (5/6)')
        start = time.time()
        if FeatureSelectionMethod.Cluster in parameters.fs_methods:
            prepared = apply_preprocessor(ds, fit_preprocessor(ds))
            curve = variance_explained_curve(prepared, min(parameters.n_features, prepared.n_features))
            pd.DataFrame(curve, columns=['clusters', 'variance_explained']).to_csv(
                os.path.join(staging_folder, 'variance_explained.csv'), index=False)
        with open(os.path.join(staging_folder, 'summary.md'), 'w', encoding='utf-8') as f:
            f.write(__summary(ds, parameters, records, pipelines, importance, model_comparisons))
        logging.info('LOG: Benchmark - Runtime: {} seconds.'.format(time.time() - start))
        logging.info('LOG: Benchmark - Reporting - End (5/6)')

        logging.info('LOG: Benchmark - Data dump - Begin (6/6)')
        start = time.time()
        dump_cv_records([r for p in pipelines for r in records[p.key].values()],
                        os.path.join(staging_folder, 'cv_records.csv'))
        for label, matrices in fs_comparisons.items():
            dump_comparison(matrices, os.path.join(staging_folder, 'comparison_fs_{}'.format(label)),
                            title='Feature selection methods, {}'.format(label))
        if len(model_comparisons) > 0:
            dump_comparison(model_comparisons, os.path.join(staging_folder, 'comparison_models'),
                            title='Models on their best feature selection')
        with open(os.path.join(staging_folder, ARTIFACT_MANIFEST), 'w') as f:
            parameters.to_config().write(f)
        __publish(staging_folder, output_folder)
        logging.info('LOG: Benchmark - Runtime: {} seconds.'.format(time.time() - start))
        logging.info('LOG: Benchmark - Data dump - End (6/6)')
        logging.info('Total processing time: {} seconds.'.format(time.time() - overall_start))
    except ValueError:
        shutil.rmtree(staging_folder, ignore_errors=True)
        raise
    except Exception:
        shutil.rmtree(staging_folder, ignore_errors=True)
        logging.error('Benchmark failed to proceed with:\n {}'.format(traceback.format_exc()))
        raise RuntimeError("Benchmark could not fully proceed.")
    return os.path.abspath(output_folder)
