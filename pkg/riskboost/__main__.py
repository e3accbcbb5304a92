import os
import sys
import traceback
import argparse
import logging
import platform
from typing import Dict, List, Optional, Tuple

from riskboost.Utils.configuration_parser import FeatureSelectionMethod, ModelType, HPOStrategy, Alternative, \
    parse_enum
from riskboost.Utils.io import load_csv, dump_csv, dump_feature_list, load_feature_list, dump_preprocess_stats, \
    load_preprocess_stats, dump_model, load_model, dump_trial_history, load_trial_history, dump_cv_records, \
    load_series, dump_comparison, dump_importance
from riskboost.PreProcessing.pre_processing import drop_high_missing, fit_preprocessor, apply_preprocessor
from riskboost.PreProcessing.synthetic_data import SynthSpec, generate
from riskboost.FeatureSelection.selection import select_features
from riskboost.Models.logistic_regression import train_logistic
from riskboost.Models.gradient_boosting import GBTConfig, GBTModel, train_gbt, feature_importance
from riskboost.Optimization.search_domain import default_domain
from riskboost.Optimization.optimization import optimize
from riskboost.Evaluation.metrics import METRIC_NAMES, evaluate_predictions
from riskboost.Evaluation.cross_validation import PipelineSpec, hpo_objective, predict_probabilities, repeated_cv
from riskboost.Statistics.comparison import pairwise_comparison
from riskboost.fit import run_experiment


def path(string):
    if os.path.exists(string):
        return string
    else:
        raise argparse.ArgumentTypeError('File not found: {}'.format(string))


def parse_overrides(assignments: Optional[List[str]]) -> Dict[Tuple[str, str], str]:
    """
    'Section.key=value' strings -> {(Section, key): value}.
    """
    overrides = {}
    for assignment in assignments or []:
        if '=' not in assignment or '.' not in assignment.split('=', 1)[0]:
            raise ValueError('Overrides must read Section.key=value, got \'{}\'.'.format(assignment))
        name, value = assignment.split('=', 1)
        section, key = name.split('.', 1)
        overrides[(section.strip(), key.strip())] = value.strip()
    return overrides


def __load_features(ds, features_filename: Optional[str]):
    if features_filename is None:
        return ds
    return ds.subset_features(load_feature_list(features_filename))


def cmd_run(args) -> None:
    overrides = parse_overrides(args.set)
    if args.seed is not None:
        overrides[('System', 'seed')] = str(args.seed)
    if args.output is not None:
        overrides[('System', 'output_folder')] = args.output
    output_folder = run_experiment(config_filename=args.config, overrides=overrides, logging_filename=args.log)
    print('Artifacts written to {}'.format(output_folder))


def cmd_synth(args) -> None:
    spec = SynthSpec(n_rows=args.rows, n_informative=args.informative, n_redundant=args.redundant,
                     n_noise=args.noise, positive_rate=args.positive_rate, missing_rate=args.missing_rate,
                     seed=args.seed, interaction_strength=args.interaction)
    ds, informative = generate(spec)
    dump_csv(ds, args.output, target_name=args.target)
    dump_feature_list(informative, os.path.splitext(args.output)[0] + '_informative.txt')
    print('{} rows x {} features, positive rate {:.4f}'.format(ds.n_rows, ds.n_features, ds.positive_rate))


def cmd_preprocess(args) -> None:
    ds = load_csv(args.input, target_name=args.target)
    if args.apply:
        stats = load_preprocess_stats(args.stats)
        ds = ds.subset_features(stats.feature_names)
    else:
        ds = drop_high_missing(ds, threshold=args.threshold)
        stats = fit_preprocessor(ds)
        dump_preprocess_stats(stats, args.stats)
    dump_csv(apply_preprocessor(ds, stats), args.output, target_name=args.target)
    print('{} rows x {} features preprocessed'.format(ds.n_rows, len(stats.feature_names)))


def cmd_select(args) -> None:
    ds = load_csv(args.input, target_name=args.target)
    if ds.has_missing():
        logging.warning('Missing values in {}, the input is preprocessed before the selection.'.format(args.input))
        ds = drop_high_missing(ds)
        ds = apply_preprocessor(ds, fit_preprocessor(ds))
    selection = select_features(ds, parse_enum(FeatureSelectionMethod, args.method), args.k)
    if args.output:
        dump_feature_list(selection.selected, args.output)
    print('\n'.join(selection.selected))


def cmd_tune(args) -> None:
    ds = __load_features(load_csv(args.input, target_name=args.target), args.features)
    strategy = parse_enum(HPOStrategy, args.strategy)
    history = load_trial_history(args.history) if args.resume and os.path.exists(args.history) else None
    objective = hpo_objective(ds, GBTConfig(seed=args.seed), args.inner_folds, args.seed)
    best, history = optimize(objective, default_domain(), args.trials, strategy, seed=args.seed, history=history,
                             progress=args.verbose in ('debug', 'info'))
    dump_trial_history(history, args.history)
    print('Best trial #{} : loss {:.6f}'.format(best.index, best.loss))
    for name, value in best.params.items():
        print('{} = {}'.format(name, value))


def cmd_train(args) -> None:
    ds = __load_features(load_csv(args.input, target_name=args.target), args.features)
    model_type = parse_enum(ModelType, args.model)
    if model_type == ModelType.LR:
        model = train_logistic(ds)
    else:
        cfg = GBTConfig(seed=args.seed)
        if args.history:
            cfg = cfg.with_params(load_trial_history(args.history).best().params)
        model = train_gbt(ds, cfg)
    dump_model(model, args.output)
    print('{} model trained on {} rows x {} features'.format(model_type, ds.n_rows, ds.n_features))


def cmd_evaluate(args) -> None:
    ds = load_csv(args.input, target_name=args.target)
    if args.model_file:
        model = load_model(args.model_file)
        metrics = evaluate_predictions(ds.target, predict_probabilities(model, ds.subset_features(model.feature_names)))
        for name, value in metrics.as_dict().items():
            print('{} = {:.6f}'.format(name, value))
        return

    pipeline = PipelineSpec(fs_method=parse_enum(FeatureSelectionMethod, args.fs),
                            model=parse_enum(ModelType, args.model), hpo=parse_enum(HPOStrategy, args.hpo),
                            n_features=args.n_features, n_trials=args.trials)
    records = repeated_cv(ds, pipeline, k=args.folds, repeats=args.repeats, seed=args.seed,
                          progress=args.verbose in ('debug', 'info'))
    if args.output:
        dump_cv_records(list(records.values()), args.output)
    for name in METRIC_NAMES:
        print('{} = {:.4f} +/- {:.4f}'.format(records[name].key, records[name].mean, records[name].sd))


def cmd_compare(args) -> None:
    series = load_series(args.input)
    matrix = pairwise_comparison(series, criterion=args.criterion, alpha=args.alpha,
                                 alternative=parse_enum(Alternative, args.alternative), orient_by_mean=args.orient)
    if args.output:
        dump_comparison([matrix], args.output)
    print('alpha = {} / m = {} -> {}'.format(matrix.alpha, matrix.m, matrix.corrected_alpha))
    for c in matrix.comparisons:
        print('{} ; {} ; W = {} ; n = {} ; {} ; p = {!r} ; {}'.format(c.pair, matrix.criterion, c.result.statistic,
                                                                    c.result.n_effective, c.result.method,
                                                                    c.result.p_value, c.result.decision))


def cmd_importance(args) -> None:
    model = load_model(args.model)
    if not isinstance(model, GBTModel):
        raise ValueError('F scores are only defined for boosted tree models.')
    ranking = feature_importance(model, top_k=args.top_k)
    if args.output:
        dump_importance(ranking, args.output)
    for name, count in ranking:
        print('{} ; {}'.format(name, count))


class CliParser(argparse.ArgumentParser):
    """
    Reports usage errors with exit code 1, as any other invalid input.
    """
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, '{}: error: {}\n'.format(self.prog, message))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', help="To specify the level of verbose, Default: warning", type=str,
                        choices=['debug', 'info', 'warning', 'error'], default='warning')
    common.add_argument('--seed', type=int, default=None, help='Random seed (default 42, run: config value)')
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument('-i', '--input', type=path, required=True, help='Dataset (*.csv)')
    data.add_argument('--target', type=str, default='RiskFlag', help='Name of the target column')

    parser = CliParser(prog='riskboost')
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('run', parents=[common], help='Full benchmark described by a configuration file')
    p.add_argument('config', metavar='config', type=path, help='Path to the configuration file (*.ini)')
    p.add_argument('--output', type=str, default=None, help='Overrides [System] output_folder')
    p.add_argument('--set', action='append', metavar='Section.key=value', help='Overrides any configuration key')
    p.add_argument('--log', type=str, default=None, help='Log file')
    p.set_defaults(func=cmd_run)

    p = commands.add_parser('synth', parents=[common], help='Generate a synthetic credit-like dataset')
    p.add_argument('-o', '--output', type=str, required=True, help='Destination (*.csv)')
    p.add_argument('--rows', type=int, default=2000)
    p.add_argument('--informative', type=int, default=10)
    p.add_argument('--redundant', type=int, default=10)
    p.add_argument('--noise', type=int, default=40)
    p.add_argument('--positive-rate', type=float, default=0.52)
    p.add_argument('--missing-rate', type=float, default=0.05)
    p.add_argument('--interaction', type=float, default=1.0)
    p.add_argument('--target', type=str, default='RiskFlag')
    p.set_defaults(func=cmd_synth)

    p = commands.add_parser('preprocess', parents=[common, data], help='Drop sparse columns, impute, standardize')
    p.add_argument('-o', '--output', type=str, required=True, help='Preprocessed dataset (*.csv)')
    p.add_argument('--stats', type=str, required=True, help='Statistics file, written unless --apply is given')
    p.add_argument('--apply', action='store_true', help='Apply existing statistics instead of fitting them')
    p.add_argument('--threshold', type=float, default=0.70, help='Maximum missing fraction of a kept column')
    p.set_defaults(func=cmd_preprocess)

    p = commands.add_parser('select', parents=[common, data], help='Feature selection, raw input is preprocessed first')
    p.add_argument('--method', type=str, required=True, help='Gini, ChiSquare, Cluster, Correlation or Information')
    p.add_argument('-k', type=int, default=50, help='Number of selected features')
    p.add_argument('-o', '--output', type=str, default=None, help='Feature list (one name per line)')
    p.set_defaults(func=cmd_select)

    p = commands.add_parser('tune', parents=[common, data], help='Hyper-parameter optimization of the GBT model')
    p.add_argument('--features', type=path, default=None, help='Feature list restricting the dataset')
    p.add_argument('--strategy', type=str, default='TPE', help='RS or TPE')
    p.add_argument('--trials', type=int, default=50)
    p.add_argument('--inner-folds', type=int, default=5)
    p.add_argument('--history', type=str, required=True, help='Trial history (*.csv)')
    p.add_argument('--resume', action='store_true', help='Continue the trials stored in --history')
    p.set_defaults(func=cmd_tune)

    p = commands.add_parser('train', parents=[common, data], help='Train a model on a preprocessed dataset')
    p.add_argument('--model', type=str, required=True, help='LR or GBT')
    p.add_argument('--features', type=path, default=None, help='Feature list restricting the dataset')
    p.add_argument('--history', type=path, default=None, help='Trial history providing the GBT hyper-parameters')
    p.add_argument('-o', '--output', type=str, required=True, help='Model file (*.json)')
    p.set_defaults(func=cmd_train)

    p = commands.add_parser('evaluate', parents=[common, data],
                            help='Repeated cross-validation of a pipeline, or scoring of a saved model')
    p.add_argument('--model-file', type=path, default=None, help='Saved model, scored on the preprocessed input')
    p.add_argument('--fs', type=str, default='Gini')
    p.add_argument('--model', type=str, default='LR')
    p.add_argument('--hpo', type=str, default='none')
    p.add_argument('--n-features', type=int, default=50)
    p.add_argument('--trials', type=int, default=50)
    p.add_argument('--folds', type=int, default=10)
    p.add_argument('--repeats', type=int, default=10)
    p.add_argument('-o', '--output', type=str, default=None, help='Cross-validation records (*.csv)')
    p.set_defaults(func=cmd_evaluate)

    p = commands.add_parser('compare', parents=[common], help='Pairwise Wilcoxon signed-rank tests')
    p.add_argument('-i', '--input', type=path, required=True, help='One column per series, one row per repeat')
    p.add_argument('--criterion', type=str, default='auc')
    p.add_argument('--alpha', type=float, default=0.1)
    p.add_argument('--alternative', type=str, default='greater', help='greater, less or two_sided')
    p.add_argument('--orient', action='store_true', help='Test the series with the larger mean first')
    p.add_argument('-o', '--output', type=str, default=None, help='Output stem for the .csv and .md tables')
    p.set_defaults(func=cmd_compare)

    p = commands.add_parser('importance', parents=[common], help='F score ranking of a saved GBT model')
    p.add_argument('-m', '--model', type=path, required=True, help='Model file (*.json)')
    p.add_argument('--top-k', type=int, default=None)
    p.add_argument('-o', '--output', type=str, default=None, help='Ranking (*.csv)')
    p.set_defaults(func=cmd_importance)
    return parser


def main(argsin: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(sys.argv[1:] if argsin is None else argsin)
    except SystemExit as e:
        return e.code
    if args.command != 'run' and args.seed is None:
        args.seed = 42

    logging.basicConfig(format="%(asctime)s ; %(name)s ; %(levelname)s ; %(message)s", datefmt='%d/%m/%Y %H.%M')
    if args.verbose == 'debug':
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.verbose == 'info':
        logging.getLogger().setLevel(logging.INFO)
    elif args.verbose == 'error':
        logging.getLogger().setLevel(logging.ERROR)
    else:
        logging.getLogger().setLevel(logging.WARNING)
    logging.info("Received arguments: {}".format(args))
    try:
        args.func(args)
    except ValueError as e:
        logging.debug('{}'.format(traceback.format_exc()))
        print('Invalid input: {}'.format(e), file=sys.stderr)
        return 1
    except Exception as e:
        logging.error('{}'.format(traceback.format_exc()))
        print('Runtime failure: {}'.format(e), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    if platform.system() == 'Windows':
        from multiprocessing import freeze_support
        freeze_support()

    logging.info("Internal main call.")
    sys.exit(main())
