import json
import logging
import os
import traceback
from dataclasses import asdict
from typing import Dict, List, Optional, Tuple, Union
import numpy as np
import pandas as pd
from .configuration_parser import HPOStrategy, parse_enum
from .dataset import Dataset
from ..PreProcessing.pre_processing import PreprocessStats
from ..Models.logistic_regression import LogisticModel
from ..Models.gradient_boosting import GBTConfig, GBTModel, TreeNode
from ..Optimization.optimization import Trial, TrialHistory
from ..Evaluation.cross_validation import CVRecord
from ..Statistics.comparison import ComparisonMatrix


MODEL_FORMAT_VERSION = 1
MISSING_TOKENS = ['', 'NA']


def __parse_float(cell: str) -> Optional[float]:
    try:
        return float(cell)
    except ValueError:
        return None


def load_csv(filename: str, target_name: str = 'RiskFlag') -> Dataset:
    """
    Reads a comma-separated table with a header row into a Dataset.

    Every column other than the target is a numeric feature, in file order. Empty cells and 'NA' are missing.

    Parameters
    ----------
    filename : str
        Location of the CSV file on disk.
    target_name : str
        Header of the binary (0/1) target column.
    Returns
    -------
    Dataset
    """
    if not os.path.exists(filename):
        raise ValueError('Data file cannot be found on disk at location: \'{}\'.'.format(filename))
    try:
        raw = pd.read_csv(filename, dtype=str, keep_default_na=False, header=None)
    except Exception:
        logging.error('Following error collected while reading {}: \n {}'.format(filename, traceback.format_exc()))
        raise ValueError('Data file \'{}\' could not be parsed as CSV.'.format(filename))

    header = raw.iloc[0].tolist()
    duplicates = sorted(set([name for name in header if header.count(name) > 1]))
    if len(duplicates) > 0:
        raise ValueError('Duplicate column names in {}: {}.'.format(filename, ', '.join(duplicates)))
    table = raw.iloc[1:].reset_index(drop=True)
    table.columns = header

    if target_name not in table.columns:
        raise ValueError('Target column \'{}\' not found in {}.'.format(target_name, filename))
    if len(table) == 0:
        raise ValueError('Data file \'{}\' holds no rows.'.format(filename))

    raw_target = table[target_name].str.strip()
    if not raw_target.isin(['0', '1']).all():
        row = int(np.flatnonzero(~raw_target.isin(['0', '1']).to_numpy())[0])
        raise ValueError('Target column \'{}\' must only hold 0 or 1, got \'{}\' on data row {}.'.format(
            target_name, raw_target.iloc[row], row + 1))

    features = table.drop(columns=[target_name])
    values = np.empty(features.shape, dtype=np.float64)
    for j, name in enumerate(features.columns):
        cells = features[name].str.strip().tolist()
        parsed = [np.nan if c in MISSING_TOKENS else __parse_float(c) for c in cells]
        if None in parsed:
            row = parsed.index(None)
            raise ValueError('Non-numeric cell \'{}\' in column \'{}\', data row {}.'.format(cells[row], name,
                                                                                          row + 1))
        values[:, j] = parsed
    return Dataset(feature_names=list(features.columns), values=values, target=raw_target.astype(int).to_numpy())


def dump_csv(ds: Dataset, filename: str, target_name: str = 'RiskFlag') -> None:
    """
    Writes the dataset in the dialect load_csv reads, the target column last and missing cells left empty.
    """
    logging.debug('Writing dataset to {}.'.format(filename))
    try:
        if target_name in ds.feature_names:
            raise ValueError('A feature is already named \'{}\'.'.format(target_name))
        table = pd.DataFrame(ds.values, columns=ds.feature_names)
        table[target_name] = ds.target
        os.makedirs(os.path.dirname(os.path.abspath(filename)), exist_ok=True)
        table.to_csv(filename, index=False, na_rep='')
    except Exception:
        logging.error('Following error collected during dataset dump on disk: \n {}'.format(traceback.format_exc()))
        raise ValueError('Dataset dump on disk could not fully proceed.')


def dump_feature_list(names: List[str], filename: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(filename)), exist_ok=True)
    with open(filename, 'w') as f:
        f.write(''.join(['{}\n'.format(name) for name in names]))


def load_feature_list(filename: str) -> List[str]:
    if not os.path.exists(filename):
        raise ValueError('Feature list cannot be found on disk at location: \'{}\'.'.format(filename))
    with open(filename, 'r') as f:
        return [line.strip() for line in f.readlines() if line.strip() != '']


def dump_preprocess_stats(stats: PreprocessStats, filename: str) -> None:
    logging.debug('Writing preprocessing statistics to {}.'.format(filename))
    try:
        pd.DataFrame({'feature': stats.feature_names, 'median': stats.median, 'mean': stats.mean,
                      'sd': stats.sd}).to_csv(filename, index=False)
    except Exception:
        logging.error('Following error collected during statistics dump on disk: \n {}'.format(
            traceback.format_exc()))
        raise ValueError('Preprocessing statistics dump on disk could not fully proceed.')


def load_preprocess_stats(filename: str) -> PreprocessStats:
    table = pd.read_csv(filename, dtype={'feature': str}, float_precision='round_trip')
    if list(table.columns) != ['feature', 'median', 'mean', 'sd']:
        raise ValueError('Unexpected preprocessing statistics header in {}: {}.'.format(filename,
                                                                                     list(table.columns)))
    return PreprocessStats(feature_names=list(table['feature']), median=table['median'].to_numpy(dtype=np.float64),
                           mean=table['mean'].to_numpy(dtype=np.float64), sd=table['sd'].to_numpy(dtype=np.float64))


def __tree_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {'weight': node.weight}
    return {'feature': node.feature, 'threshold': node.threshold, 'weight': node.weight,
            'left': __tree_to_dict(node.left), 'right': __tree_to_dict(node.right)}


def __tree_from_dict(content: dict) -> TreeNode:
    if 'feature' not in content:
        return TreeNode(weight=float(content['weight']))
    return TreeNode(weight=float(content.get('weight', 0.0)), feature=int(content['feature']),
                    threshold=float(content['threshold']), left=__tree_from_dict(content['left']),
                    right=__tree_from_dict(content['right']))


def dump_model(model: Union[LogisticModel, GBTModel], filename: str) -> None:
    """
    Saves a trained model as JSON, either {'type': 'LR', ...} or {'type': 'GBT', ...} with nested trees.
    """
    logging.debug('Writing model to {}.'.format(filename))
    try:
        if isinstance(model, LogisticModel):
            content = {'format_version': MODEL_FORMAT_VERSION, 'type': 'LR', 'feature_names': model.feature_names,
                       'intercept': model.intercept, 'coefficients': [float(x) for x in model.coefficients],
                       'converged': model.converged, 'iterations': model.iterations}
        else:
            content = {'format_version': MODEL_FORMAT_VERSION, 'type': 'GBT', 'feature_names': model.feature_names,
                       'learning_rate': model.learning_rate, 'base_margin': model.base_margin,
                       'config': asdict(model.config), 'trees': [__tree_to_dict(t) for t in model.trees]}
        os.makedirs(os.path.dirname(os.path.abspath(filename)), exist_ok=True)
        with open(filename, 'w') as f:
            json.dump(content, f, indent=1)
    except Exception:
        logging.error('Following error collected during model dump on disk: \n {}'.format(traceback.format_exc()))
        raise ValueError('Model dump on disk could not fully proceed.')


def load_model(filename: str) -> Union[LogisticModel, GBTModel]:
    if not os.path.exists(filename):
        raise ValueError('Model file cannot be found on disk at location: \'{}\'.'.format(filename))
    with open(filename, 'r') as f:
        try:
            content = json.load(f)
        except json.JSONDecodeError:
            raise ValueError('Model file \'{}\' is not valid JSON.'.format(filename))
    if content.get('format_version') != MODEL_FORMAT_VERSION:
        raise ValueError('Unsupported model format version: {}.'.format(content.get('format_version')))
    if content.get('type') == 'LR':
        return LogisticModel(feature_names=content['feature_names'], intercept=float(content['intercept']),
                             coefficients=np.asarray(content['coefficients'], dtype=np.float64),
                             converged=bool(content['converged']), iterations=int(content['iterations']))
    if content.get('type') == 'GBT':
        return GBTModel(feature_names=content['feature_names'], trees=[__tree_from_dict(t) for t in content['trees']],
                        learning_rate=float(content['learning_rate']), base_margin=float(content['base_margin']),
                        config=GBTConfig(**content['config']))
    raise ValueError('Unknown model type \'{}\' in {}.'.format(content.get('type'), filename))


def dump_trial_history(history: TrialHistory, filename: str) -> None:
    """
    One row per trial: strategy, seed, index, loss, then one column per hyper-parameter.
    """
    rows = [{'strategy': str(history.strategy), 'seed': history.seed, 'index': t.index, 'loss': t.loss, **t.params}
            for t in history.trials]
    pd.DataFrame(rows, columns=None if rows else ['strategy', 'seed', 'index', 'loss']).to_csv(filename, index=False)


def load_trial_history(filename: str,
                       integer_parameters: Tuple[str, ...] = ('max_leaves', 'max_depth')) -> TrialHistory:
    table = pd.read_csv(filename, float_precision='round_trip')
    if len(table) == 0:
        raise ValueError('Trial history \'{}\' is empty.'.format(filename))
    strategy = parse_enum(HPOStrategy, str(table['strategy'].iloc[0]))
    seed = int(table['seed'].iloc[0])
    names = [c for c in table.columns if c not in ('strategy', 'seed', 'index', 'loss')]
    trials = []
    for _, row in table.iterrows():
        params = {name: int(row[name]) if name in integer_parameters else float(row[name]) for name in names}
        trials.append(Trial(index=int(row['index']), params=params, loss=float(row['loss'])))
    return TrialHistory(strategy=strategy, seed=seed, trials=tuple(trials))


def dump_cv_records(records: List[CVRecord], filename: str) -> None:
    """
    Flat key,value table: for each record its per-repeat rows (_1 ... _R), grand mean and _SD.
    """
    logging.debug('Writing cross-validation records to {}.'.format(filename))
    try:
        rows = [entry for record in records for entry in record.entries()]
        pd.DataFrame(rows, columns=['key', 'value']).to_csv(filename, index=False)
    except Exception:
        logging.error('Following error collected during records dump on disk: \n {}'.format(traceback.format_exc()))
        raise ValueError('Cross-validation records dump on disk could not fully proceed.')


def load_cv_records(filename: str) -> Dict[str, CVRecord]:
    """
    Inverse of dump_cv_records, keyed by '<FS>_<model>_<metric>'.
    """
    table = pd.read_csv(filename, dtype={'key': str}, float_precision='round_trip')
    values = dict(zip(table['key'], table['value'].astype(float)))
    records = {}
    for key in values:
        if not key.endswith('_SD') or key[:-len('_SD')] not in values:
            continue
        base = key[:-len('_SD')]
        repeats = []
        while '{}_{}'.format(base, len(repeats) + 1) in values:
            repeats.append(values['{}_{}'.format(base, len(repeats) + 1)])
        records[base] = CVRecord(key=base, repeat_means=repeats, mean=values[base], sd=values[key])
    if len(records) == 0:
        raise ValueError('No cross-validation record found in {}.'.format(filename))
    return records


def load_series(filename: str) -> Dict[str, List[float]]:
    """
    Reads paired series for comparisons: one column per series, one row per repeat.
    """
    if not os.path.exists(filename):
        raise ValueError('Series file cannot be found on disk at location: \'{}\'.'.format(filename))
    table = pd.read_csv(filename, float_precision='round_trip')
    if table.shape[1] < 2:
        raise ValueError('At least two series (columns) are needed in {}.'.format(filename))
    if table.isna().any().any():
        raise ValueError('Series file {} has empty cells.'.format(filename))
    return {str(c): [float(x) for x in table[c]] for c in table.columns}


def dump_comparison(matrices: List[ComparisonMatrix], stem: str, title: str = '') -> None:
    """
    Writes <stem>.csv (every test field, all criteria stacked) and <stem>.md (one pair / criterion / p value /
    decision table per criterion).
    """
    logging.debug('Writing comparison matrices to {}.csv/.md.'.format(stem))
    try:
        pd.concat([m.to_frame() for m in matrices], ignore_index=True).to_csv(stem + '.csv', index=False)
        with open(stem + '.md', 'w') as f:
            if title:
                f.write('# {}\n\n'.format(title))
            f.write('\n'.join([m.to_markdown() for m in matrices]))
    except Exception:
        logging.error('Following error collected during comparison dump on disk: \n {}'.format(
            traceback.format_exc()))
        raise ValueError('Comparison dump on disk could not fully proceed.')


def load_comparison(filename: str) -> pd.DataFrame:
    return pd.read_csv(filename)


def dump_importance(ranking: List[Tuple[str, int]], filename: str) -> None:
    pd.DataFrame(ranking, columns=['feature', 'fscore']).to_csv(filename, index=False)


def load_importance(filename: str) -> List[Tuple[str, int]]:
    table = pd.read_csv(filename, dtype={'feature': str}, float_precision='round_trip')
    return [(str(f), int(s)) for f, s in zip(table['feature'], table['fscore'])]
