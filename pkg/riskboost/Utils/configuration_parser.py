import configparser
import os
from typing import List, Optional, Dict, Tuple
from aenum import Enum, unique


@unique
class FeatureSelectionMethod(Enum):
    _init_ = 'value string'

    Gini = 0, 'Gini'
    ChiSquare = 1, 'ChiSquare'
    Cluster = 2, 'Cluster'
    Correlation = 3, 'Correlation'
    Information = 4, 'Information'

    def __str__(self):
        return self.string


@unique
class ModelType(Enum):
    _init_ = 'value string'

    LR = 0, 'LR'
    GBT = 1, 'GBT'

    def __str__(self):
        return self.string


@unique
class HPOStrategy(Enum):
    _init_ = 'value string'

    NONE = 0, 'none'
    RS = 1, 'RS'
    TPE = 2, 'TPE'

    def __str__(self):
        return self.string


@unique
class Alternative(Enum):
    _init_ = 'value string'

    Greater = 0, 'greater'
    Less = 1, 'less'
    TwoSided = 2, 'two_sided'

    def __str__(self):
        return self.string


@unique
class TestMethod(Enum):
    _init_ = 'value string'

    Exact = 0, 'exact'
    NormalApprox = 1, 'normal_approx'

    def __str__(self):
        return self.string


@unique
class Decision(Enum):
    _init_ = 'value string'

    Rejected = 0, 'Rejected'
    NotRejected = 1, 'Not rejected'

    def __str__(self):
        return self.string


@unique
class ParameterKind(Enum):
    _init_ = 'value string'

    Real = 0, 'real'
    Integer = 1, 'integer'

    def __str__(self):
        return self.string


def get_type_from_string(EnumType, string):
    if type(string) == str:
        for i in range(len(list(EnumType))):
            if string == str(list(EnumType)[i]):
                return list(EnumType)[i]
        return -1
    elif type(string) == EnumType:
        return string
    else:  # Un-managed input type
        return -1


def parse_enum(EnumType, string: str):
    """
    Strict variant of get_type_from_string, raising on unknown names instead of returning -1.
    """
    value = get_type_from_string(EnumType, string)
    if value == -1:
        raise ValueError('Unknown {} value \'{}\', expected one of: {}.'.format(
            EnumType.__name__, string, ', '.join([str(x) for x in EnumType])))
    return value


def model_label(model: ModelType, strategy: HPOStrategy) -> str:
    """
    Name used in result keys, e.g. LR, GBT, GBT_RS or GBT_TPE.
    """
    if model == ModelType.LR or strategy == HPOStrategy.NONE:
        return str(model)
    return '{}_{}'.format(model, strategy)


class ConfigResources:
    """
    Class defining and holding the various (user-specified) configuration and runtime parameters.
    """
    def __init__(self):
        self.__setup()

    def __setup(self):
        self.config_filename = None
        self.config = None

        self.output_folder = None
        self.nb_workers = 1
        self.seed = 42
        self.log_filename = None
        self.progress = True

        self.input_filename = None
        self.target_name = 'RiskFlag'
        self.missing_threshold = 0.70
        self.sample_size = None

        self.synth_n_rows = 2000
        self.synth_n_informative = 10
        self.synth_n_redundant = 10
        self.synth_n_noise = 40
        self.synth_positive_rate = 0.52
        self.synth_missing_rate = 0.05
        self.synth_interaction_strength = 1.0

        self.fs_methods = [x for x in FeatureSelectionMethod]
        self.models = [ModelType.LR, ModelType.GBT]
        self.hpo_strategies = [HPOStrategy.RS, HPOStrategy.TPE]
        self.folds = 10
        self.repeats = 10
        self.n_features = 50

        self.n_trials = 50
        self.inner_folds = 5
        self.tpe_startup = 20
        self.tpe_gamma = 0.25
        self.tpe_candidates = 24
        self.tpe_bandwidth_floor = 0.01

        self.boosting_n_estimators = 100
        self.boosting_lambda = 1.0
        self.boosting_learning_rate = 0.3
        self.boosting_subsample = 1.0
        self.boosting_max_leaves = 64
        self.boosting_max_depth = 6
        self.boosting_gamma = 0.0
        self.boosting_colsample_bytree = 1.0
        self.boosting_min_child_weight = 1.0

        self.alpha = 0.1
        self.alternative = Alternative.Greater

    def init_environment(self, config_filename: Optional[str],
                         overrides: Optional[Dict[Tuple[str, str], str]] = None) -> None:
        """
        Loads the configuration file, applies the command-line overrides on top of it, and validates the result.

        Parameters
        ----------
        config_filename: str
            Filepath to an *.ini file following the pattern of 'blank_main_config.ini'. Can be None when every
            value comes from the overrides or the defaults.
        overrides: dict
            Mapping (section, key) -> raw string value, taking precedence over the file content.
        """
        self.config_filename = config_filename
        self.config = configparser.ConfigParser()
        if config_filename:
            if not os.path.exists(config_filename):
                raise ValueError('Configuration file cannot be found on disk at location: \'{}\'.'.format(
                    config_filename))
            self.config.read(config_filename)
        if overrides:
            for (section, key), value in overrides.items():
                if not self.config.has_section(section):
                    self.config.add_section(section)
                self.config.set(section, key, str(value))
        self.__parse_main_config()
        self.validate()

    def __value(self, section: str, key: str) -> Optional[str]:
        if self.config.has_option(section, key):
            if self.config[section][key].split('#')[0].strip() != '':
                return self.config[section][key].split('#')[0].strip()
        return None

    def __list(self, section: str, key: str) -> Optional[List[str]]:
        value = self.__value(section, key)
        if value is None:
            return None
        return [x.strip() for x in value.split(',') if x.strip() != '']

    def __parse_main_config(self):
        if self.__value('System', 'output_folder') is not None:
            self.output_folder = self.__value('System', 'output_folder')

        if self.__value('System', 'nb_workers') is not None:
            self.nb_workers = int(self.__value('System', 'nb_workers'))

        if self.__value('System', 'seed') is not None:
            self.seed = int(self.__value('System', 'seed'))

        if self.__value('System', 'log_filename') is not None:
            self.log_filename = self.__value('System', 'log_filename')

        if self.__value('System', 'progress') is not None:
            self.progress = True if self.__value('System', 'progress').lower() == 'true' else False

        self.__parse_data_content()
        self.__parse_synthetic_content()
        self.__parse_experiment_content()
        self.__parse_optimization_content()
        self.__parse_boosting_content()
        self.__parse_statistics_content()

    def __parse_data_content(self):
        if self.__value('Data', 'input_filename') is not None:
            self.input_filename = self.__value('Data', 'input_filename')

        if self.__value('Data', 'target_name') is not None:
            self.target_name = self.__value('Data', 'target_name')

        if self.__value('Data', 'missing_threshold') is not None:
            self.missing_threshold = float(self.__value('Data', 'missing_threshold'))

        if self.__value('Data', 'sample_size') is not None:
            self.sample_size = int(self.__value('Data', 'sample_size'))

    def __parse_synthetic_content(self):
        if self.__value('Synthetic', 'n_rows') is not None:
            self.synth_n_rows = int(self.__value('Synthetic', 'n_rows'))

        if self.__value('Synthetic', 'n_informative') is not None:
            self.synth_n_informative = int(self.__value('Synthetic', 'n_informative'))

        if self.__value('Synthetic', 'n_redundant') is not None:
            self.synth_n_redundant = int(self.__value('Synthetic', 'n_redundant'))

        if self.__value('Synthetic', 'n_noise') is not None:
            self.synth_n_noise = int(self.__value('Synthetic', 'n_noise'))

        if self.__value('Synthetic', 'positive_rate') is not None:
            self.synth_positive_rate = float(self.__value('Synthetic', 'positive_rate'))

        if self.__value('Synthetic', 'missing_rate') is not None:
            self.synth_missing_rate = float(self.__value('Synthetic', 'missing_rate'))

        if self.__value('Synthetic', 'interaction_strength') is not None:
            self.synth_interaction_strength = float(self.__value('Synthetic', 'interaction_strength'))

    def __parse_experiment_content(self):
        if self.__list('Experiment', 'fs_methods') is not None:
            self.fs_methods = [parse_enum(FeatureSelectionMethod, x) for x in self.__list('Experiment', 'fs_methods')]

        if self.__list('Experiment', 'models') is not None:
            self.models = [parse_enum(ModelType, x) for x in self.__list('Experiment', 'models')]

        if self.__list('Experiment', 'hpo_strategies') is not None:
            self.hpo_strategies = [parse_enum(HPOStrategy, x) for x in self.__list('Experiment', 'hpo_strategies')]

        if self.__value('Experiment', 'folds') is not None:
            self.folds = int(self.__value('Experiment', 'folds'))

        if self.__value('Experiment', 'repeats') is not None:
            self.repeats = int(self.__value('Experiment', 'repeats'))

        if self.__value('Experiment', 'n_features') is not None:
            self.n_features = int(self.__value('Experiment', 'n_features'))

    def __parse_optimization_content(self):
        if self.__value('Optimization', 'n_trials') is not None:
            self.n_trials = int(self.__value('Optimization', 'n_trials'))

        if self.__value('Optimization', 'inner_folds') is not None:
            self.inner_folds = int(self.__value('Optimization', 'inner_folds'))

        if self.__value('Optimization', 'tpe_startup') is not None:
            self.tpe_startup = int(self.__value('Optimization', 'tpe_startup'))

        if self.__value('Optimization', 'tpe_gamma') is not None:
            self.tpe_gamma = float(self.__value('Optimization', 'tpe_gamma'))

        if self.__value('Optimization', 'tpe_candidates') is not None:
            self.tpe_candidates = int(self.__value('Optimization', 'tpe_candidates'))

        if self.__value('Optimization', 'tpe_bandwidth_floor') is not None:
            self.tpe_bandwidth_floor = float(self.__value('Optimization', 'tpe_bandwidth_floor'))

    def __parse_boosting_content(self):
        if self.__value('Boosting', 'n_estimators') is not None:
            self.boosting_n_estimators = int(self.__value('Boosting', 'n_estimators'))

        if self.__value('Boosting', 'lambda') is not None:
            self.boosting_lambda = float(self.__value('Boosting', 'lambda'))

        if self.__value('Boosting', 'learning_rate') is not None:
            self.boosting_learning_rate = float(self.__value('Boosting', 'learning_rate'))

        if self.__value('Boosting', 'subsample') is not None:
            self.boosting_subsample = float(self.__value('Boosting', 'subsample'))

        if self.__value('Boosting', 'max_leaves') is not None:
            self.boosting_max_leaves = int(self.__value('Boosting', 'max_leaves'))

        if self.__value('Boosting', 'max_depth') is not None:
            self.boosting_max_depth = int(self.__value('Boosting', 'max_depth'))

        if self.__value('Boosting', 'gamma') is not None:
            self.boosting_gamma = float(self.__value('Boosting', 'gamma'))

        if self.__value('Boosting', 'colsample_bytree') is not None:
            self.boosting_colsample_bytree = float(self.__value('Boosting', 'colsample_bytree'))

        if self.__value('Boosting', 'min_child_weight') is not None:
            self.boosting_min_child_weight = float(self.__value('Boosting', 'min_child_weight'))

    def __parse_statistics_content(self):
        if self.__value('Statistics', 'alpha') is not None:
            self.alpha = float(self.__value('Statistics', 'alpha'))

        if self.__value('Statistics', 'alternative') is not None:
            self.alternative = parse_enum(Alternative, self.__value('Statistics', 'alternative'))

    def validate(self) -> None:
        if not self.output_folder:
            raise ValueError('An output folder must be specified under [System] output_folder.')
        if self.nb_workers < 1:
            raise ValueError('nb_workers must be at least 1, got {}.'.format(self.nb_workers))
        if self.input_filename is not None and not os.path.exists(self.input_filename):
            raise ValueError('Input data cannot be found on disk at location: \'{}\'.'.format(self.input_filename))
        if not 0.0 <= self.missing_threshold <= 1.0:
            raise ValueError('missing_threshold must lie in [0, 1], got {}.'.format(self.missing_threshold))
        if self.sample_size is not None and self.sample_size < 1:
            raise ValueError('sample_size must be positive, got {}.'.format(self.sample_size))
        if len(self.fs_methods) == 0 or len(self.models) == 0:
            raise ValueError('At least one feature selection method and one model must be requested.')
        if ModelType.GBT in self.models and len(self.hpo_strategies) == 0:
            raise ValueError('At least one HPO strategy (none, RS, TPE) is needed for the GBT model.')
        if self.folds < 2:
            raise ValueError('The number of folds must be at least 2, got {}.'.format(self.folds))
        if self.repeats < 2:
            raise ValueError('The number of repeats must be at least 2, got {}.'.format(self.repeats))
        if self.n_features < 1:
            raise ValueError('n_features must be at least 1, got {}.'.format(self.n_features))
        if self.n_trials < 1 or self.inner_folds < 2:
            raise ValueError('n_trials must be >= 1 and inner_folds >= 2.')
        if not 0.0 < self.alpha < 1.0:
            raise ValueError('alpha must lie in (0, 1), got {}.'.format(self.alpha))

    def combinations(self) -> List[Tuple[FeatureSelectionMethod, ModelType, HPOStrategy]]:
        """
        Every (FS method, model, HPO strategy) triplet of the experiment, in a stable order.
        """
        results = []
        for fs in self.fs_methods:
            for model in self.models:
                if model == ModelType.LR:
                    results.append((fs, model, HPOStrategy.NONE))
                else:
                    for strategy in self.hpo_strategies:
                        results.append((fs, model, strategy))
        return results

    def to_config(self) -> configparser.ConfigParser:
        """
        Resolved configuration, written as the run manifest. Re-running from it reproduces the experiment.
        """
        manifest = configparser.ConfigParser()
        manifest['System'] = {'nb_workers': str(self.nb_workers),
                              'seed': str(self.seed), 'progress': str(self.progress).lower()}
        manifest['Data'] = {'input_filename': self.input_filename or '', 'target_name': self.target_name,
                            'missing_threshold': repr(self.missing_threshold),
                            'sample_size': '' if self.sample_size is None else str(self.sample_size)}
        manifest['Synthetic'] = {'n_rows': str(self.synth_n_rows), 'n_informative': str(self.synth_n_informative),
                                 'n_redundant': str(self.synth_n_redundant), 'n_noise': str(self.synth_n_noise),
                                 'positive_rate': repr(self.synth_positive_rate),
                                 'missing_rate': repr(self.synth_missing_rate),
                                 'interaction_strength': repr(self.synth_interaction_strength)}
        manifest['Experiment'] = {'fs_methods': ','.join([str(x) for x in self.fs_methods]),
                                  'models': ','.join([str(x) for x in self.models]),
                                  'hpo_strategies': ','.join([str(x) for x in self.hpo_strategies]),
                                  'folds': str(self.folds), 'repeats': str(self.repeats),
                                  'n_features': str(self.n_features)}
        manifest['Optimization'] = {'n_trials': str(self.n_trials), 'inner_folds': str(self.inner_folds),
                                    'tpe_startup': str(self.tpe_startup), 'tpe_gamma': repr(self.tpe_gamma),
                                    'tpe_candidates': str(self.tpe_candidates),
                                    'tpe_bandwidth_floor': repr(self.tpe_bandwidth_floor)}
        manifest['Boosting'] = {'n_estimators': str(self.boosting_n_estimators),
                                'lambda': repr(self.boosting_lambda),
                                'learning_rate': repr(self.boosting_learning_rate),
                                'subsample': repr(self.boosting_subsample),
                                'max_leaves': str(self.boosting_max_leaves),
                                'max_depth': str(self.boosting_max_depth),
                                'gamma': repr(self.boosting_gamma),
                                'colsample_bytree': repr(self.boosting_colsample_bytree),
                                'min_child_weight': repr(self.boosting_min_child_weight)}
        manifest['Statistics'] = {'alpha': repr(self.alpha), 'alternative': str(self.alternative)}
        return manifest
