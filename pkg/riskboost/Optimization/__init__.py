from .search_domain import Parameter, SearchDomain, default_domain, sample_uniform
from .tpe import TpeConfig, ParzenEstimator, tpe_suggest
from .optimization import Trial, TrialHistory, optimize
