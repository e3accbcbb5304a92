import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple
import numpy as np
from tqdm import tqdm
from ..Utils.configuration_parser import HPOStrategy
from .search_domain import SearchDomain, ParamValue, sample_uniform
from .tpe import TpeConfig, tpe_suggest


@dataclass(frozen=True)
class Trial:
    index: int
    params: Dict[str, ParamValue]
    loss: float


@dataclass(frozen=True)
class TrialHistory:
    """
    Completed trials of one optimization run, indices consecutive from 0.
    """
    strategy: HPOStrategy
    seed: int
    trials: Tuple[Trial, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if [t.index for t in self.trials] != list(range(len(self.trials))):
            raise ValueError('Trial indices must be consecutive from 0.')

    def __len__(self) -> int:
        return len(self.trials)

    def append(self, trial: Trial) -> 'TrialHistory':
        return TrialHistory(strategy=self.strategy, seed=self.seed, trials=self.trials + (trial,))

    def best(self) -> Trial:
        if len(self.trials) == 0:
            raise ValueError('Empty trial history.')
        return min(self.trials, key=lambda t: (t.loss, t.index))

    def running_best(self) -> List[float]:
        return list(np.minimum.accumulate([t.loss for t in self.trials]))


def trial_stream(seed: int, index: int) -> np.random.Generator:
    """
    Random stream of one trial, derived from (seed, index) so that resumed runs match uninterrupted ones.
    """
    return np.random.default_rng([seed, index])


def optimize(objective: Callable[[Dict[str, ParamValue]], float], domain: SearchDomain, n_trials: int,
             strategy: HPOStrategy, seed: int, tpe_config: Optional[TpeConfig] = None,
             history: Optional[TrialHistory] = None, progress: bool = False) -> Tuple[Trial, TrialHistory]:
    """
    Minimizes objective over the domain with random search or TPE.

    Parameters
    ----------
    objective : callable
        Maps a parameter dictionary to the loss to minimize. Non-finite losses are recorded as +inf.
    domain : SearchDomain
        Space to search.
    n_trials : int
        Total length of the returned history, including the trials of a resumed history.
    strategy : HPOStrategy
        RS or TPE.
    seed : int
        Root seed; each trial draws from a stream derived from (seed, index).
    tpe_config : TpeConfig
        TPE settings, defaults when None.
    history : TrialHistory
        Previous trials to resume from, produced with the same strategy and seed.
    progress : bool
        Displays a progress bar.
    Returns
    -------
    Trial
        Best trial (lowest loss, earliest on ties).
    TrialHistory
        Every trial, in evaluation order.
    """
    if n_trials < 1:
        raise ValueError('n_trials must be at least 1, got {}.'.format(n_trials))
    if strategy not in (HPOStrategy.RS, HPOStrategy.TPE):
        raise ValueError('Unsupported optimization strategy: {}.'.format(strategy))
    tpe_config = tpe_config or TpeConfig()
    if history is None:
        history = TrialHistory(strategy=strategy, seed=seed)
    elif history.strategy != strategy or history.seed != seed:
        raise ValueError('The resumed history was produced with {} / seed {}, not {} / seed {}.'.format(
            history.strategy, history.seed, strategy, seed))

    for index in tqdm(range(len(history), n_trials), disable=not progress, desc='{} trials'.format(strategy)):
        start = time.time()
        rng = trial_stream(seed, index)
        if strategy == HPOStrategy.TPE:
            params = tpe_suggest(history, domain, tpe_config, rng)
        else:
            params = sample_uniform(domain, rng)
        loss = float(objective(params))
        if not math.isfinite(loss):
            logging.warning('Trial {} returned a non-finite loss ({}), recorded as +inf.'.format(index, loss))
            loss = math.inf
        history = history.append(Trial(index=index, params=params, loss=loss))
        logging.debug('Trial {} ({}): loss {:.6f} in {:.2f} seconds, params {}.'.format(
            index, strategy, loss, time.time() - start, params))
    return history.best(), history
