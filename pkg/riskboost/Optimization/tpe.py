import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Union
import numpy as np
from scipy.stats import truncnorm
from ..Utils.configuration_parser import ParameterKind
from .search_domain import SearchDomain, Parameter, ParamValue, sample_uniform


@dataclass(frozen=True)
class TpeConfig:
    """
    Tree-structured Parzen estimator settings.

    Attributes
    ----------
    n_startup : int
        Number of trials drawn uniformly before the estimators are used.
    gamma_quantile : float
        Fraction of the finite-loss trials forming the good set.
    n_candidates : int
        Draws from the good-set estimator scored per suggestion.
    bandwidth_floor : float
        Smallest kernel bandwidth, as a fraction of the parameter range.
    """
    n_startup: int = 20
    gamma_quantile: float = 0.25
    n_candidates: int = 24
    bandwidth_floor: float = 0.01

    def __post_init__(self):
        if self.n_startup < 1 or self.n_candidates < 1:
            raise ValueError('n_startup and n_candidates must be positive.')
        if not 0.0 < self.gamma_quantile < 1.0:
            raise ValueError('gamma_quantile must lie in (0, 1), got {}.'.format(self.gamma_quantile))
        if self.bandwidth_floor <= 0:
            raise ValueError('bandwidth_floor must be positive.')


class ParzenEstimator:
    """
    Mixture of truncated Gaussian kernels centred on observed values, plus one prior kernel of the width of the
    range centred on its middle. Integer parameters live on [low - 0.5, high + 0.5] and are evaluated as the mass
    of the unit cell around each integer.

    Kernels are placed on the sorted observations with the prior inserted at its rank. Each bandwidth is the
    larger gap to its two neighbours in that sequence (the single gap at both ends), clipped to
    [span / min(100, 1 + n), span] where n counts the kernels, and never below the bandwidth floor.
    """
    def __init__(self, parameter: Parameter, observations: np.ndarray, bandwidth_floor: float):
        self.parameter = parameter
        self.integer = parameter.kind == ParameterKind.Integer
        self.low = parameter.low - 0.5 if self.integer else parameter.low
        self.high = parameter.high + 0.5 if self.integer else parameter.high
        span = self.high - self.low

        prior_mu = (self.low + self.high) / 2.0
        observations = np.sort(np.asarray(observations, dtype=np.float64))
        position = int(np.searchsorted(observations, prior_mu))
        mus = np.insert(observations, position, prior_mu)
        if len(mus) > 1:
            gaps = np.diff(mus)
            sigmas = np.concatenate([[gaps[0]], np.maximum(gaps[:-1], gaps[1:]), [gaps[-1]]])
        else:
            sigmas = np.array([span])
        lowest = max(span / min(100.0, 1.0 + len(mus)), bandwidth_floor * span)
        sigmas = np.clip(sigmas, lowest, span)
        sigmas[position] = span

        self.mus = mus
        self.sigmas = sigmas
        self.weights = np.full(len(self.mus), 1.0 / len(self.mus))
        self.a = (self.low - self.mus) / self.sigmas
        self.b = (self.high - self.mus) / self.sigmas

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        components = rng.choice(len(self.mus), size=size, p=self.weights)
        draws = truncnorm.rvs(self.a[components], self.b[components], loc=self.mus[components],
                              scale=self.sigmas[components], random_state=rng)
        return np.atleast_1d(draws)

    def log_density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)[:, None]
        if self.integer:
            upper = truncnorm.cdf(np.minimum(x + 0.5, self.high), self.a, self.b, loc=self.mus, scale=self.sigmas)
            lower = truncnorm.cdf(np.maximum(x - 0.5, self.low), self.a, self.b, loc=self.mus, scale=self.sigmas)
            density = (upper - lower) @ self.weights
        else:
            density = truncnorm.pdf(x, self.a, self.b, loc=self.mus, scale=self.sigmas) @ self.weights
        return np.log(np.maximum(density, 1e-300))


def tpe_suggest(history, domain: SearchDomain, cfg: TpeConfig,
                rng: Union[int, np.random.Generator]) -> Dict[str, ParamValue]:
    """
    Next hyper-parameters to evaluate, maximizing the good/bad density ratio l(x)/g(x) among candidates drawn
    from l. Falls back to uniform sampling during startup or when no trial has a finite loss.

    Parameters
    ----------
    history : TrialHistory
        Completed trials; non-finite losses always belong to the bad set.
    domain : SearchDomain
        Space to search.
    cfg : TpeConfig
        Estimator settings.
    rng : int or np.random.Generator
        Random stream of this suggestion.
    Returns
    -------
    dict
        In-domain parameter values.
    """
    rng = np.random.default_rng(rng)
    trials = list(history.trials)
    finite = sorted([t for t in trials if math.isfinite(t.loss)], key=lambda t: (t.loss, t.index))
    if len(trials) < cfg.n_startup or len(finite) == 0:
        return sample_uniform(domain, rng)

    n_good = min(max(int(math.ceil(cfg.gamma_quantile * len(finite))), 1), len(finite))
    good = finite[:n_good]
    bad = finite[n_good:] + [t for t in trials if not math.isfinite(t.loss)]
    logging.debug('TPE split: {} good / {} bad trials.'.format(len(good), len(bad)))

    candidates = {}
    score = np.zeros(cfg.n_candidates)
    for p in domain.parameters:
        l_estimator = ParzenEstimator(p, [t.params[p.name] for t in good], cfg.bandwidth_floor)
        g_estimator = ParzenEstimator(p, [t.params[p.name] for t in bad], cfg.bandwidth_floor)
        draws = l_estimator.sample(rng, cfg.n_candidates)
        values = [p.clip(x) for x in draws]
        candidates[p.name] = values
        evaluated = np.asarray(values, dtype=np.float64)
        score += l_estimator.log_density(evaluated) - g_estimator.log_density(evaluated)

    best = int(np.argmax(score))
    return {p.name: candidates[p.name][best] for p in domain.parameters}
