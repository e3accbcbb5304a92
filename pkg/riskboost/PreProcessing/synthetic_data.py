import logging
from dataclasses import dataclass
from typing import List, Tuple
import numpy as np
from scipy.optimize import brentq
from scipy.special import expit
from ..Utils.dataset import Dataset


@dataclass(frozen=True)
class SynthSpec:
    """
    Recipe of a synthetic credit-like dataset with known informative columns.

    Redundant columns are noisy copies of the informative ones (cycling over them), noise columns are independent
    of the target. interaction_strength scales the pairwise products between consecutive informative features
    entering the logistic generator, giving tree ensembles some non-linear structure.
    """
    n_rows: int = 2000
    n_informative: int = 10
    n_redundant: int = 10
    n_noise: int = 40
    positive_rate: float = 0.52
    missing_rate: float = 0.05
    seed: int = 0
    interaction_strength: float = 1.0
    redundant_noise: float = 0.3

    def __post_init__(self):
        if self.n_rows < 1 or self.n_informative < 1:
            raise ValueError('n_rows and n_informative must be at least 1.')
        if self.n_redundant < 0 or self.n_noise < 0:
            raise ValueError('Feature counts cannot be negative.')
        if not 0.0 < self.positive_rate < 1.0:
            raise ValueError('positive_rate must lie in (0, 1), got {}.'.format(self.positive_rate))
        if not 0.0 <= self.missing_rate < 1.0:
            raise ValueError('missing_rate must lie in [0, 1), got {}.'.format(self.missing_rate))
        if self.interaction_strength < 0 or self.redundant_noise < 0:
            raise ValueError('interaction_strength and redundant_noise cannot be negative.')


def informative_name(i: int) -> str:
    return 'inf_{:02d}'.format(i)


def redundant_name(i: int) -> str:
    return 'red_{:02d}'.format(i)


def noise_name(i: int) -> str:
    return 'noise_{:02d}'.format(i)


def redundant_parent(spec: SynthSpec, i: int) -> str:
    """
    Name of the informative column the i-th redundant column copies.
    """
    return informative_name(i % spec.n_informative)


def generate(spec: SynthSpec) -> Tuple[Dataset, List[str]]:
    """
    Generates a dataset following the recipe, deterministically given spec.seed.

    Parameters
    ----------
    spec : SynthSpec
        Generator recipe.
    Returns
    -------
    Dataset
        Columns ordered as informative, redundant, noise, with NaN inserted uniformly at missing_rate.
    List[str]
        Names of the informative columns (the ground truth).
    """
    rng = np.random.default_rng(spec.seed)
    informative = rng.standard_normal((spec.n_rows, spec.n_informative))
    coefficients = rng.uniform(0.8, 1.5, size=spec.n_informative) * rng.choice([-1.0, 1.0], size=spec.n_informative)
    margin = informative @ coefficients
    if spec.interaction_strength > 0 and spec.n_informative > 1:
        for j in range(0, spec.n_informative - 1, 2):
            margin = margin + spec.interaction_strength * informative[:, j] * informative[:, j + 1]

    # Intercept matching the requested base rate on the realised margins
    intercept = brentq(lambda b: float(np.mean(expit(b + margin))) - spec.positive_rate, -50.0, 50.0)
    target = (rng.random(spec.n_rows) < expit(intercept + margin)).astype(np.int64)

    parents = np.arange(spec.n_redundant) % spec.n_informative
    redundant = informative[:, parents] + spec.redundant_noise * rng.standard_normal((spec.n_rows, spec.n_redundant))
    noise = rng.standard_normal((spec.n_rows, spec.n_noise))
    values = np.hstack([informative, redundant, noise])
    if spec.missing_rate > 0:
        values[rng.random(values.shape) < spec.missing_rate] = np.nan

    names = [informative_name(i) for i in range(spec.n_informative)] + \
            [redundant_name(i) for i in range(spec.n_redundant)] + \
            [noise_name(i) for i in range(spec.n_noise)]
    logging.debug('Synthetic dataset: {} rows, {} columns, positive rate {:.4f}.'.format(
        spec.n_rows, len(names), float(np.mean(target))))
    return Dataset(feature_names=names, values=values, target=target), names[:spec.n_informative]
