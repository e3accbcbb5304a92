import logging
from dataclasses import dataclass
from typing import List
import numpy as np
from ..Utils.dataset import Dataset, FoldPlan


@dataclass(frozen=True)
class PreprocessStats:
    """
    Per-feature imputation and standardization statistics, always fitted on training rows only.
    """
    feature_names: List[str]
    median: np.ndarray
    mean: np.ndarray
    sd: np.ndarray

    def __post_init__(self):
        if not (len(self.feature_names) == len(self.median) == len(self.mean) == len(self.sd)):
            raise ValueError('PreprocessStats needs exactly one entry per feature.')
        if np.any(np.asarray(self.sd) < 0):
            raise ValueError('Standard deviations cannot be negative.')

    @classmethod
    def identity(cls, feature_names: List[str]) -> 'PreprocessStats':
        n = len(feature_names)
        return cls(feature_names=list(feature_names), median=np.zeros(n), mean=np.zeros(n), sd=np.ones(n))


def drop_high_missing(ds: Dataset, threshold: float = 0.70) -> Dataset:
    """
    Removes the columns whose missing fraction is strictly greater than threshold, preserving the order of the
    surviving columns.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError('The missing threshold must lie in [0, 1], got {}.'.format(threshold))
    missing_fraction = np.mean(np.isnan(ds.values), axis=0)
    kept = [name for name, fraction in zip(ds.feature_names, missing_fraction) if fraction <= threshold]
    if ds.n_features > 0 and len(kept) == 0:
        raise ValueError('Every column has more than {:.0%} missing values, nothing left to model.'.format(threshold))
    if len(kept) < ds.n_features:
        logging.info('Dropped {} of {} columns with more than {:.0%} missing values.'.format(
            ds.n_features - len(kept), ds.n_features, threshold))
    return ds.subset_features(kept)


def stratified_sample(ds: Dataset, n: int, seed: int) -> Dataset:
    """
    Draws n rows without replacement while keeping the positive rate of the source.

    Parameters
    ----------
    ds : Dataset
        Source dataset, both classes must be present.
    n : int
        Sample size, in [1, ds.n_rows].
    seed : int
        Seed of the random generator, identical seeds give identical samples.
    Returns
    -------
    Dataset
        Sample holding floor(n * positive_rate + 0.5) positives, rows shuffled.
    """
    if n < 1 or n > ds.n_rows:
        raise ValueError('Sample size must lie in [1, {}], got {}.'.format(ds.n_rows, n))
    if not ds.has_both_classes():
        raise ValueError('Stratified sampling requires both classes in the source dataset.')

    rng = np.random.default_rng(seed)
    positives = np.flatnonzero(ds.target == 1)
    negatives = np.flatnonzero(ds.target == 0)
    n_pos = int(np.floor(n * len(positives) / ds.n_rows + 0.5))
    n_pos = min(max(n_pos, n - len(negatives)), len(positives))
    chosen = np.concatenate([rng.choice(positives, size=n_pos, replace=False),
                             rng.choice(negatives, size=n - n_pos, replace=False)])
    return ds.subset_rows(rng.permutation(chosen))


def fit_preprocessor(training: Dataset) -> PreprocessStats:
    """
    Median over the non-missing values, then mean and sample standard deviation (n-1) after median imputation.
    """
    values = training.values
    observed = ~np.isnan(values)
    empty = [name for name, count in zip(training.feature_names, observed.sum(axis=0)) if count == 0]
    if len(empty) > 0:
        raise ValueError('Feature(s) entirely missing in the training rows: {}.'.format(', '.join(empty)))

    median = np.nanmedian(values, axis=0) if training.n_features > 0 else np.zeros(0)
    imputed = np.where(observed, values, median)
    mean = np.mean(imputed, axis=0)
    if training.n_rows > 1:
        sd = np.std(imputed, axis=0, ddof=1)
    else:
        sd = np.zeros(training.n_features)
    return PreprocessStats(feature_names=list(training.feature_names), median=median, mean=mean, sd=sd)


def apply_preprocessor(ds: Dataset, stats: PreprocessStats) -> Dataset:
    """
    Median imputation followed by z-scoring with the given (training) statistics. Zero-spread columns map to 0.
    """
    lookup = {name: i for i, name in enumerate(stats.feature_names)}
    absent = [name for name in ds.feature_names if name not in lookup]
    if len(absent) > 0:
        raise ValueError('Feature(s) without preprocessing statistics: {}.'.format(', '.join(absent)))
    columns = np.array([lookup[name] for name in ds.feature_names], dtype=np.int64)
    median = np.asarray(stats.median)[columns]
    mean = np.asarray(stats.mean)[columns]
    sd = np.asarray(stats.sd)[columns]

    imputed = np.where(np.isnan(ds.values), median, ds.values)
    safe_sd = np.where(sd > 0, sd, 1.0)
    standardized = np.where(sd > 0, (imputed - mean) / safe_sd, 0.0)
    return ds.with_values(standardized)


def stratified_kfold(ds: Dataset, k: int, seed: int) -> FoldPlan:
    """
    Shuffles each class separately and deals its rows round-robin over the folds, the negatives continuing where
    the positives stopped. Per-fold class counts, and fold sizes, then differ by at most one.
    """
    if k < 2:
        raise ValueError('Stratified k-fold needs k >= 2, got {}.'.format(k))
    positives = np.flatnonzero(ds.target == 1)
    negatives = np.flatnonzero(ds.target == 0)
    if len(positives) < k or len(negatives) < k:
        raise ValueError('Each class needs at least k={} members (got {} positives, {} negatives).'.format(
            k, len(positives), len(negatives)))

    rng = np.random.default_rng(seed)
    assignment = np.empty(ds.n_rows, dtype=np.int64)
    assignment[rng.permutation(positives)] = np.arange(len(positives)) % k
    offset = len(positives) % k
    assignment[rng.permutation(negatives)] = (np.arange(len(negatives)) + offset) % k
    return FoldPlan(k=k, assignment=assignment)
