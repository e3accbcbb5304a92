from dataclasses import dataclass
from typing import List, Sequence
import numpy as np


@dataclass(frozen=True)
class Dataset:
    """
    Numeric feature matrix plus binary target, shared by every pipeline stage.

    Missing cells are stored as NaN in `values`, which no finite real can collide with.

    Attributes
    ----------
    feature_names : List[str]
        Ordered, unique column names.
    values : np.ndarray
        Row-major (n_rows, n_features) float64 matrix.
    target : np.ndarray
        Per-row label, 0 for non-risky and 1 for risky.
    """
    feature_names: List[str]
    values: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        target = np.array(self.target)
        if values.ndim != 2:
            raise ValueError('Dataset values must be a 2D matrix, got {} dimensions.'.format(values.ndim))
        if values.shape[0] < 1:
            raise ValueError('A dataset needs at least one row.')
        if values.shape[1] != len(self.feature_names):
            raise ValueError('Column count ({}) differs from the number of feature names ({}).'.format(
                values.shape[1], len(self.feature_names)))
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError('Feature names must be unique.')
        if target.shape != (values.shape[0],):
            raise ValueError('Target length ({}) differs from the row count ({}).'.format(len(target),
                                                                                         values.shape[0]))
        if not np.all(np.isin(target, [0, 1])):
            raise ValueError('Target values must be 0 or 1.')
        values.setflags(write=False)
        target = target.astype(np.int64)
        target.setflags(write=False)
        object.__setattr__(self, 'feature_names', list(self.feature_names))
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'target', target)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def positive_rate(self) -> float:
        return float(np.mean(self.target))

    def has_missing(self) -> bool:
        return bool(np.isnan(self.values).any())

    def has_both_classes(self) -> bool:
        return 0 < int(np.sum(self.target)) < self.n_rows

    def subset_rows(self, indices: Sequence[int]) -> 'Dataset':
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(feature_names=self.feature_names, values=self.values[indices], target=self.target[indices])

    def subset_features(self, names: Sequence[str]) -> 'Dataset':
        lookup = {name: i for i, name in enumerate(self.feature_names)}
        missing = [name for name in names if name not in lookup]
        if len(missing) > 0:
            raise ValueError('Unknown feature(s) requested: {}.'.format(', '.join(missing)))
        columns = [lookup[name] for name in names]
        return Dataset(feature_names=list(names), values=self.values[:, columns], target=self.target)

    def with_values(self, values: np.ndarray) -> 'Dataset':
        return Dataset(feature_names=self.feature_names, values=values, target=self.target)


@dataclass(frozen=True)
class FoldPlan:
    """
    Assignment of every row to one of k cross-validation folds.
    """
    k: int
    assignment: np.ndarray

    def __post_init__(self):
        assignment = np.array(self.assignment, dtype=np.int64)
        if self.k < 1:
            raise ValueError('k must be positive, got {}.'.format(self.k))
        if np.any(assignment < 0) or np.any(assignment >= self.k):
            raise ValueError('Fold indices must lie in [0, {}).'.format(self.k))
        if len(np.unique(assignment)) != self.k:
            raise ValueError('Every fold must be non-empty.')
        assignment.setflags(write=False)
        object.__setattr__(self, 'assignment', assignment)

    def validation_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def training_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)
