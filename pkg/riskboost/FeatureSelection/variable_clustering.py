import logging
from dataclasses import dataclass
from typing import List, Tuple, Iterator
import numpy as np
from ..Utils.dataset import Dataset


@dataclass(frozen=True)
class VariableClustering:
    """
    Divisive principal-component clustering of the features of a standardized dataset.

    Attributes
    ----------
    feature_names : List[str]
        Names of the clustered features, indices in `clusters` refer to this list.
    clusters : List[List[int]]
        Disjoint feature-index sets partitioning the features.
    loadings : List[np.ndarray]
        First principal component (unit eigenvector) of each cluster's correlation matrix, over its members.
    eigenvalues : List[float]
        First eigenvalue of each cluster's correlation matrix.
    r2_own : np.ndarray
        Squared correlation of each feature with its own cluster component.
    r2_next : np.ndarray
        Highest squared correlation of each feature with any other cluster component.
    """
    feature_names: List[str]
    clusters: List[List[int]]
    loadings: List[np.ndarray]
    eigenvalues: List[float]
    r2_own: np.ndarray
    r2_next: np.ndarray

    def __post_init__(self):
        members = sorted([i for cluster in self.clusters for i in cluster])
        if members != list(range(len(self.feature_names))):
            raise ValueError('Clusters must partition the feature set.')
        if any([len(cluster) == 0 for cluster in self.clusters]):
            raise ValueError('Empty cluster found.')

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def cluster_of(self, feature: str) -> int:
        index = self.feature_names.index(feature)
        for c, cluster in enumerate(self.clusters):
            if index in cluster:
                return c
        raise ValueError('Feature {} is not clustered.'.format(feature))


def varimax(Phi: np.ndarray, gamma: float = 1.0, q: int = 20, tol: float = 1e-6) -> np.ndarray:
    """
    Orthogonal rotation maximizing the variance of the squared loadings. Returns the rotation matrix.
    """
    p, k = Phi.shape
    R = np.eye(k)
    d = 0.0
    for i in range(q):
        d_old = d
        Lambda = Phi @ R
        u, s, vh = np.linalg.svd(Phi.T @ (Lambda ** 3 - (gamma / p) * Lambda @ np.diag(np.diag(Lambda.T @ Lambda))))
        R = u @ vh
        d = np.sum(s)
        if d_old != 0 and d / d_old < 1 + tol:
            break
    return R


def correlation_matrix(values: np.ndarray) -> np.ndarray:
    """
    Pearson correlation matrix of the columns. Constant columns are uncorrelated with everything else.
    """
    p = values.shape[1]
    sd = np.std(values, axis=0)
    centered = values - np.mean(values, axis=0)
    scale = np.where(sd > 0, sd, 1.0)
    standardized = np.where(sd > 0, centered / scale, 0.0)
    R = (standardized.T @ standardized) / values.shape[0]
    R = np.clip((R + R.T) / 2.0, -1.0, 1.0)
    R[np.diag_indices(p)] = 1.0
    return R


def __principal(R: np.ndarray, members: List[int], n_components: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    eigenvalues, eigenvectors = np.linalg.eigh(R[np.ix_(members, members)])
    order = np.argsort(eigenvalues)[::-1][:n_components]
    vectors = eigenvectors[:, order]
    # Deterministic orientation
    signs = np.where(vectors.sum(axis=0) < 0, -1.0, 1.0)
    return np.maximum(eigenvalues[order], 0.0), vectors * signs


def __component_r2(R: np.ndarray, members: List[int], weights: np.ndarray) -> np.ndarray:
    """
    Squared correlation of every feature with the component Z[:, members] @ weights.
    """
    covariance = R[:, members] @ weights
    variance = float(weights @ R[np.ix_(members, members)] @ weights)
    if variance <= 0:
        return np.zeros(R.shape[0])
    return np.clip(covariance ** 2 / variance, 0.0, 1.0)


def __second_eigenvalue(R: np.ndarray, members: List[int]) -> float:
    if len(members) < 2:
        return -np.inf
    eigenvalues, _ = __principal(R, members, n_components=2)
    return float(eigenvalues[1])


def __split(R: np.ndarray, members: List[int]) -> Tuple[List[int], List[int]]:
    """
    Splits a cluster along its two rotated leading components, followed by one reassignment pass against the
    first components of the two halves.
    """
    eigenvalues, vectors = __principal(R, members, n_components=2)
    rotation = varimax(vectors * np.sqrt(np.maximum(eigenvalues, 1e-12)))
    rotated = vectors @ rotation
    r2_first = __component_r2(R, members, rotated[:, 0])[members]
    r2_second = __component_r2(R, members, rotated[:, 1])[members]
    to_first = r2_first >= r2_second
    if to_first.all():
        to_first[int(np.argmax(r2_second - r2_first))] = False
    elif not to_first.any():
        to_first[int(np.argmax(r2_first - r2_second))] = True

    first = [m for m, flag in zip(members, to_first) if flag]
    second = [m for m, flag in zip(members, to_first) if not flag]

    _, first_vector = __principal(R, first)
    _, second_vector = __principal(R, second)
    reassigned = __component_r2(R, first, first_vector[:, 0])[members] >= \
        __component_r2(R, second, second_vector[:, 0])[members]
    if reassigned.any() and not reassigned.all():
        first = [m for m, flag in zip(members, reassigned) if flag]
        second = [m for m, flag in zip(members, reassigned) if not flag]
    return first, second


def __divisive(R: np.ndarray, max_clusters: int) -> Iterator[List[List[int]]]:
    """
    Yields the partition after every split, starting from the single all-feature cluster.
    """
    clusters = [list(range(R.shape[0]))]
    yield [list(c) for c in clusters]
    while len(clusters) < max_clusters:
        second_eigenvalues = [__second_eigenvalue(R, c) for c in clusters]
        chosen = int(np.argmax(second_eigenvalues))
        first, second = __split(R, clusters[chosen])
        clusters[chosen] = first
        clusters.append(second)
        logging.debug('Split cluster {} (second eigenvalue {:.4f}) into {} and {} features.'.format(
            chosen, second_eigenvalues[chosen], len(first), len(second)))
        yield [list(c) for c in clusters]


def __build(R: np.ndarray, feature_names: List[str], clusters: List[List[int]]) -> VariableClustering:
    loadings, eigenvalues, component_r2 = [], [], []
    for cluster in clusters:
        values, vectors = __principal(R, cluster)
        loadings.append(vectors[:, 0])
        eigenvalues.append(float(values[0]))
        component_r2.append(__component_r2(R, cluster, vectors[:, 0]))
    component_r2 = np.vstack(component_r2)

    r2_own = np.zeros(len(feature_names))
    r2_next = np.zeros(len(feature_names))
    for c, cluster in enumerate(clusters):
        others = np.delete(component_r2, c, axis=0)
        for j in cluster:
            r2_own[j] = component_r2[c, j]
            r2_next[j] = others[:, j].max() if others.shape[0] > 0 else 0.0
    return VariableClustering(feature_names=list(feature_names), clusters=clusters, loadings=loadings,
                              eigenvalues=eigenvalues, r2_own=r2_own, r2_next=r2_next)


def __check(ds: Dataset, target_clusters: int) -> None:
    if ds.has_missing():
        raise ValueError('Variable clustering requires a dataset without missing values.')
    if target_clusters < 1 or target_clusters > ds.n_features:
        raise ValueError('The number of clusters must lie in [1, {}], got {}.'.format(ds.n_features,
                                                                                     target_clusters))


def cluster_variables(ds: Dataset, target_clusters: int) -> VariableClustering:
    """
    Divisive clustering: the cluster with the largest second eigenvalue is split until target_clusters is reached.

    Parameters
    ----------
    ds : Dataset
        Preprocessed and standardized dataset.
    target_clusters : int
        Number of clusters, in [1, ds.n_features].
    Returns
    -------
    VariableClustering
        Final partition with per-cluster components and per-feature r2_own / r2_next.
    """
    __check(ds, target_clusters)
    R = correlation_matrix(ds.values)
    clusters = None
    for clusters in __divisive(R, target_clusters):
        pass
    return __build(R, ds.feature_names, clusters)


def variance_explained(clustering: VariableClustering) -> float:
    """
    Sum of the clusters' first eigenvalues over the number of (standardized) features.
    """
    return float(np.sum(clustering.eigenvalues) / len(clustering.feature_names))


def variance_explained_curve(ds: Dataset, max_clusters: int) -> List[Tuple[int, float]]:
    """
    Variance explained for every cluster count from 1 to max_clusters, from a single divisive run.
    """
    __check(ds, max_clusters)
    R = correlation_matrix(ds.values)
    curve = []
    for clusters in __divisive(R, max_clusters):
        curve.append((len(clusters), variance_explained(__build(R, ds.feature_names, clusters))))
    return curve
