import heapq
import logging
from dataclasses import dataclass, field, asdict
from typing import List, Optional, Tuple, Dict, Any
import numpy as np
from scipy.special import expit, logit
from ..Utils.dataset import Dataset


@dataclass(frozen=True)
class GBTConfig:
    """
    Hyper-parameters of the regularized gradient-boosted trees. Defaults follow the reference boosting library.
    """
    learning_rate: float = 0.3
    subsample: float = 1.0
    max_leaves: int = 64
    max_depth: int = 6
    gamma: float = 0.0
    colsample_bytree: float = 1.0
    min_child_weight: float = 1.0
    n_estimators: int = 100
    reg_lambda: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError('learning_rate must lie in (0, 1], got {}.'.format(self.learning_rate))
        if not 0.0 < self.subsample <= 1.0 or not 0.0 < self.colsample_bytree <= 1.0:
            raise ValueError('subsample and colsample_bytree must lie in (0, 1].')
        if self.max_leaves < 1 or self.max_depth < 0 or self.n_estimators < 1:
            raise ValueError('max_leaves and n_estimators must be positive, max_depth non-negative.')
        if self.gamma < 0 or self.min_child_weight < 0 or self.reg_lambda < 0:
            raise ValueError('gamma, min_child_weight and reg_lambda cannot be negative.')

    def with_params(self, params: Dict[str, Any]) -> 'GBTConfig':
        values = asdict(self)
        for name, value in params.items():
            if name not in values:
                raise ValueError('Unknown boosting hyper-parameter \'{}\'.'.format(name))
            integral = name in ('max_leaves', 'max_depth', 'n_estimators', 'seed')
            values[name] = int(round(value)) if integral else float(value)
        return GBTConfig(**values)


@dataclass(frozen=True)
class TreeNode:
    """
    Leaf (feature is None, weight holds w_j) or internal node sending x[feature] <= threshold to the left.
    """
    weight: float = 0.0
    feature: Optional[int] = None
    threshold: float = 0.0
    left: Optional['TreeNode'] = None
    right: Optional['TreeNode'] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def n_leaves(self) -> int:
        return 1 if self.is_leaf else self.left.n_leaves() + self.right.n_leaves()

    def depth(self) -> int:
        return 0 if self.is_leaf else 1 + max(self.left.depth(), self.right.depth())

    def predict(self, values: np.ndarray) -> np.ndarray:
        out = np.empty(values.shape[0])
        self.__fill(values, np.arange(values.shape[0]), out)
        return out

    def __fill(self, values: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
        if self.is_leaf:
            out[rows] = self.weight
            return
        goes_left = values[rows, self.feature] <= self.threshold
        self.left.__fill(values, rows[goes_left], out)
        self.right.__fill(values, rows[~goes_left], out)


@dataclass(frozen=True)
class GBTModel:
    feature_names: List[str]
    trees: List[TreeNode]
    learning_rate: float
    base_margin: float
    config: GBTConfig = field(default_factory=GBTConfig)


def leaf_weight(G: float, H: float, reg_lambda: float) -> float:
    """
    w* = -G / (H + lambda), minimizer of G.w + 0.5 (H + lambda) w^2.
    """
    if H + reg_lambda <= 0:
        raise ValueError('Degenerate leaf: H + lambda must be positive, got {}.'.format(H + reg_lambda))
    return -G / (H + reg_lambda)


def split_gain(GL, HL, GR, HR, reg_lambda: float, gamma: float):
    """
    Objective decrease of a split, net of the gamma penalty; splits are kept only when this is > 0.
    Works element-wise on numpy arrays.
    """
    if np.any(np.asarray(HL) + reg_lambda <= 0) or np.any(np.asarray(HR) + reg_lambda <= 0):
        raise ValueError('Degenerate split: child hessian sums plus lambda must be positive.')
    return 0.5 * (GL ** 2 / (HL + reg_lambda) + GR ** 2 / (HR + reg_lambda)
                  - (GL + GR) ** 2 / (HL + HR + reg_lambda)) - gamma


def logistic_loss(target: np.ndarray, margin: np.ndarray) -> float:
    """
    Sum of the binary negative log-likelihoods.
    """
    return float(np.sum(np.logaddexp(0.0, margin) - target * margin))


@dataclass
class _Candidate:
    rows: np.ndarray
    depth: int
    G: float
    H: float
    gain: float = -np.inf
    feature: int = -1
    threshold: float = 0.0
    left_rows: Optional[np.ndarray] = None
    right_rows: Optional[np.ndarray] = None
    children: Optional[Tuple['_Candidate', '_Candidate']] = None


def __find_split(node: _Candidate, values: np.ndarray, g: np.ndarray, h: np.ndarray, columns: np.ndarray,
                 cfg: GBTConfig) -> None:
    """
    Exact greedy search over the sorted values of the sampled columns, midpoints between distinct values.
    """
    if len(node.rows) < 2 or len(columns) == 0:
        return
    block = values[np.ix_(node.rows, columns)]
    order = np.argsort(block, axis=0, kind='mergesort')
    sorted_values = np.take_along_axis(block, order, axis=0)
    GL = np.cumsum(g[node.rows][order], axis=0)[:-1]
    HL = np.cumsum(h[node.rows][order], axis=0)[:-1]
    GR = node.G - GL
    HR = node.H - HL
    valid = (sorted_values[1:] > sorted_values[:-1]) & (HL >= cfg.min_child_weight) & \
            (HR >= cfg.min_child_weight) & (HL + cfg.reg_lambda > 0) & (HR + cfg.reg_lambda > 0)
    if not valid.any():
        return
    gains = np.full(GL.shape, -np.inf)
    gains[valid] = split_gain(GL[valid], HL[valid], GR[valid], HR[valid], cfg.reg_lambda, cfg.gamma)
    # Feature-major scan: the first column reaching the best gain wins ties
    flat = int(np.argmax(gains.T))
    column, position = divmod(flat, gains.shape[0])
    if gains[position, column] <= 0:
        return
    feature = int(columns[column])
    threshold = (sorted_values[position, column] + sorted_values[position + 1, column]) / 2.0
    goes_left = values[node.rows, feature] <= threshold
    node.gain = float(gains[position, column])
    node.feature = feature
    node.threshold = float(threshold)
    node.left_rows = node.rows[goes_left]
    node.right_rows = node.rows[~goes_left]


def __freeze(node: _Candidate, cfg: GBTConfig) -> TreeNode:
    if node.children is None:
        return TreeNode(weight=leaf_weight(node.G, node.H, cfg.reg_lambda))
    return TreeNode(feature=node.feature, threshold=node.threshold, left=__freeze(node.children[0], cfg),
                    right=__freeze(node.children[1], cfg))


def grow_tree(values: np.ndarray, g: np.ndarray, h: np.ndarray, rows: np.ndarray, columns: np.ndarray,
              cfg: GBTConfig) -> TreeNode:
    """
    Best-first growth: the open leaf with the largest positive gain is split next, until max_leaves is reached or
    no leaf above max_depth has a positive gain.
    """
    root = _Candidate(rows=rows, depth=0, G=float(np.sum(g[rows])), H=float(np.sum(h[rows])))
    frontier = []
    counter = 0

    def push(node: _Candidate):
        nonlocal counter
        if node.depth < cfg.max_depth:
            __find_split(node, values, g, h, columns, cfg)
            if node.gain > 0:
                heapq.heappush(frontier, (-node.gain, counter, node))
                counter += 1

    push(root)
    n_leaves = 1
    while frontier and n_leaves < cfg.max_leaves:
        _, _, node = heapq.heappop(frontier)
        left = _Candidate(rows=node.left_rows, depth=node.depth + 1, G=float(np.sum(g[node.left_rows])),
                          H=float(np.sum(h[node.left_rows])))
        right = _Candidate(rows=node.right_rows, depth=node.depth + 1, G=float(np.sum(g[node.right_rows])),
                           H=float(np.sum(h[node.right_rows])))
        node.children = (left, right)
        n_leaves += 1
        push(left)
        push(right)
    return __freeze(root, cfg)


def train_gbt(ds: Dataset, cfg: GBTConfig, verbose: bool = False) -> GBTModel:
    """
    Sequential boosting of regression trees on the logistic-loss gradients and hessians of the current margin.

    Parameters
    ----------
    ds : Dataset
        Preprocessed training dataset, both classes present.
    cfg : GBTConfig
        Hyper-parameters; row subsampling (without replacement) and column subsampling are drawn per tree from a
        generator seeded with cfg.seed.
    verbose : bool
        Logs the training loss after every round at DEBUG level.
    Returns
    -------
    GBTModel
        Trained ensemble; leaf weights are stored unscaled and multiplied by the learning rate at prediction.
    """
    if not ds.has_both_classes():
        raise ValueError('Gradient boosting requires both classes in the target.')
    if ds.has_missing():
        raise ValueError('Gradient boosting requires a dataset without missing values.')

    rng = np.random.default_rng(cfg.seed)
    values = ds.values
    target = ds.target.astype(np.float64)
    base_margin = float(logit(np.mean(target)))
    margin = np.full(ds.n_rows, base_margin)
    n_rows = max(1, int(np.floor(cfg.subsample * ds.n_rows)))
    n_columns = max(1, int(np.floor(cfg.colsample_bytree * ds.n_features))) if ds.n_features > 0 else 0

    trees = []
    for b in range(cfg.n_estimators):
        probabilities = expit(margin)
        g = probabilities - target
        h = probabilities * (1.0 - probabilities)
        rows = np.sort(rng.choice(ds.n_rows, size=n_rows, replace=False)) if n_rows < ds.n_rows \
            else np.arange(ds.n_rows)
        columns = np.sort(rng.choice(ds.n_features, size=n_columns, replace=False)) \
            if n_columns < ds.n_features else np.arange(ds.n_features)
        tree = grow_tree(values, g, h, rows, columns, cfg)
        trees.append(tree)
        margin = margin + cfg.learning_rate * tree.predict(values)
        if verbose:
            logging.debug('[{}] train loss = {}'.format(b, logistic_loss(target, margin)))
    return GBTModel(feature_names=list(ds.feature_names), trees=trees, learning_rate=cfg.learning_rate,
                    base_margin=base_margin, config=cfg)


def predict_margin(m: GBTModel, ds: Dataset) -> np.ndarray:
    if ds.n_features != len(m.feature_names):
        raise ValueError('The model expects {} features, the dataset has {}.'.format(len(m.feature_names),
                                                                                     ds.n_features))
    margin = np.full(ds.n_rows, m.base_margin)
    for tree in m.trees:
        margin = margin + m.learning_rate * tree.predict(ds.values)
    return margin


def predict_gbt(m: GBTModel, ds: Dataset) -> np.ndarray:
    return expit(predict_margin(m, ds))


def __count_splits(node: TreeNode, counts: Dict[int, int]) -> None:
    if node.is_leaf:
        return
    counts[node.feature] = counts.get(node.feature, 0) + 1
    __count_splits(node.left, counts)
    __count_splits(node.right, counts)


def feature_importance(m: GBTModel, top_k: Optional[int] = None) -> List[Tuple[str, int]]:
    """
    F score per feature: number of internal nodes splitting on it over all trees. Sorted by decreasing F score,
    ties by ascending name; unused features are omitted.
    """
    counts = {}
    for tree in m.trees:
        __count_splits(tree, counts)
    ranking = sorted([(m.feature_names[j], c) for j, c in counts.items()], key=lambda x: (-x[1], x[0]))
    return ranking if top_k is None else ranking[:top_k]
