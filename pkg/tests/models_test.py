import os
import numpy as np
import pytest
from scipy.optimize import minimize_scalar
from scipy.special import expit

from riskboost.Utils.dataset import Dataset
from riskboost.Utils.io import dump_model, load_model
from riskboost.PreProcessing.pre_processing import fit_preprocessor, apply_preprocessor
from riskboost.PreProcessing.synthetic_data import SynthSpec, generate
from riskboost.Models.logistic_regression import LogisticModel, train_logistic, predict_logistic, \
    log_likelihood_gradient
from riskboost.Models.gradient_boosting import GBTConfig, GBTModel, TreeNode, leaf_weight, split_gain, \
    logistic_loss, train_gbt, predict_gbt, predict_margin, feature_importance


def __synthetic(n_rows=500, seed=0):
    ds, _ = generate(SynthSpec(n_rows=n_rows, n_informative=6, n_redundant=2, n_noise=4, seed=seed))
    return apply_preprocessor(ds, fit_preprocessor(ds))


def __empty(n_rows, positives):
    target = np.zeros(n_rows, dtype=int)
    target[:positives] = 1
    return Dataset(feature_names=[], values=np.zeros((n_rows, 0)), target=target)


def test_logistic_two_by_two_table():
    x = np.array([0.0] * 8 + [1.0] * 8)
    y = np.array([1, 1, 0, 0, 0, 0, 0, 0] + [1, 1, 1, 1, 1, 1, 0, 0])
    model = train_logistic(Dataset(feature_names=['x'], values=x[:, None], target=y))
    assert model.converged
    assert model.intercept == pytest.approx(np.log(1.0 / 3.0), abs=1e-4)
    assert model.coefficients[0] == pytest.approx(np.log(9.0), abs=1e-4)


def test_logistic_intercept_only():
    model = train_logistic(__empty(10, 6))
    assert model.intercept == pytest.approx(np.log(1.5), abs=1e-6)
    fixed = LogisticModel(feature_names=[], intercept=float(np.log(3.0)), coefficients=[])
    assert predict_logistic(fixed, __empty(3, 1)) == pytest.approx([0.75] * 3)


def test_logistic_gradient_vanishes_at_solution():
    ds = __synthetic()
    model = train_logistic(ds)
    assert model.converged
    design = np.hstack([np.ones((ds.n_rows, 1)), ds.values])
    beta = np.concatenate([[model.intercept], model.coefficients])
    assert np.max(np.abs(log_likelihood_gradient(design, ds.target.astype(float), beta))) <= 1e-6


def test_logistic_prediction():
    ds = Dataset(feature_names=['a', 'b'], values=[[0.0, 1.0], [1.0, 1.0], [2.0, 1.0]], target=[0, 1, 0])
    zero = LogisticModel(feature_names=['a', 'b'], intercept=0.0, coefficients=[0.0, 0.0])
    assert np.all(predict_logistic(zero, ds) == 0.5)
    positive = LogisticModel(feature_names=['a', 'b'], intercept=0.0, coefficients=[1.5, -0.2])
    assert np.all(np.diff(predict_logistic(positive, ds)) > 0)
    with pytest.raises(ValueError):
        predict_logistic(LogisticModel(feature_names=['a'], intercept=0.0, coefficients=[1.0]), ds)
    with pytest.raises(ValueError):
        train_logistic(Dataset(feature_names=['a'], values=[[0.0], [1.0]], target=[1, 1]))


def test_leaf_weight():
    assert leaf_weight(-0.5, 0.25, 1.0) == pytest.approx(0.4)
    assert leaf_weight(0.0, 3.0, 2.0) == 0.0
    assert abs(leaf_weight(1.0, 1.0, 5.0)) <= abs(leaf_weight(1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        leaf_weight(1.0, 0.0, 0.0)

    rng = np.random.default_rng(0)
    for G, H, reg_lambda in zip(rng.uniform(-2, 2, 200), rng.uniform(0.5, 2, 200), rng.uniform(0, 2, 200)):
        numeric = minimize_scalar(lambda w: G * w + 0.5 * (H + reg_lambda) * w ** 2, method='brent').x
        assert leaf_weight(G, H, reg_lambda) == pytest.approx(numeric, abs=1e-6)


def test_split_gain():
    assert split_gain(-1.0, 1.0, 1.0, 1.0, 0.0, 0.0) == pytest.approx(1.0)
    assert split_gain(0.7, 2.0, 0.7, 2.0, 0.0, 0.3) == pytest.approx(-0.3)
    assert split_gain(0.7, 2.0, 0.7, 2.0, 1.0, 0.3) <= -0.3

    def objective(G, H, reg_lambda):
        w = leaf_weight(G, H, reg_lambda)
        return G * w + 0.5 * (H + reg_lambda) * w ** 2

    rng = np.random.default_rng(1)
    for _ in range(100):
        GL, GR = rng.uniform(-3, 3, 2)
        HL, HR = rng.uniform(0.1, 3, 2)
        reg_lambda, gamma = rng.uniform(0, 2), rng.uniform(0, 0.5)
        decrease = objective(GL + GR, HL + HR, reg_lambda) - objective(GL, HL, reg_lambda) - \
            objective(GR, HR, reg_lambda)
        assert split_gain(GL, HL, GR, HR, reg_lambda, gamma) == pytest.approx(decrease - gamma)


def test_gbt_fits_a_step():
    x = np.concatenate([np.linspace(-1, -0.01, 50), np.linspace(0.01, 1, 50)])
    ds = Dataset(feature_names=['x'], values=x[:, None], target=(x > 0).astype(int))
    model = train_gbt(ds, GBTConfig(n_estimators=50, max_depth=1))
    assert np.array_equal((predict_gbt(model, ds) >= 0.5).astype(int), ds.target)
    assert model.trees[0].threshold == pytest.approx(0.0)


def test_gbt_min_child_weight_saturation():
    ds = __synthetic(n_rows=200)
    model = train_gbt(ds, GBTConfig(n_estimators=5, min_child_weight=1000.0))
    assert all([tree.is_leaf for tree in model.trees])
    assert feature_importance(model) == []
    probabilities = predict_gbt(model, ds)
    assert np.allclose(probabilities, expit(model.base_margin), atol=1e-9)


def test_gbt_is_deterministic():
    ds = __synthetic(n_rows=300)
    cfg = GBTConfig(n_estimators=10, subsample=0.8, colsample_bytree=0.8, seed=3)
    assert train_gbt(ds, cfg).trees == train_gbt(ds, cfg).trees
    full = GBTConfig(n_estimators=10, seed=3)
    assert train_gbt(ds, full).trees == train_gbt(ds, full).trees


def test_gbt_training_loss_decreases():
    ds = __synthetic()
    model = train_gbt(ds, GBTConfig(n_estimators=30, learning_rate=0.1, gamma=0.0))
    target = ds.target.astype(float)
    margin = np.full(ds.n_rows, model.base_margin)
    losses = [logistic_loss(target, margin)]
    for tree in model.trees:
        margin = margin + model.learning_rate * tree.predict(ds.values)
        losses.append(logistic_loss(target, margin))
    assert np.all(np.diff(losses) <= 1e-9)
    assert np.allclose(margin, predict_margin(model, ds))


@pytest.mark.slow
def test_gbt_training_loss_decreases_at_full_scale():
    ds, _ = generate(SynthSpec(seed=0))
    ds = apply_preprocessor(ds, fit_preprocessor(ds))
    assert (ds.n_rows, ds.n_features) == (2000, 60)
    model = train_gbt(ds, GBTConfig(n_estimators=100, learning_rate=0.1, gamma=0.0, subsample=1.0,
                                    colsample_bytree=1.0))
    target = ds.target.astype(float)
    margin = np.full(ds.n_rows, model.base_margin)
    losses = [logistic_loss(target, margin)]
    for tree in model.trees:
        margin = margin + model.learning_rate * tree.predict(ds.values)
        losses.append(logistic_loss(target, margin))
    assert len(losses) == 101
    assert np.all(np.diff(losses) <= 1e-9)


def __remap(node: TreeNode, position: np.ndarray) -> TreeNode:
    if node.is_leaf:
        return node
    return TreeNode(weight=node.weight, feature=int(position[node.feature]), threshold=node.threshold,
                    left=__remap(node.left, position), right=__remap(node.right, position))


def test_gbt_prediction_ignores_column_order():
    ds = __synthetic(n_rows=300, seed=6)
    model = train_gbt(ds, GBTConfig(n_estimators=15, max_depth=4))
    permutation = np.random.default_rng(1).permutation(ds.n_features)
    position = np.argsort(permutation)
    shuffled = Dataset(feature_names=[ds.feature_names[j] for j in permutation], values=ds.values[:, permutation],
                       target=ds.target)
    remapped = GBTModel(feature_names=shuffled.feature_names, trees=[__remap(t, position) for t in model.trees],
                        learning_rate=model.learning_rate, base_margin=model.base_margin, config=model.config)
    assert np.array_equal(predict_gbt(remapped, shuffled), predict_gbt(model, ds))


def test_gbt_vanishing_learning_rate_predicts_the_base_rate():
    ds = __synthetic(n_rows=300, seed=8)
    model = train_gbt(ds, GBTConfig(n_estimators=10, learning_rate=1e-12))
    assert model.base_margin == pytest.approx(np.log(ds.positive_rate / (1.0 - ds.positive_rate)))
    assert predict_gbt(model, ds) == pytest.approx(np.full(ds.n_rows, ds.positive_rate), abs=1e-9)


def test_gbt_structure_limits():
    ds = __synthetic()
    model = train_gbt(ds, GBTConfig(n_estimators=5, max_depth=3, max_leaves=5))
    for tree in model.trees:
        assert tree.depth() <= 3
        assert tree.n_leaves() <= 5


def test_gamma_reduces_splits():
    ds = __synthetic()
    loose = train_gbt(ds, GBTConfig(n_estimators=5, gamma=0.0))
    strict = train_gbt(ds, GBTConfig(n_estimators=1, gamma=5.0))
    assert sum([t.n_leaves() for t in strict.trees]) <= loose.trees[0].n_leaves()


def test_gbt_prediction_additivity():
    ds = Dataset(feature_names=['a'], values=[[-1.0], [1.0]], target=[0, 1])
    empty = GBTModel(feature_names=['a'], trees=[], learning_rate=0.3, base_margin=0.4)
    assert predict_gbt(empty, ds) == pytest.approx(expit([0.4, 0.4]))
    stump = GBTModel(feature_names=['a'], trees=[TreeNode(weight=2.0)], learning_rate=0.1, base_margin=0.0)
    assert predict_gbt(stump, ds) == pytest.approx(expit([0.2, 0.2]))

    split = TreeNode(feature=0, threshold=0.0, left=TreeNode(weight=-1.0), right=TreeNode(weight=1.5))
    model = GBTModel(feature_names=['a'], trees=[split, TreeNode(weight=0.5)], learning_rate=0.5, base_margin=0.1)
    assert predict_margin(model, ds) == pytest.approx([0.1 + 0.5 * (-1.0 + 0.5), 0.1 + 0.5 * (1.5 + 0.5)])
    with pytest.raises(ValueError):
        predict_gbt(model, Dataset(feature_names=['a', 'b'], values=[[0.0, 0.0]], target=[0]))


def test_feature_importance_counts_splits():
    names = ['f{}'.format(i) for i in range(8)]
    tree = TreeNode(feature=3, threshold=0.0,
                    left=TreeNode(feature=3, threshold=-1.0, left=TreeNode(weight=1.0), right=TreeNode(weight=2.0)),
                    right=TreeNode(feature=7, threshold=1.0, left=TreeNode(weight=3.0), right=TreeNode(weight=4.0)))
    model = GBTModel(feature_names=names, trees=[tree, TreeNode(weight=0.1)], learning_rate=0.1, base_margin=0.0)
    assert feature_importance(model) == [('f3', 2), ('f7', 1)]
    assert feature_importance(model, top_k=1) == [('f3', 2)]

    trained = train_gbt(__synthetic(), GBTConfig(n_estimators=10))
    total = sum([t.n_leaves() - 1 for t in trained.trees])
    assert sum([count for _, count in feature_importance(trained)]) == total


def test_config_validation():
    with pytest.raises(ValueError):
        GBTConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        GBTConfig(subsample=1.5)
    with pytest.raises(ValueError):
        GBTConfig(reg_lambda=-1.0)
    cfg = GBTConfig().with_params({'max_leaves': 11.6, 'learning_rate': 0.05})
    assert cfg.max_leaves == 12 and cfg.learning_rate == 0.05
    with pytest.raises(ValueError):
        GBTConfig().with_params({'depth': 3})


def test_model_files(tmp_path):
    ds = __synthetic(n_rows=300)
    for model, predict in [(train_logistic(ds), predict_logistic),
                           (train_gbt(ds, GBTConfig(n_estimators=5, seed=2)), predict_gbt)]:
        filename = os.path.join(str(tmp_path), 'model.json')
        dump_model(model, filename)
        reloaded = load_model(filename)
        assert type(reloaded) is type(model)
        assert np.array_equal(predict(reloaded, ds), predict(model, ds))
