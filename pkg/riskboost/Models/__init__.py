from .logistic_regression import LogisticModel, train_logistic, predict_logistic
from .gradient_boosting import GBTConfig, GBTModel, TreeNode, leaf_weight, split_gain, train_gbt, predict_gbt, \
    feature_importance
