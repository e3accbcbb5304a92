from .feature_scoring import FeatureScore, score_features
from .variable_clustering import VariableClustering, cluster_variables, variance_explained, variance_explained_curve
from .selection import SelectionResult, one_minus_r2_ratio, select_top_k, select_from_clusters, select_features
