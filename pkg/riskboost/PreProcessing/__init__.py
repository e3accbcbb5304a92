from .pre_processing import PreprocessStats, drop_high_missing, stratified_sample, fit_preprocessor, \
    apply_preprocessor, stratified_kfold
from .synthetic_data import SynthSpec, generate
