from .wilcoxon import TestResult, signed_rank_counts, wilcoxon_signed_rank
from .comparison import PairComparison, ComparisonMatrix, bonferroni_alpha, pairwise_comparison, \
    five_number_summary, summary_frame
