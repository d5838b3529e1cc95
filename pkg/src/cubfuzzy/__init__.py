"""CUB models and intuitionistic fuzzy satisfaction scores for rating items."""

from .aggregation import (
    ScoreTriple,
    Source,
    WeightMode,
    WeightVector,
    final_scores,
    fuzzy_proportions,
    iwam,
    iwam_respondent,
    log_inverse_weights,
)
from .cub import (
    CubParams,
    FitResult,
    FrequencyTable,
    RatingScale,
    cub_pmf,
    fit_em,
    fit_em_counts,
    gini_index,
    log_likelihood,
    moment_init,
    preliminary_pi,
    sample,
    shifted_binomial_pmf,
)
from .errors import *  # noqa: F401,F403
from .ifs import (
    FuzzyProfile,
    Variant,
    build_profile,
    membership_cub,
    membership_zani,
    nonmembership_cub,
    uncertainty_profile,
)
from .survey import MISSING, RatingMatrix, ValidationReport, item_frequencies, load_csv, save_csv

__version__ = "0.1.0"
