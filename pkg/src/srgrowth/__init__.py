"""Reliability growth analysis for defect data mined from issue trackers.

The toolkit fits nine classic software reliability growth models to
cumulative defect series, scores each fit (R^2, AIC, BIC, RSE), tests for
reliability growth (Laplace trend), and compares model performance across
projects and segments (Kruskal-Wallis, Dunn's pairwise tests, eta-squared,
rankings with an inter-segment agreement score).
"""

__version__ = "0.1.0"

from . import errors
from .errors import (
    AnalysisError,
    DegenerateDataError,
    EmptySeriesError,
    InputError,
    InsufficientDataError,
    NetworkError,
    NumericError,
    ParameterDomainError,
    ParseError,
    RateLimitError,
    SegmentCoverageError,
    SrgrowthError,
    UnknownRepoError,
)
from .fitting import (
    FitConfig,
    FitResult,
    GofScores,
    aic,
    bic,
    fit_all,
    fit_one,
    initial_search,
    r_squared,
    refine,
    rse,
)
from .models import (
    MODEL_ORDER,
    ModelDescriptor,
    ModelId,
    ShapeClass,
    classify,
    descriptor,
    gradient,
    mean_value,
    search_bounds,
    validate_params,
)
from .pipeline import (
    DEFAULT_MIN_FAULTS,
    DEFECT_KEYWORDS,
    EXCLUSION_KEYWORDS,
    IssueRecord,
    ParseResult,
    ProjectAttributes,
    ReleaseWindow,
    SegmentationResult,
    build_series,
    classify_attribute,
    fetch_issues,
    filter_defects,
    issue_to_json,
    load_attributes_csv,
    load_releases_csv,
    parse_issues,
    segment_releases,
)
from .series import FailureSeries
from .stats import (
    EffectSize,
    GroupComparison,
    RankingTable,
    TrendResult,
    compare_groups,
    dunn_posthoc,
    eta_squared,
    inter_rater_agreement,
    kruskal_wallis,
    laplace_factor,
    rank_models,
)

__all__ = [
    "__version__",
    "errors",
    "AnalysisError",
    "DegenerateDataError",
    "EmptySeriesError",
    "InputError",
    "InsufficientDataError",
    "NetworkError",
    "NumericError",
    "ParameterDomainError",
    "ParseError",
    "RateLimitError",
    "SegmentCoverageError",
    "SrgrowthError",
    "UnknownRepoError",
    "FitConfig",
    "FitResult",
    "GofScores",
    "aic",
    "bic",
    "fit_all",
    "fit_one",
    "initial_search",
    "r_squared",
    "refine",
    "rse",
    "MODEL_ORDER",
    "ModelDescriptor",
    "ModelId",
    "ShapeClass",
    "classify",
    "descriptor",
    "gradient",
    "mean_value",
    "search_bounds",
    "validate_params",
    "DEFAULT_MIN_FAULTS",
    "DEFECT_KEYWORDS",
    "EXCLUSION_KEYWORDS",
    "IssueRecord",
    "ParseResult",
    "ProjectAttributes",
    "ReleaseWindow",
    "SegmentationResult",
    "build_series",
    "classify_attribute",
    "fetch_issues",
    "filter_defects",
    "issue_to_json",
    "load_attributes_csv",
    "load_releases_csv",
    "parse_issues",
    "segment_releases",
    "FailureSeries",
    "EffectSize",
    "GroupComparison",
    "RankingTable",
    "TrendResult",
    "compare_groups",
    "dunn_posthoc",
    "eta_squared",
    "inter_rater_agreement",
    "kruskal_wallis",
    "laplace_factor",
    "rank_models",
]
