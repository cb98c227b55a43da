"""Matrix factor models for financial panels.

Estimates bilinear (orthonormal-loading) and rank-one-sum factor models
from matrix-valued return series, evaluates the extracted factors' pricing
power against standard controls, and tests new factors against a
high-dimensional control zoo with a double-selection procedure.
"""

import os as _os

# honor the thread cap before any numeric library spins up its pools
_threads = _os.environ.get("MATFACTOR_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS", "NUMBA_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from ._version import __version__
from .data import (
    AlignedDataset,
    FactorSeries,
    MatrixPanel,
    MonthStamp,
    StockPanel,
    month_range,
    parse_month,
)
from .errors import (
    CollinearityError,
    ContractError,
    DegeneracyError,
    DimensionalityError,
    DomainError,
    MatrixFactorError,
    NumericError,
    ParseError,
    SchemaError,
    StructuralError,
)
from .ingest import (
    align_and_filter,
    merge_factor_series,
    min_obs_filter,
    parse_ff_factors_csv,
    parse_ff_portfolio_csv,
)
from .tucker import (
    TuckerModel,
    demean_panel,
    extract_tucker_factors,
    iterative_tipup,
    pca_vector_factors,
    rank_suggest_eigen_ratio,
    tipup_loading,
    topup_loading,
)
from .cp import CPModel, cp_fit, cp_init, extract_cp_factors, project_orthocomplement
from .regress import (
    PanelSummary,
    PartialFResult,
    RegressionResult,
    chi2_cdf,
    f_cdf,
    ols_fit,
    partial_f_test,
    residualize,
    run_panel_evaluation,
    vif,
)
from .zoo import (
    ZooDataset,
    ZooResult,
    compute_cross_moments,
    double_selection,
    lasso,
    select_lambda_cv,
)
from .synth import (
    SyntheticTruth,
    simulate_cp,
    simulate_cross_section,
    simulate_tucker,
    subspace_distance,
)
from .estimators import CPFactorModel, TuckerFactorModel, VectorPCAFactors

__all__ = [
    "__version__",
    "AlignedDataset", "FactorSeries", "MatrixPanel", "MonthStamp", "StockPanel",
    "month_range", "parse_month",
    "MatrixFactorError", "ParseError", "SchemaError", "StructuralError",
    "DomainError", "DegeneracyError", "NumericError", "CollinearityError",
    "ContractError", "DimensionalityError",
    "parse_ff_portfolio_csv", "parse_ff_factors_csv", "merge_factor_series",
    "align_and_filter", "min_obs_filter",
    "TuckerModel", "demean_panel", "tipup_loading", "topup_loading",
    "iterative_tipup", "extract_tucker_factors", "rank_suggest_eigen_ratio",
    "pca_vector_factors",
    "CPModel", "project_orthocomplement", "cp_init", "cp_fit", "extract_cp_factors",
    "RegressionResult", "PartialFResult", "PanelSummary", "ols_fit",
    "partial_f_test", "f_cdf", "chi2_cdf", "vif", "residualize",
    "run_panel_evaluation",
    "ZooDataset", "ZooResult", "compute_cross_moments", "lasso",
    "select_lambda_cv", "double_selection",
    "SyntheticTruth", "simulate_tucker", "simulate_cp", "simulate_cross_section",
    "subspace_distance",
    "TuckerFactorModel", "CPFactorModel", "VectorPCAFactors",
]
