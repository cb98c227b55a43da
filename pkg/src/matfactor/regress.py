"""Least squares with the diagnostics used to judge candidate factors.

Fitting goes through an SVD rather than explicit normal equations; the
normal-equation form is kept for test oracles only. Distribution functions
wrap the regularized incomplete beta/gamma routines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .data import FactorSeries, StockPanel
from .errors import CollinearityError, ContractError, DomainError
from .validation import as_float_array, check_finite

__all__ = [
    "RegressionResult",
    "PartialFResult",
    "PanelSummary",
    "ols_fit",
    "partial_f_test",
    "f_cdf",
    "chi2_cdf",
    "vif",
    "residualize",
    "run_panel_evaluation",
]

_RANK_TOL = 1e-10
HIST_BINS = 20


@dataclass(eq=False)
class RegressionResult:
    coef: np.ndarray
    stderr: np.ndarray
    residuals: np.ndarray
    rss: float
    r2: float
    n_obs: int
    k: int


@dataclass(eq=False)
class PartialFResult:
    f_stat: float
    df1: int
    df2: int
    p_value: float
    infinite: bool = False


@dataclass(eq=False)
class StockRow:
    stock_id: str
    n_obs: int
    r2_reduced: float
    r2_full: float
    f_stat: float
    p_value: float


@dataclass(eq=False)
class PanelSummary:
    rows: list[StockRow]
    skipped: list[tuple[str, str]]
    mean_r2_reduced: float
    mean_r2_full: float
    median_r2_reduced: float
    median_r2_full: float
    share_p_05: float
    share_p_10: float
    r2_reduced_hist: np.ndarray
    r2_full_hist: np.ndarray
    p_value_hist: np.ndarray


def ols_fit(y: np.ndarray, x: np.ndarray) -> RegressionResult:
    """Least squares of y on x, where x already carries its intercept column.

    Raises CollinearityError when the column-scaled design has a singular
    value below 1e-10.
    """
    y = check_finite(as_float_array(y, "y", ndim=1), "y")
    x = check_finite(as_float_array(x, "X", ndim=2), "X")
    n_obs, k = x.shape
    if y.shape[0] != n_obs:
        raise DomainError(f"y has {y.shape[0]} rows, X has {n_obs}")
    if n_obs <= k:
        raise DomainError(f"need n_obs > k, got n_obs={n_obs}, k={k}")
    scale = np.linalg.norm(x, axis=0)
    if np.any(scale == 0):
        raise CollinearityError("design matrix has a zero column")
    u, s, vt = np.linalg.svd(x / scale, full_matrices=False)
    if s[-1] < _RANK_TOL:
        raise CollinearityError(
            f"design matrix numerically rank deficient (smallest singular value {s[-1]:.3e})")
    coef = (vt.T @ ((u.T @ y) / s)) / scale
    residuals = y - x @ coef
    rss = float(residuals @ residuals)
    centered = y - y.mean()
    tss = float(centered @ centered)
    if tss > 0:
        r2 = float(np.clip(1.0 - rss / tss, 0.0, 1.0))
    else:
        r2 = 1.0 if rss <= 1e-24 else 0.0
    sigma2 = rss / (n_obs - k)
    xtx_inv_diag = ((vt.T ** 2) @ (1.0 / s**2)) / scale**2
    stderr = np.sqrt(sigma2 * xtx_inv_diag)
    return RegressionResult(coef=coef, stderr=stderr, residuals=residuals,
                            rss=rss, r2=r2, n_obs=n_obs, k=k)


def partial_f_test(reduced: RegressionResult, full: RegressionResult) -> PartialFResult:
    """F test of the coefficients the full model adds over the reduced one."""
    if reduced.n_obs != full.n_obs:
        raise ContractError("models were fit on different observation counts")
    q = full.k - reduced.k
    if q <= 0:
        raise ContractError("full model must add at least one regressor")
    if reduced.rss < full.rss - 1e-12:
        raise ContractError(
            f"reduced rss {reduced.rss} below full rss {full.rss}: models are not nested")
    df2 = full.n_obs - full.k
    if full.rss <= 1e-20 * full.n_obs:
        # perfect full fit: the statistic is +inf unless the reduced model is
        # equally perfect, in which case the added block explains nothing
        if reduced.rss <= full.rss + 1e-12:
            return PartialFResult(f_stat=0.0, df1=q, df2=df2, p_value=1.0)
        return PartialFResult(f_stat=float("inf"), df1=q, df2=df2, p_value=0.0, infinite=True)
    f_stat = max(reduced.rss - full.rss, 0.0) / q / (full.rss / df2)
    p_value = 1.0 - f_cdf(f_stat, q, df2)
    return PartialFResult(f_stat=f_stat, df1=q, df2=df2, p_value=p_value)


def f_cdf(x: float, df1: int, df2: int) -> float:
    """CDF of the F distribution via the regularized incomplete beta."""
    if df1 < 1 or df2 < 1:
        raise DomainError("degrees of freedom must be >= 1")
    if x <= 0:
        return 0.0
    if np.isinf(x):
        return 1.0
    return float(special.betainc(df1 / 2.0, df2 / 2.0, df1 * x / (df1 * x + df2)))


def chi2_cdf(x: float, df: int) -> float:
    """CDF of the chi-squared distribution via the regularized lower gamma."""
    if df < 1:
        raise DomainError("degrees of freedom must be >= 1")
    if x <= 0:
        return 0.0
    if np.isinf(x):
        return 1.0
    return float(special.gammainc(df / 2.0, x / 2.0))


def vif(x: np.ndarray) -> np.ndarray:
    """Variance inflation factors, one per column of x (no intercept column).

    VIF_j = 1/(1 - R2_j) where R2_j comes from regressing column j on the
    remaining columns plus an intercept. Columns explained to within 1e-12
    report +inf.
    """
    x = check_finite(as_float_array(x, "X", ndim=2), "X")
    n_obs, k = x.shape
    if k < 2:
        raise DomainError("vif needs at least 2 columns")
    if n_obs <= k:
        raise DomainError(f"need n_obs > k, got n_obs={n_obs}, k={k}")
    centered = x - x.mean(axis=0)
    out = np.empty(k)
    for j in range(k):
        target = centered[:, j]
        tss = float(target @ target)
        if tss == 0.0:
            out[j] = np.inf  # constant column, perfectly collinear with the intercept
            continue
        others = np.delete(centered, j, axis=1)
        coef, *_ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ coef
        r2_j = 1.0 - float(resid @ resid) / tss
        out[j] = np.inf if r2_j >= 1.0 - 1e-12 else 1.0 / (1.0 - r2_j)
    return out


def residualize(targets: FactorSeries, controls: FactorSeries) -> FactorSeries:
    """Replace each target series by its OLS residual on the controls."""
    if targets.dates != controls.dates:
        raise DomainError("targets and controls must share dates")
    t = len(targets.dates)
    design = np.column_stack([np.ones(t), controls.values])
    out = np.empty_like(targets.values)
    for j in range(len(targets.names)):
        out[:, j] = ols_fit(targets.values[:, j], design).residuals
    return FactorSeries(list(targets.dates), list(targets.names), out)


def _histogram(values: np.ndarray) -> np.ndarray:
    counts, _ = np.histogram(np.clip(values, 0.0, 1.0), bins=HIST_BINS, range=(0.0, 1.0))
    return counts


def run_panel_evaluation(
    stocks: StockPanel,
    controls: FactorSeries,
    stat_factors: FactorSeries,
    rf: np.ndarray,
    min_obs: int = 30,
    residualize_flag: bool = True,
) -> PanelSummary:
    """Per-stock comparison of the control model against the augmented model.

    For each stock: drop months with a missing return, regress the excess
    return on [intercept, controls] and on [intercept, controls, candidate
    factors], and record both fits plus the partial F test of the added
    block. Stocks with too few observations or a collinear design are
    skipped and listed in the summary.

    Parameters
    ----------
    stocks : StockPanel
        Test returns, percent per month, aligned to the factor dates.
    controls, stat_factors : FactorSeries
        Control factors and candidate factors on the same dates.
    rf : array
        Risk-free series, same length, subtracted from stock returns.
    min_obs : int
        A stock enters only with strictly more than min_obs observed months.
    residualize_flag : bool
        When true, candidate factors are residualized on the controls first.
    """
    if stocks.dates != controls.dates or stocks.dates != stat_factors.dates:
        raise DomainError("stocks, controls, and stat factors must share dates")
    rf = as_float_array(rf, "rf", ndim=1)
    if rf.shape[0] != len(stocks.dates):
        raise DomainError("rf length must match the sample length")
    k_full = 1 + len(controls.names) + len(stat_factors.names)
    if min_obs <= k_full:
        raise DomainError(f"min_obs must exceed k_full={k_full}")
    if residualize_flag:
        stat_factors = residualize(stat_factors, controls)
    control_block = controls.values
    stat_block = stat_factors.values
    rows: list[StockRow] = []
    skipped: list[tuple[str, str]] = []
    for idx, stock_id in enumerate(stocks.stock_ids):
        observed = ~stocks.missing[:, idx]
        n_i = int(observed.sum())
        if n_i <= min_obs:
            skipped.append((stock_id, f"only {n_i} observations"))
            continue
        y = stocks.returns[observed, idx] - rf[observed]
        ones = np.ones(n_i)
        x_reduced = np.column_stack([ones, control_block[observed]])
        x_full = np.column_stack([ones, control_block[observed], stat_block[observed]])
        try:
            fit_reduced = ols_fit(y, x_reduced)
            fit_full = ols_fit(y, x_full)
        except CollinearityError as exc:
            skipped.append((stock_id, str(exc)))
            continue
        test = partial_f_test(fit_reduced, fit_full)
        rows.append(StockRow(stock_id, n_i, fit_reduced.r2, fit_full.r2,
                             test.f_stat, test.p_value))
    rows.sort(key=lambda row: row.stock_id)
    if rows:
        r2_reduced = np.array([row.r2_reduced for row in rows])
        r2_full = np.array([row.r2_full for row in rows])
        p_values = np.array([row.p_value for row in rows])
        summary = PanelSummary(
            rows=rows,
            skipped=skipped,
            mean_r2_reduced=float(r2_reduced.mean()),
            mean_r2_full=float(r2_full.mean()),
            median_r2_reduced=float(np.median(r2_reduced)),
            median_r2_full=float(np.median(r2_full)),
            share_p_05=float((p_values < 0.05).mean()),
            share_p_10=float((p_values < 0.10).mean()),
            r2_reduced_hist=_histogram(r2_reduced),
            r2_full_hist=_histogram(r2_full),
            p_value_hist=_histogram(p_values),
        )
    else:
        zeros = np.zeros(HIST_BINS, dtype=int)
        summary = PanelSummary(rows=[], skipped=skipped,
                               mean_r2_reduced=float("nan"), mean_r2_full=float("nan"),
                               median_r2_reduced=float("nan"), median_r2_full=float("nan"),
                               share_p_05=float("nan"), share_p_10=float("nan"),
                               r2_reduced_hist=zeros, r2_full_hist=zeros.copy(),
                               p_value_hist=zeros.copy())
    return summary
