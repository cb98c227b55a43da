"""Estimator-style wrappers over the functional fitting routines.

These follow the fit/transform protocol so the models drop into pipelines
and grid searches. Inputs are either MatrixPanel objects or plain
T x n1 x n2 arrays, with NaN marking missing cells. Factor extraction
always demeans the panel it is given, matching the underlying extract_*
functions, so transform on the training data reproduces the fitted factors.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .cp import cp_fit, extract_cp_factors
from .data import MatrixPanel, MonthStamp, month_range
from .errors import DomainError
from .tucker import demean_panel, extract_tucker_factors, iterative_tipup, pca_vector_factors
from .validation import fix_column_signs

__all__ = ["TuckerFactorModel", "CPFactorModel", "VectorPCAFactors", "as_matrix_panel"]


def as_matrix_panel(x) -> MatrixPanel:
    """Coerce a T x n1 x n2 array (NaN = missing) into a MatrixPanel."""
    if isinstance(x, MatrixPanel):
        return x
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise DomainError(f"expected a T x n1 x n2 array, got shape {arr.shape}")
    t, n1, n2 = arr.shape
    dates = month_range(MonthStamp(1900, 1), MonthStamp(2100, 12))
    if t > len(dates):
        raise DomainError(f"T={t} exceeds the representable month range")
    missing = ~np.isfinite(arr)
    return MatrixPanel(dates[:t], np.where(missing, np.nan, arr),
                       [f"row{i + 1}" for i in range(n1)],
                       [f"col{j + 1}" for j in range(n2)], missing)


class TuckerFactorModel(TransformerMixin, BaseEstimator):
    """Orthonormal bilinear factor model fit by iterated co-moment projection.

    Parameters
    ----------
    r1, r2 : int
        Row and column loading ranks.
    h0 : int
        Lag budget of the co-moment accumulation.
    max_iter, tol : int, float
        Alternation budget and projector-distance stopping tolerance.
    """

    def __init__(self, r1: int = 2, r2: int = 2, h0: int = 1,
                 max_iter: int = 50, tol: float = 1e-6):
        self.r1 = r1
        self.r2 = r2
        self.h0 = h0
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        panel = as_matrix_panel(X)
        self.model_ = iterative_tipup(panel, self.r1, self.r2, self.h0,
                                      self.max_iter, self.tol)
        self.n_features_in_ = panel.n1 * panel.n2
        return self

    def transform(self, X) -> np.ndarray:
        series = extract_tucker_factors(as_matrix_panel(X), self.model_)
        return series.values


class CPFactorModel(TransformerMixin, BaseEstimator):
    """Rank-one-sum factor model fit by alternating projected refinement."""

    def __init__(self, r: int = 2, h0: int = 1, max_iter: int = 200, tol: float = 1e-7):
        self.r = r
        self.h0 = h0
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        panel = as_matrix_panel(X)
        self.model_ = cp_fit(panel, self.r, self.h0, self.max_iter, self.tol)
        self.n_features_in_ = panel.n1 * panel.n2
        return self

    def transform(self, X) -> np.ndarray:
        series = extract_cp_factors(as_matrix_panel(X), self.model_)
        return series.values


class VectorPCAFactors(TransformerMixin, BaseEstimator):
    """Plain PCA on vectorized matrices, the stacking baseline."""

    def __init__(self, r: int = 2):
        self.r = r

    def fit(self, X, y=None):
        panel = as_matrix_panel(X)
        if not 1 <= self.r <= panel.n1 * panel.n2:
            raise DomainError(f"r {self.r} invalid for dimension {panel.n1 * panel.n2}")
        demeaned, _ = demean_panel(panel)
        y_mat = np.where(demeaned.missing, 0.0, demeaned.values).reshape(panel.n_periods, -1)
        cov = y_mat.T @ y_mat / max(panel.n_periods - 1, 1)
        _, vectors = np.linalg.eigh(cov)
        self.components_ = fix_column_signs(vectors[:, ::-1][:, : self.r])
        self.n_features_in_ = panel.n1 * panel.n2
        return self

    def transform(self, X) -> np.ndarray:
        panel = as_matrix_panel(X)
        demeaned, _ = demean_panel(panel)
        flat = np.where(demeaned.missing, 0.0, demeaned.values).reshape(panel.n_periods, -1)
        return flat @ self.components_

    def fit_transform(self, X, y=None, **fit_params) -> np.ndarray:
        # one demeaning pass, consistent with pca_vector_factors
        self.fit(X)
        return pca_vector_factors(as_matrix_panel(X), self.r).values
