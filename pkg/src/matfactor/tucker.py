"""Tucker-form matrix factor model estimation.

The model writes each observation as X_t = R F_t C' + E_t with orthonormal
loading matrices R (n1 x r1) and C (n2 x r2). Only the loading column spaces
are identified, so estimators return one orthonormal basis per space under a
fixed sign convention, and tests compare spans rather than matrices.

Estimation builds lagged co-moment matrices from the demeaned panel and
eigen-decomposes their accumulated outer products (inner-product accumulation
for tipup_loading, full outer-product accumulation for topup_loading), with
an optional alternating projection refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import FactorSeries, MatrixPanel
from .errors import DomainError, NumericError
from .validation import fix_column_signs, projector_distance

__all__ = [
    "TuckerModel",
    "demean_panel",
    "tipup_loading",
    "topup_loading",
    "iterative_tipup",
    "extract_tucker_factors",
    "rank_suggest_eigen_ratio",
    "pca_vector_factors",
]

TOPUP_CELL_BOUND = 1 << 24


@dataclass(eq=False)
class TuckerModel:
    """Fitted Tucker-form model: loadings, extracted factors, run metadata."""

    R: np.ndarray
    C: np.ndarray
    factors: np.ndarray
    ranks: tuple[int, int]
    h0: int
    iterations: int
    converged: bool


def demean_panel(panel: MatrixPanel) -> tuple[MatrixPanel, np.ndarray]:
    """Remove each cell's time mean; missing cells become exact zeros.

    Returns the demeaned panel (same mask) and the n1 x n2 mean matrix.
    A cell with no observed months has no mean to remove, which is an error.
    """
    if panel.n_periods < 2:
        raise DomainError("demeaning needs at least 2 periods")
    obs = ~panel.missing
    counts = obs.sum(axis=0)
    if np.any(counts == 0):
        i, j = np.argwhere(counts == 0)[0]
        raise DomainError(f"cell ({panel.row_labels[i]}, {panel.col_labels[j]}) is all-missing")
    filled = np.where(obs, panel.values, 0.0)
    means = filled.sum(axis=0) / counts
    centered = np.where(obs, panel.values - means, 0.0)
    out = MatrixPanel(list(panel.dates), centered, list(panel.row_labels),
                      list(panel.col_labels), panel.missing.copy())
    return out, means


def _panel_values(panel: MatrixPanel | np.ndarray) -> np.ndarray:
    if isinstance(panel, MatrixPanel):
        # estimators treat missing cells as zero (cell mean after demeaning)
        return np.where(panel.missing, 0.0, panel.values)
    arr = np.asarray(panel, dtype=np.float64)
    if arr.ndim != 3:
        raise DomainError(f"panel values must be T x n1 x n2, got shape {arr.shape}")
    return arr


def _check_lag_budget(h0: int, t: int) -> None:
    if not 1 <= h0 <= t - 2:
        raise DomainError(f"h0 must satisfy 1 <= h0 <= T-2, got h0={h0}, T={t}")


def _tipup_m(x: np.ndarray, h0: int) -> np.ndarray:
    t = x.shape[0]
    m = np.zeros((x.shape[1], x.shape[1]))
    for h in range(1, h0 + 1):
        omega = np.einsum("tij,tkj->ik", x[: t - h], x[h:]) / (t - h)
        m += omega @ omega.T
    return 0.5 * (m + m.T)


def _topup_m(x: np.ndarray, h0: int) -> np.ndarray:
    t, n1, n2 = x.shape
    m = np.zeros((n1, n1))
    for h in range(1, h0 + 1):
        phi = np.einsum("tij,tkl->ijkl", x[: t - h], x[h:]).reshape(n1, n2 * n1 * n2)
        phi /= t - h
        m += phi @ phi.T
    return 0.5 * (m + m.T)


def _top_eigenvectors(m: np.ndarray, rank: int) -> np.ndarray:
    if not np.all(np.isfinite(m)):
        raise NumericError("co-moment matrix has non-finite entries")
    _, vectors = np.linalg.eigh(m)
    return fix_column_signs(vectors[:, ::-1][:, :rank])


def tipup_loading(panel: MatrixPanel | np.ndarray, mode: str, rank: int, h0: int) -> np.ndarray:
    """Inner-product co-moment loading estimate on a demeaned panel.

    For mode='rows' accumulates M = sum_h Omega_h Omega_h' with
    Omega_h = (1/(T-h)) sum_t X_t X'_{t+h} and returns the top-`rank`
    eigenvectors of M, sign-normalized. mode='cols' runs the same on the
    transposed matrices.
    """
    x = _panel_values(panel)
    if mode == "cols":
        x = x.transpose(0, 2, 1)
    elif mode != "rows":
        raise DomainError(f"mode must be 'rows' or 'cols', got {mode!r}")
    if not 1 <= rank <= x.shape[1]:
        raise DomainError(f"rank {rank} invalid for dimension {x.shape[1]}")
    _check_lag_budget(h0, x.shape[0])
    return _top_eigenvectors(_tipup_m(x, h0), rank)


def topup_loading(
    panel: MatrixPanel | np.ndarray,
    mode: str,
    rank: int,
    h0: int,
    cell_bound: int = TOPUP_CELL_BOUND,
) -> np.ndarray:
    """Outer-product co-moment loading estimate on a demeaned panel.

    For mode='rows' builds the n1 x (n2*n1*n2) matrix Phi_h with entries
    Phi_h[i,(j,k,l)] = (1/(T-h)) sum_t X_t[i,j] X_{t+h}[k,l], accumulates
    M = sum_h Phi_h Phi_h', and returns its top-`rank` eigenvectors.
    """
    x = _panel_values(panel)
    if mode == "cols":
        x = x.transpose(0, 2, 1)
    elif mode != "rows":
        raise DomainError(f"mode must be 'rows' or 'cols', got {mode!r}")
    if not 1 <= rank <= x.shape[1]:
        raise DomainError(f"rank {rank} invalid for dimension {x.shape[1]}")
    _check_lag_budget(h0, x.shape[0])
    if x.shape[1] * x.shape[2] ** 2 > cell_bound:
        raise DomainError(
            f"outer-product co-moment needs {x.shape[1] * x.shape[2] ** 2} cells per row block, "
            f"over the bound {cell_bound}")
    return _top_eigenvectors(_topup_m(x, h0), rank)


def iterative_tipup(
    panel: MatrixPanel,
    r1: int,
    r2: int,
    h0: int = 1,
    max_iter: int = 50,
    tol: float = 1e-6,
) -> TuckerModel:
    """Alternating projection refinement of the inner-product estimator.

    Demeans the panel, initializes the column loading from the unprojected
    estimator, then alternates: project onto the current column space and
    re-estimate the row loading, project onto the row space and re-estimate
    the column loading. Stops when both loading spaces move less than `tol`
    in projector spectral norm, or after max_iter sweeps.
    """
    if max_iter < 1:
        raise DomainError("max_iter must be >= 1")
    if tol <= 0:
        raise DomainError("tol must be positive")
    demeaned, _ = demean_panel(panel)
    x = _panel_values(demeaned)
    if not 1 <= r1 <= panel.n1:
        raise DomainError(f"r1 {r1} invalid for n1 {panel.n1}")
    if not 1 <= r2 <= panel.n2:
        raise DomainError(f"r2 {r2} invalid for n2 {panel.n2}")
    c = tipup_loading(x.transpose(0, 2, 1), "rows", r2, h0)
    r = None
    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        r_new = tipup_loading(x @ c, "rows", r1, h0)
        c_new = tipup_loading(np.einsum("tij,ik->tjk", x, r_new), "rows", r2, h0)
        if r is not None:
            moved = max(projector_distance(r_new, r), projector_distance(c_new, c))
            r, c = r_new, c_new
            if moved < tol:
                converged = True
                break
        else:
            r, c = r_new, c_new
    factors = np.einsum("ia,tij,jb->tab", r, x, c)
    return TuckerModel(R=r, C=c, factors=factors, ranks=(r1, r2), h0=h0,
                       iterations=iterations, converged=converged)


def extract_tucker_factors(panel: MatrixPanel, model: TuckerModel) -> FactorSeries:
    """Factor series R'X~_t C on the demeaned panel, named TF1..TFK row-major."""
    if (panel.n1, panel.n2) != (model.R.shape[0], model.C.shape[0]):
        raise DomainError(
            f"panel is {panel.n1}x{panel.n2} but model loadings are "
            f"{model.R.shape[0]}x{model.C.shape[0]}")
    demeaned, _ = demean_panel(panel)
    x = _panel_values(demeaned)
    factors = np.einsum("ia,tij,jb->tab", model.R, x, model.C)
    r1, r2 = model.ranks
    names = [f"TF{a * r2 + b + 1}" for a in range(r1) for b in range(r2)]
    return FactorSeries(list(panel.dates), names, factors.reshape(len(panel.dates), r1 * r2))


def _eigen_ratio_pick(eigenvalues: np.ndarray, max_rank: int) -> int:
    """argmax_k lambda_k / lambda_(k+1) for k in 1..max_rank-1, ties to small k.

    Eigenvalues below 1e-12 of the largest are treated as exact zeros so that
    numerically degenerate spectra cannot produce spurious ratio winners
    below the true rank; a positive value over a zero follower is an infinite
    ratio and wins outright, while 0/0 counts as no gap at all.
    """
    eigs = np.array(eigenvalues, dtype=np.float64)
    eigs[eigs < 1e-12 * max(eigs.max(), 0.0)] = 0.0
    eigs[eigs < 0] = 0.0
    ratios = np.empty(max_rank - 1)
    for k in range(1, max_rank):
        num, den = eigs[k - 1], eigs[k]
        if den == 0:
            ratios[k - 1] = np.inf if num > 0 else 0.0
        else:
            ratios[k - 1] = num / den
    return int(np.argmax(ratios)) + 1


def rank_suggest_eigen_ratio(panel: MatrixPanel, mode: str, max_rank: int, h0: int) -> int:
    """Rank suggestion from the eigenvalue-ratio rule on the tipup matrix.

    Demeans the panel, forms the inner-product co-moment matrix for the
    requested mode, and returns the k in 1..max_rank-1 maximizing the ratio
    of consecutive eigenvalues. A zero follower means an infinite ratio and
    wins outright.
    """
    if max_rank < 2:
        raise DomainError("max_rank must be >= 2")
    demeaned, _ = demean_panel(panel)
    x = _panel_values(demeaned)
    if mode == "cols":
        x = x.transpose(0, 2, 1)
    elif mode != "rows":
        raise DomainError(f"mode must be 'rows' or 'cols', got {mode!r}")
    if max_rank > x.shape[1]:
        raise DomainError(f"max_rank {max_rank} exceeds dimension {x.shape[1]}")
    _check_lag_budget(h0, x.shape[0])
    eigs = np.linalg.eigvalsh(_tipup_m(x, h0))[::-1]
    return _eigen_ratio_pick(eigs, max_rank)


def pca_vector_factors(panel: MatrixPanel, r: int) -> FactorSeries:
    """Baseline: vectorize each matrix and run ordinary PCA.

    Scores of the top-r principal components of the T x (n1*n2) demeaned
    data matrix, named PC1..PCr.
    """
    if not 1 <= r <= panel.n1 * panel.n2:
        raise DomainError(f"r {r} invalid for dimension {panel.n1 * panel.n2}")
    demeaned, _ = demean_panel(panel)
    y = _panel_values(demeaned).reshape(panel.n_periods, -1)
    cov = y.T @ y / max(panel.n_periods - 1, 1)
    _, vectors = np.linalg.eigh(cov)
    basis = fix_column_signs(vectors[:, ::-1][:, :r])
    scores = y @ basis
    return FactorSeries(list(panel.dates), [f"PC{k + 1}" for k in range(r)], scores)
