"""CP-form matrix factor model estimation.

The model writes each observation as X_t = sum_i f_it a_i b_i' + E_t with
unit-norm loading vectors and scalar factor series. Loadings need not be
orthogonal, so factor i is extracted through the projected vectors
(a~_i, b~_i): the unit residuals of a_i and b_i on the span of the other
columns. That projection kills every cross term, giving
f^_it = a~_i' X~_t b~_i.

Fitting alternates, column by column in fixed order, between extracting a
factor series with the current projected vectors and regressing the panel
on that series to refresh the loading pair. The tracked residual is the
least-squares reconstruction error for the current loadings, which is the
alternating-least-squares objective; it is non-increasing on noise-free
data (and provably so at r=1), but can rise transiently on noisy data
because the projected extraction targets a fixed point rather than a
descent direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import FactorSeries, MatrixPanel
from .errors import DegeneracyError, DomainError
from .tucker import demean_panel, iterative_tipup, _panel_values
from .validation import as_float_array

__all__ = [
    "CPModel",
    "project_orthocomplement",
    "cp_init",
    "cp_fit",
    "extract_cp_factors",
]


@dataclass(eq=False)
class CPModel:
    """Fitted CP-form model.

    A, B hold the unit loading columns; A_tilde, B_tilde the projected
    extraction vectors; factors the T x r extracted series. rss_path[k] is
    the least-squares reconstruction residual after k refinement sweeps
    (entry 0 is the initialization).
    """

    A: np.ndarray
    B: np.ndarray
    A_tilde: np.ndarray
    B_tilde: np.ndarray
    factors: np.ndarray
    r: int
    iterations: int
    converged: bool
    rss_path: np.ndarray = field(default_factory=lambda: np.zeros(0))


def project_orthocomplement(mat: np.ndarray, i: int) -> np.ndarray:
    """Unit residual of column i after projecting out the other columns.

    The result is exactly orthogonal (to working precision) to every other
    column of `mat`. Raises DegeneracyError when column i lies in the span
    of the others.
    """
    mat = as_float_array(mat, "loading matrix", ndim=2)
    n, r = mat.shape
    if not 0 <= i < r:
        raise DomainError(f"column index {i} out of range for {r} columns")
    col = mat[:, i]
    if r == 1:
        norm = np.linalg.norm(col)
        if norm < 1e-10:
            raise DegeneracyError("zero loading column")
        return col / norm
    others = np.delete(mat, i, axis=1)
    q, _ = np.linalg.qr(others)
    v = col - q @ (q.T @ col)
    v = v - q @ (q.T @ v)  # second pass trims the rounding left by the first
    norm = np.linalg.norm(v)
    if norm < 1e-10:
        raise DegeneracyError(f"column {i} lies in the span of the other columns")
    return v / norm


def _tilde_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = a.shape[1]
    a_tilde = np.column_stack([project_orthocomplement(a, i) for i in range(r)])
    b_tilde = np.column_stack([project_orthocomplement(b, i) for i in range(r)])
    return a_tilde, b_tilde


def _extract(x: np.ndarray, a_tilde: np.ndarray, b_tilde: np.ndarray) -> np.ndarray:
    return np.einsum("mi,tmn,ni->ti", a_tilde, x, b_tilde)


def _unit_signed(v: np.ndarray, what: str) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise DegeneracyError(f"{what} update collapsed to zero")
    v = v / norm
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


def _ls_residual(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    # reconstruction error with least-squares factors for the given loadings
    r = a.shape[1]
    w = np.stack([np.outer(a[:, i], b[:, i]).ravel() for i in range(r)], axis=1)
    xv = x.reshape(x.shape[0], -1).T
    coef, *_ = np.linalg.lstsq(w, xv, rcond=None)
    return float(np.sum((xv - w @ coef) ** 2))


def cp_init(panel: MatrixPanel, r: int, h0: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Initial loading pairs from the fitted bilinear common component.

    Fits the orthonormal-loading model at ranks (r, r), stacks the fitted
    common components as T rows, and splits each of the top-r right singular
    directions into its leading rank-one pair.
    """
    if not 1 <= r <= min(panel.n1, panel.n2):
        raise DomainError(f"r {r} invalid for a {panel.n1}x{panel.n2} panel")
    model = iterative_tipup(panel, r, r, h0)
    demeaned, _ = demean_panel(panel)
    x = _panel_values(demeaned)
    common = np.einsum("ia,tab,jb->tij", model.R, model.factors, model.C)
    stacked = common.reshape(common.shape[0], -1)
    _, singular, vt = np.linalg.svd(stacked, full_matrices=False)
    if singular[min(r, len(singular)) - 1] <= 1e-12 * max(1.0, singular[0]):
        raise DegeneracyError("common component has rank below r")
    a = np.empty((panel.n1, r))
    b = np.empty((panel.n2, r))
    for i in range(r):
        direction = vt[i].reshape(panel.n1, panel.n2)
        u, s, wt = np.linalg.svd(direction)
        if s[0] <= 1e-12:
            raise DegeneracyError(f"degenerate singular direction {i}")
        a[:, i] = _unit_signed(u[:, 0], f"initial row loading {i}")
        b[:, i] = _unit_signed(wt[0], f"initial column loading {i}")
    return a, b


def cp_fit(
    panel: MatrixPanel,
    r: int,
    h0: int = 1,
    max_iter: int = 200,
    tol: float = 1e-7,
) -> CPModel:
    """Fit the rank-one-sum model by alternating projected refinement.

    Each sweep visits the loading pairs in index order: recompute the
    projected pair for column i from the current loadings, extract its
    factor series, then refresh a_i and b_i by regressing the panel on that
    series. Convergence is declared when no loading column turns by more
    than `tol` radians in a sweep. Factors are recomputed from the final
    projected vectors, then columns are ordered by descending factor
    variance under the largest-entry-positive sign convention.
    """
    if max_iter < 1:
        raise DomainError("max_iter must be >= 1")
    if tol <= 0:
        raise DomainError("tol must be positive")
    a, b = cp_init(panel, r, h0)
    demeaned, _ = demean_panel(panel)
    x = _panel_values(demeaned)
    xt = x.transpose(0, 2, 1)
    rss_path = [_ls_residual(x, a, b)]
    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        worst_turn = 0.0
        for i in range(r):
            a_til = project_orthocomplement(a, i)
            b_til = project_orthocomplement(b, i)
            f_i = np.einsum("m,tmn,n->t", a_til, x, b_til)
            a_new = _unit_signed(np.einsum("t,tmn,n->m", f_i, x, b_til), f"row loading {i}")
            b_new = _unit_signed(np.einsum("t,tmn,n->m", f_i, xt, a_til), f"column loading {i}")
            turn = max(
                np.arccos(min(1.0, abs(float(a_new @ a[:, i])))),
                np.arccos(min(1.0, abs(float(b_new @ b[:, i])))),
            )
            worst_turn = max(worst_turn, turn)
            a[:, i], b[:, i] = a_new, b_new
        rss_path.append(_ls_residual(x, a, b))
        if worst_turn < tol:
            converged = True
            break
    a_tilde, b_tilde = _tilde_pair(a, b)
    factors = _extract(x, a_tilde, b_tilde)
    order = np.argsort(-factors.var(axis=0), kind="stable")
    a, b = a[:, order], b[:, order]
    a_tilde, b_tilde = _tilde_pair(a, b)
    factors = _extract(x, a_tilde, b_tilde)
    return CPModel(A=a, B=b, A_tilde=a_tilde, B_tilde=b_tilde, factors=factors,
                   r=r, iterations=iterations, converged=converged,
                   rss_path=np.array(rss_path))


def extract_cp_factors(panel: MatrixPanel, model: CPModel) -> FactorSeries:
    """Factor series a~_i' X~_t b~_i on the demeaned panel, named CP1..CPr."""
    if (panel.n1, panel.n2) != (model.A.shape[0], model.B.shape[0]):
        raise DomainError(
            f"panel is {panel.n1}x{panel.n2} but model loadings are "
            f"{model.A.shape[0]}x{model.B.shape[0]}")
    demeaned, _ = demean_panel(panel)
    x = _panel_values(demeaned)
    factors = _extract(x, model.A_tilde, model.B_tilde)
    names = [f"CP{i + 1}" for i in range(model.r)]
    return FactorSeries(list(panel.dates), names, factors)
