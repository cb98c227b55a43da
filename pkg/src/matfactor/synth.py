"""Synthetic data generators with known ground truth.

Every generator takes an explicit 64-bit seed and draws from
numpy.random.default_rng (PCG64), whose algorithm name is recorded in the
returned truth object so runs can be regenerated elsewhere. Noise is scaled
against the realized signal variance so the requested signal-to-noise ratio
holds for the sample actually drawn.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import MatrixPanel, MonthStamp, month_range
from .errors import DomainError
from .validation import check_orthonormal, projector_distance
from .zoo import ZooDataset

__all__ = [
    "SyntheticTruth",
    "simulate_tucker",
    "simulate_cp",
    "simulate_cross_section",
    "subspace_distance",
]

_GENERATOR_ID = "numpy.default_rng(PCG64)"


@dataclass(eq=False)
class SyntheticTruth:
    """Ground truth behind one simulated dataset."""

    kind: str
    params: dict
    factor_ar: float
    snr: float
    seed: int
    generator: str = _GENERATOR_ID


def _synthetic_dates(t: int) -> list[MonthStamp]:
    # panel containers demand real calendar months, so synthetic samples
    # start at 1900-01 (T <= 2412 keeps us inside the supported range)
    start = MonthStamp(1900, 1)
    months = month_range(start, MonthStamp(2100, 12))
    if t > len(months):
        raise DomainError(f"T={t} exceeds the representable month range")
    return months[:t]


def _ar1(rng: np.random.Generator, t: int, size: tuple[int, ...], phi: float) -> np.ndarray:
    if not -1 < phi < 1:
        raise DomainError("factor_ar must lie in (-1, 1)")
    series = np.empty((t, *size))
    series[0] = rng.standard_normal(size) / np.sqrt(1.0 - phi**2)
    for step in range(1, t):
        series[step] = phi * series[step - 1] + rng.standard_normal(size)
    return series


def _scaled_noise(rng: np.random.Generator, signal: np.ndarray, snr: float) -> tuple[np.ndarray, float]:
    if snr <= 0:
        raise DomainError("snr must be positive")
    if np.isinf(snr):
        return np.zeros_like(signal), 0.0
    raw = rng.standard_normal(signal.shape)
    scale = float(np.sqrt(signal.var() / (snr * raw.var())))
    return raw * scale, scale


def _apply_missing(rng: np.random.Generator, shape: tuple[int, ...], rate: float) -> np.ndarray:
    if not 0 <= rate < 1:
        raise DomainError("missing_rate must lie in [0, 1)")
    if rate == 0:
        return np.zeros(shape, dtype=bool)
    return rng.random(shape) < rate


def _orthonormal(rng: np.random.Generator, n: int, r: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return q


def simulate_tucker(
    n1: int,
    n2: int,
    r1: int,
    r2: int,
    t: int,
    factor_ar: float = 0.5,
    snr: float = 1.0,
    seed: int = 0,
    missing_rate: float = 0.0,
) -> tuple[MatrixPanel, SyntheticTruth]:
    """Panel X_t = R F_t C' + E_t with orthonormal loadings and AR(1) factors."""
    if not (1 <= r1 <= n1 and 1 <= r2 <= n2):
        raise DomainError(f"ranks ({r1},{r2}) invalid for a {n1}x{n2} panel")
    if t < 10:
        raise DomainError("need T >= 10")
    rng = np.random.default_rng(seed)
    loadings_r = _orthonormal(rng, n1, r1)
    loadings_c = _orthonormal(rng, n2, r2)
    factors = _ar1(rng, t, (r1, r2), factor_ar)
    signal = np.einsum("ia,tab,jb->tij", loadings_r, factors, loadings_c)
    noise, noise_scale = _scaled_noise(rng, signal, snr)
    values = signal + noise
    missing = _apply_missing(rng, values.shape, missing_rate)
    values = np.where(missing, np.nan, values)
    panel = MatrixPanel(_synthetic_dates(t), values,
                        [f"row{i + 1}" for i in range(n1)],
                        [f"col{j + 1}" for j in range(n2)], missing)
    truth = SyntheticTruth(
        kind="tucker",
        params={"R": loadings_r, "C": loadings_c, "factors": factors,
                "noise_scale": noise_scale, "missing_rate": missing_rate},
        factor_ar=factor_ar, snr=snr, seed=seed)
    return panel, truth


def _angled_loadings(rng: np.random.Generator, n: int, r: int, angle_deg: float) -> np.ndarray:
    """Unit columns with every pairwise angle equal to angle_deg."""
    cos_angle = float(np.cos(np.deg2rad(angle_deg)))
    if angle_deg == 90.0:
        return _orthonormal(rng, n, r)
    basis = _orthonormal(rng, n, r + 1)
    shared = basis[:, :1]
    distinct = basis[:, 1:]
    return np.sqrt(cos_angle) * shared + np.sqrt(1.0 - cos_angle) * distinct


def simulate_cp(
    n1: int,
    n2: int,
    r: int,
    t: int,
    loading_angle: float = 90.0,
    factor_ar: float = 0.5,
    snr: float = 1.0,
    seed: int = 0,
    missing_rate: float = 0.0,
) -> tuple[MatrixPanel, SyntheticTruth]:
    """Panel X_t = sum_i f_it a_i b_i' + E_t with controlled loading angles.

    loading_angle sets every pairwise angle within {a_i} and within {b_i};
    90 degrees gives orthonormal loadings. Angles below 90 need r+1 <= n on
    each side.
    """
    if not (0.0 < loading_angle <= 90.0):
        raise DomainError("loading_angle must lie in (0, 90] degrees")
    needed = r if loading_angle == 90.0 else r + 1
    if needed > min(n1, n2):
        raise DomainError(
            f"angle {loading_angle} with r={r} needs min(n1,n2) >= {needed}")
    if t < 10:
        raise DomainError("need T >= 10")
    rng = np.random.default_rng(seed)
    a = _angled_loadings(rng, n1, r, loading_angle)
    b = _angled_loadings(rng, n2, r, loading_angle)
    factors = _ar1(rng, t, (r,), factor_ar)
    signal = np.einsum("ti,mi,ni->tmn", factors, a, b)
    noise, noise_scale = _scaled_noise(rng, signal, snr)
    values = signal + noise
    missing = _apply_missing(rng, values.shape, missing_rate)
    values = np.where(missing, np.nan, values)
    panel = MatrixPanel(_synthetic_dates(t), values,
                        [f"row{i + 1}" for i in range(n1)],
                        [f"col{j + 1}" for j in range(n2)], missing)
    truth = SyntheticTruth(
        kind="cp",
        params={"A": a, "B": b, "factors": factors, "loading_angle": loading_angle,
                "noise_scale": noise_scale, "missing_rate": missing_rate},
        factor_ar=factor_ar, snr=snr, seed=seed)
    return panel, truth


def simulate_cross_section(
    n: int,
    p: int,
    r_new: int,
    t: int,
    lambda_g: np.ndarray,
    sparsity: int = 5,
    seed: int = 0,
    factor_overlap: float = 0.0,
    lambda_h_value: float = 0.8,
    noise_sd: float = 12.0,
    beta_g_scale: float = 0.6,
    beta_h_scale: float = 0.4,
) -> tuple[ZooDataset, SyntheticTruth]:
    """Cross-sectional pricing economy with sparse control prices.

    New factors g overlap the first r_new controls with correlation
    `factor_overlap`, expected returns satisfy
    E(r) = gamma0 + C_g lambda_g + C_h lambda_h with population covariance
    matrices, and lambda_h is supported on its first `sparsity` entries.

    Default scales are calibrated so that the cross-sectional HC0 standard
    error dominates the factor-time-mean noise that enters lambda_g through
    r-bar; nonzero overlap reintroduces an errors-in-variables bias channel
    and is kept for stress testing only.
    """
    lambda_g = np.atleast_1d(np.asarray(lambda_g, dtype=np.float64))
    if lambda_g.shape != (r_new,):
        raise DomainError(f"lambda_g must have length {r_new}")
    if not 0 <= sparsity <= p:
        raise DomainError("sparsity must lie in [0, p]")
    if p < r_new:
        raise DomainError("need p >= r_new for the overlap construction")
    if not 0 <= factor_overlap < 1:
        raise DomainError("factor_overlap must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    gamma0 = 0.1
    lambda_h = np.zeros(p)
    lambda_h[:sparsity] = lambda_h_value
    beta_g = rng.standard_normal((n, r_new)) * beta_g_scale
    beta_h = rng.standard_normal((n, p)) * beta_h_scale
    overlap = np.zeros((p, r_new))
    overlap[:r_new, :r_new] = np.eye(r_new) * factor_overlap
    # population moments implied by g = overlap' h + fresh noise (unit variances)
    c_g = beta_g + beta_h @ overlap
    c_h = beta_g @ overlap.T + beta_h
    expected = gamma0 + c_g @ lambda_g + c_h @ lambda_h
    h_series = rng.standard_normal((p, t))
    fresh = rng.standard_normal((r_new, t)) * np.sqrt(1.0 - factor_overlap**2)
    g_series = overlap.T @ h_series + fresh
    idiosyncratic = rng.standard_normal((n, t)) * noise_sd
    returns = expected[:, None] + beta_g @ g_series + beta_h @ h_series + idiosyncratic
    dataset = ZooDataset(returns, h_series, g_series)
    truth = SyntheticTruth(
        kind="cross_section",
        params={"gamma0": gamma0, "lambda_g": lambda_g, "lambda_h": lambda_h,
                "beta_g": beta_g, "beta_h": beta_h, "overlap": overlap,
                "noise_sd": noise_sd, "sparsity": sparsity},
        factor_ar=0.0, snr=float("inf"), seed=seed)
    return dataset, truth


def subspace_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Spectral norm of the projector difference uu' - vv'.

    Both inputs must have orthonormal columns of the same shape; the result
    lies in [0, 1] and is 0 exactly when the spans coincide.
    """
    u = check_orthonormal(u, "U")
    v = check_orthonormal(v, "V")
    if u.shape != v.shape:
        raise DomainError(f"shape mismatch {u.shape} vs {v.shape}")
    return projector_distance(u, v)
