"""Simulators: determinism, noise scaling, and the comparison metric."""

import numpy as np
import pytest

from matfactor.errors import ContractError, DomainError
from matfactor.synth import (
    simulate_cp,
    simulate_cross_section,
    simulate_tucker,
    subspace_distance,
)


# ---------------------------------------------------------------------------
# bilinear-model simulator


def test_tucker_noise_free_is_exact():
    panel, truth = simulate_tucker(6, 5, 2, 2, 50, snr=np.inf, seed=1)
    r, c, f = truth.params["R"], truth.params["C"], truth.params["factors"]
    reconstructed = np.einsum("ia,tab,jb->tij", r, f, c)
    np.testing.assert_array_equal(panel.values, reconstructed)


def test_tucker_white_factors_autocorrelation():
    t = 400
    _, truth = simulate_tucker(4, 4, 2, 2, t, factor_ar=0.0, snr=1.0, seed=2)
    f = truth.params["factors"].reshape(t, -1)
    for j in range(f.shape[1]):
        series = f[:, j]
        rho = np.corrcoef(series[:-1], series[1:])[0, 1]
        assert abs(rho) < 3.0 / np.sqrt(t)


def test_tucker_determinism():
    p1, t1 = simulate_tucker(5, 5, 2, 2, 40, seed=9)
    p2, t2 = simulate_tucker(5, 5, 2, 2, 40, seed=9)
    np.testing.assert_array_equal(p1.values, p2.values)
    np.testing.assert_array_equal(t1.params["R"], t2.params["R"])
    assert t1.generator == t2.generator


def test_tucker_snr_is_approximately_realized():
    panel, truth = simulate_tucker(8, 8, 2, 2, 500, factor_ar=0.5, snr=2.0, seed=3)
    assert truth.snr == 2.0
    signal = np.einsum("ia,tab,jb->tij", truth.params["R"],
                       truth.params["factors"], truth.params["C"])
    noise = panel.values - signal
    realized = signal.var() / noise.var()
    assert realized == pytest.approx(2.0, rel=0.05)


def test_tucker_missing_rate_masks_cells():
    panel, _ = simulate_tucker(6, 6, 2, 2, 100, seed=4, missing_rate=0.1)
    share = panel.missing.mean()
    assert 0.05 < share < 0.15
    with pytest.raises(DomainError):
        simulate_tucker(6, 6, 2, 2, 100, missing_rate=1.0)


def test_tucker_rank_validation():
    with pytest.raises(DomainError):
        simulate_tucker(4, 4, 5, 2, 50)
    with pytest.raises(DomainError):
        simulate_tucker(4, 4, 2, 2, 5)


# ---------------------------------------------------------------------------
# rank-one-sum simulator


def test_cp_orthogonal_angle_gram_identity():
    _, truth = simulate_cp(7, 6, 3, 60, loading_angle=90.0, seed=5)
    a = truth.params["A"]
    np.testing.assert_allclose(a.T @ a, np.eye(3), atol=1e-12)


def test_cp_angle_sets_pairwise_cosines():
    _, truth = simulate_cp(8, 8, 3, 60, loading_angle=60.0, seed=6)
    a = truth.params["A"]
    gram = a.T @ a
    off = gram[~np.eye(3, dtype=bool)]
    np.testing.assert_allclose(off, np.cos(np.deg2rad(60.0)), atol=1e-10)
    np.testing.assert_allclose(np.diag(gram), 1.0, atol=1e-12)


def test_cp_noise_free_rank_one():
    panel, _ = simulate_cp(5, 4, 1, 30, loading_angle=90.0, snr=np.inf, seed=7)
    for t in range(30):
        s = np.linalg.svd(panel.values[t], compute_uv=False)
        assert s[1] < 1e-12 * max(s[0], 1.0)


def test_cp_determinism():
    p1, _ = simulate_cp(6, 6, 2, 50, seed=8)
    p2, _ = simulate_cp(6, 6, 2, 50, seed=8)
    np.testing.assert_array_equal(p1.values, p2.values)


def test_cp_infeasible_angle():
    # non-orthogonal construction needs r+1 directions
    with pytest.raises(DomainError):
        simulate_cp(3, 3, 3, 50, loading_angle=60.0)
    simulate_cp(3, 3, 3, 50, loading_angle=90.0)  # orthogonal fits exactly
    with pytest.raises(DomainError):
        simulate_cp(5, 5, 2, 50, loading_angle=120.0)


# ---------------------------------------------------------------------------
# pricing-economy simulator


def test_cross_section_null_construction():
    ds, truth = simulate_cross_section(50, 12, 2, 60, np.zeros(2), seed=9)
    assert np.array_equal(truth.params["lambda_g"], np.zeros(2))
    lam_h = truth.params["lambda_h"]
    assert (lam_h != 0).sum() == 5
    assert ds.n_assets == 50 and ds.n_controls == 12 and ds.n_new == 2


def test_cross_section_determinism():
    d1, _ = simulate_cross_section(40, 10, 2, 50, np.array([0.3, 0.3]), seed=10)
    d2, _ = simulate_cross_section(40, 10, 2, 50, np.array([0.3, 0.3]), seed=10)
    np.testing.assert_array_equal(d1.test_asset_returns, d2.test_asset_returns)
    np.testing.assert_array_equal(d1.new_factors, d2.new_factors)


def test_cross_section_expected_returns_identity():
    # with zero idiosyncratic noise, time means converge on E(r) as T grows
    ds, truth = simulate_cross_section(30, 8, 2, 2000, np.array([0.5, 0.5]),
                                       seed=11, noise_sd=0.0)
    gamma0 = truth.params["gamma0"]
    beta_g = truth.params["beta_g"]
    beta_h = truth.params["beta_h"]
    overlap = truth.params["overlap"]
    c_g = beta_g + beta_h @ overlap
    c_h = beta_g @ overlap.T + beta_h
    expected = gamma0 + c_g @ truth.params["lambda_g"] + c_h @ truth.params["lambda_h"]
    r_bar = ds.test_asset_returns.mean(axis=1)
    assert np.abs(r_bar - expected).max() < 0.25
    assert gamma0 == 0.1


def test_cross_section_validation():
    with pytest.raises(DomainError):
        simulate_cross_section(30, 8, 2, 50, np.zeros(3))
    with pytest.raises(DomainError):
        simulate_cross_section(30, 8, 2, 50, np.zeros(2), sparsity=9)


# ---------------------------------------------------------------------------
# subspace metric


def test_subspace_distance_identical_and_complement():
    rng = np.random.default_rng(12)
    q = np.linalg.qr(rng.standard_normal((6, 6)))[0]
    u = q[:, :3]
    v = q[:, 3:]
    assert subspace_distance(u, u) == pytest.approx(0.0, abs=1e-12)
    assert subspace_distance(u, v) == pytest.approx(1.0, abs=1e-12)


def test_subspace_distance_one_dimensional_angle():
    theta = 0.37
    u = np.array([[1.0], [0.0]])
    v = np.array([[np.cos(theta)], [np.sin(theta)]])
    assert subspace_distance(u, v) == pytest.approx(np.sin(theta), abs=1e-10)


def test_subspace_distance_contract():
    rng = np.random.default_rng(13)
    u = np.linalg.qr(rng.standard_normal((5, 2)))[0]
    with pytest.raises(ContractError):
        subspace_distance(u, rng.standard_normal((5, 2)))
    with pytest.raises(DomainError):
        subspace_distance(u, np.linalg.qr(rng.standard_normal((5, 3)))[0])
