"""Rank-one-sum model: projection oracle, initialization, alternating fit."""

import numpy as np
import pytest

from matfactor.cp import (
    cp_fit,
    cp_init,
    extract_cp_factors,
    project_orthocomplement,
)
from matfactor.data import MatrixPanel, MonthStamp
from matfactor.errors import DegeneracyError, DomainError
from matfactor.synth import simulate_cp


def _panel_from(values):
    t, n1, n2 = values.shape
    dates = [MonthStamp(1950 + i // 12, i % 12 + 1) for i in range(t)]
    return MatrixPanel(dates, values, [f"r{i}" for i in range(n1)],
                       [f"c{j}" for j in range(n2)],
                       np.zeros(values.shape, dtype=bool))


def _match_columns(estimate, truth):
    """Greedy sign/permutation alignment; returns max angular error (radians)."""
    r = truth.shape[1]
    used = set()
    worst = 0.0
    for i in range(r):
        dots = [abs(estimate[:, j] @ truth[:, i]) if j not in used else -1.0
                for j in range(r)]
        j = int(np.argmax(dots))
        used.add(j)
        worst = max(worst, np.arccos(min(1.0, dots[j])))
    return worst


# ---------------------------------------------------------------------------
# orthocomplement projection


def test_project_orthonormal_input_is_identity_map():
    basis = np.linalg.qr(np.random.default_rng(4).standard_normal((5, 3)))[0]
    for i in range(3):
        out = project_orthocomplement(basis, i)
        np.testing.assert_allclose(np.abs(out @ basis[:, i]), 1.0, atol=1e-12)


def test_project_hand_gram_schmidt():
    b = np.column_stack([[1.0, 0.0, 0.0], np.array([1.0, 1.0, 0.0]) / np.sqrt(2)])
    out0 = project_orthocomplement(b, 0)
    expected0 = np.array([1.0, -1.0, 0.0]) / np.sqrt(2)
    assert min(np.linalg.norm(out0 - expected0),
               np.linalg.norm(out0 + expected0)) < 1e-12
    out1 = project_orthocomplement(b, 1)
    expected1 = np.array([0.0, 1.0, 0.0])
    assert min(np.linalg.norm(out1 - expected1),
               np.linalg.norm(out1 + expected1)) < 1e-12


def test_project_output_orthogonal_to_others(rng):
    mat = rng.standard_normal((6, 4))
    for i in range(4):
        out = project_orthocomplement(mat, i)
        others = np.delete(mat, i, axis=1)
        assert np.abs(others.T @ out).max() < 1e-10
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)


def test_project_duplicate_columns_degenerate():
    col = np.array([[1.0], [2.0], [0.5]])
    mat = np.hstack([col, col])
    with pytest.raises(DegeneracyError):
        project_orthocomplement(mat, 0)


def test_project_single_column_normalizes():
    out = project_orthocomplement(np.array([[3.0], [4.0]]), 0)
    np.testing.assert_allclose(np.abs(out), [0.6, 0.8], atol=1e-15)


# ---------------------------------------------------------------------------
# initialization


def test_cp_init_orthogonal_truth_exact():
    panel, truth = simulate_cp(8, 7, 2, 240, loading_angle=90.0, factor_ar=0.5,
                               snr=np.inf, seed=2)
    a0, b0 = cp_init(panel, 2)
    assert _match_columns(a0, truth.params["A"]) < 1e-6
    assert _match_columns(b0, truth.params["B"]) < 1e-6


def test_cp_init_r1_is_leading_singular_pair():
    panel, _ = simulate_cp(5, 4, 1, 150, loading_angle=90.0, snr=np.inf, seed=6)
    a0, b0 = cp_init(panel, 1)
    # the time-averaged fitted signal collapses to one rank-one matrix
    from matfactor.tucker import demean_panel, iterative_tipup
    model = iterative_tipup(panel, 1, 1, 1)
    common = np.einsum("ia,tab,jb->tij", model.R, model.factors, model.C)
    u, _, vt = np.linalg.svd(common.reshape(150, -1), full_matrices=False)
    lead = vt[0].reshape(5, 4)
    ua, sa, va = np.linalg.svd(lead)
    assert min(np.linalg.norm(a0[:, 0] - ua[:, 0]),
               np.linalg.norm(a0[:, 0] + ua[:, 0])) < 1e-8
    assert min(np.linalg.norm(b0[:, 0] - va[0]),
               np.linalg.norm(b0[:, 0] + va[0])) < 1e-8


def test_cp_init_beats_random_baseline():
    wins = 0
    rng = np.random.default_rng(0)
    for seed in range(50):
        panel, truth = simulate_cp(8, 8, 2, 200, loading_angle=60.0,
                                   factor_ar=0.5, snr=2.0, seed=4000 + seed)
        a0, _ = cp_init(panel, 2)
        base = rng.standard_normal((8, 2))
        base /= np.linalg.norm(base, axis=0)
        err_init = _match_columns(a0, truth.params["A"])
        err_base = _match_columns(base, truth.params["A"])
        wins += err_init < err_base
    assert wins >= 48


# ---------------------------------------------------------------------------
# alternating fit


def test_cp_fit_noise_free_recovery_and_monotone_rss():
    panel, truth = simulate_cp(10, 10, 2, 300, loading_angle=60.0,
                               factor_ar=0.5, snr=np.inf, seed=8)
    model = cp_fit(panel, 2)
    assert _match_columns(model.A, truth.params["A"]) < 1e-4
    assert _match_columns(model.B, truth.params["B"]) < 1e-4
    path = np.asarray(model.rss_path)
    assert path.ndim == 1 and len(path) >= 2
    # least-squares reconstruction residual never rises on noise-free data
    assert np.all(np.diff(path) <= 1e-10)


def test_cp_fit_factors_recover_up_to_scale():
    panel, truth = simulate_cp(9, 9, 2, 250, loading_angle=60.0,
                               factor_ar=0.5, snr=np.inf, seed=15)
    model = cp_fit(panel, 2)
    true_f = truth.params["factors"]  # T x r
    demeaned_true = true_f - true_f.mean(axis=0)
    for i in range(2):
        dots = np.abs(demeaned_true.T @ model.factors[:, i])
        j = int(np.argmax(dots / (np.linalg.norm(demeaned_true, axis=0)
                                  * np.linalg.norm(model.factors[:, i]))))
        corr = np.corrcoef(model.factors[:, i], demeaned_true[:, j])[0, 1]
        assert abs(corr) > 1 - 1e-6


def test_cp_fit_r1_matches_power_method():
    panel, _ = simulate_cp(6, 5, 1, 200, loading_angle=90.0, snr=np.inf, seed=31)
    model = cp_fit(panel, 1)
    # power-method oracle on the quadratic form sum_t (a' X_t b)^2
    from matfactor.tucker import demean_panel
    demeaned, _ = demean_panel(panel)
    x = demeaned.values
    a = np.ones(6) / np.sqrt(6)
    b = np.ones(5) / np.sqrt(5)
    for _ in range(500):
        f = np.einsum("m,tmn,n->t", a, x, b)
        a = np.einsum("t,tmn,n->m", f, x, b)
        a /= np.linalg.norm(a)
        f = np.einsum("m,tmn,n->t", a, x, b)
        b = np.einsum("t,tmn,m->n", f, x, a)
        b /= np.linalg.norm(b)
    assert min(np.linalg.norm(model.A[:, 0] - a),
               np.linalg.norm(model.A[:, 0] + a)) < 1e-8
    assert min(np.linalg.norm(model.B[:, 0] - b),
               np.linalg.norm(model.B[:, 0] + b)) < 1e-8


def test_cp_fit_orders_factors_by_variance():
    panel, _ = simulate_cp(8, 8, 3, 260, loading_angle=75.0, factor_ar=0.4,
                           snr=np.inf, seed=12)
    model = cp_fit(panel, 3)
    variances = model.factors.var(axis=0)
    assert np.all(np.diff(variances) <= 1e-12)


def test_cp_fit_determinism():
    panel, _ = simulate_cp(7, 6, 2, 150, loading_angle=60.0, snr=3.0, seed=44)
    m1 = cp_fit(panel, 2)
    m2 = cp_fit(panel, 2)
    np.testing.assert_array_equal(m1.A, m2.A)
    np.testing.assert_array_equal(m1.factors, m2.factors)
    np.testing.assert_array_equal(m1.rss_path, m2.rss_path)


def test_cp_fit_rank_validation():
    panel, _ = simulate_cp(4, 4, 2, 60, seed=1)
    with pytest.raises(DomainError):
        cp_fit(panel, 5)
    with pytest.raises(DomainError):
        cp_fit(panel, 0)


# ---------------------------------------------------------------------------
# extraction


def test_extract_cp_identity_case():
    rng = np.random.default_rng(9)
    values = rng.standard_normal((40, 3, 3))
    panel = _panel_from(values)
    from matfactor.cp import CPModel
    e1 = np.zeros((3, 1)); e1[0, 0] = 1.0
    model = CPModel(A=e1.copy(), B=e1.copy(), A_tilde=e1.copy(), B_tilde=e1.copy(),
                    factors=np.zeros((40, 1)), r=1, iterations=1, converged=True,
                    rss_path=[0.0])
    series = extract_cp_factors(panel, model)
    assert series.names == ["CP1"]
    from matfactor.tucker import demean_panel
    demeaned, _ = demean_panel(panel)
    np.testing.assert_allclose(series.values[:, 0], demeaned.values[:, 0, 0],
                               atol=1e-14)


def test_extract_cp_matches_training_factors():
    panel, _ = simulate_cp(8, 8, 2, 180, loading_angle=60.0, snr=2.0, seed=77)
    model = cp_fit(panel, 2)
    series = extract_cp_factors(panel, model)
    np.testing.assert_array_equal(series.values, model.factors)


def test_extract_cp_loop_oracle(rng):
    values = rng.standard_normal((20, 4, 3))
    panel = _panel_from(values)
    from matfactor.cp import CPModel
    a = rng.standard_normal((4, 2)); a /= np.linalg.norm(a, axis=0)
    b = rng.standard_normal((3, 2)); b /= np.linalg.norm(b, axis=0)
    model = CPModel(A=a, B=b, A_tilde=a, B_tilde=b,
                    factors=np.zeros((20, 2)), r=2, iterations=1, converged=True,
                    rss_path=[0.0])
    series = extract_cp_factors(panel, model)
    from matfactor.tucker import demean_panel
    demeaned, _ = demean_panel(panel)
    for t in range(20):
        for i in range(2):
            oracle = sum(a[m, i] * demeaned.values[t, m, n] * b[n, i]
                         for m in range(4) for n in range(3))
            assert series.values[t, i] == pytest.approx(oracle, abs=1e-12)
