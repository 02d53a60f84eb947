import math

import numpy as np
import pytest

from ncrr.analysis import (
    SEEstimate,
    amcp_gamma_xi,
    check_conditions,
    scale_free_sparseness_bound,
    estimate_se,
    exact_se,
    g_r,
    h_r,
    h_r_amcp_closed,
    h_r_lsp_closed,
    kappa_minus_on,
    lambda_null_consistent,
    lambda_star_scaled,
    lq_se_threshold,
    re_upper_bound,
    ric_from_se,
    sparseness_bound,
    lsp_sparseness_closed,
)
from ncrr.exceptions import ConditionFailed, DomainError, ParameterError, UnsupportedKindError
from ncrr.regularizers import Regularizer, a_gamma, b0, make_amcp, value

SE_FACTOR = 4 * (math.sqrt(2) - 1)


def _orthonormal(n=64, p=16, seed=0):
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, p)))
    return math.sqrt(n) * q


def _flat_se(tmax, xi=1.0, kp=1.0, km=1.0):
    ts = list(range(1, tmax + 1))
    return SEEstimate(ts, [kp] * tmax, [km] * tmax, 0, 0, xi=xi)


def test_orthonormal_design_has_unit_sparse_eigenvalues():
    se = estimate_se(_orthonormal(), [1, 2, 4, 8], num_submatrices=50)
    np.testing.assert_allclose(se.kappa_plus, 1.0, atol=1e-12)
    np.testing.assert_allclose(se.kappa_minus, 1.0, atol=1e-12)
    assert se.ratio() == pytest.approx([1.0] * 4)


def test_t_one_gives_column_norms():
    X = np.random.default_rng(1).standard_normal((30, 8))
    cn = np.sum(X**2, axis=0) / 30
    se = estimate_se(X, [1], num_submatrices=100)
    assert se.exhaustive == [True]
    assert se.kappa_plus[0] == pytest.approx(cn.max()) and se.xi == pytest.approx(cn.max())
    assert se.kappa_minus[0] == pytest.approx(cn.min())


def test_exhaustive_matches_svd_route():
    X = np.random.default_rng(2).standard_normal((12, 9))
    se = estimate_se(X, [2, 3], num_submatrices=10**6)
    for t, kp, km in zip(se.t_grid, se.raw_plus, se.raw_minus):
        ekp, ekm = exact_se(X, t)
        assert kp == pytest.approx(ekp, rel=1e-10) and km == pytest.approx(ekm, rel=1e-10)


def test_sampled_estimates_bracket_truth_and_are_monotone():
    X = np.random.default_rng(3).standard_normal((15, 10))
    se = estimate_se(X, [1, 2, 3, 4], num_submatrices=20, seed=5)
    for t, kp, km in zip(se.t_grid, se.kappa_plus, se.kappa_minus):
        ekp, ekm = exact_se(X, t)
        assert kp <= ekp + 1e-12 and km >= ekm - 1e-12
    assert np.all(np.diff(se.kappa_plus) >= 0) and np.all(np.diff(se.kappa_minus) <= 0)
    again = estimate_se(X, [1, 2, 3, 4], num_submatrices=20, seed=5)
    assert again.kappa_plus == se.kappa_plus


def test_se_errors_and_lookup():
    X = np.ones((4, 6))
    with pytest.raises(DomainError):
        estimate_se(X, [5])
    with pytest.raises(DomainError):
        estimate_se(X, [0])
    se = _flat_se(4)
    assert se.at(3) == (1.0, 1.0)
    with pytest.raises(DomainError):
        se.at(9)


def test_kappa_minus_on_columns():
    X = _orthonormal()
    assert kappa_minus_on(X, [0, 3, 5]) == pytest.approx(1.0)
    assert kappa_minus_on(X, []) == math.inf


def test_ric_examples():
    assert ric_from_se(2.0, 1.0) == pytest.approx(1 / 3)
    assert ric_from_se(3 + 2 * math.sqrt(2), 1.0) == pytest.approx(1 / math.sqrt(2))
    with pytest.warns(RuntimeWarning):
        assert ric_from_se(1.0, 0.0) == 1.0


@pytest.mark.parametrize("s,t,alpha", [(4, 10, 1.5), (10, 12, 1.02), (3, 3, 1.0)])
def test_l1_ratios(s, t, alpha):
    reg = Regularizer("L1", 0.7)
    assert h_r(reg, 0.3, alpha, s, t) == pytest.approx(math.sqrt(t / s) / alpha)
    assert h_r(reg, 0.0, alpha, s, t) == pytest.approx(math.sqrt(t / s) / alpha)
    if t >= alpha * s + 1:
        assert g_r(reg, 0.3, alpha, s, t) == pytest.approx(math.sqrt(t / s) / alpha)


@pytest.mark.parametrize("gamma", [1e-1, 1e-3, 1e-6])
@pytest.mark.parametrize("rho0", [0.05, 1.0, 4.0])
def test_lsp_ratio_matches_closed_form(gamma, rho0):
    reg = Regularizer("LSP", 0.5, gamma)
    assert h_r(reg, rho0, 1.1, 5, 9) == pytest.approx(h_r_lsp_closed(0.5, gamma, rho0, 1.1, 5, 9), rel=1e-9)


def test_lsp_ratio_frozen_value():
    # lambda = 1, gamma = 0.01, rho0 = 1 - gamma, alpha = 1, s = 2, t = 4; 40-digit evaluation
    assert h_r(Regularizer("LSP", 1.0, 0.01), 0.99, 1.0, 2, 4) == pytest.approx(2.943174758686337, rel=1e-12)


@pytest.mark.parametrize("phi", [0.3, 0.5, 0.8])
def test_amcp_ratio_matches_closed_form(phi):
    alpha, s, t = 1.2, 4, 12
    gx = amcp_gamma_xi(alpha, t, phi)
    reg = make_amcp(1.0, gx, phi)
    # sharp-concavity radius at xi = 1, where the closed form applies
    rho0 = gx * (1 - phi) * (phi / (gx * (1 + phi))) ** ((1 + phi) / 2)
    assert h_r(reg, rho0, alpha, s, t) == pytest.approx(h_r_amcp_closed(alpha, s, t, phi), rel=1e-9)


def test_lq_ratio_and_threshold():
    q, alpha, s, t = 0.5, 1.3, 4, 11
    H = h_r(Regularizer("Lq", 1.0, q=q), 0.7, alpha, s, t)
    assert H == pytest.approx(math.sqrt(s / t) * (t / (alpha * s)) ** (1 / q))
    assert lq_se_threshold(q, alpha, s, t) == pytest.approx(1 + SE_FACTOR * H)


def test_ratio_rejects_non_invertible_and_short_t():
    with pytest.raises(UnsupportedKindError):
        h_r(Regularizer("MCP", 1.0, 1.0), 0.1, 1.2, 3, 6)
    with pytest.raises(UnsupportedKindError):
        g_r(Regularizer("SCAD", 1.0, 3.7), 0.1, 1.2, 3, 6)
    with pytest.raises(DomainError):
        h_r(Regularizer("L1", 1.0), 0.1, 2.0, 5, 6)
    with pytest.raises(DomainError):
        g_r(Regularizer("L1", 1.0), 0.1, 2.0, 5, 10)


def test_lsp_ratio_increases_as_gamma_shrinks():
    vals = [h_r(Regularizer("LSP", 1.0, g), 1.0, 1.02, 10, 12) for g in (1e-1, 1e-2, 1e-4, 1e-6, 1e-8)]
    assert np.all(np.diff(vals) > 0)


def test_lambda_choices():
    reg = Regularizer("LSP", 3.0, 0.1)
    lam = lambda_null_consistent(reg, 1.0, 0.5, 0.2, 100)
    assert lam == pytest.approx(b0(reg, 1.0) * 0.2 / (0.5 * 10))
    assert lambda_star_scaled(reg, 1.0, 0.5, 0.2, 100) == pytest.approx(a_gamma(reg, 1.0) * lam)


def test_check_conditions_on_ideal_design():
    reg = Regularizer("LSP", 1.0, 0.01)
    se = _flat_se(40)
    eta, s, t = 0.1, 4, 12
    rep = check_conditions(reg, se, s, t, eta, 0.1, 100)
    alpha = 1.1 / 0.9
    assert rep.alpha == pytest.approx(alpha)
    assert rep.varrho == 0 and rep.se_lhs == 1.0
    assert rep.passes_global and rep.passes_agas
    H = rep.H_r
    assert rep.C1 == pytest.approx((1 + math.sqrt(2)) * 1.1 * math.sqrt(t) * (H + 0.5) / H)
    assert rep.C2 == pytest.approx((1 + math.sqrt(2)) / (2 * H))
    assert rep.global_error_bound == pytest.approx(rep.C1 * rep.lambda_star)
    assert rep.lambda_star == pytest.approx(rep.lambda_star_numeric, rel=1e-6)
    rep.require_global()


def test_check_conditions_reports_failure():
    reg = Regularizer("LSP", 1.0, 0.1)
    se = _flat_se(40, kp=50.0, km=0.1)
    rep = check_conditions(reg, se, 10, 12, 0.01, 0.1, 100)
    assert not rep.passes_global and rep.C1 is None and rep.reasons
    with pytest.raises(ConditionFailed):
        rep.require_global()


def test_sparseness_bounds_on_ideal_design():
    reg = Regularizer("LSP", 1.0, 0.01)
    se = _flat_se(60)
    rep = check_conditions(reg, se, 4, 12, 0.1, 0.1, 100)
    l0 = rep.lam * 0.1
    g = sparseness_bound(reg, se, rep, 0.1, 8, l0)
    assert g.holds == (g.lhs < g.rhs)
    if g.holds:
        assert g.bound >= 8
    a = sparseness_bound(reg, se, rep, 0.1, 8, l0, mode="agas", mu=0.0)
    assert a.holds == (a.lhs <= a.rhs)
    with pytest.raises(ParameterError):
        sparseness_bound(reg, se, rep, 0.1, 8, l0, mode="nope")


def test_sparseness_bound_premise_failure():
    reg = Regularizer("LSP", 1.0, 0.1)
    se = _flat_se(40, kp=50.0, km=0.1)
    rep = check_conditions(reg, se, 10, 12, 0.01, 0.1, 100)
    res = sparseness_bound(reg, se, rep, 0.01, 10, rep.lam)
    assert not res.holds and res.bound is None


def test_corollary_bound_scale_free():
    reg = Regularizer("LSP", 1.0, 1e-4)
    se = _flat_se(60)
    a = scale_free_sparseness_bound(reg, se, 10, 0.01, 1.0, 0.1, 0.01)
    b = scale_free_sparseness_bound(reg.with_lambda(7.0), se, 10, 0.01, 1.0, 0.1, 0.01)
    assert a.lhs == pytest.approx(b.lhs) and a.rhs == pytest.approx(b.rhs)


def test_lsp_sparseness_frozen_value():
    # gamma = 1e-4, s = 10, eta = 0.01, C2 = 1; 40-digit evaluation
    eta = 0.01
    alpha = (1 + eta) / (1 - eta)
    v = lsp_sparseness_closed(1e-4, 10, alpha, eta, 1.0)
    assert v == pytest.approx(49.33513021257885, rel=1e-12)
    assert v / 10 < 5


def test_re_bound_orthonormal_design():
    X = _orthonormal(p=12)
    reg = Regularizer("LSP", 1.0, 0.1)
    v = re_upper_bound(X, reg, 1.5, [0, 1, 2], num_samples=400)
    assert v == pytest.approx(1.0, abs=1e-12)


def test_re_bound_upper_bounds_true_minimum():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((20, 10))
    reg = Regularizer("L1", 1.0)
    lo = np.linalg.eigvalsh(X.T @ X / 20)[0]
    v = re_upper_bound(X, reg, 2.0, [0, 1], num_samples=2000, seed=1)
    assert v >= lo - 1e-12
    # value() at unit scale is used as the cone test, so the result is reproducible
    assert v == re_upper_bound(X, reg, 2.0, [0, 1], num_samples=2000, seed=1)
    assert float(value(reg, 1.0)) == 1.0
