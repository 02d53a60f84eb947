"""Sparse eigenvalues, SE conditions, error-bound constants and sparseness bounds."""

from dataclasses import dataclass, field
from itertools import combinations
import math
import warnings

import numpy as np

from .exceptions import ConditionFailed, DomainError, ParameterError
from .regularizers import (
    Kind,
    a_gamma,
    b0,
    deriv,
    inverse,
    lambda_star_numeric,
    slope_at_zero,
    value,
    zero_gap,
)
from .rng import make_rng

SQRT2 = math.sqrt(2.0)
SE_FACTOR = 4 * (SQRT2 - 1)


# ---------------------------------------------------------------------------
# sparse eigenvalues


@dataclass
class SEEstimate:
    """Sampled sparse eigenvalues of X^T X / n.

    ``kappa_plus``/``kappa_minus`` are monotonized in t (cumulative max/min);
    the raw per-t extremes are kept in ``raw_plus``/``raw_minus``.
    """

    t_grid: list
    kappa_plus: list
    kappa_minus: list
    num_submatrices: int
    seed: int
    raw_plus: list = field(default_factory=list)
    raw_minus: list = field(default_factory=list)
    exhaustive: list = field(default_factory=list)
    xi: float | None = None

    def ratio(self):
        return [kp / km if km > 0 else math.inf for kp, km in zip(self.kappa_plus, self.kappa_minus)]

    def ric(self):
        return [ric_from_se(kp, km) for kp, km in zip(self.kappa_plus, self.kappa_minus)]

    def at(self, t):
        """(kappa_+, kappa_-) at t, using the smallest grid point >= t."""
        for tt, kp, km in zip(self.t_grid, self.kappa_plus, self.kappa_minus):
            if tt >= t:
                return kp, km
        raise DomainError(f"SE estimate does not cover t = {t} (max {max(self.t_grid)})")


def _gram_extremes(X, cols, n):
    xs = X[:, cols]
    ev = np.linalg.eigvalsh(xs.T @ xs / n)
    return float(ev[-1]), float(ev[0])


def estimate_se(X, t_grid, num_submatrices=100, seed=0, regularize=True):
    """Estimate kappa_+(t), kappa_-(t) from random t-column submatrices.

    When ``num_submatrices`` is at least C(p, t) every subset is enumerated
    instead of sampled.  kappa_+ is a lower bound and kappa_- an upper bound
    of the true sparse eigenvalues.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    t_grid = sorted({int(t) for t in t_grid})
    if not t_grid or t_grid[0] < 1:
        raise DomainError("t values must be positive")
    if t_grid[-1] > min(n, p):
        raise DomainError(f"t = {t_grid[-1]} exceeds min(n, p) = {min(n, p)}")
    raw_p, raw_m, exh = [], [], []
    for t in t_grid:
        full = num_submatrices >= math.comb(p, t)
        if full:
            subsets = combinations(range(p), t)
        else:
            rng = make_rng(seed, t, "se")
            subsets = (rng.choice(p, size=t, replace=False) for _ in range(num_submatrices))
        kp, km = -math.inf, math.inf
        for cols in subsets:
            hi, lo = _gram_extremes(X, list(cols), n)
            kp, km = max(kp, hi), min(km, lo)
        raw_p.append(kp)
        raw_m.append(max(km, 0.0))
        exh.append(full)
    if regularize:
        kplus = list(np.maximum.accumulate(raw_p))
        kminus = list(np.minimum.accumulate(raw_m))
    else:
        kplus, kminus = list(raw_p), list(raw_m)
    xi = float(np.max(np.einsum("ij,ij->j", X, X)) / n)
    return SEEstimate(
        t_grid,
        [float(v) for v in kplus],
        [float(v) for v in kminus],
        int(num_submatrices),
        int(seed),
        raw_p,
        raw_m,
        exh,
        xi,
    )


def exact_se(X, t):
    """Exact kappa_+(t), kappa_-(t) by enumerating all subsets (small p only).

    Uses singular values of the column submatrices, a route independent of
    the eigensolver in ``estimate_se``.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if math.comb(p, t) > 2_000_000:
        raise DomainError("exhaustive enumeration is too large")
    kp, km = 0.0, math.inf
    for cols in combinations(range(p), t):
        sv = np.linalg.svd(X[:, cols], compute_uv=False)
        kp = max(kp, sv[0] ** 2 / n)
        km = min(km, sv[-1] ** 2 / n if t <= n else 0.0)
    return kp, km


def kappa_minus_on(X, cols):
    """Smallest eigenvalue of X_S^T X_S / n for a given column set S."""
    cols = np.asarray(cols, dtype=int)
    if cols.size == 0:
        return math.inf
    return _gram_extremes(X, cols, X.shape[0])[1]


def ric_from_se(kp, km):
    """Restricted isometry constant (kp - km)/(kp + km); 1 for degenerate km <= 0."""
    if km <= 0:
        warnings.warn("kappa_- <= 0: restricted isometry constant is degenerate", RuntimeWarning)
        return 1.0
    if kp < km:
        raise ParameterError("kappa_+ must be at least kappa_-")
    return (kp - km) / (kp + km)


# ---------------------------------------------------------------------------
# H_r and G_r


def _ratio_term(reg, rho0, a, b):
    """r^{-1}(r(rho0) a) / r^{-1}(r(rho0) b), with its rho0 -> 0 limit."""
    if reg.kind is Kind.LQ:
        # homogeneous: independent of rho0
        return (a / b) ** (1.0 / reg.q)
    if rho0 == 0:
        if not math.isfinite(slope_at_zero(reg)):
            raise DomainError("rho0 = 0 limit needs a finite slope at zero")
        return a / b
    v = float(value(reg, rho0))
    return float(inverse(reg, v * a)) / float(inverse(reg, v * b))


def _check_invertible(reg):
    if reg.kind in (Kind.MCP, Kind.SCAD):
        from .exceptions import UnsupportedKindError

        raise UnsupportedKindError(
            f"{reg.kind.value} is not invertible; substitute the approximate MCP from make_amcp"
        )


def h_r(reg, rho0, alpha, s, t):
    """H_r(rho0, alpha, s, t) = sqrt(s/t) r^{-1}(r(rho0)/s) / r^{-1}(alpha r(rho0)/t)."""
    _check_invertible(reg)
    if t < alpha * s * (1 - 1e-12):
        raise DomainError("H_r requires t >= alpha s")
    return math.sqrt(s / t) * _ratio_term(reg, rho0, 1.0 / s, alpha / t)


def g_r(reg, rho0_tilde, alpha, s, t):
    """G_r = sqrt(s t)/(t-1) r^{-1}(r(rho)/s) / r^{-1}(alpha r(rho)/(t-1))."""
    _check_invertible(reg)
    if t < alpha * s + 1 - 1e-12:
        raise DomainError("G_r requires t >= alpha s + 1")
    return math.sqrt(s * t) / (t - 1) * _ratio_term(reg, rho0_tilde, 1.0 / s, alpha / (t - 1))


def h_r_lsp_closed(lam, gamma, rho0, alpha, s, t):
    """Closed form of H_r for LSP."""
    x = math.log1p(rho0 / (lam * gamma))
    return math.sqrt(s / t) * math.expm1(x / s) / math.expm1(alpha * x / t)


def h_r_amcp_closed(alpha, s, t, phi):
    """Closed form of H_r for AMCP, valid when gamma xi = amcp_gamma_xi(alpha, t, phi)."""
    return alpha**-0.5 * (t / (alpha * s)) ** (1 / (2 * phi))


def amcp_gamma_xi(alpha, t, phi):
    """Value of gamma xi under which the AMCP closed form of H_r holds."""
    return phi / (1 + phi) * (alpha / t) ** (1 / phi)


def lq_se_threshold(q, alpha, s, t):
    """Right-hand side of the Lq SE condition, 1 + 4(sqrt2-1)/sqrt(alpha) (t/(alpha s))^(1/q-1/2)."""
    return 1 + SE_FACTOR / math.sqrt(alpha) * (t / (alpha * s)) ** (1 / q - 0.5)


# ---------------------------------------------------------------------------
# lambda selection


def lambda_null_consistent(reg, xi, eta, epsilon, n):
    """lambda = b0 eps / (eta sqrt(n)), making the null-consistency condition tight."""
    return b0(reg, xi) * epsilon / (eta * math.sqrt(n))


def lambda_star_scaled(reg, xi, eta, epsilon, n):
    """lambda* = a_gamma b0 eps / (eta sqrt(n))."""
    return a_gamma(reg, xi) * b0(reg, xi) * epsilon / (eta * math.sqrt(n))


# ---------------------------------------------------------------------------
# condition report


@dataclass
class ConditionReport:
    alpha: float
    s: int
    t: int
    rho0: float
    lam: float
    lambda_star: float
    lambda_star_numeric: float
    kappa_plus: float
    kappa_minus: float
    varrho: float
    H_r: float
    G_r: float | None
    se_lhs: float
    se_rhs_global: float
    se_rhs_agas: float | None
    passes_global: bool
    passes_agas: bool
    eps_tilde: float
    C1: float | None = None
    C2: float | None = None
    C4: float | None = None
    C5: float | None = None
    c4: float | None = None
    c5: float | None = None
    global_error_bound: float | None = None
    agas_error_bound: float | None = None
    sparseness_bound: object = None
    reasons: list = field(default_factory=list)

    def require_global(self):
        if not self.passes_global:
            raise ConditionFailed("; ".join(self.reasons) or "SE condition fails")


def check_conditions(reg, se, s, t, eta, epsilon, n, rho0=None, nu=0.0, mu=0.0, truth_gap=None):
    """Evaluate the SE conditions and error-bound constants.

    lambda is set from ``eta`` and ``epsilon`` so that null consistency holds;
    the lambda of ``reg`` itself is ignored.  ``rho0`` defaults to the
    analytic zero gap, capped by ``truth_gap`` when given.  Failing
    conditions are reported, not raised.
    """
    if not 0 < eta < 1:
        raise ParameterError("eta must lie in (0, 1)")
    alpha = (1 + eta) / (1 - eta)
    xi = se.xi if se.xi is not None else 1.0
    lam = lambda_null_consistent(reg, xi, eta, epsilon, n)
    rl = reg.with_lambda(lam)
    ls = lambda_star_scaled(reg, xi, eta, epsilon, n)
    ls_num = lambda_star_numeric(rl, xi)
    if rho0 is None:
        rho0 = zero_gap(rl, xi)
        if truth_gap is not None:
            rho0 = min(rho0, truth_gap)
    kp, km = se.at(2 * t)
    ratio = kp / km if km > 0 else math.inf
    varrho = (1 + SQRT2) * (ratio - 1) / 4
    H = h_r(rl, rho0, alpha, s, t)
    G = g_r(rl, rho0, alpha, s, t) if t >= alpha * s + 1 else None
    eps_t = float(slope_at_zero(rl)) + eta * ls + nu
    rep = ConditionReport(
        alpha=alpha,
        s=s,
        t=t,
        rho0=rho0,
        lam=lam,
        lambda_star=ls,
        lambda_star_numeric=ls_num,
        kappa_plus=kp,
        kappa_minus=km,
        varrho=varrho,
        H_r=H,
        G_r=G,
        se_lhs=ratio,
        se_rhs_global=SE_FACTOR * H + 1,
        se_rhs_agas=None if G is None else SE_FACTOR * G + 1,
        passes_global=bool(ratio < SE_FACTOR * H + 1),
        passes_agas=bool(G is not None and ratio < SE_FACTOR * G + 1),
        eps_tilde=eps_t,
    )
    st = math.sqrt(t)
    if rep.passes_global:
        rep.C1 = (1 + SQRT2) * (1 + eta) * st / km * (H + 0.5) / (H - varrho)
        rep.C2 = (1 + SQRT2) / (2 * (H - varrho) * km)
        rep.global_error_bound = rep.C1 * ls
    else:
        rep.reasons.append(f"H_r = {H:.6g} <= varrho = {varrho:.6g}: global SE condition fails")
    if rep.passes_agas:
        rep.C4 = st * (1 + SQRT2) / km * (G + varrho / (t - 1) + 0.5 * t / (t - 1)) / (G - varrho)
        rep.C5 = (2 * varrho + 1) * G / (st * (G - varrho))
        rep.c4 = t / (t - 1) * (1 + SQRT2) / (2 * (G - varrho) * km)
        rep.c5 = varrho / (G - varrho)
        rep.agas_error_bound = rep.C4 * eps_t + rep.C5 * float(inverse(rl, mu / (1 - eta)))
    elif G is None:
        rep.reasons.append("t < alpha s + 1: AGAS condition not evaluated")
    else:
        rep.reasons.append(f"G_r = {G:.6g} <= varrho = {varrho:.6g}: AGAS SE condition fails")
    return rep


# ---------------------------------------------------------------------------
# sparseness bounds


@dataclass
class SparsenessBound:
    """Bound on |supp(theta) minus S|; ``bound`` is None when the premise fails."""

    holds: bool
    bound: float | None
    lhs: float
    rhs: float
    reason: str = ""


def sparseness_bound(reg, se, report, eta, m0, l0, mode="global", mu=0.0):
    """Sparseness of global (``mode="global"``) or AGAS (``mode="agas"``) solutions.

    ``reg`` supplies the shape of r; lambda is taken from ``report``.  The
    noise term ||X^T e / n||_inf is bounded by eta lambda*.
    """
    rl = reg.with_lambda(report.lam)
    ls = report.lambda_star
    t = report.t
    kp_m0, _ = se.at(m0)
    rhs = float(deriv(rl, l0, "left"))
    if mode == "global":
        if report.C2 is None:
            return SparsenessBound(False, None, math.nan, rhs, "global SE condition fails")
        rc = float(value(rl, report.C2 * (1 + eta) * ls))
        lhs = math.sqrt(2 * t * kp_m0 * rc / m0) + eta * ls
        ok = lhs < rhs
        bound = m0 + t * rc / float(value(rl, l0)) if ok else None
    elif mode == "agas":
        if report.c4 is None:
            return SparsenessBound(False, None, math.nan, rhs, "AGAS SE condition fails")
        b = (t - 1) * float(value(rl, report.c4 * report.eps_tilde + report.c5 * float(inverse(rl, mu / (1 - eta)))))
        lhs = math.sqrt(2 * kp_m0 / m0 * (mu / (1 - eta) + b)) + eta * ls
        ok = lhs <= rhs
        bound = m0 + b / float(value(rl, l0)) if ok else None
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    reason = "" if ok else f"premise violated: {lhs:.6g} vs r'(l0-) = {rhs:.6g}"
    return SparsenessBound(bool(ok), bound, lhs, rhs, reason)


def scale_free_sparseness_bound(reg, se, s, eta, C2, beta0, beta1):
    """Scale-free sparseness bound with t = (alpha+1)s, m0 = beta0 s, l0 = beta1 lambda.

    Returns a SparsenessBound whose ``bound`` is (beta0 + (alpha+1) r0(C3)/r0(beta1)) s
    with C3 = C2 (1+eta) a_gamma, provided
    2(alpha+1) kappa_+(beta0 s)/beta0 < (r0'(beta1-) - eta a_gamma)^2 / r0(C3).
    """
    alpha = (1 + eta) / (1 - eta)
    unit = reg.with_lambda(1.0)
    xi = se.xi if se.xi is not None else 1.0
    ag = a_gamma(unit, xi)
    c3 = C2 * (1 + eta) * ag
    kp, _ = se.at(max(1, math.ceil(beta0 * s)))
    lhs = 2 * (alpha + 1) * kp / beta0
    rhs = (float(deriv(unit, beta1, "left")) - eta * ag) ** 2 / float(value(unit, c3))
    ok = lhs < rhs
    bound = (beta0 + (alpha + 1) * float(value(unit, c3)) / float(value(unit, beta1))) * s if ok else None
    return SparsenessBound(bool(ok), bound, lhs, rhs, "" if ok else "premise violated")


def lsp_sparseness_closed(gamma, s, alpha, eta, C2):
    """LSP sparseness bound with beta0 = 1/s, beta1 = sqrt(gamma), xi = 1."""
    num = math.log1p(C2 * (1 + eta) * math.sqrt(2 * math.log1p(2 / gamma**2)) / gamma)
    return 1 + s * (alpha + 1) * num / math.log1p(1 / math.sqrt(gamma))


# ---------------------------------------------------------------------------
# restricted eigenvalue


def re_upper_bound(X, reg, alpha, S, num_samples=10_000, seed=0, betas=None):
    """Monte-Carlo upper bound on the l2 restricted eigenvalue over the cone
    R(D_{S^c}) <= alpha R(D_S).

    Half the directions are dense Gaussian, half are supported on S plus a
    few random off-support columns.  Since R is not homogeneous, a direction
    counts as feasible if some scaling beta in ``betas`` satisfies the cone
    constraint.  Returns ``inf`` (with a warning) when nothing is feasible.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    S = np.asarray(sorted(set(int(i) for i in S)), dtype=int)
    mask = np.zeros(p, dtype=bool)
    mask[S] = True
    off = np.flatnonzero(~mask)
    if betas is None:
        betas = np.logspace(-6, 2, 17)
    rng = make_rng(seed, 0, "re")
    best = math.inf
    batch = 500
    done = 0
    while done < num_samples:
        m = min(batch, num_samples - done)
        D = np.zeros((m, p))
        half = m // 2
        D[:half] = rng.standard_normal((half, p))
        for k in range(half, m):
            D[k, S] = rng.standard_normal(S.size)
            extra = rng.integers(0, max(1, 2 * S.size) + 1)
            if extra and off.size:
                cols = rng.choice(off, size=min(extra, off.size), replace=False)
                D[k, cols] = rng.standard_normal(cols.size) * rng.uniform(0, 1)
        D /= np.linalg.norm(D, axis=1, keepdims=True)
        feas = np.zeros(m, dtype=bool)
        for b in betas:
            vals = value(reg, np.abs(b * D))
            feas |= vals[:, ~mask].sum(axis=1) <= alpha * vals[:, mask].sum(axis=1)
        if np.any(feas):
            q = np.einsum("ij,ij->i", D[feas] @ X.T, D[feas] @ X.T) / n
            best = min(best, float(q.min()))
        done += m
    if not math.isfinite(best):
        warnings.warn("no feasible direction sampled; returning inf", RuntimeWarning)
    return best
