"""Baselines: orthogonal matching pursuit, FISTA for the lasso, and the AG certificate."""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import ConditionFailed, ParameterError
from .regularizers import b0 as regularizer_b0, value
from .solver import objective

RIDGE = 1e-12


@dataclass
class OMPResult:
    theta: np.ndarray
    support: np.ndarray
    residual_norms: np.ndarray
    rank_deficient: bool = False


def omp(prob, max_support, residual_target=0.0):
    """Orthogonal matching pursuit.

    Adds the column maximizing |x_i^T w| / ||x_i|| and refits least squares
    on the active set, until ``max_support`` columns are active or
    ||w||_2 / sqrt(2n) <= ``residual_target``.  The active set is kept
    orthonormalized (twice-applied Gram-Schmidt) so each step is O(np).
    """
    X, y, n, p = prob.X, prob.y, prob.n, prob.p
    if not 1 <= max_support <= min(n, p):
        raise ParameterError(f"max_support must lie in [1, {min(n, p)}]")
    norms = np.sqrt(np.einsum("ij,ij->j", X, X))
    safe = np.where(norms > 0, norms, 1.0)
    q = np.empty((n, max_support))
    support = []
    active = np.zeros(p, dtype=bool)
    resid = y.copy()
    history = [float(np.linalg.norm(resid))]
    rank_deficient = False
    nq = 0
    while len(support) < max_support and history[-1] / math.sqrt(2 * n) > residual_target:
        score = np.abs(X.T @ resid) / safe
        score[active | (norms == 0)] = -1.0
        j = int(np.argmax(score))
        if score[j] <= 0:
            break
        support.append(j)
        active[j] = True
        v = X[:, j].copy()
        for _ in range(2):
            v -= q[:, :nq] @ (q[:, :nq].T @ v)
        vn = np.linalg.norm(v)
        if vn <= 1e-10 * norms[j]:
            rank_deficient = True
        else:
            q[:, nq] = v / vn
            resid -= q[:, nq] * (q[:, nq] @ resid)
            nq += 1
        history.append(float(np.linalg.norm(resid)))

    theta = np.zeros(p)
    if support:
        xs = X[:, support]
        if rank_deficient:
            g = xs.T @ xs
            coef = np.linalg.solve(g + RIDGE * np.eye(len(support)), xs.T @ y)
        else:
            coef = np.linalg.lstsq(xs, y, rcond=None)[0]
        theta[support] = coef
    return OMPResult(theta, np.array(support, dtype=int), np.array(history), rank_deficient)


def _power_lipschitz(X, iters=100, seed=0):
    n = X.shape[0]
    v = np.random.default_rng(seed).standard_normal(X.shape[1])
    lam = 0.0
    for _ in range(iters):
        w = X.T @ (X @ v) / n
        lam = float(np.linalg.norm(w))
        if lam == 0:
            return 0.0
        v = w / lam
    return lam


@dataclass
class FistaResult:
    theta: np.ndarray
    objective: float
    iterations: int
    converged: bool
    lipschitz: float


def fista_l1(prob, lam, tol=1e-10, max_iter=10_000, init=None):
    """FISTA for ||y - X theta||^2/(2n) + lam ||theta||_1 with objective-increase restart.

    The step is 1/L with L the largest eigenvalue of X^T X / n from 100 power
    iterations (inflated by 1% to absorb the power-method underestimate).
    Stops when the relative objective change is at most ``tol``.
    """
    if not lam > 0:
        raise ParameterError("lambda must be positive")
    X, y, n = prob.X, prob.y, prob.n
    L = 1.01 * _power_lipschitz(X)
    x = np.zeros(prob.p) if init is None else np.array(init, dtype=float)
    if L == 0:
        return FistaResult(np.zeros(prob.p), float(y @ y / (2 * n)), 0, True, 0.0)

    def f(xv, r):
        return 0.5 * (r @ r) / n + lam * np.abs(xv).sum()

    xx = X @ x
    F = f(x, xx - y)
    z, xz, t = x, xx, 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = X.T @ (xz - y) / n
        u = z - g / L
        xn = np.sign(u) * np.maximum(np.abs(u) - lam / L, 0.0)
        xxn = X @ xn
        Fn = f(xn, xxn - y)
        if Fn > F and t > 1.0:
            z, xz, t = x, xx, 1.0
            continue
        tn = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        beta = (t - 1) / tn
        z = xn + beta * (xn - x)
        xz = xxn + beta * (xxn - xx)
        done = abs(F - Fn) <= tol * max(abs(Fn), 1e-300)
        x, xx, F, t = xn, xxn, Fn, tn
        if done:
            converged = True
            break
    return FistaResult(x, float(F), it, converged, L)


@dataclass
class AGCertificate:
    """Approximate-global bound F(theta0) - F(theta*) <= mu.

    ``optimistic`` is True because a sampled kappa_- can only overestimate the
    true sparse eigenvalue, which can only shrink mu.
    """

    mu: float
    mu0: float
    s0: int
    s: int
    kappa_minus: float
    direct_gap: float | None
    holds: bool | None
    zeta: float | None
    optimistic: bool = True


def ag_certificate(prob, reg, theta0, kappa_minus, s=None):
    """mu = mu0^2 + (s + s0) r((sqrt(2) mu0 + eps/sqrt(n)) / sqrt((s + s0) kappa_-)).

    Parameters
    ----------
    kappa_minus : float
        Estimate of the smallest (s + s0)-sparse eigenvalue of X^T X / n.
    s : int, optional
        Sparsity of the truth; taken from ``prob.theta_star`` when omitted.
    """
    if not kappa_minus > 0:
        raise ConditionFailed(f"kappa_- estimate must be positive, got {kappa_minus}")
    theta0 = np.asarray(theta0, dtype=float)
    if s is None:
        if prob.s is None:
            raise ParameterError("s is required when the truth is unknown")
        s = prob.s
    n = prob.n
    s0 = int(np.count_nonzero(theta0))
    r = prob.X @ theta0 - prob.y
    mu0 = math.sqrt(r @ r / (2 * n))
    st = s + s0
    mu = mu0**2 + st * float(value(reg, (math.sqrt(2) * mu0 + prob.epsilon / math.sqrt(n)) / math.sqrt(st * kappa_minus)))
    gap = None
    holds = None
    if prob.theta_star is not None:
        gap = objective(prob, reg, theta0) - objective(prob, reg, prob.theta_star)
        holds = bool(gap <= mu + 1e-9)
    zeta = mu0 * math.sqrt(n) / prob.epsilon if prob.epsilon > 0 else None
    return AGCertificate(mu, mu0, s0, s, kappa_minus, gap, holds, zeta)


def c6(reg, zeta, s_total, kappa_minus, eta, xi):
    """C6 with mu = C6 eps^2 / n when lambda = b0 eps / (eta sqrt(n))."""
    b = regularizer_b0(reg, xi)
    unit = reg.with_lambda(1.0)
    arg = (1 + math.sqrt(2) * zeta) * eta / (b * math.sqrt(s_total * kappa_minus))
    return zeta**2 + s_total * b**2 / eta**2 * float(value(unit, arg))
