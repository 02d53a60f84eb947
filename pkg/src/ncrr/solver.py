"""Proximal coordinate descent for ||y - X theta||^2/(2n) + sum_i r(|theta_i|)."""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _kernels as K
from .exceptions import InsufficientData, NumericalError, ParameterError, UnsupportedKindError
from .regularizers import Kind, deriv, slope_at_zero, value, zero_gap as analytic_zero_gap

RECOMPUTE_EVERY = 100


@dataclass
class Problem:
    """Regression data y = X theta* + e with ||e||_2 <= epsilon.

    ``theta_star`` and ``noise`` are optional; when present they enable the
    approximate-global gap and the null-consistency check.
    """

    X: np.ndarray
    y: np.ndarray
    epsilon: float = 0.0
    theta_star: np.ndarray | None = None
    noise: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.X.ndim != 2:
            raise ParameterError("X must be a matrix")
        n, p = self.X.shape
        if self.y.shape[0] != n:
            raise ParameterError(f"y has length {self.y.shape[0]}, expected {n}")
        if not self.epsilon >= 0:
            raise ParameterError("epsilon must be nonnegative")
        if self.theta_star is not None:
            self.theta_star = np.asarray(self.theta_star, dtype=float).ravel()
            if self.theta_star.shape[0] != p:
                raise ParameterError(f"theta_star has length {self.theta_star.shape[0]}, expected {p}")
        if self.noise is not None:
            self.noise = np.asarray(self.noise, dtype=float).ravel()
            if self.noise.shape[0] != n:
                raise ParameterError(f"noise has length {self.noise.shape[0]}, expected {n}")
        self._xi = None

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def xi(self):
        """max_i ||x_i||^2 / n, computed once."""
        if self._xi is None:
            self._xi = float(np.max(np.einsum("ij,ij->j", self.X, self.X)) / self.n)
        return self._xi

    @property
    def support(self):
        if self.theta_star is None:
            return None
        return np.flatnonzero(self.theta_star)

    @property
    def s(self):
        return None if self.theta_star is None else int(np.count_nonzero(self.theta_star))


@dataclass(frozen=True)
class SolverConfig:
    """CD settings.

    Parameters
    ----------
    psi : float
        Proximal weight added to every scalar subproblem.
    tau : float, optional
        Stopping tolerance on ||theta^k - theta^{k-1}||_2.  Derived from
        ``nu_target`` as nu / (sqrt(p) (psi + p xi)) when omitted.
    max_sweeps : int
    nu_target : float, optional
    seed : int
        Unused by CD itself (the order is fixed); carried for provenance.
    store_iterates : bool
        Keep every theta^k in the trace.
    certify : bool
        Compute the exact stationarity certificate every sweep.
    """

    psi: float = 0.1
    tau: float | None = None
    max_sweeps: int = 10_000
    nu_target: float | None = None
    seed: int = 0
    store_iterates: bool = False
    certify: bool = True

    def __post_init__(self):
        if not self.psi >= 0:
            raise ParameterError("psi must be nonnegative")
        if self.tau is not None and not self.tau > 0:
            raise ParameterError("tau must be positive")
        if self.nu_target is not None and not self.nu_target >= 0:
            raise ParameterError("nu_target must be nonnegative")
        if self.max_sweeps < 1:
            raise ParameterError("max_sweeps must be at least 1")

    def resolve_tau(self, p, xi):
        if self.tau is not None:
            return self.tau
        if self.nu_target is not None:
            return self.nu_target / (math.sqrt(p) * (self.psi + p * xi))
        return 1e-10


@dataclass
class SolveTrace:
    """Per-sweep record of a CD run; list entry k-1 belongs to sweep k."""

    theta: np.ndarray
    initial_objective: float
    objective: list = field(default_factory=list)
    mu: list | None = None
    nu_bound: list = field(default_factory=list)
    nu_certified: list | None = None
    zero_gap: list = field(default_factory=list)
    rho0_tilde: list | None = None
    iterates: list | None = None
    sweeps: int = 0
    converged: bool = False
    tau: float = 0.0
    xi: float = 0.0
    psi: float = 0.0
    residual_drift: float = 0.0

    def sweep_bound(self, nu):
        """Upper bound 1 + 2p(psi + p xi)^2 F(theta^0) / (psi nu^2) on the sweep count."""
        p = self.theta.shape[0]
        if self.psi == 0 or nu == 0:
            return math.inf
        return 1 + 2 * p * (self.psi + p * self.xi) ** 2 * self.initial_objective / (self.psi * nu**2)


def objective(prob, reg, theta):
    """F(theta) = ||y - X theta||^2/(2n) + sum_i r(|theta_i|), computed from scratch."""
    theta = np.asarray(theta, dtype=float)
    resid = prob.y - prob.X @ theta
    return float(resid @ resid / (2 * prob.n) + np.sum(value(reg, np.abs(theta))))


def zero_gap(theta):
    """Smallest nonzero magnitude of ``theta``; ``inf`` for the zero vector."""
    a = np.abs(np.asarray(theta, dtype=float))
    nz = a[a != 0]
    return float(nz.min()) if nz.size else math.inf


def _certificate(reg, theta, grad):
    a = np.abs(theta)
    nz = a != 0
    m = np.empty_like(theta)
    r0 = slope_at_zero(reg)
    m[~nz] = r0 - np.abs(grad[~nz])
    if np.any(nz):
        s = np.sign(theta[nz])
        up = grad[nz] * s + deriv(reg, a[nz], "right")
        down = -grad[nz] * s - deriv(reg, a[nz], "left")
        m[nz] = np.minimum(up, down)
    return float(np.linalg.norm(np.minimum(m, 0.0)))


def certify_stationarity(prob, reg, theta):
    """Exact nu* = max(0, -min_{||d||=1} F'(theta; d)).

    theta is a nu-approximate stationary point iff the result is <= nu.
    """
    if not np.isfinite(slope_at_zero(reg)):
        raise UnsupportedKindError(f"{reg.kind.value} has infinite slope at zero; the certificate is undefined")
    theta = np.asarray(theta, dtype=float)
    grad = prob.X.T @ (prob.X @ theta - prob.y) / prob.n
    return _certificate(reg, theta, grad)


def solve_cd(prob, reg, cfg, init=None):
    """Proximal coordinate descent in fixed ascending order.

    Stops when ||theta^k - theta^{k-1}||_2 <= tau or after ``max_sweeps``.

    Raises
    ------
    NumericalError
        If a sweep produces non-finite values; ``err.sweep`` holds its index.
    """
    X, y, n, p = prob.X, prob.y, prob.n, prob.p
    theta = np.zeros(p) if init is None else np.array(init, dtype=float).ravel()
    if theta.shape[0] != p:
        raise ParameterError(f"init has length {theta.shape[0]}, expected {p}")
    xt = np.ascontiguousarray(X.T)
    colsq = np.einsum("ij,ij->j", X, X) / n
    xi = prob.xi
    tau = cfg.resolve_tau(p, xi)
    scale = math.sqrt(p) * (cfg.psi + p * xi)
    params = reg.params
    certify = cfg.certify and reg.kind is not Kind.LQ

    resid = y - X @ theta
    trace = SolveTrace(theta=theta, initial_objective=objective(prob, reg, theta), tau=tau, xi=xi, psi=cfg.psi)
    f_star = None
    truth_gap = None
    if prob.theta_star is not None:
        f_star = objective(prob, reg, prob.theta_star)
        truth_gap = zero_gap(prob.theta_star)
        trace.mu, trace.rho0_tilde = [], []
    if certify:
        trace.nu_certified = []
    if cfg.store_iterates:
        trace.iterates = [theta.copy()]

    for k in range(1, cfg.max_sweeps + 1):
        d2 = K.cd_sweep(xt, resid, theta, colsq, cfg.psi, *params)
        if k % RECOMPUTE_EVERY == 0:
            fresh = y - X @ theta
            trace.residual_drift = max(trace.residual_drift, float(np.max(np.abs(fresh - resid))))
            resid = fresh
        if not (math.isfinite(d2) and np.all(np.isfinite(theta)) and np.all(np.isfinite(resid))):
            raise NumericalError(f"non-finite values in sweep {k}", sweep=k)

        f = float(resid @ resid / (2 * n) + K.penalty_sum(*params, theta))
        step = math.sqrt(d2)
        ug = zero_gap(theta)
        trace.objective.append(f)
        trace.nu_bound.append(scale * step)
        trace.zero_gap.append(ug)
        if f_star is not None:
            trace.mu.append(f - f_star)
            trace.rho0_tilde.append(min(ug, truth_gap))
        if certify:
            trace.nu_certified.append(_certificate(reg, theta, -(xt @ resid) / n))
        if cfg.store_iterates:
            trace.iterates.append(theta.copy())
        trace.sweeps = k
        if step <= tau:
            trace.converged = True
            break

    fresh = y - X @ theta
    trace.residual_drift = max(trace.residual_drift, float(np.max(np.abs(fresh - resid)))) if n else 0.0
    trace.theta = theta
    return trace


@dataclass(frozen=True)
class NullConsistencyResult:
    """Outcome of the null-consistency check on data e/eta.

    ``consistent`` is the empirical verdict: no CD run found an objective
    more than 1e-8 below F(0).  ``analytic_holds`` is the sufficient
    condition r(u0) >= ||e||^2 / (2 n eta^2).
    """

    consistent: bool
    gap: float
    best_objective: float
    null_objective: float
    analytic_holds: bool
    analytic_lhs: float
    analytic_rhs: float


def check_null_consistency(prob, reg, eta, cfg, omp_support=None):
    """Test whether theta = 0 is optimal when the response is pure inflated noise.

    Solves the problem with response e/eta by CD from zero and from an OMP
    warm start (``omp_support`` columns, default min(n, p) // 4).
    """
    from .baselines import omp

    if not 0 < eta < 1:
        raise ParameterError("eta must lie in (0, 1)")
    if prob.noise is not None:
        e = prob.noise
    elif prob.theta_star is not None:
        e = prob.y - prob.X @ prob.theta_star
    else:
        raise InsufficientData("null consistency needs the noise vector or the ground truth")
    n = prob.n
    null_prob = Problem(prob.X, e / eta)
    f0 = float(null_prob.y @ null_prob.y / (2 * n))

    cfg = SolverConfig(psi=cfg.psi, tau=cfg.tau, max_sweeps=cfg.max_sweeps, nu_target=cfg.nu_target, certify=False)
    best = solve_cd(null_prob, reg, cfg).objective[-1]
    if f0 > 0:
        k = omp_support if omp_support is not None else max(1, min(n, prob.p) // 4)
        warm = omp(null_prob, k, 0.0).theta
        best = min(best, solve_cd(null_prob, reg, cfg, init=warm).objective[-1])
    best = min(best, f0)

    u0 = analytic_zero_gap(reg, prob.xi)
    if u0 <= 0:
        u0 = reg.lam
    lhs = float(value(reg, u0))
    rhs = float(e @ e / (2 * n * eta**2))
    return NullConsistencyResult(
        consistent=bool(best >= f0 - 1e-8),
        gap=f0 - best,
        best_objective=best,
        null_objective=f0,
        analytic_holds=bool(lhs >= rhs * (1 - 1e-12)),
        analytic_lhs=lhs,
        analytic_rhs=rhs,
    )
