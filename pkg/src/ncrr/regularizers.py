"""Basis functions r(u) = lam^2 r0(u / lam; gamma) of separable non-convex penalties.

Every function here is plain numpy so it can double as an independent
reference for the compiled kernels in ``_kernels``.
"""

from dataclasses import dataclass, replace
from enum import Enum
import math
import warnings

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels as K
from .exceptions import DomainError, ParameterError, UnsupportedKindError


class Kind(str, Enum):
    L1 = "L1"
    LQ = "Lq"
    SCAD = "SCAD"
    LSP = "LSP"
    MCP = "MCP"
    GP = "GP"
    AMCP = "AMCP"


_CODES = {
    Kind.L1: K.L1,
    Kind.LQ: K.LQ,
    Kind.SCAD: K.SCAD,
    Kind.LSP: K.LSP,
    Kind.MCP: K.MCP,
    Kind.GP: K.GP,
    Kind.AMCP: K.AMCP,
}

INVERTIBLE = frozenset({Kind.L1, Kind.LQ, Kind.LSP, Kind.GP, Kind.AMCP})


def parse_kind(kind):
    """Accept a Kind or a case-insensitive name such as ``"mcp"``."""
    if isinstance(kind, Kind):
        return kind
    for k in Kind:
        if str(kind).lower() == k.value.lower():
            return k
    raise ParameterError(f"unknown regularizer kind {kind!r}")


@dataclass(frozen=True)
class Regularizer:
    """Immutable description of a basis function.

    Parameters
    ----------
    kind : Kind or str
    lam : float
        Scale lambda > 0.
    gamma : float
        Concavity parameter (ignored by L1 and Lq).
    q : float
        Exponent in (0, 1), Lq only.
    phi : float
        Junction parameter in (0, 1), AMCP only.
    """

    kind: Kind
    lam: float
    gamma: float = 1.0
    q: float = 0.5
    phi: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", parse_kind(self.kind))
        for name in ("lam", "gamma", "q", "phi"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ParameterError(f"lambda must be positive, got {self.lam}")
        if self.kind not in (Kind.L1, Kind.LQ) and not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if self.kind is Kind.LQ and not 0 < self.q < 1:
            raise ParameterError(f"q must lie in (0, 1), got {self.q}")
        if self.kind is Kind.AMCP and not 0 < self.phi < 1:
            raise ParameterError(f"phi must lie in (0, 1), got {self.phi}")

    @property
    def code(self):
        return _CODES[self.kind]

    @property
    def exponent(self):
        """Power of the non-linear tail: q for Lq, 2 phi/(1+phi) for AMCP."""
        if self.kind is Kind.AMCP:
            return 2.0 * self.phi / (1.0 + self.phi)
        return self.q

    @property
    def params(self):
        """Flat tuple passed to the compiled kernels."""
        return (self.code, self.lam, self.gamma, self.exponent, self.phi)

    @property
    def junction(self):
        """AMCP junction point lam gamma (1 - phi)."""
        return self.lam * self.gamma * (1.0 - self.phi)

    def with_lambda(self, lam):
        return replace(self, lam=lam)

    def value(self, u):
        return value(self, u)

    def deriv(self, u, side="right"):
        return deriv(self, u, side)

    def inverse(self, v):
        return inverse(self, v)

    def constants(self, xi):
        return constants(self, xi)


def make_amcp(lam, gamma, phi):
    """Invertible approximation of MCP: MCP up to lam gamma (1-phi), a power law beyond."""
    return Regularizer(Kind.AMCP, lam, gamma, phi=phi)


def _amcp_tail(reg):
    j = reg.junction
    vj = 0.5 * reg.lam**2 * reg.gamma * (1.0 - reg.phi**2)
    return j, vj, reg.exponent


def _out(x, scalar):
    return float(x) if scalar else x


def value(reg, u):
    """r(u) for u >= 0, vectorized over ``u``."""
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(np.isnan(u)):
        raise DomainError("r(u) requires u >= 0")
    lam, g, k = reg.lam, reg.gamma, reg.kind
    with np.errstate(over="ignore", invalid="ignore"):
        if k is Kind.L1:
            out = lam * u
        elif k is Kind.LQ:
            out = lam**2 * (u / lam) ** reg.q
        elif k is Kind.SCAD:
            mid = lam * (u - (u - lam) ** 2 / (2 * lam * g))
            out = np.where(u <= lam, lam * u, np.where(u <= lam * (1 + g), mid, lam**2 * (1 + 0.5 * g)))
        elif k is Kind.LSP:
            out = lam**2 * np.log1p(u / (lam * g))
        elif k is Kind.MCP:
            out = np.where(u <= lam * g, lam * u - u**2 / (2 * g), 0.5 * lam**2 * g)
        elif k is Kind.GP:
            out = lam**2 * u / (lam * g + u)
        else:
            j, vj, q = _amcp_tail(reg)
            out = np.where(u <= j, lam * u - u**2 / (2 * g), vj * (np.maximum(u, j) / j) ** q)
    return _out(out, scalar)


def deriv(reg, u, side="right"):
    """One-sided derivative of r at u.

    Every supported basis function is C^1 on (0, inf), so the two sides only
    differ at u = 0 where the left derivative is undefined.  Lq returns
    ``inf`` at 0.
    """
    if side not in ("left", "right"):
        raise ParameterError(f"side must be 'left' or 'right', got {side!r}")
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(np.isnan(u)):
        raise DomainError("derivative requires u >= 0")
    if side == "left" and np.any(u == 0):
        raise DomainError("left derivative is undefined at u = 0")
    lam, g, k = reg.lam, reg.gamma, reg.kind
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if k is Kind.L1:
            out = np.full_like(u, lam)
        elif k is Kind.LQ:
            q = reg.q
            out = np.where(u == 0, np.inf, q * lam ** (2 - q) * u ** (q - 1))
        elif k is Kind.SCAD:
            mid = lam * (1 - (u - lam) / (lam * g))
            out = np.where(u <= lam, lam, np.where(u < lam * (1 + g), mid, 0.0))
        elif k is Kind.LSP:
            out = lam**2 / (lam * g + u)
        elif k is Kind.MCP:
            out = np.maximum(lam - u / g, 0.0)
        elif k is Kind.GP:
            out = lam**3 * g / (lam * g + u) ** 2
        else:
            j, vj, q = _amcp_tail(reg)
            tail = q * vj / j**q * np.maximum(u, j) ** (q - 1)
            out = np.where(u <= j, lam - u / g, tail)
    return _out(out, scalar)


def slope_at_zero(reg):
    """r'(0+), ``inf`` for Lq."""
    return deriv(reg, 0.0, "right")


def inverse(reg, v):
    """r^{-1}(v) for the strictly increasing kinds."""
    if reg.kind not in INVERTIBLE:
        raise UnsupportedKindError(
            f"{reg.kind.value} is not invertible; use make_amcp for an invertible MCP surrogate"
        )
    scalar = np.ndim(v) == 0
    v = np.asarray(v, dtype=float)
    if np.any(v < 0) or np.any(np.isnan(v)):
        raise DomainError("inverse requires v >= 0")
    lam, g, k = reg.lam, reg.gamma, reg.kind
    with np.errstate(over="ignore"):
        if k is Kind.L1:
            out = v / lam
        elif k is Kind.LQ:
            out = lam * (v / lam**2) ** (1.0 / reg.q)
        elif k is Kind.LSP:
            out = lam * g * np.expm1(v / lam**2)
        elif k is Kind.GP:
            if np.any(v >= lam**2):
                raise DomainError(f"GP is bounded by lambda^2 = {lam**2}; got v >= that")
            out = v * lam * g / (lam**2 - v)
        else:
            j, vj, q = _amcp_tail(reg)
            # rationalized form of gamma (lam - sqrt(lam^2 - 2v/gamma)), stable as v -> 0
            head = 2 * v / (lam + np.sqrt(np.maximum(lam**2 - 2 * np.minimum(v, vj) / g, 0.0)))
            out = np.where(v <= vj, head, j * (np.maximum(v, vj) / vj) ** (1.0 / q))
    return _out(out, scalar)


# ---------------------------------------------------------------------------
# analytic constants


@dataclass(frozen=True)
class RegularizerConstants:
    """Constants of a basis function for a design with max column norm^2/n = xi."""

    lambda_star: float
    a_gamma: float
    zero_gap: float
    sharp_concavity_C: float
    finite_slope_at_zero: bool
    lambda_star_closed: float | None = None


def lambda_star_numeric(reg, xi, grid_points=4001):
    """inf over u > 0 of xi u/2 + r(u)/u.

    A log-spaced scan over [1e-8 lam, 1e8 lam] locates the best cell, which
    is refined by golden section in log u.  The u -> 0+ limit r'(0+) is
    included explicitly since several kinds attain the infimum there.
    """
    lam = reg.lam

    def f(x):
        u = np.exp(x)
        return xi * u / 2 + value(reg, u) / u

    x = np.linspace(math.log(1e-8 * lam), math.log(1e8 * lam), grid_points)
    fx = f(x)
    i = int(np.argmin(fx))
    best = float(fx[i])
    if 0 < i < grid_points - 1:
        res = minimize_scalar(f, bracket=(x[i - 1], x[i], x[i + 1]), method="golden", options={"xtol": 1e-12})
        best = min(best, float(res.fun))
    return min(best, float(slope_at_zero(reg)))


def lambda_star_closed(reg, xi):
    """Closed-form lambda* where one is known, else None."""
    lam, g, k = reg.lam, reg.gamma, reg.kind
    if k is Kind.L1:
        return lam
    if k is Kind.MCP:
        return lam * min(math.sqrt(g * xi), 1.0)
    if k is Kind.GP:
        if xi * g * g <= 2:
            return lam * (math.sqrt(2 * xi) - xi * g / 2)
        return lam / g
    if k is Kind.LQ:
        q = reg.q
        return lam * (2 - q) * (2 * (1 - q) / xi) ** ((q - 1) / (2 - q))
    if k is Kind.SCAD and xi == 1.0:
        return lam
    return None


def lsp_lambda_star_bound(lam, gamma, xi):
    """Upper bound lam sqrt(2 xi log(1 + 2/(xi gamma^2))) on lambda* of LSP."""
    return lam * math.sqrt(2 * xi * math.log1p(2 / (xi * gamma**2)))


def zero_gap(reg, xi):
    """Guaranteed zero gap of global solutions when r is xi-sharp concave."""
    lam, g, k = reg.lam, reg.gamma, reg.kind
    if k in (Kind.L1, Kind.SCAD):
        return 0.0
    if k is Kind.LQ:
        q = reg.q
        return lam * (q * (1 - q) / xi) ** (1 / (2 - q))
    if k is Kind.LSP:
        return max(lam * (1 / math.sqrt(xi) - g), 0.0)
    if k is Kind.GP:
        return max(lam * ((2 * g / xi) ** (1 / 3) - g), 0.0)
    if k is Kind.MCP:
        # MCP is only xi-sharp concave on a nonempty interval when gamma xi < 1
        return lam * math.sqrt(g / xi) if g * xi < 1 else 0.0
    phi = reg.phi
    j = reg.junction
    factor = (phi / (xi * g * (1 + phi))) ** ((1 + phi) / 2)
    if factor >= 1:
        return j * factor
    return j if g * xi < 1 else 0.0


def sharp_concavity(reg, u0):
    """Largest C such that r is C-sharp concave over (0, u0), from closed forms."""
    lam, g, k = reg.lam, reg.gamma, reg.kind
    if u0 <= 0 or k in (Kind.L1, Kind.SCAD):
        return 0.0
    if k is Kind.MCP:
        return 1 / g if u0 <= lam * g else lam**2 * g / u0**2
    if k is Kind.LSP:
        return lam**2 / (lam * g + u0) ** 2
    if k is Kind.GP:
        return 2 * lam**3 * g / (lam * g + u0) ** 3
    if k is Kind.LQ:
        q = reg.q
        return q * (1 - q) * (u0 / lam) ** (q - 2)
    j, vj, q = _amcp_tail(reg)
    if u0 <= j:
        return 1 / g
    return q * (1 - q) * vj / j**q * u0 ** (q - 2)


def b0(reg, xi):
    """1/sqrt(2 r0(u0/lam)) with u0 the zero gap when positive, else lam."""
    unit = reg.with_lambda(1.0)
    u0 = zero_gap(unit, xi)
    if u0 <= 0:
        u0 = 1.0
    return 1.0 / math.sqrt(2.0 * value(unit, u0))


def a_gamma(reg, xi):
    """lambda*/lambda, independent of lambda."""
    return lambda_star_numeric(reg.with_lambda(1.0), xi)


def constants(reg, xi):
    """Analytic constants of ``reg`` for a design with max ||x_i||^2/n = xi.

    lambda* is the numeric minimizer; when a closed form exists it is
    reported alongside and a warning is raised if the two disagree beyond
    1e-8 relative.
    """
    if not xi > 0:
        raise ParameterError(f"xi must be positive, got {xi}")
    ag = a_gamma(reg, xi)
    ls = ag * reg.lam
    closed = lambda_star_closed(reg, xi)
    if closed is not None and abs(ls - closed) > 1e-8 * abs(closed):
        warnings.warn(f"numeric lambda* {ls} disagrees with closed form {closed}", RuntimeWarning)
    u0 = zero_gap(reg, xi)
    return RegularizerConstants(
        lambda_star=ls,
        a_gamma=ag,
        zero_gap=u0,
        sharp_concavity_C=sharp_concavity(reg, u0),
        finite_slope_at_zero=bool(np.isfinite(slope_at_zero(reg))),
        lambda_star_closed=closed,
    )
