"""Scalar proximal problem min_u 0.5 a (u - v)^2 + r(|u|)."""

from dataclasses import dataclass
import math

import numpy as np

from . import _kernels as K
from .exceptions import DomainError
from .regularizers import Regularizer, value

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ProxQuery:
    a: float
    v: float
    reg: Regularizer

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"curvature a must be positive, got {self.a}")


def prox_objective(reg, a, v, u):
    """0.5 a (u - v)^2 + r(|u|), vectorized over ``u``."""
    u = np.asarray(u, dtype=float)
    return 0.5 * a * (u - v) ** 2 + value(reg, np.abs(u))


def prox(reg, a, v):
    """Exact global minimizer of the scalar problem.

    Candidates (zero, piece breakpoints and the stationary point of every
    smooth piece) are enumerated and the best is returned.  Near-ties with
    zero resolve to zero; other near-ties resolve to the largest magnitude.
    """
    if not a > 0:
        raise DomainError(f"curvature a must be positive, got {a}")
    return float(K.prox_scalar(*reg.params, float(a), float(v)))


def prox_query(q):
    return prox(q.reg, q.a, q.v)


def prox_oracle(reg, a, v, grid_points=100_000):
    """Brute-force reference: dense grid over [0, |v|] then golden-section polish."""
    if grid_points < 1000:
        raise DomainError("grid_points must be at least 1000")
    w = abs(float(v))
    if w == 0.0:
        return 0.0
    grid = np.linspace(0.0, w, grid_points)
    fg = prox_objective(reg, a, w, grid)
    i = int(np.argmin(fg))
    best_u, best_f = grid[i], fg[i]

    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_points - 1)]
    f = lambda u: float(prox_objective(reg, a, w, u))
    c, d = hi - _INVPHI * (hi - lo), lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if hi - lo <= 1e-15 * max(1.0, w):
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
    for u, fu in ((c, fc), (d, fd)):
        if fu < best_f:
            best_u, best_f = u, fu
    return math.copysign(best_u, v) if best_u > 0 else 0.0
