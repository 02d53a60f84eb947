"""Synthetic instances and desk-scale experiment drivers with CSV output."""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field, replace
import io
import math
import time

import numpy as np

from .analysis import estimate_se, lambda_null_consistent
from .baselines import fista_l1, omp
from .regularizers import Regularizer
from .rng import make_rng
from .solver import Problem, SolverConfig, solve_cd

SUPPORT_THRESHOLD = 1e-8
QUANTILES = (5, 25, 50, 75, 95)
DEFAULT_LAMBDA_GRID = tuple(10.0**k for k in range(-6, 2))


@dataclass(frozen=True)
class TrialSpec:
    """Knobs of a synthetic experiment.

    ``reg`` names the regularizer kind; ``lambda_grid`` is only used by the
    sparseness-versus-n driver, everything else picks lambda from ``eta`` and ``epsilon``.
    """

    p: int
    n: int
    s: int
    reg: str = "MCP"
    eta: float = 0.01
    gamma: float = 0.1
    psi: float = 0.1
    epsilon: float = 0.01
    lambda_grid: tuple | None = None
    seed: int = 0
    num_trials: int = 20
    nu: float = 1e-3
    max_sweeps: int = 5000


@dataclass
class MetricRow:
    trial: int
    sparseness: int
    rre: float
    srr: float
    mu: float = math.nan
    nu: float = math.nan
    zero_gap: float = math.nan
    sweeps: int = 0
    wall_time: float = 0.0


def gen_instance(spec, trial=0):
    """Gaussian design, s-sparse truth with |theta*_i| >= 0.1, noise of norm exactly epsilon."""
    n, p, s = spec.n, spec.p, spec.s
    X = make_rng(spec.seed, trial, "design").standard_normal((n, p))
    rt = make_rng(spec.seed, trial, "truth")
    support = np.sort(rt.choice(p, size=s, replace=False))
    vals = rt.standard_normal(s)
    small = np.abs(vals) < 0.1
    vals[small] = np.where(vals[small] >= 0, 0.1, -0.1)
    theta = np.zeros(p)
    theta[support] = vals
    e = make_rng(spec.seed, trial, "noise").standard_normal(n)
    if spec.epsilon > 0:
        e *= spec.epsilon / np.linalg.norm(e)
    else:
        e[:] = 0.0
    return Problem(X, X @ theta + e, spec.epsilon, theta_star=theta, noise=e)


def metrics(theta, theta_star, threshold=SUPPORT_THRESHOLD):
    """(sparseness, relative recovery error, support recovery rate)."""
    est = np.abs(theta) > threshold
    true = theta_star != 0
    union = np.count_nonzero(est | true)
    srr = np.count_nonzero(est & true) / union if union else 1.0
    rre = float(np.linalg.norm(theta - theta_star) / np.linalg.norm(theta_star))
    return int(np.count_nonzero(est)), rre, float(srr)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def to_csv(header, rows, path=None):
    """Write rows with a fixed header; returns the CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def _pmap(fn, items, threads):
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


# ---------------------------------------------------------------------------
# AGAS parameters along CD iterations


def _reg_for(spec, prob):
    base = Regularizer(spec.reg, 1.0, spec.gamma)
    return base.with_lambda(lambda_null_consistent(base, prob.xi, spec.eta, spec.epsilon, prob.n))


def _fig1_trial(args):
    spec, trial = args
    prob = gen_instance(spec, trial)
    reg = _reg_for(spec, prob)
    cfg = SolverConfig(psi=spec.psi, nu_target=spec.nu, max_sweeps=spec.max_sweeps, certify=False)
    t0 = time.perf_counter()
    tr = solve_cd(prob, reg, cfg)
    wall = time.perf_counter() - t0
    return {
        "zero_gap": np.array(tr.zero_gap),
        "mu": np.array(tr.mu),
        "nu": np.array(tr.nu_bound),
        "converged": tr.converged,
        "sweeps": tr.sweeps,
        "wall": wall,
        "xi": prob.xi,
        "lam": reg.lam,
        "gamma": reg.gamma,
        "psi": spec.psi,
    }


@dataclass
class Fig1Result:
    rows: list
    trials: list = field(default_factory=list)

    header = ("sweep", "quantile", "metric", "value")

    def csv(self, path=None):
        return to_csv(self.header, self.rows, path)


def run_fig1(spec, threads=1):
    """Per-sweep quantiles over trials of the zero gap, mu and the nu bound.

    Trials that stop early are padded with their terminal values.
    """
    trials = _pmap(_fig1_trial, [(spec, k) for k in range(spec.num_trials)], threads)
    kmax = max(t["sweeps"] for t in trials)
    rows = []
    for metric in ("zero_gap", "mu", "nu"):
        mat = np.empty((len(trials), kmax))
        for i, t in enumerate(trials):
            v = t[metric]
            mat[i, : v.size] = v
            mat[i, v.size :] = v[-1]
        for k in range(kmax):
            col = mat[:, k]
            for q in QUANTILES:
                val = np.percentile(col, q, method="inverted_cdf")
                rows.append((k + 1, q, metric, float(val)))
    return Fig1Result(rows, trials)


# ---------------------------------------------------------------------------
# sampled sparse eigenvalues of Gaussian designs


@dataclass
class Fig4Result:
    rows: list
    ratios: dict = field(default_factory=dict)  # n -> array (trials x t)
    t_grid: dict = field(default_factory=dict)

    header = ("n", "t", "stat", "kplus", "kminus", "ratio")

    def csv(self, path=None):
        return to_csv(self.header, self.rows, path)


def _fig4_trial(args):
    p, n, t_grid, trial, num_submatrices, seed = args
    X = make_rng(seed, trial, f"fig4-design-{n}").standard_normal((n, p))
    se = estimate_se(X, t_grid, num_submatrices, seed=seed * 1_000_003 + trial)
    return np.array(se.kappa_plus), np.array(se.kappa_minus)


def run_fig4(p, ns, t_grid, num_trials=20, num_submatrices=100, seed=0, threads=1):
    """Mean/min/max of sampled kappa_+, kappa_- and their ratio for Gaussian designs."""
    res = Fig4Result([])
    for n in ns:
        ts = [t for t in sorted(set(t_grid)) if t <= n]
        out = _pmap(_fig4_trial, [(p, n, ts, k, num_submatrices, seed) for k in range(num_trials)], threads)
        kp = np.array([o[0] for o in out])
        km = np.array([o[1] for o in out])
        ratio = kp / km
        res.ratios[n] = ratio
        res.t_grid[n] = ts
        for j, t in enumerate(ts):
            for stat, f in (("mean", np.mean), ("min", np.min), ("max", np.max)):
                res.rows.append((n, t, stat, float(f(kp[:, j])), float(f(km[:, j])), float(f(ratio[:, j]))))
    return res


# ---------------------------------------------------------------------------
# sparseness, RRE and SRR versus n


FIG8_REGS = ("LSP", "MCP", "GP", "L1")


def _fig8_trial(args):
    spec, n, trial, regs, grid = args
    prob = gen_instance(replace(spec, n=n), trial)
    warm = omp(prob, max(1, min(n - spec.s, n, spec.p)), 0.0).theta
    out = {}
    for name in regs:
        for lam in grid:
            t0 = time.perf_counter()
            if name == "L1":
                theta = fista_l1(prob, lam, tol=1e-9, max_iter=3000, init=warm).theta
                sweeps = 0
            else:
                reg = Regularizer(name, lam, spec.gamma)
                cfg = SolverConfig(psi=spec.psi, nu_target=spec.nu, max_sweeps=spec.max_sweeps, certify=False)
                tr = solve_cd(prob, reg, cfg, init=warm)
                theta, sweeps = tr.theta, tr.sweeps
            sp, rre, srr = metrics(theta, prob.theta_star)
            out[(name, lam)] = MetricRow(trial, sp, rre, srr, sweeps=sweeps, wall_time=time.perf_counter() - t0)
    return out


@dataclass
class Fig8Result:
    rows: list
    selected: dict  # (reg, n) -> lambda
    per_trial: dict  # (reg, n, lambda) -> list[MetricRow]

    header = ("reg", "n", "lambda", "mean_sparseness", "mean_rre", "mean_srr", "trials")

    def csv(self, path=None):
        return to_csv(self.header, self.rows, path)

    def selected_rows(self):
        keep = {(r, n, lam) for (r, n), lam in self.selected.items()}
        return [row for row in self.rows if (row[0], row[1], row[2]) in keep]

    def selected_csv(self, path=None):
        return to_csv(self.header, self.selected_rows(), path)

    def medians(self, reg, n):
        rows = self.per_trial[(reg, n, self.selected[(reg, n)])]
        return {
            "sparseness": float(np.median([r.sparseness for r in rows])),
            "rre": float(np.median([r.rre for r in rows])),
            "srr": float(np.median([r.srr for r in rows])),
        }


def run_fig8(spec, ns, regs=FIG8_REGS, lambda_grid=None, threads=1):
    """Recovery metrics per (regularizer, n, lambda), with oracle lambda selection by mean RRE.

    Every trial starts from an OMP solution with n - s atoms; the L1 baseline
    is solved by FISTA, the others by CD.
    """
    grid = tuple(lambda_grid or spec.lambda_grid or DEFAULT_LAMBDA_GRID)
    jobs = [(spec, n, k, tuple(regs), grid) for n in ns for k in range(spec.num_trials)]
    results = _pmap(_fig8_trial, jobs, threads)
    per_trial = {}
    for (_, n, _, _, _), res in zip(jobs, results):
        for (name, lam), row in res.items():
            per_trial.setdefault((name, n, lam), []).append(row)
    rows, selected = [], {}
    for name in regs:
        for n in ns:
            best = None
            for lam in grid:
                tr = per_trial[(name, n, lam)]
                m_sp = float(np.mean([r.sparseness for r in tr]))
                m_rre = float(np.mean([r.rre for r in tr]))
                m_srr = float(np.mean([r.srr for r in tr]))
                rows.append((name, n, lam, m_sp, m_rre, m_srr, len(tr)))
                if best is None or m_rre < best[0]:
                    best = (m_rre, lam)
            selected[(name, n)] = best[1]
    return Fig8Result(rows, selected, per_trial)
