"""Command-line front end.

Exit codes: 0 success, 2 parse or validation errors, 3 numerical failures.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import analysis, bench, imaging
from .baselines import omp
from .exceptions import ConditionFailed, NcrrError, NumericalError, ParameterError
from .io import read_config, read_matrix, read_vector, write_matrix_csv
from .regularizers import Kind, Regularizer
from .solver import Problem, SolverConfig, certify_stationarity, solve_cd, zero_gap

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


def _ints(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _names(text):
    return [v.strip() for v in str(text).split(",") if v.strip()]


def _add_reg(p, default="MCP"):
    p.add_argument("--reg", default=default, help="regularizer kind: L1, Lq, SCAD, LSP, MCP, GP or AMCP")
    p.add_argument("--gamma", type=float, default=0.1, help="concavity parameter gamma")
    p.add_argument("--q", type=float, default=0.5, help="exponent for Lq")
    p.add_argument("--phi", type=float, default=0.5, help="junction parameter for AMCP")


def _add_threads(p):
    p.add_argument("--threads", type=int, default=1, help="maximum worker processes")


def build_parser():
    parser = argparse.ArgumentParser(prog="ncrr", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file providing defaults; command-line flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one regularized regression by coordinate descent")
    p.add_argument("--matrix", required=True, help="design matrix (CSV or NCRR1 binary)")
    p.add_argument("--response", required=True, help="response vector file")
    _add_reg(p)
    p.add_argument("--lambda", dest="lam", type=float, help="regularization scale lambda")
    p.add_argument("--eta", type=float, help="null-consistency level; sets lambda = b0 eps/(eta sqrt(n))")
    p.add_argument("--epsilon", type=float, help="noise budget ||e||_2 (required with --eta)")
    p.add_argument("--psi", type=float, default=0.1, help="proximal weight psi")
    p.add_argument("--nu", type=float, default=1e-3, help="target stationarity level nu")
    p.add_argument("--max-sweeps", type=int, default=10_000, help="sweep limit")
    p.add_argument("--init", choices=("zero", "omp"), default="zero", help="starting point")
    p.add_argument("--omp-support", type=int, help="OMP atoms for --init omp (default n // 4)")
    p.add_argument("--out", required=True, help="output file for the solution vector")
    p.add_argument("--summary", help="write the JSON summary here instead of standard output")

    p = sub.add_parser("se", help="estimate sparse eigenvalues by submatrix sampling")
    p.add_argument("--matrix", required=True, help="design matrix file")
    p.add_argument("--t-grid", required=True, type=_ints, help="comma-separated sparsity levels")
    p.add_argument("--samples", type=int, default=100, help="submatrices per t")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", required=True, help="CSV output (t,kplus,kminus,ratio,ric)")

    p = sub.add_parser("check", help="evaluate SE conditions, error constants and sparseness bounds")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--matrix", help="design matrix file (SE is sampled from it)")
    src.add_argument("--se-csv", help="CSV written by the se subcommand")
    _add_reg(p, default="LSP")
    p.add_argument("--s", type=int, required=True, help="sparsity of the truth")
    p.add_argument("--t", type=int, required=True, help="integer t of the SE condition")
    p.add_argument("--eta", type=float, default=0.01, help="null-consistency level")
    p.add_argument("--epsilon", type=float, default=0.01, help="noise budget")
    p.add_argument("--n", type=int, help="sample size (required with --se-csv)")
    p.add_argument("--xi", type=float, default=1.0, help="max ||x_i||^2/n (used with --se-csv)")
    p.add_argument("--rho0", type=float, help="override the zero gap rho0")
    p.add_argument("--nu", type=float, default=0.0, help="stationarity level of the solution")
    p.add_argument("--mu", type=float, default=0.0, help="approximate-global gap of the solution")
    p.add_argument("--m0", type=int, help="m0 for the sparseness bound (default s)")
    p.add_argument("--l0", type=float, help="l0 for the sparseness bound (default lambda)")
    p.add_argument("--samples", type=int, default=100, help="submatrices per t with --matrix")
    p.add_argument("--seed", type=int, default=0, help="random seed with --matrix")
    p.add_argument("--out", help="CSV output (key,value)")

    p = sub.add_parser("bench-fig1", help="AGAS parameters along CD iterations")
    p.add_argument("--p", type=int, default=500, help="dimension")
    p.add_argument("--s", type=int, help="sparsity (default ceil(log p))")
    p.add_argument("--n", type=int, help="sample size (default ceil(10 s log p))")
    _add_reg(p)
    p.add_argument("--eta", type=float, default=0.01, help="null-consistency level")
    p.add_argument("--psi", type=float, default=0.1, help="proximal weight")
    p.add_argument("--epsilon", type=float, default=0.01, help="noise norm")
    p.add_argument("--nu", type=float, default=1e-3, help="target stationarity level")
    p.add_argument("--max-sweeps", type=int, default=5000, help="sweep limit")
    p.add_argument("--trials", type=int, default=20, help="number of trials")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", required=True, help="CSV output")
    _add_threads(p)

    p = sub.add_parser("bench-fig4", help="sampled sparse eigenvalues of Gaussian designs")
    p.add_argument("--p", type=int, default=1000, help="dimension")
    p.add_argument("--ns", type=_ints, default=[100, 200], help="comma-separated sample sizes")
    p.add_argument("--t-grid", type=_ints, default=[1, 2, 5, 10, 20, 40, 60, 80, 100], help="sparsity levels")
    p.add_argument("--trials", type=int, default=20, help="matrices per n")
    p.add_argument("--samples", type=int, default=100, help="submatrices per t")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", required=True, help="CSV output")
    _add_threads(p)

    p = sub.add_parser("bench-fig8", help="sparseness, RRE and SRR versus n")
    p.add_argument("--p", type=int, default=2000, help="dimension")
    p.add_argument("--s", type=int, default=20, help="sparsity")
    p.add_argument("--ns", type=_ints, help="comma-separated sample sizes (default 4s,6s,8s,10s)")
    p.add_argument("--regs", type=_names, default=list(bench.FIG8_REGS), help="comma-separated regularizers")
    p.add_argument("--lambda-grid", type=_floats, default=list(bench.DEFAULT_LAMBDA_GRID), help="lambda values")
    p.add_argument("--gamma", type=float, default=1e-7, help="concavity parameter")
    p.add_argument("--psi", type=float, default=0.1, help="proximal weight")
    p.add_argument("--epsilon", type=float, default=0.01, help="noise norm")
    p.add_argument("--nu", type=float, default=1e-3, help="target stationarity level")
    p.add_argument("--max-sweeps", type=int, default=5000, help="sweep limit")
    p.add_argument("--trials", type=int, default=20, help="trials per n")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", required=True, help="CSV output (all lambdas)")
    p.add_argument("--out-selected", help="CSV output restricted to the selected lambdas")
    _add_threads(p)

    p = sub.add_parser("camera", help="recover a masked image in the DCT domain")
    p.add_argument("--image", help="8-bit PGM input (default: built-in 64x64 test image)")
    p.add_argument("--fraction", type=float, default=0.25, help="fraction of known pixels")
    p.add_argument("--reg", type=_names, default=["LSP", "L1"], help="comma-separated regularizers")
    p.add_argument("--lambda-grid", type=_floats, default=[1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0], help="lambda values")
    p.add_argument("--gamma", type=float, default=1e-7, help="concavity parameter")
    p.add_argument("--seed", type=int, default=0, help="mask seed")
    p.add_argument("--out", required=True, help="CSV output (reg,lambda,psnr)")
    p.add_argument("--out-image", help="prefix for recovered PGM files, one per regularizer")
    _add_threads(p)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    cmd = next((a for a in argv if a in sub_action.choices), None)
    if cmd is None:
        return
    sp = sub_action.choices[cmd]
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, val in cfg.items():
        if key not in actions or key == "help":
            raise UsageError(f"unknown config key {key!r} for {cmd}")
        act = actions[key]
        if act.nargs == 0:
            defaults[key] = val.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = act.type(val) if act.type else val
        act.required = False
    sp.set_defaults(**defaults)


def _regularizer(args, lam=1.0):
    return Regularizer(args.reg, lam, args.gamma, q=args.q, phi=args.phi)


def cmd_solve(args, out):
    X = read_matrix(args.matrix)
    y = read_vector(args.response)
    if (args.lam is None) == (args.eta is None):
        raise UsageError("exactly one of --lambda and --eta is required")
    prob = Problem(X, y, args.epsilon or 0.0)
    if args.eta is not None:
        if args.epsilon is None:
            raise UsageError("--eta requires --epsilon")
        base = _regularizer(args)
        lam = analysis.lambda_null_consistent(base, prob.xi, args.eta, args.epsilon, prob.n)
    else:
        lam = args.lam
    reg = _regularizer(args, lam)
    init = None
    if args.init == "omp" and np.any(y):
        k = args.omp_support or max(1, min(prob.n, prob.p) // 4)
        init = omp(prob, k, 0.0).theta
    cfg = SolverConfig(psi=args.psi, nu_target=args.nu, max_sweeps=args.max_sweeps, certify=False)
    tr = solve_cd(prob, reg, cfg, init=init)
    write_matrix_csv(args.out, tr.theta.reshape(-1, 1))
    cert = None if reg.kind is Kind.LQ else certify_stationarity(prob, reg, tr.theta)
    gap = zero_gap(tr.theta)
    summary = {
        "lambda": lam,
        "objective": tr.objective[-1],
        "nu_certified": cert,
        "nu_bound": tr.nu_bound[-1],
        "zero_gap": None if math.isinf(gap) else gap,
        "sweeps": tr.sweeps,
        "converged": tr.converged,
        "nonzeros": int(np.count_nonzero(tr.theta)),
    }
    text = json.dumps(summary, indent=2) + "\n"
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(text)
    else:
        out.write(text)


def cmd_se(args, out):
    X = read_matrix(args.matrix)
    se = analysis.estimate_se(X, args.t_grid, args.samples, args.seed)
    rows = [(t, kp, km, r, d) for t, kp, km, r, d in zip(se.t_grid, se.kappa_plus, se.kappa_minus, se.ratio(), se.ric())]
    bench.to_csv(("t", "kplus", "kminus", "ratio", "ric"), rows, args.out)


def _read_se_csv(path, xi):
    with open(path) as fh:
        lines = [ln.strip().split(",") for ln in fh if ln.strip()]
    head = lines[0]
    cols = {k: i for i, k in enumerate(head)}
    for k in ("t", "kplus", "kminus"):
        if k not in cols:
            raise UsageError(f"{path}: missing column {k}")
    body = lines[1:]
    return analysis.SEEstimate(
        [int(r[cols["t"]]) for r in body],
        [float(r[cols["kplus"]]) for r in body],
        [float(r[cols["kminus"]]) for r in body],
        0,
        0,
        xi=xi,
    )


def cmd_check(args, out):
    m0 = args.m0 or args.s
    if args.matrix:
        X = read_matrix(args.matrix)
        n = X.shape[0]
        se = analysis.estimate_se(X, sorted({2 * args.t, m0}), args.samples, args.seed)
    elif args.se_csv:
        if args.n is None:
            raise UsageError("--se-csv requires --n")
        n = args.n
        se = _read_se_csv(args.se_csv, args.xi)
    else:
        raise UsageError("one of --matrix and --se-csv is required")
    reg = _regularizer(args)
    rep = analysis.check_conditions(
        reg, se, args.s, args.t, args.eta, args.epsilon, n, rho0=args.rho0, nu=args.nu, mu=args.mu
    )
    l0 = args.l0 or rep.lam
    sb = analysis.sparseness_bound(reg, se, rep, args.eta, m0, l0)
    rep.sparseness_bound = sb
    fields = [
        ("alpha", rep.alpha), ("lambda", rep.lam), ("lambda_star", rep.lambda_star), ("rho0", rep.rho0),
        ("kappa_plus_2t", rep.kappa_plus), ("kappa_minus_2t", rep.kappa_minus), ("varrho", rep.varrho),
        ("H_r", rep.H_r), ("G_r", rep.G_r), ("se_lhs", rep.se_lhs), ("se_rhs_global", rep.se_rhs_global),
        ("se_rhs_agas", rep.se_rhs_agas), ("passes_global", rep.passes_global), ("passes_agas", rep.passes_agas),
        ("C1", rep.C1), ("C2", rep.C2), ("C4", rep.C4), ("C5", rep.C5), ("eps_tilde", rep.eps_tilde),
        ("global_error_bound", rep.global_error_bound), ("agas_error_bound", rep.agas_error_bound),
        ("sparseness_premise", sb.holds), ("sparseness_bound", sb.bound),
    ]
    out.write(f"global SE condition: {'PASS' if rep.passes_global else 'FAIL'}"
              f" ({rep.se_lhs:.6g} < {rep.se_rhs_global:.6g})\n")
    out.write(f"AGAS SE condition:   {'PASS' if rep.passes_agas else 'FAIL'}\n")
    for reason in rep.reasons:
        out.write(f"  note: {reason}\n")
    if sb.holds:
        out.write(f"sparseness bound: |supp minus S| <= {sb.bound:.6g}\n")
    else:
        out.write(f"sparseness bound: none ({sb.reason})\n")
    if args.out:
        bench.to_csv(("key", "value"), [(k, "" if v is None else str(v) if isinstance(v, bool) else v) for k, v in fields], args.out)


def cmd_fig1(args, out):
    s = args.s or math.ceil(math.log(args.p))
    n = args.n or math.ceil(10 * s * math.log(args.p))
    spec = bench.TrialSpec(
        p=args.p, n=n, s=s, reg=args.reg, eta=args.eta, gamma=args.gamma, psi=args.psi,
        epsilon=args.epsilon, seed=args.seed, num_trials=args.trials, nu=args.nu, max_sweeps=args.max_sweeps,
    )
    bench.run_fig1(spec, args.threads).csv(args.out)


def cmd_fig4(args, out):
    bench.run_fig4(args.p, args.ns, args.t_grid, args.trials, args.samples, args.seed, args.threads).csv(args.out)


def cmd_fig8(args, out):
    ns = args.ns or [4 * args.s, 6 * args.s, 8 * args.s, 10 * args.s]
    spec = bench.TrialSpec(
        p=args.p, n=max(ns), s=args.s, gamma=args.gamma, psi=args.psi, epsilon=args.epsilon,
        seed=args.seed, num_trials=args.trials, nu=args.nu, max_sweeps=args.max_sweeps,
    )
    res = bench.run_fig8(spec, ns, tuple(args.regs), tuple(args.lambda_grid), args.threads)
    res.csv(args.out)
    if args.out_selected:
        res.selected_csv(args.out_selected)


def cmd_camera(args, out):
    img = imaging.read_pgm(args.image) if args.image else imaging.test_image(64)
    res = imaging.camera_experiment(img, args.fraction, tuple(args.reg), tuple(args.lambda_grid), args.gamma, args.seed)
    bench.to_csv(imaging.CameraResult.header, res.rows, args.out)
    for name, (lam, val) in res.best.items():
        out.write(f"{name}: best lambda {lam:g}, PSNR {val:.2f} dB\n")
        if args.out_image:
            imaging.write_pgm(f"{args.out_image}{name}.pgm", res.images[name])


COMMANDS = {
    "solve": cmd_solve,
    "se": cmd_se,
    "check": cmd_check,
    "bench-fig1": cmd_fig1,
    "bench-fig4": cmd_fig4,
    "bench-fig8": cmd_fig8,
    "camera": cmd_camera,
}


def main(argv=None, out=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, NcrrError, OSError, ValueError) as err:
        print(f"ncrr: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args, out)
    except NumericalError as err:
        print(f"ncrr: numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConditionFailed as err:
        out.write(f"condition failed: {err}\n")
        return 0
    except (UsageError, NcrrError, OSError, ValueError) as err:
        print(f"ncrr: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
