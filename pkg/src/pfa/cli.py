"""Command-line interface.

Subcommands::

    pfa extract INPUT.csv --out DIR [--method pfa|sfa|single] ...
    pfa experiment --out DIR [--samples 1000,2000] [--plot] ...
    pfa verify [--model linear|diagonal|zero|mean] [--trials N]

Options may also come from a ``key = value`` file given with ``--config``;
command-line flags take precedence. Exit codes: 0 success, 1 verification
failure, 2 usage or input-format error, 3 numerical precondition failure.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import os
import re
import sys
from pathlib import Path

import numpy as np

from .ar_model import fit_reduced, prediction_error
from .exceptions import CsvFormatError, PfaError
from .experiments import NoisySineSpec, run_sweep
from .preprocessing import ThresholdPolicy, apply_sphering, fit_sphering
from .sfa import solve_sfa
from .single_component import extract_deflated
from .solver import MODELS, PfaConfig, solve_pfa_k
from .suites import (commuting_suite, contract_suite, lemma2_suite, optimality_suite,
                     relaxation_gap_suite)
from .timeseries import Expansion, expand, read_csv, write_csv

logger = logging.getLogger("pfa")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
SUBCOMMANDS = ("extract", "experiment", "verify")


class UsageError(Exception):
    pass


def int_list(text: str) -> list[int]:
    """Parse ``"0,10,20"`` or inclusive ranges like ``"0-14"``."""
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        m = re.fullmatch(r"(-?\d+)-(-?\d+)", part)
        try:
            out.extend(range(int(m[1]), int(m[2]) + 1) if m else [int(part)])
        except ValueError:
            raise argparse.ArgumentTypeError("invalid integer list %r" % text) from None
    if not out:
        raise argparse.ArgumentTypeError("empty integer list")
    return out


def _add_model_args(p, r_default=None):
    p.add_argument("--r", type=int, default=r_default, help="number of extracted components")
    p.add_argument("--p", type=int, default=2, help="prediction order")
    p.add_argument("--delta", type=int, default=1, help="lag step")
    p.add_argument("--k", type=int, default=0, help="iterated-prediction horizon")
    p.add_argument("--threshold", type=float, default=1e-10,
                   help="relative eigenvalue cutoff for inversions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfa", description="Predictable feature analysis")
    parser.add_argument("--config", help="key = value file with default options")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="extract features from a CSV time series")
    ex.add_argument("input", help="CSV file, one row per time step")
    ex.add_argument("--out", default=".", help="output directory")
    ex.add_argument("--method", choices=("pfa", "sfa", "single"), default="pfa")
    _add_model_args(ex)
    ex.add_argument("--degree", type=int, choices=(1, 2), default=1, help="monomial expansion degree")
    ex.add_argument("--count", type=int, default=1, help="components for --method single")
    ex.add_argument("--mode", choices=("pfa-r1", "alternating"), default="pfa-r1",
                    help="single-component extractor")
    ex.add_argument("--holdout", type=float, default=0.0, help="trailing fraction held out (pfa)")

    exp = sub.add_parser("experiment", help="run the noisy-sine robustness sweep")
    exp.add_argument("--out", default=".", help="output directory")
    _add_model_args(exp, r_default=2)
    exp.add_argument("--samples", type=int_list, default=[1000, 2000])
    exp.add_argument("--runs", type=int, default=30)
    exp.add_argument("--k-values", type=int_list, default=list(range(15)))
    exp.add_argument("--noise-dims", type=int_list, default=list(range(0, 101, 10)))
    exp.add_argument("--base-seed", type=int, default=0, help="noise seed of the base signal")
    exp.add_argument("--seed", type=int, default=0, help="master seed for per-run noise")
    exp.add_argument("--jobs", type=int, default=1)
    exp.add_argument("--plot", action="store_true", help="write one SVG per sample count")

    ver = sub.add_parser("verify", help="run model-contract and solver property suites")
    ver.add_argument("--model", choices=sorted(MODELS), default="linear")
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--expect-violation", action="store_true",
                     help="succeed only if the model violates orthogonal agnosticity")
    return parser


def _config_tokens(path: str) -> list[str]:
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_string("[pfa]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise UsageError("cannot read config %s: %s" % (path, exc)) from None
    tokens = []
    for key, value in cp.items("pfa"):
        flag = "--" + key.strip().replace("_", "-")
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            tokens += [flag, value]
    return tokens


def _merge_config(argv: list[str]) -> list[str]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    tokens = _config_tokens(known.config)
    pos = next((i for i, a in enumerate(argv) if a in SUBCOMMANDS), None)
    if pos is None:
        return argv
    # file options first so explicit flags override them
    return argv[:pos + 1] + tokens + argv[pos + 1:]


def _policy(args) -> ThresholdPolicy:
    try:
        return ThresholdPolicy(args.threshold)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _fmt(values) -> str:
    return " ".join("%.17g" % v for v in np.ravel(values))


def cmd_extract(args) -> int:
    policy = _policy(args)
    x = read_csv(args.input)
    h = expand(x, Expansion(args.degree, x.n))
    n = h.shape[0]
    r = n if args.r is None else args.r
    if args.method == "pfa":
        try:
            config = PfaConfig(r=r, p=args.p, delta=args.delta, k=args.k, policy=policy,
                               degree=args.degree, holdout=args.holdout)
            config.check_dim(n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif not 1 <= r <= n:
        raise UsageError("r must lie in [1, %d]" % n)
    if args.method == "single" and not 1 <= args.count <= n:
        raise UsageError("count must lie in [1, %d]" % n)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    transform = fit_sphering(h, policy)
    z = apply_sphering(transform, h)
    summary = ["method: %s" % args.method,
               "input: %s" % os.path.basename(args.input),
               "samples: %d" % z.shape[1],
               "dimension: %d (expansion degree %d, kept rank %d)" % (n, args.degree, transform.kept_rank)]

    if args.method == "pfa":
        res = solve_pfa_k(z, config)
        features, A, B = res.transform(z), res.A, res.refitted.coefficients
        summary += ["r: %d" % r, "p: %d" % args.p, "delta: %d" % args.delta, "k: %d" % args.k,
                    "achieved_error: %.17g" % res.achieved_error,
                    "relaxation_objective: %.17g" % res.objective,
                    "residual_eigenvalues: %s" % _fmt(res.eigenvalues)]
        if res.holdout_error is not None:
            summary.append("holdout_error: %.17g" % res.holdout_error)
        summary += ["warning: %s" % w for w in res.warnings]
    elif args.method == "sfa":
        res = solve_sfa(z, r)
        features, A = res.transform(z), res.A_r
        refit = fit_reduced(z, A, args.p, args.delta, policy)
        B = refit.coefficients
        summary += ["r: %d" % r, "slowness_eigenvalues: %s" % _fmt(res.eigenvalues),
                    "prediction_error: %.17g" % prediction_error(refit, features)]
    else:
        comps = extract_deflated(z, args.p, args.count, mode=args.mode, delta=args.delta, policy=policy)
        A = np.column_stack([c.a for c in comps])
        B = np.vstack([c.b for c in comps])
        features = A.T @ z
        summary += ["mode: %s" % args.mode, "count: %d" % args.count, "p: %d" % args.p]
        summary += ["component %d: error %.17g b %s" % (i + 1, c.error, _fmt(c.b)) for i, c in enumerate(comps)]

    write_csv(out / "features.csv", features.T, header=["m%d" % (i + 1) for i in range(features.shape[0])])
    write_csv(out / "matrix_A.csv", A)
    write_csv(out / "predictor_B.csv", B)
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    return EXIT_OK


def write_sweep_csv(records, path):
    bounds = {}
    for rec in records:
        bounds.setdefault(rec.samples, rec.lower_bound)
    with open(path, "w") as fh:
        for T, bound in bounds.items():
            fh.write("# lower_bound samples=%d value=%.17g\n" % (T, bound))
        fh.write("noise_dim,k,samples,runs,mean_err,std_err,below_bound\n")
        for rec in records:
            fh.write("%d,%d,%d,%d,%.17g,%.17g,%d\n" % (rec.noise_dim, rec.k, rec.samples, rec.runs,
                                                      rec.mean_err, rec.std_err, rec.below_bound))


def cmd_experiment(args) -> int:
    policy = _policy(args)
    try:
        config = PfaConfig(r=args.r, p=args.p, delta=args.delta, k=0, policy=policy)
        base = NoisySineSpec(seed=args.base_seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.runs < 1 or args.jobs < 1:
        raise UsageError("runs and jobs must be >= 1")
    if min(args.k_values) < 0 or min(args.noise_dims) < 0 or min(args.samples) < 1:
        raise UsageError("k values and noise dimensions must be >= 0, samples >= 1")
    if any(k > 0 for k in args.k_values) and args.delta != 1:
        raise UsageError("k > 0 requires delta = 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = run_sweep(base, args.k_values, args.noise_dims, args.runs, args.samples, config,
                        master_seed=args.seed, jobs=args.jobs)
    write_sweep_csv(records, out / "sweep.csv")
    if args.plot:
        from .plotting import plot_sweep

        for T in args.samples:
            plot_sweep(records, out / ("sweep_%d.svg" % T), T)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise UsageError("trials must be >= 1")
    model = MODELS[args.model]()
    few = max(1, min(args.trials, 20))
    report = contract_suite(model, trials=args.trials, seed=args.seed)
    lines = ["model: %s" % args.model] + report.lines()
    results = [commuting_suite(args.trials, seed=args.seed + 1)]
    results += list(relaxation_gap_suite(few, seed=args.seed + 2))
    results += [lemma2_suite(few, seed=args.seed + 3), optimality_suite(few, seed=args.seed + 4)]
    lines += [r.line() for r in results]
    print("\n".join(lines))
    if args.expect_violation:
        violated = not report.passed("orthogonal_agnosticity")
        print("expected agnosticity violation %s" % ("observed" if violated else "NOT observed"))
        return EXIT_OK if violated else EXIT_VERIFY
    ok = report.ok and all(r.passed for r in results)
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"extract": cmd_extract, "experiment": cmd_experiment, "verify": cmd_verify}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _merge_config(argv)
    except UsageError as exc:
        print("pfa: error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, CsvFormatError, OSError) as exc:
        print("pfa: error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (PfaError, ValueError, np.linalg.LinAlgError) as exc:
        print("pfa: numerical error: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
