"""
Command-line interface: ``spikedcov {estimate,simulate,select-k,reduce,validate}``.

Exit codes: 0 success, 1 usage error, 2 runtime error (including a failed
``validate`` check). Output goes to ``--out`` (stdout when omitted) as JSON
by default or CSV for tabular results. Runtimes are only written with
``--timing`` so that repeated runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from pathlib import Path


from . import __version__
from .bench import METHODS, report_csv, run_case, scenario_for_case
from .estimators import estimate_eigenvectors, reduce_reconstruct, summarize_eigenvalues
from .exceptions import SpikedCovError
from .model import load_matrix_csv, sample_covariance
from .oracle import run_checks
from .prior import prior_for
from .sampler import McmcSettings, run_chain
from .selection import select_k

__all__ = ["build_parser", "main"]

SEED_ENV = "SPIKEDCOV_SEED"
PRIORS = ("gsiw", "giw", "siw", "iw")
CRITERIA = ("waic", "gr", "icp3")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; this tool reserves 2 for runtime errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _bounded(kind, lo=None, hi=None, name="value"):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} {text!r}") from None
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            rng_ = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
            raise argparse.ArgumentTypeError(f"{name} must be {rng_}, got {text}")
        return v

    return parse


pos_int = _bounded(int, 1, name="value")
nonneg_int = _bounded(int, 0, name="value")


def _positive_float(text):
    v = _bounded(float, name="value")(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"value must be positive, got {text}")
    return v


def _schedule(text):
    if text == "full":
        return text
    return pos_int(text)


def _common(p: argparse.ArgumentParser, formats=("json", "csv")) -> None:
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (falls back to ${SEED_ENV}, then 0)")
    p.add_argument("--out", type=Path, default=None, help="output file (stdout if omitted)")
    p.add_argument("--format", choices=formats, default="json", help="output format")
    p.add_argument("--timing", action="store_true", help="include wall-clock runtime in the output")


def _chain_flags(p: argparse.ArgumentParser, draws=2000, burnin=500) -> None:
    p.add_argument("--draws", type=pos_int, default=draws, help="post-burn-in sweeps")
    p.add_argument("--burnin", type=nonneg_int, default=burnin, help="burn-in sweeps")
    p.add_argument("--thin", type=pos_int, default=1, help="keep every THIN-th sweep")
    p.add_argument("--reorth-every", type=pos_int, default=100, help="sweeps between re-orthonormalizations")
    p.add_argument(
        "--schedule", type=_schedule, default="full",
        help="'full' for all row pairs per sweep, or a number of random pairs",
    )


def _input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", type=Path, required=True, help="CSV data matrix, one observation per row")
    p.add_argument("--center", action="store_true", help="subtract column means before analysis")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    ap = _Parser(prog="spikedcov", description="Bayesian estimation of spiked covariance matrices.",
                 formatter_class=fmt)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("estimate", help="posterior summaries of the leading eigenpairs", formatter_class=fmt)
    _input_flags(p)
    p.add_argument("--prior", choices=PRIORS, default="gsiw", help="prior family")
    p.add_argument("--k", type=pos_int, required=True, help="number of spikes")
    p.add_argument("--h", type=_positive_float, default=None, help="override the prior scale H = hI")
    p.add_argument("--level", type=_bounded(float, 0.5, 0.999, "level"), default=0.95,
                   help="credible-interval level")
    _chain_flags(p)
    _common(p)

    p = sub.add_parser("simulate", help="desk-scale method comparison", formatter_class=fmt)
    p.add_argument("--case", type=int, choices=(1, 2), required=True, help="scenario preset")
    p.add_argument("--n", type=_bounded(int, 2, name="n"), default=None, help="override sample size")
    p.add_argument("--p", type=_bounded(int, 2, name="p"), default=None, help="override dimension")
    p.add_argument("--reps", type=pos_int, default=20, help="replications")
    p.add_argument("--methods", default=",".join(METHODS), help="comma-separated subset of methods")
    p.add_argument("--threads", type=pos_int, default=1, help="worker threads (output does not depend on it)")
    _chain_flags(p)
    _common(p)

    p = sub.add_parser("select-k", help="choose the number of spikes", formatter_class=fmt)
    _input_flags(p)
    p.add_argument("--criterion", choices=CRITERIA, default="waic", help="selection criterion")
    p.add_argument("--kmax", type=pos_int, default=None, help="largest candidate k (default min(n,p)//2)")
    p.add_argument("--threads", type=pos_int, default=1, help="concurrent WAIC chains")
    _chain_flags(p, draws=1000, burnin=300)
    _common(p)

    p = sub.add_parser("reduce", help="select k, then project onto the top-k sample eigenvectors",
                       formatter_class=fmt)
    _input_flags(p)
    p.add_argument("--criterion", choices=CRITERIA, default="waic", help="selection criterion")
    p.add_argument("--kmax", type=pos_int, default=None, help="largest candidate k (default min(n,p)//2)")
    p.add_argument("--k", type=pos_int, default=None, help="skip selection and use this k")
    p.add_argument("--threads", type=pos_int, default=1, help="concurrent WAIC chains")
    _chain_flags(p, draws=1000, burnin=300)
    _common(p)

    p = sub.add_parser("validate", help="run the oracle checks and print a pass/fail table",
                       formatter_class=fmt)
    p.add_argument("--quick", action="store_true", help="smaller sample sizes")
    _common(p)
    return ap


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _settings(args, seed: int) -> McmcSettings:
    return McmcSettings(args.burnin, args.draws, args.thin, args.reorth_every, seed, args.schedule)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    return buf.getvalue()


def _cmd_estimate(args, seed):
    x = load_matrix_csv(args.input, center=args.center)
    ss = sample_covariance(x)
    cfg = prior_for(args.prior, ss, args.k)
    if args.h is not None:
        cfg = cfg.with_h(args.h)
    draws = run_chain(ss, cfg, _settings(args, seed))
    summ = summarize_eigenvalues(draws, args.k, args.level)
    vecs = estimate_eigenvectors(draws, ss.Q[:, : args.k])
    if args.format == "csv":
        rows = [[s.index, repr(s.point), repr(s.lo), repr(s.hi), repr(s.interval_length)] for s in summ]
        return _csv(["index", "point", "lo", "hi", "il"], rows)
    return {
        "prior": args.prior,
        "n": ss.n,
        "p": ss.p,
        "k": args.k,
        "level": args.level,
        "hyperparameters": cfg.to_dict(),
        "eigenvalues": [s.to_dict() for s in summ],
        "eigenvectors": vecs.T.tolist(),
        "accept_rate": draws.accept_rate,
        "max_orthogonality_defect": draws.max_defect,
    }


def _cmd_simulate(args, seed):
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    sc = scenario_for_case(args.case, args.n, args.p)
    rep = run_case(sc, methods, args.reps, _settings(args, seed), seed, args.threads)
    if args.format == "csv":
        return report_csv(rep)
    return rep.to_dict(timing=False)


def _cmd_select(args, seed):
    x = load_matrix_csv(args.input, center=args.center)
    res = select_k(x, args.criterion, args.kmax, _settings(args, seed), threads=args.threads)
    if args.format == "csv":
        return _csv(["k", "score"], [[k + 1, repr(float(s))] for k, s in enumerate(res.scores)])
    return res.to_dict()


def _cmd_reduce(args, seed):
    x = load_matrix_csv(args.input, center=args.center)
    ss = sample_covariance(x)
    sel = None
    if args.k is None:
        sel = select_k(x, args.criterion, args.kmax, _settings(args, seed), ss=ss, threads=args.threads)
        k = sel.chosen_k
    else:
        k = args.k
    red = reduce_reconstruct(x, ss.Q[:, :k], ss)
    if args.format == "csv":
        return _csv([f"x{j + 1}" for j in range(x.p)], [[repr(float(v)) for v in row] for row in red.x_hat])
    return {
        "k": k,
        "selection": None if sel is None else sel.to_dict(),
        "nmse": red.nmse,
        "cve": red.cve,
        "reconstructed": red.x_hat.tolist(),
    }


def _cmd_validate(args, seed):
    results = run_checks(seed, quick=args.quick)
    for r in results:
        print(r.line())
    args._failed = not all(r.passed for r in results)
    if args.out is None:
        return None
    if args.format == "csv":
        return _csv(["check", "passed", "detail"], [[r.name, r.passed, r.detail] for r in results])
    return {"checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]}


COMMANDS = {
    "estimate": _cmd_estimate,
    "simulate": _cmd_simulate,
    "select-k": _cmd_select,
    "reduce": _cmd_reduce,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("spikedcov: error: a command is required", file=sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        seed = _seed(args)
    except UsageError as exc:
        print(f"spikedcov: error: {exc}", file=sys.stderr)
        return 1
    t0 = time.perf_counter()
    try:
        result = COMMANDS[args.command](args, seed)
        if isinstance(result, dict):
            if args.timing:
                result.setdefault("runtime", time.perf_counter() - t0)
            result = _dumps(result)
        if result is not None:
            _emit(result, args.out)
    except (SpikedCovError, ValueError, OSError) as exc:
        print(f"spikedcov {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 2 if getattr(args, "_failed", False) else 0


if __name__ == "__main__":
    sys.exit(main())
