"""Command-line interface: ``sprecov bounds|validate|simulate|regimes``.

Exit codes: 0 success, 1 property failure, 2 domain error, 64 usage error.
"""

import argparse
import csv
import datetime as dt
import fcntl
import hashlib
import io
import json
import math
import os
import sys

from . import bounds as bnd
from .exceptions import DomainError, EnumerationCapError
from .recovery_sim import ExperimentConfig, sweep_n
from .signal_model import SignalModel, SpectrumSummary
from .validation import SUITES, all_passed, run_suite

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_DOMAIN = 2
EXIT_USAGE = 64
LOG_ENV = "SPRECOV_LOG"
DEFAULT_LOG = "runs.jsonl"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _finite(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _power_of_two(text):
    value = _positive_int(text)
    if value & (value - 1):
        raise argparse.ArgumentTypeError(f"{value} is not a power of two")
    return value


def parse_n_range(text):
    """``a:b`` or ``a:b:step``, inclusive of ``b``."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"n-range must be a:b[:step], got {text!r}")
    try:
        a, b = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
    except ValueError:
        raise argparse.ArgumentTypeError(f"n-range must contain integers, got {text!r}")
    if a < 1 or b < a or step < 1:
        raise argparse.ArgumentTypeError(f"n-range needs 1 <= a <= b and step >= 1, got {text!r}")
    return list(range(a, b + 1, step))


def build_parser():
    parser = _Parser(prog="sprecov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bounds", help="minimal measurement counts from the recovery conditions")
    b.add_argument("--p", type=_positive_int, required=True)
    b.add_argument("--k", type=_positive_int, required=True)
    b.add_argument("--lambda-sq", type=_finite)
    b.add_argument("--theorem", choices=["thm1", "cor1", "wang", "thm3", "cor2"], default="cor1")
    src = b.add_mutually_exclusive_group()
    src.add_argument("--G", type=_finite, dest="G")
    src.add_argument("--spectrum", help="CSV with header omega,S")
    b.add_argument("--slack", type=_finite, default=bnd.DEFAULT_SLACK,
                   help="Fano additive constant in nats (default 1; ln 2 is the stricter form)")
    b.add_argument("--cor2-substitution", choices=["geometric", "literal"], default="geometric")
    fmt = b.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")

    v = sub.add_parser("validate", help="run numerical invariant suites")
    v.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    v.add_argument("--trials", type=_positive_int, required=True)
    v.add_argument("--seed", type=_seed, required=True)
    v.add_argument("--json", action="store_true")

    s = sub.add_parser("simulate", help="Monte Carlo failure-rate sweep over n")
    s.add_argument("--p", type=_positive_int, required=True)
    s.add_argument("--k", type=_positive_int, required=True)
    s.add_argument("--m", type=_positive_int)
    s.add_argument("--lambda-sq", type=_finite, required=True)
    s.add_argument("--xi", type=_finite, default=0.0)
    s.add_argument("--n-range", type=parse_n_range, required=True)
    s.add_argument("--trials", type=_positive_int, required=True)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--epsilon", type=_finite, required=True)
    s.add_argument("--metric", choices=["exact", "topk"], default="exact")
    s.add_argument("--cap", type=_positive_int, default=200_000)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", help="curve CSV path (default: stdout)")
    s.add_argument("--log", help=f"run log path (default: ${LOG_ENV} or ./{DEFAULT_LOG})")

    r = sub.add_parser("regimes", help="growth-law stability check of the cor1 n_min for one scaling regime")
    r.add_argument("--row", type=int, choices=range(1, 7), required=True)
    r.add_argument("--p-min", type=_power_of_two, required=True)
    r.add_argument("--p-max", type=_power_of_two, required=True)
    r.add_argument("--out", help="ratio table CSV path (default: stdout)")
    return parser


# ------------------------------------------------------------------ bounds

def _bound_table(result, out):
    print(f"theorem={result.theorem} p={result.p} k={result.k} "
          f"n_min={result.n_min if result.n_min is not None else '-'} status={result.status}",
          file=out)
    for key in ("G_log", "G_level", "G_inf", "max_f", "last_scanned_n"):
        if key in result.extra:
            print(f"{key}={result.extra[key]!r}", file=out)
    if result.G is not None and not isinstance(result.G, list):
        print(f"G={result.G!r}", file=out)
    for row in result.per_m:
        if "f" in row:
            print(f"  m={row['m']:<6d} f={row['f']:.6g}", file=out)
        else:
            rhs = "out-of-domain" if row["rhs"] is None else f"{row['rhs']:.6g}"
            print(f"  m={row['m']:<6d} lhs={row['lhs']:.6g} rhs={rhs} holds={row['holds']}",
                  file=out)


def cmd_bounds(args, out=sys.stdout):
    needs_lambda = args.theorem in ("thm1", "cor1", "wang")
    if needs_lambda and args.lambda_sq is None:
        raise UsageError(f"--lambda-sq is required for --theorem {args.theorem}")
    if args.theorem == "cor2" and args.spectrum is None:
        raise UsageError("--theorem cor2 needs --spectrum")
    if args.theorem == "thm3" and args.G is None and args.spectrum is None:
        raise UsageError("--theorem thm3 needs --G or --spectrum")
    if args.k > args.p:
        raise DomainError(f"need k <= p, got k={args.k}, p={args.p}")
    sm = SignalModel.from_lambda_sq(args.lambda_sq) if args.lambda_sq is not None else None
    if args.theorem == "thm1":
        result = bnd.thm1_min_n(args.p, args.k, sm, args.slack)
    elif args.theorem == "cor1":
        result = bnd.cor1_min_n(args.p, args.k, sm, args.slack)
    elif args.theorem == "wang":
        result = bnd.wang_min_n(args.p, args.k, sm, args.slack)
    elif args.theorem == "thm3":
        if args.G is not None:
            G = args.G
        else:
            G = SpectrumSummary.from_csv(args.spectrum).G_inf
        result = bnd.thm3_min_n(args.p, args.k, G, args.slack)
    else:
        spectrum = SpectrumSummary.from_csv(args.spectrum)
        result = bnd.cor2_min_n(args.p, args.k, spectrum, args.slack, args.cor2_substitution)
    if args.json:
        print(result.to_json(), file=out)
    elif args.csv:
        result.to_csv(out)
    else:
        _bound_table(result, out)
    if not result.satisfiable:
        print(f"unsatisfiable: {result.status}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


# ---------------------------------------------------------------- validate

def cmd_validate(args, out=sys.stdout):
    if args.suite in ("wishart", "all") and args.trials < 100:
        raise UsageError("the wishart suite needs --trials >= 100")
    checks = run_suite(args.suite, args.trials, args.seed)
    if args.json:
        from .validation import checks_to_json
        print(checks_to_json(checks), file=out)
    else:
        for c in checks:
            print(c.line(), file=out)
    return EXIT_OK if all_passed(checks) else EXIT_PROPERTY


# ---------------------------------------------------------------- simulate

def _digest(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def append_run_record(path, record):
    line = json.dumps(record, sort_keys=True) + "\n"
    with open(path, "a", encoding="utf-8") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            fh.write(line)
            fh.flush()
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def cmd_simulate(args, out=sys.stdout, argv=None):
    metric = "top_k" if args.metric == "topk" else "exact_support"
    template = ExperimentConfig(p=args.p, k=args.k, m=args.m, n=args.n_range[0],
                                lambda_sq=args.lambda_sq, xi=args.xi, trials=args.trials,
                                master_seed=args.seed, error_metric=metric, cap=args.cap)
    result = sweep_n(template, args.n_range, args.epsilon, n_jobs=args.jobs)
    curve_csv = result.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(curve_csv)
    else:
        out.write(curve_csv)

    sm = SignalModel.from_lambda_sq(args.lambda_sq)
    summary = {"n_star": result.n_star}
    for name, fn in (("cor1", bnd.cor1_min_n), ("wang", bnd.wang_min_n), ("thm1", bnd.thm1_min_n)):
        res = fn(args.p, args.k, sm)
        summary[f"{name}_n_min"] = res.n_min if res.n_min is not None else res.status
    print(" ".join(f"{k}={v}" for k, v in summary.items()),
          file=sys.stderr if not args.out else out)

    params = {k: v for k, v in vars(args).items() if k not in ("log", "out", "command")}
    record = {
        "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(),
        "subcommand": "simulate",
        "params": params,
        "argv": list(argv) if argv is not None else None,
        "config_hash": _digest(json.dumps(params, sort_keys=True)),
        "experiment_hash": template.config_hash(),
        "master_seed": args.seed,
        "output_digest": _digest(curve_csv),
        "summary": summary,
    }
    append_run_record(args.log or os.environ.get(LOG_ENV) or DEFAULT_LOG, record)
    return EXIT_OK


# ----------------------------------------------------------------- regimes

REGIME_FIELDS = ["row", "p", "k", "lambda_sq", "n_min", "g", "ratio", "successive"]


def cmd_regimes(args, out=sys.stdout):
    if args.p_max < args.p_min:
        raise UsageError("--p-max must be >= --p-min")
    ps = []
    p = args.p_min
    while p <= args.p_max:
        ps.append(p)
        p *= 2
    if len(ps) < 4:
        raise UsageError(f"need at least 4 powers of two in [p-min, p-max], got {len(ps)}")
    table = bnd.regime_scaling_check(args.row, ps)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REGIME_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in table["rows"]:
        writer.writerow({"row": args.row, **{k: _cell(row[k]) for k in REGIME_FIELDS[1:]}})
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        out.write(buf.getvalue())
    print(f"row={args.row} growth={table['growth']} spread={table['spread']:.4f} "
          f"tolerance={table['tolerance']} stable={table['stable']}",
          file=out if args.out else sys.stderr)
    return EXIT_OK if table["stable"] else EXIT_PROPERTY


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


# -------------------------------------------------------------------- main

def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "bounds":
            return cmd_bounds(args, out)
        if args.command == "validate":
            return cmd_validate(args, out)
        if args.command == "simulate":
            return cmd_simulate(args, out, argv)
        return cmd_regimes(args, out)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_USAGE
    except EnumerationCapError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (DomainError, OSError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
