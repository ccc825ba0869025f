"""``dcrv`` command line tool.

Exit codes: 0 success, 1 verification failure, 2 input validation,
3 resource cap exceeded.  Errors are written to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import sys

from . import distribution as dist_mod
from . import montecarlo, oracle, sampler
from .distribution import FormulaSource
from .errors import DCRVError
from .params import new_model
from .serialize import counts_field, csv_text, dumps

STRICT_TOLERANCE = 1e-9
RENORMALIZE_TOLERANCE = 1e-6

DEFAULT_VERIFY_P = [
    ("1/2", "1/2"),
    ("1/5", "4/5"),
    ("1/3", "1/3", "1/3"),
    ("1/5", "3/10", "1/2"),
]
DEFAULT_VERIFY_DELTAS = ("0", "1/4", "1/2", "3/4", "1")


class UsageError(DCRVError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _prob_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=_prob_list, help="comma-separated base probabilities")
    common.add_argument("--delta", help="dependency coefficient in [0, 1]")
    common.add_argument("--n", type=int, help="sequence length")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", help="write here instead of stdout")
    common.add_argument("--renormalize", action="store_true",
                        help=f"accept |sum(p) - 1| <= {RENORMALIZE_TOLERANCE} and rescale")

    parser = _Parser(prog="dcrv", description="Dependent categorical sequences and the generalized multinomial.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", parents=[common], help="generate sequences")
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--method", choices=("inverse", "sequential"), default="inverse")

    s = sub.add_parser("pmf", parents=[common], help="count-vector probabilities")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--counts", type=_int_list)
    g.add_argument("--table", action="store_true")

    s = sub.add_parser("moments", parents=[common], help="mean, covariance, correlation")
    s.add_argument("--printed-formulas", action="store_true",
                   help="use the published covariance variant instead of the enumeration-checked one")

    s = sub.add_parser("verify", parents=[common], help="closed forms against exhaustive enumeration")
    s.add_argument("--max-n", type=int, default=6)

    s = sub.add_parser("gof", parents=[common], help="chi-square test of sampled counts")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--expected-delta", help="test against the law with this delta instead")
    s.add_argument("--method", choices=("inverse", "sequential"), default="inverse")
    return parser


def _model(args, p=None, delta=None):
    p = p if p is not None else args.p
    delta = delta if delta is not None else args.delta
    if p is None or delta is None:
        raise UsageError("--p and --delta are required")
    tol = RENORMALIZE_TOLERANCE if args.renormalize else STRICT_TOLERANCE
    return new_model(p, delta, tolerance=tol)


def _require_n(args) -> int:
    if args.n is None or args.n < 1:
        raise UsageError("--n must be a positive integer")
    return args.n


def cmd_sample(args) -> tuple[str, int]:
    model = _model(args)
    n = _require_n(args)
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    seqs = sampler.sample_many(model, n, args.count, args.seed, args.method)
    if args.format == "csv":
        return csv_text(seqs), 0
    return "".join(dumps(list(e)) + "\n" for e in seqs), 0


def cmd_pmf(args) -> tuple[str, int]:
    model = _model(args)
    n = _require_n(args)
    if args.table:
        rows = dist_mod.pmf_table(model, n)
    else:
        rows = [(tuple(args.counts), dist_mod.pmf(model, n, args.counts))]
    if args.format == "csv":
        return csv_text(((counts_field(x), pr) for x, pr in rows), header=("counts", "probability")), 0
    if args.table:
        return dumps([{"counts": list(x), "probability": pr} for x, pr in rows]) + "\n", 0
    return dumps(rows[0][1]) + "\n", 0


def cmd_moments(args) -> tuple[str, int]:
    model = _model(args)
    n = _require_n(args)
    source = FormulaSource.PAPER_PRINTED if args.printed_formulas else FormulaSource.ORACLE_VERIFIED
    summary = dist_mod.moments(model, n, source)
    if args.format == "csv":
        rows = [("mean", i + 1, "", v) for i, v in enumerate(summary.mean)]
        for name, mat in (("covariance", summary.covariance), ("correlation", summary.correlation)):
            rows += [(name, i + 1, j + 1, v) for i, row in enumerate(mat) for j, v in enumerate(row)]
        return csv_text(rows, header=("quantity", "i", "j", "value")), 0
    out = summary.to_dict()
    out.update(model=model.to_dict(), n=n)
    return dumps(out) + "\n", 0


def _verify_models(args):
    if args.p is not None or args.delta is not None:
        return [_model(args)]
    return [new_model(p, d) for p in DEFAULT_VERIFY_P for d in DEFAULT_VERIFY_DELTAS]


def cmd_verify(args) -> tuple[str, int]:
    models = _verify_models(args)
    max_n = args.max_n
    if max_n < 1:
        raise UsageError("--max-n must be positive")
    for model in models:
        if model.K**max_n > oracle.DEFAULT_ENUMERATION_CAP:
            raise oracle.EnumerationTooLarge(
                f"{model.K}**{max_n} sequences exceed the cap of {oracle.DEFAULT_ENUMERATION_CAP}"
            )
    cases = []
    summary: dict[str, dict] = {}
    ok = True
    for model in models:
        for n in range(1, max_n + 1):
            rep = oracle.errata_report(model, n, seed=args.seed)
            inv = oracle.invariant_checks(model, n)
            inv_ok = all(c.passed for c in inv)
            ok &= rep.verified_ok and inv_ok
            case = rep.to_dict()
            case["invariants"] = [c.to_dict() for c in inv]
            case["invariants_ok"] = inv_ok
            cases.append(case)
            for name, check in rep.checks.items():
                s = summary.setdefault(name, {"role": check.role, "max_deviation": 0.0, "verdict": "exact"})
                s["max_deviation"] = max(s["max_deviation"], float(check.max_deviation))
                rank = {"exact": 0, "within_tolerance": 1, "deviates": 2}
                if rank[check.verdict] > rank[s["verdict"]]:
                    s["verdict"] = check.verdict
    code = 0 if ok else 1
    if args.format == "csv":
        rows = [(name, s["role"], s["max_deviation"], s["verdict"]) for name, s in summary.items()]
        return csv_text(rows, header=("formula", "role", "max_deviation", "verdict")), code
    report = {"ok": ok, "max_n": max_n, "summary": summary, "cases": cases}
    return dumps(report) + "\n", code


def cmd_gof(args) -> tuple[str, int]:
    model = _model(args)
    n = _require_n(args)
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    expected = None
    if args.expected_delta is not None:
        expected = new_model(model.p, args.expected_delta)
    trial = montecarlo.run_count_trial(model, n, args.samples, args.seed, expected, method=args.method)
    if args.format == "csv":
        rows = [(counts_field(c.counts), c.expected_prob, c.observed) for c in trial.cells]
        return csv_text(rows, header=("counts", "expected_prob", "observed")), 0
    out = trial.to_dict()
    out.update(model=model.to_dict(), n=n)
    if expected is not None:
        out["expected_delta"] = float(expected.delta)
    return dumps(out) + "\n", 0


COMMANDS = {
    "sample": cmd_sample,
    "pmf": cmd_pmf,
    "moments": cmd_moments,
    "verify": cmd_verify,
    "gof": cmd_gof,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text, code = COMMANDS[args.command](args)
    except DCRVError as err:
        sys.stderr.write(dumps(err.to_dict()) + "\n")
        return err.exit_code
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
