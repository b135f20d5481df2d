"""Command-line entry point.

Exit codes: 0 success, 2 usage, 3 input format, 4 reject, 5 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import __version__
from .evaluator import EvaluationError, evaluate
from .grammar import ConfigError, HypothesisClassConfig
from .learner import (
    AuditViolation,
    ContradictoryLabels,
    Hypothesis,
    LearnerError,
    Reject,
    StaleIndexError,
    TrainingSet,
    evaluate_hypothesis,
    learn,
)
from .locality import LocalisationError
from .parser import ParseError, parse
from .precompute import IndexFileError, load_index, precompute, save_index
from .relstore import AccessAudit, LocalOracle, RelstoreError, ingest

EXIT_USAGE, EXIT_INPUT, EXIT_REJECT, EXIT_INTERNAL = 2, 3, 4, 5

GRAMMAR_HELP = """\
expression syntax (tightest binding last):
  formula  := formula '|' formula | formula '&' formula | '!' formula
            | 'exists' VAR '.' formula | 'forall' VAR '.' formula
            | REL '(' VARS ')' | VAR '=' VAR | VAR '!=' VAR
            | 'dist' '(' VAR ',' VAR ')' '<=' INT
            | PRED '(' term, ... ')' | 'true' | 'false' | '(' formula ')'
  term     := term '+' term | term '-' term | term '*' term
            | '#' '(' VARS ')' '.' formula | INT | '-' term | '(' term ')'
  quantifiers and '#' bind to the next unary formula; parenthesise bodies.
  built-in numerical predicates: Peq, Pleq, Pprime, Pdivides
  (arguments of a predicate may share at most one free variable).
example: #(z1,z2).(Author(x,z1) & Citation(z2,z1))

exit codes: 0 ok, 2 usage, 3 input format, 4 reject, 5 internal error
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _load_config(path: str | None, fallback: dict | None = None) -> HypothesisClassConfig:
    if path is None:
        if fallback is None:
            raise ConfigError("a --config file is required")
        return HypothesisClassConfig.from_json(fallback)
    with open(path, encoding="utf-8") as fh:
        return HypothesisClassConfig.from_json(json.load(fh))


def _read_training(path: str):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
                pairs.append((tuple(str(e) for e in rec["tuple"]), int(rec["label"])))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"line {lineno}: bad training record ({exc})") from None
    return pairs


def cmd_precompute(args) -> int:
    s = ingest(args.db)
    cfg = _load_config(args.config)
    ix = precompute(s, cfg)
    save_index(ix, args.index)
    print(json.dumps({"index": args.index, "entries": len(ix.table), **ix.meta["stats"]}, sort_keys=True))
    return 0


def cmd_learn(args) -> int:
    ix = load_index(args.index)
    cfg = _load_config(args.config, ix.meta["cfg"])
    try:
        ts = TrainingSet.from_pairs(_read_training(args.train), ix.structure)
    except ContradictoryLabels:
        print("reject: contradictory labels")
        return EXIT_REJECT
    audit = AccessAudit()
    result = learn(ts, ix, cfg, LocalOracle(ix.structure, audit))
    if isinstance(result, Reject):
        print(f"reject: {result.reason}")
        return EXIT_REJECT
    doc = result.to_json(ix.structure)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
    print(json.dumps({"hypothesis": args.out, "term": doc["term"], "params": doc["params"], "audit": audit.snapshot()}))
    return 0


def cmd_eval(args) -> int:
    s = ingest(args.db)
    e = parse(args.term)
    asg = {}
    for item in args.assign or []:
        var, _, val = item.partition("=")
        if not _:
            raise ValueError(f"assignment {item!r} must look like var=element")
        asg[var] = val
    print(json.dumps(evaluate(e, s, asg)))
    return 0


def cmd_evalh(args) -> int:
    ix = load_index(args.index)
    with open(args.hypothesis, encoding="utf-8") as fh:
        h = Hypothesis.from_json(json.load(fh), ix.structure)
    audit = AccessAudit()
    oracle = LocalOracle(ix.structure, audit)
    for tup in args.tuple:
        names = tup.split(",")
        print(json.dumps({"tuple": names, "value": evaluate_hypothesis(h, names, ix, oracle)}))
    return 0


def cmd_check(args) -> int:
    from .checks import run_checks

    report = run_checks(args.seed, args.instances)
    print(json.dumps(report, sort_keys=True))
    return 0 if report["failures"] == 0 else EXIT_INTERNAL


def cmd_bench(args) -> int:
    from .bench import run_bench

    rows = run_bench([int(x) for x in args.n.split(",")], args.d, args.s, args.seed, ell=args.ell, repeat=args.repeat)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["n", "d", "s", "phase", "wall_time", "oracle_calls"])
        for r in rows:
            w.writerow([r["n"], r["d"], r["s"], r["phase"], f"{r['wall_time']:.6f}", r["oracle_calls"]])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="foclearn",
        description="Learn counting-logic queries over bounded-degree relational data.",
        epilog=GRAMMAR_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    sp = sub.add_parser("precompute", help="build the index for a database and configuration")
    sp.add_argument("--db", required=True)
    sp.add_argument("--config", required=True)
    sp.add_argument("--index", required=True)
    sp.set_defaults(fn=cmd_precompute)

    sp = sub.add_parser("learn", help="learn a hypothesis from labelled tuples")
    sp.add_argument("--index", required=True)
    sp.add_argument("--train", required=True, help='JSON lines {"tuple": [...], "label": int}')
    sp.add_argument("--config", help="defaults to the configuration stored in the index")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_learn)

    sp = sub.add_parser("eval", help="evaluate an expression on a database",
                        epilog=GRAMMAR_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sp.add_argument("--db", required=True)
    sp.add_argument("--term", required=True, help="formula or term")
    sp.add_argument("--assign", action="append", help="var=element, repeatable")
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("evalh", help="evaluate a stored hypothesis")
    sp.add_argument("--index", required=True)
    sp.add_argument("--hypothesis", required=True)
    sp.add_argument("--tuple", action="append", required=True, help="comma-separated elements, repeatable")
    sp.set_defaults(fn=cmd_evalh)

    sp = sub.add_parser("check", help="cross-check optimised paths against brute force")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--instances", type=int, default=50)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("bench", help="scaling benchmark, CSV output")
    sp.add_argument("--n", default="1000,2000,4000,8000")
    sp.add_argument("--d", type=int, default=4)
    sp.add_argument("--s", type=int, default=8)
    sp.add_argument("--ell", type=int, default=0)
    sp.add_argument("--repeat", type=int, default=7, help="precompute runs per n; the fastest is reported")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ContradictoryLabels:
        print("reject: contradictory labels")
        return EXIT_REJECT
    except (AuditViolation, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (RelstoreError, ParseError, ConfigError, IndexFileError, StaleIndexError,
            LocalisationError, EvaluationError, LearnerError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
