"""Command-line interface.

    veritas run --config cfg.json [--seed N] [--out DIR]
    veritas ngram --corpus file.txt --sentence "the cat sat" [--n N]
    veritas logic --model model.json --point p0 --formula "K{1} p"

Exit codes: 0 success, 2 validation/usage failure, 3 runtime error.
Set VERITAS_NO_COLOR to disable ANSI color.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import epistemic, ngram
from .experiments import ConfigError, ExperimentConfig, run, validate

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _color_enabled() -> bool:
    return "VERITAS_NO_COLOR" not in os.environ and sys.stdout.isatty()


def _heading(text: str) -> str:
    if _color_enabled():
        return f"\x1b[1;36m{text}\x1b[0m"
    return text


def _cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            config = ExperimentConfig.from_json(fh.read())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    violations = validate(config)
    if violations:
        print(_heading("config validation failed"))
        for item in violations:
            print(f"  - {item}")
        return EXIT_VALIDATION
    try:
        report = run(config)
    except ConfigError as exc:
        for item in exc.violations:
            print(f"  - {item}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - boundary reporting
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(_heading("run complete"))
    print(report.summary())
    return EXIT_OK


def _cmd_ngram(args) -> int:
    try:
        with open(args.corpus, "rb") as fh:
            text = fh.read()
        corpus, table = ngram.ingest(text, n_max=args.n)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ngram.EmptyCorpus, ngram.EncodingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    tokens = args.sentence.split()
    if not tokens:
        print("error: empty sentence", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        prob = ngram.sentence_prob(table, tokens)
    except (ngram.ZeroContext, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    check = ngram.direct_observation_check(table, corpus, tokens)
    print(_heading(f"P({args.sentence!r})"))
    print(f"  chain rule : {prob} ({float(prob):.6g})")
    print(f"  brute force: {check.brute_force_value} "
          f"({float(check.brute_force_value):.6g})")
    print(f"  equal      : {check.equal}")
    return EXIT_OK


def _cmd_logic(args) -> int:
    try:
        with open(args.model) as fh:
            model = epistemic.KripkeModel.from_json(fh.read())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: invalid model: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        formula = epistemic.parse(args.formula)
    except epistemic.FormulaSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        value = epistemic.evaluate(model, args.point, formula)
    except (epistemic.UnknownAgent, epistemic.UnknownPoint) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(_heading(f"{epistemic.pretty(formula)} at {args.point}"))
    print(f"  {value}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="veritas",
                                     description="Deterministic learnability experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_ngram = sub.add_parser("ngram", help="exact sentence probability from a corpus")
    p_ngram.add_argument("--corpus", required=True)
    p_ngram.add_argument("--sentence", required=True)
    p_ngram.add_argument("--n", type=int, default=12)
    p_ngram.set_defaults(func=_cmd_ngram)

    p_logic = sub.add_parser("logic", help="evaluate a formula at a model point")
    p_logic.add_argument("--model", required=True)
    p_logic.add_argument("--point", required=True)
    p_logic.add_argument("--formula", required=True)
    p_logic.set_defaults(func=_cmd_logic)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
