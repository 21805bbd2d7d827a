"""Command-line front end.

Exit status: 0 accepted, 1 rejected, 2 usage, grammar or input error (and
any correspondence failure under ``--oracle``).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .ahfa import build_ahfa
from .bench import BenchError, fit_growth, measure, repeat, to_csv
from .grammar import GrammarError, parse_grammar, preprocess
from .input import InputError, InputStream, recognize_stream
from .oracle import correspondence_check, oracle_run
from .recognizer import Session

EXIT_ACCEPT, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _load_grammar(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read grammar {path}: {exc.strerror}") from None
    try:
        return parse_grammar(text)
    except GrammarError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _load_input(args, grammar) -> InputStream:
    try:
        if args.text is not None:
            return InputStream.from_text(args.text, grammar=grammar)
        try:
            text = Path(args.tokens).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read tokens {args.tokens}: {exc.strerror}") from None
        return InputStream.from_token_lines(text, grammar=grammar)
    except InputError as exc:
        raise UsageError(str(exc)) from None


def _quoted(names) -> str:
    return ", ".join(f"'{n}'" for n in sorted(names)) or "nothing"


def cmd_recognize(args, out) -> int:
    raw = _load_grammar(args.grammar)
    core = preprocess(raw)
    stream = _load_input(args, raw)
    tokens = [t for end in sorted(stream.by_end) for t in stream.by_end[end]]

    if args.no_leo:
        result = oracle_run(core, tokens, leo=False)
        out.write("accepted\n" if result.accepted else "rejected\n")
        return EXIT_ACCEPT if result.accepted else EXIT_REJECT

    trace = (lambda line: out.write(line + "\n")) if args.trace else None
    session = Session(core, leo=True, links=not args.no_links, trace=trace)
    ok = recognize_stream(session, stream)

    status = EXIT_ACCEPT if ok else EXIT_REJECT
    if ok:
        out.write("accepted\n")
    elif session.rejection is not None:
        out.write(session.rejection.message() + "\n")
    else:
        i = session.current_earleme
        out.write(f"rejected at earleme {i}; expected: {_quoted(session.expected_terminals(i))}\n")

    try:
        if args.expected_at is not None:
            names = session.expected_terminals(args.expected_at)
            out.write(f"expected at {args.expected_at}: {_quoted(names)}\n")
        if args.progress_at is not None:
            for entry in session.progress_report(args.progress_at):
                out.write(entry.format() + "\n")
    except IndexError as exc:
        raise UsageError(str(exc)) from None

    if args.oracle:
        reference = oracle_run(core, tokens, leo=True)
        n = min(len(session.sets), len(reference.sets))
        report = correspondence_check([session.eim_view(i) for i in range(n)], reference.sets[:n])
        words = ["consistent" if report.consistent else "inconsistent",
                 "complete" if report.complete else "incomplete"]
        out.write(f"correspondence: {' '.join(words)}\n")
        agree = reference.accepted == ok
        if not agree:
            out.write("acceptance: recognizer and oracle disagree\n")
        if not (report.ok and agree):
            status = EXIT_ERROR
    return status


def cmd_dump_ahfa(args, out) -> int:
    core = preprocess(_load_grammar(args.grammar))
    if core.trivial:
        out.write("trivial grammar: no states\n")
        return EXIT_ACCEPT
    out.write(build_ahfa(core).dump())
    return EXIT_ACCEPT


def cmd_bench(args, out) -> int:
    raw = _load_grammar(args.grammar)
    core = preprocess(raw)
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad --sizes value {args.sizes!r}") from None
    symbol = args.symbol
    if symbol is None:
        terminals = sorted(s.name for s in raw.symbols if s.terminal_allowed)
        if len(terminals) != 1:
            raise UsageError("grammar has several terminals; pick one with --symbol")
        symbol = terminals[0]
    try:
        rows = measure(core, repeat(symbol), sizes, leo=not args.no_leo, links=not args.no_links,
                       engine="oracle" if args.oracle else "marpa")
    except BenchError as exc:
        raise UsageError(str(exc)) from None
    out.write(to_csv(rows))
    if args.fit:
        try:
            slopes = fit_growth(rows)
        except BenchError as exc:
            raise UsageError(str(exc)) from None
        out.write("# slopes: " + " ".join(f"{k}={v:.3f}" for k, v in slopes.items()) + "\n")
    return EXIT_ACCEPT


def _earleme(value: str) -> int:
    n = int(value)
    if n < 0:
        raise argparse.ArgumentTypeError("earleme must be >= 0")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="marpa", description="Earley/Leo recognizer over AHFA states")
    sub = parser.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("recognize", help="recognize text or a token stream")
    rec.add_argument("grammar")
    src = rec.add_mutually_exclusive_group(required=True)
    src.add_argument("--text", help="input string, one token per character")
    src.add_argument("--tokens", metavar="FILE", help="token file: '<symbol> <start> <length>' lines")
    rec.add_argument("--trace", action="store_true", help="print one line per item attempt")
    rec.add_argument("--expected-at", type=_earleme, metavar="I")
    rec.add_argument("--progress-at", type=_earleme, metavar="I")
    rec.add_argument("--oracle", action="store_true", help="cross-check against the dotted-rule oracle")
    rec.add_argument("--no-leo", action="store_true", help="answer with the oracle, Leo items disabled")
    rec.add_argument("--no-links", action="store_true", help="do not record causal links")
    rec.set_defaults(func=cmd_recognize)

    dump = sub.add_parser("dump-ahfa", help="print the automaton")
    dump.add_argument("grammar")
    dump.set_defaults(func=cmd_dump_ahfa)

    bench = sub.add_parser("bench", help="item/attempt counts for symbol^n inputs, as CSV")
    bench.add_argument("grammar")
    bench.add_argument("--sizes", required=True, help="comma-separated input lengths")
    bench.add_argument("--symbol", help="terminal to repeat (default: the only terminal)")
    bench.add_argument("--no-leo", action="store_true")
    bench.add_argument("--no-links", action="store_true")
    bench.add_argument("--oracle", action="store_true", help="measure the dotted-rule oracle instead")
    bench.add_argument("--fit", action="store_true", help="append log-log growth slopes")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_ACCEPT
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
