"""Reference recognizers for differential testing.

:class:`EarleyOracle` is a plain Earley recognizer over single dotted rules
(optionally with Leo items), built by running the inference rules to a fixed
point with no attention to efficiency. :func:`brute_force_accepts` decides
membership by enumerating the language up to a length bound and shares no
code with either recognizer.
"""
from __future__ import annotations

import copy
import random
from collections import Counter
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from .ahfa import DottedRule
from .grammar import Grammar, Symbol
from .input import Token

DEFAULT_BOUND = 8


class EIMT(NamedTuple):
    dr: DottedRule
    origin: int


class LIMT(NamedTuple):
    top_dr: DottedRule
    transition: int
    top_origin: int


class EarleyOracle:
    """Earley (and Earley+Leo) recognizer at the dotted-rule level.

    ``leo`` enables Leo items restricted to penults of right-recursive rules;
    ``all_penults`` widens them to every penult, as in Leo's original method.
    ``rng`` randomizes the worklist order.
    """

    def __init__(self, grammar: Grammar, leo: bool = True, all_penults: bool = False,
                 rng: random.Random | None = None):
        self.grammar = grammar
        self.leo = leo
        self.all_penults = all_penults
        self.rng = rng
        self.sets: list[set[EIMT]] = []
        self.postdot: list[dict[int, list[EIMT]]] = []
        self.limts: list[dict[int, LIMT]] = []
        self.attempts: Counter = Counter()
        self.duplicates: Counter = Counter()

    def fork(self) -> "EarleyOracle":
        other = copy.copy(self)
        other.sets = list(self.sets)
        other.postdot = list(self.postdot)
        other.limts = list(self.limts)
        other.attempts = Counter(self.attempts)
        other.duplicates = Counter(self.duplicates)
        return other

    def _resolve(self, symbol) -> int | None:
        if isinstance(symbol, Symbol):
            return symbol.id
        if isinstance(symbol, int):
            return symbol
        sym = self.grammar.terminal(symbol)
        return sym.id if sym is not None else None

    def initialize(self) -> None:
        if self.grammar.trivial:
            self.sets.append(set())
            self._finish(0)
            return
        self._build(0, [(EIMT(DottedRule(self.grammar.accept_rule, 0), 0), "init")])

    def advance(self, tokens: Iterable[Token]) -> None:
        i = len(self.sets)
        seeds = []
        for token in tokens:
            assert token.start + token.length == i
            sid = self._resolve(token.symbol)
            if sid is None or token.start >= i:
                continue
            for pred in self.postdot[token.start].get(sid, ()):
                seeds.append((EIMT(pred.dr.next, pred.origin), "scan"))
        self._build(i, seeds)

    def read(self, symbol) -> None:
        i = len(self.sets)
        self.advance([Token(symbol, i - 1, 1)])

    def _build(self, i: int, seeds) -> None:
        current: set[EIMT] = set()
        self.sets.append(current)
        work: list[EIMT] = []

        def add(item: EIMT, op: str) -> None:
            self.attempts[op] += 1
            if item in current:
                self.duplicates[op] += 1
            else:
                current.add(item)
                work.append(item)

        for item, op in seeds:
            add(item, op)
        g = self.grammar
        while work:
            if self.rng is not None:
                k = self.rng.randrange(len(work))
                work[k], work[-1] = work[-1], work[k]
            dr, origin = work.pop()
            if dr.is_completion:
                assert origin < i, "completion with a null span"
                lhs = dr.rule.lhs.id
                limt = self.limts[origin].get(lhs) if self.leo else None
                if limt is not None:
                    add(EIMT(limt.top_dr, limt.top_origin), "leo")
                else:
                    for pred in self.postdot[origin].get(lhs, ()):
                        add(EIMT(pred.dr.next, pred.origin), "reduce")
            else:
                for rule in g.rules_for(dr.postdot):
                    if rule is not g.accept_rule:
                        add(EIMT(DottedRule(rule, 0), i), "predict")
        self._finish(i)

    def _finish(self, i: int) -> None:
        by_symbol: dict[int, list[EIMT]] = {}
        for item in self.sets[i]:
            sym = item.dr.postdot
            if sym is not None:
                by_symbol.setdefault(sym.id, []).append(item)
        self.postdot.append(by_symbol)
        limts: dict[int, LIMT] = {}
        self.limts.append(limts)
        if self.leo:
            for sym in sorted(by_symbol):
                self._limt(i, sym, set())

    def leo_eligible(self, i: int, item: EIMT) -> bool:
        dr = item.dr
        if dr.penult is None:
            return False
        if not (self.all_penults or dr.rule.is_right_recursive):
            return False
        return self.postdot[i].get(dr.postdot.id) == [item]

    def _limt(self, i: int, sym: int, busy: set[int]) -> LIMT | None:
        limts = self.limts[i]
        if sym in limts:
            return limts[sym]
        items = self.postdot[i].get(sym, ())
        if len(items) != 1 or sym in busy:
            return None
        bottom = items[0]
        if not self.leo_eligible(i, bottom):
            return None
        lhs = bottom.dr.rule.lhs.id
        if bottom.origin == i:
            busy.add(sym)
            pred = self._limt(i, lhs, busy)
            busy.discard(sym)
        else:
            pred = self.limts[bottom.origin].get(lhs)
        if pred is not None:
            limt = LIMT(pred.top_dr, sym, pred.top_origin)
        else:
            limt = LIMT(bottom.dr.next, sym, bottom.origin)
        limts[sym] = limt
        return limt

    def accepted(self) -> bool:
        g = self.grammar
        if len(self.sets) <= 1:
            return g.null_accepts
        if g.trivial:
            return False
        final = EIMT(DottedRule(g.accept_rule, 1), 0)
        return final in self.sets[-1]

    @property
    def total_items(self) -> int:
        return sum(len(s) for s in self.sets)

    @property
    def total_attempts(self) -> int:
        return sum(self.attempts.values())

    @property
    def max_set_size(self) -> int:
        return max((len(s) for s in self.sets), default=0)

    def confirmed_duplicates(self) -> int:
        """Duplicate attempts outside prediction (which is charged nothing)."""
        return sum(n for op, n in self.duplicates.items() if op != "predict")


class OracleResult(NamedTuple):
    sets: list[frozenset[EIMT]]
    limts: list[dict[int, LIMT]]
    accepted: bool
    oracle: EarleyOracle


def _as_tokens(inp) -> list[Token]:
    seq = list(inp)
    if seq and all(isinstance(t, Token) for t in seq):
        return seq
    return [Token(sym, i, 1) for i, sym in enumerate(seq)]


def oracle_run(grammar: Grammar, inp: Sequence, leo: bool = True, **options) -> OracleResult:
    """Run the oracle over a symbol sequence or a list of tokens."""
    tokens = _as_tokens(inp)
    oracle = EarleyOracle(grammar, leo=leo, **options)
    oracle.initialize()
    end = max((t.end for t in tokens), default=0)
    by_end: dict[int, list[Token]] = {}
    for t in tokens:
        by_end.setdefault(t.end, []).append(t)
    for i in range(1, end + 1):
        oracle.advance(by_end.get(i, []))
    return OracleResult([frozenset(s) for s in oracle.sets], oracle.limts, oracle.accepted(), oracle)


class CorrespondenceReport(NamedTuple):
    consistent: bool
    complete: bool
    witnesses: list[tuple]

    @property
    def ok(self) -> bool:
        return self.consistent and self.complete


def correspondence_check(marpa_sets: Sequence, oracle_sets: Sequence) -> CorrespondenceReport:
    """Compare Marpa sets with oracle sets item by item.

    ``marpa_sets[i]`` lists ``(dotted rules, origin)`` pairs, one per EIM;
    ``oracle_sets[i]`` is a collection of EIMTs. Witnesses are
    ``("inconsistent", i, eim)`` and ``("missing", i, eimt)`` tuples.
    """
    witnesses: list[tuple] = []
    consistent = complete = True
    for i in range(max(len(marpa_sets), len(oracle_sets))):
        eims = marpa_sets[i] if i < len(marpa_sets) else []
        eimts = set(oracle_sets[i]) if i < len(oracle_sets) else set()
        covered: set[EIMT] = set()
        for drs, origin in eims:
            matched = False
            for dr in drs:
                item = EIMT(dr, origin)
                if item in eimts:
                    matched = True
                    covered.add(item)
            if not matched:
                consistent = False
                witnesses.append(("inconsistent", i, (drs, origin)))
        for item in eimts - covered:
            complete = False
            witnesses.append(("missing", i, item))
    return CorrespondenceReport(consistent, complete, witnesses)


# ---------------------------------------------------------------------------
# brute force


def _token_name(sym: Symbol) -> str:
    return sym.source.name if sym.source is not None else sym.name


@lru_cache(maxsize=128)
def language(grammar: Grammar, max_len: int) -> dict[Symbol, frozenset[tuple[str, ...]]]:
    """Every string of length <= max_len derivable from each symbol."""
    lang: dict[Symbol, set[tuple[str, ...]]] = {
        s: ({(_token_name(s),)} if s.terminal_allowed and max_len > 0 else set())
        for s in grammar.symbols
    }
    changed = True
    while changed:
        changed = False
        for rule in grammar.rules:
            partial: set[tuple[str, ...]] = {()}
            for sym in rule.rhs:
                partial = {p + q for p in partial for q in lang[sym] if len(p) + len(q) <= max_len}
                if not partial:
                    break
            target = lang[rule.lhs]
            before = len(target)
            target |= partial
            if len(target) != before:
                changed = True
    return {s: frozenset(v) for s, v in lang.items()}


def brute_force_accepts(grammar: Grammar, string: Sequence[str], bound: int = DEFAULT_BOUND) -> bool:
    """Exact membership test by enumerating the language up to ``bound``."""
    string = tuple(string)
    if len(string) > bound:
        raise ValueError(f"input length {len(string)} exceeds the brute-force bound {bound}")
    if not string or grammar.start is None:
        return not string and grammar.null_accepts
    return string in language(grammar, bound)[grammar.start]
