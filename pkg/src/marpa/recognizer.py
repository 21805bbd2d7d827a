"""The Marpa recognizer: Earley sets of AHFA-state items with Leo memoization.

A :class:`Session` owns the Earley sets of one parse. Each earleme is built
in two passes, scan then reduction, so that when tokens ending at the next
earleme are scanned every earlier set is already complete and the expected
terminals can be queried.
"""
from __future__ import annotations

import itertools
from typing import Callable, Iterable, NamedTuple

from .ahfa import Automaton, DottedRule, build_ahfa
from .grammar import CORE, Grammar, Symbol
from .input import Token

# serial numbers of Earley sets; PSL entries are stamped with the serial of
# the set under construction, which stays unique across forked sessions
_serials = itertools.count()


class RecognizerError(RuntimeError):
    pass


class Link(NamedTuple):
    kind: str  # init | scan | reduction | leo | prediction
    predecessor: object
    cause: object
    symbol: int | None


class LIM(NamedTuple):
    top_state: int
    transition: int
    top_origin: "EarleySet"


class EIM:
    __slots__ = ("state", "origin", "links")

    def __init__(self, state: int, origin: "EarleySet", links: list | None):
        self.state = state
        self.origin = origin
        self.links = links

    def __repr__(self) -> str:
        return f"EIM({self.state}, @{self.origin.earleme})"


class EarleySet:
    __slots__ = ("earleme", "serial", "items", "postdot", "leo", "psl_stamp", "psl_item", "attempts")

    def __init__(self, earleme: int, state_count: int):
        self.earleme = earleme
        self.serial = next(_serials)
        self.items: list[EIM] = []
        self.postdot: dict[int, list[EIM]] = {}
        self.leo: dict[int, LIM] = {}
        self.psl_stamp = [-1] * state_count
        self.psl_item: list[EIM | None] = [None] * state_count
        self.attempts = 0

    def transitions(self, symbol: int) -> LIM | list[EIM]:
        lim = self.leo.get(symbol)
        if lim is not None:
            return lim
        return self.postdot.get(symbol, [])

    def __len__(self) -> int:
        return len(self.items)

    def __repr__(self) -> str:
        return f"EarleySet({self.earleme}, {len(self.items)} items)"


class Rejection(NamedTuple):
    earleme: int
    expected: tuple[str, ...]
    reason: str

    def message(self) -> str:
        if self.reason.startswith("input gap"):
            return f"rejected: {self.reason}"
        expected = ", ".join(f"'{t}'" for t in self.expected) or "nothing"
        return f"rejected at earleme {self.earleme}; expected: {expected}"


class ProgressEntry(NamedTuple):
    rule: object  # a user-grammar Rule, or the internal accept rule
    dot: int
    origin: int

    def format(self) -> str:
        return f"{self.rule.format(self.dot)} @{self.origin}"


class Session:
    """One recognition run over a preprocessed (core, augmented) grammar."""

    def __init__(
        self,
        grammar: Grammar,
        automaton: Automaton | None = None,
        *,
        leo: bool = True,
        links: bool = True,
        trace: Callable[[str], None] | None = None,
        checks: bool = False,
    ):
        if grammar.stage != CORE or not (grammar.augmented or grammar.trivial):
            raise RecognizerError("the recognizer needs a preprocessed grammar")
        self.grammar = grammar
        if automaton is None and not grammar.trivial:
            automaton = build_ahfa(grammar)
        self.automaton = automaton
        self.states = automaton.states if automaton is not None else []
        self.leo = leo
        self.links = links
        self.trace = trace
        self.checks = checks
        self.sets: list[EarleySet] = []
        self.current_earleme = 0
        self.rejection: Rejection | None = None
        # attempts are charged only for confirmed items; predicted items and
        # the attempts to add them are counted separately
        self.total_items = 0
        self.confirmed_items = 0
        self.total_attempts = 0
        self.predicted_attempts = 0
        self.duplicate_links = 0
        self.predicted_duplicates = 0
        self.leo_reductions = 0
        self.leo_singleton_violations = 0
        self.set_bound_violations = 0
        self.max_set_size = 0

    # -- construction -----------------------------------------------------

    def _new_set(self, earleme: int) -> EarleySet:
        return EarleySet(earleme, len(self.states))

    def initialize(self) -> None:
        if self.sets:
            raise RecognizerError("session is already initialized")
        es = self._new_set(0)
        self.sets.append(es)
        if self.grammar.trivial:
            return
        self.add_eim_pair(es, self.automaton.initial, es, Link("init", None, None, None), "init")
        self.reduction_pass(0)

    def _symbol_id(self, symbol) -> int | None:
        if isinstance(symbol, Symbol):
            return symbol.id
        if isinstance(symbol, int):
            return symbol
        sym = self.grammar.terminal(symbol)
        return sym.id if sym is not None else None

    def scan_pass(self, i: int, tokens: Iterable[Token]) -> None:
        es = self.sets[i]
        states = self.states
        for token in tokens:
            if token.start + token.length != i:
                raise RecognizerError(f"token {token} does not end at earleme {i}")
            sid = self._symbol_id(token.symbol)
            if sid is None:
                continue
            for pred in self.sets[token.start].postdot.get(sid, ()):
                to = states[pred.state].goto_table[sid]
                self.add_eim_pair(es, to, pred.origin, Link("scan", pred, token, sid), "scan")

    def reduction_pass(self, i: int) -> None:
        es = self.sets[i]
        items = es.items
        states = self.states
        k = 0
        # items appended while reducing are visited by this same loop
        while k < len(items):
            work = items[k]
            for lhs in sorted(states[work.state].completed_lhs):
                self.reduce_one_lhs(i, work.origin, lhs, work)
            k += 1
        self.memoize_transitions(i)
        size = len(items)
        self.max_set_size = max(self.max_set_size, size)
        if size > (i + 1) * len(states):
            self.set_bound_violations += 1
        if self.checks:
            self.check_set(i)

    def memoize_transitions(self, i: int) -> None:
        es = self.sets[i]
        states = self.states
        postdot: dict[int, list[EIM]] = {}
        # symbol -> (dotted rule, origin, eim) while exactly one pair is seen
        unique: dict[int, tuple[DottedRule, EarleySet, EIM] | None] = {}
        for eim in es.items:
            for sym, drs in states[eim.state].postdot_rules.items():
                postdot.setdefault(sym, []).append(eim)
                if not self.leo:
                    continue
                for dr in drs:
                    seen = unique.get(sym, False)
                    if seen is False:
                        unique[sym] = (dr, eim.origin, eim)
                    elif seen is not None and (seen[0] != dr or seen[1] is not eim.origin):
                        unique[sym] = None
        es.postdot = postdot
        es.leo = {}
        for sym in sorted(unique):
            self._leo_item(es, sym, unique, set())

    def _leo_item(self, es: EarleySet, sym: int, unique, busy: set[int]) -> LIM | None:
        if sym in es.leo:
            return es.leo[sym]
        entry = unique.get(sym)
        if entry is None or sym in busy:
            return None
        dr, origin, bottom = entry
        if dr.penult is None or not dr.rule.is_right_recursive:
            return None
        lhs = dr.rule.lhs.id
        if origin is es:
            busy.add(sym)
            pred = self._leo_item(es, lhs, unique, busy)
            busy.discard(sym)
        else:
            pred = origin.leo.get(lhs)
        if pred is not None:
            lim = LIM(pred.top_state, sym, pred.top_origin)
        else:
            lim = LIM(self.states[bottom.state].goto_table[sym], sym, origin)
        es.leo[sym] = lim
        return lim

    def reduce_one_lhs(self, i: int, origin: EarleySet, lhs: int, cause: EIM | None = None) -> None:
        lim = origin.leo.get(lhs)
        if lim is not None:
            self.leo_reduction(i, lim, cause)
            return
        for pred in origin.postdot.get(lhs, ()):
            self.earley_reduction(i, pred, lhs, cause)

    def earley_reduction(self, i: int, pred: EIM, trans: int, cause: EIM | None = None) -> None:
        to = self.states[pred.state].goto_table.get(trans)
        if to is None:
            self.total_attempts += 1
            return
        self.add_eim_pair(self.sets[i], to, pred.origin, Link("reduction", pred, cause, trans), "reduce")

    def leo_reduction(self, i: int, lim: LIM, cause: EIM | None = None) -> None:
        # the LIM already stores the state after the top transition
        to = lim.top_state
        self.leo_reductions += 1
        if len(self.states[to].items) != 1:
            self.leo_singleton_violations += 1
        self.add_eim_pair(self.sets[i], to, lim.top_origin, Link("leo", lim, cause, lim.transition), "leo")

    def add_eim_pair(self, es: EarleySet, confirmed: int, origin: EarleySet, link: Link, op: str) -> None:
        eim = self._attempt(es, confirmed, origin, link, op, True)
        predicted = self.states[confirmed].null_goto
        if predicted is not None:
            self._attempt(es, predicted, es, Link("prediction", eim, None, None), "predict", False)

    def psl_is_new(self, es: EarleySet, origin: EarleySet, state: int) -> bool:
        if origin.psl_stamp[state] == es.serial:
            return False
        origin.psl_stamp[state] = es.serial
        return True

    def _attempt(self, es: EarleySet, state: int, origin: EarleySet, link: Link, op: str,
                 charged: bool) -> EIM:
        if charged:
            self.total_attempts += 1
            es.attempts += 1
        else:
            self.predicted_attempts += 1
        new = self.psl_is_new(es, origin, state)
        if new:
            eim = EIM(state, origin, [] if self.links else None)
            origin.psl_item[state] = eim
            es.items.append(eim)
            self.total_items += 1
            if charged:
                self.confirmed_items += 1
        else:
            eim = origin.psl_item[state]
            if charged:
                self.duplicate_links += 1
            else:
                self.predicted_duplicates += 1
        if eim.links is not None:
            eim.links.append(link)
        if self.trace is not None:
            self.trace(f"earleme={es.earleme} op={op} state={state} origin={origin.earleme} "
                       f"{'new' if new else 'dup'}")
        return eim

    # -- driving ----------------------------------------------------------

    def advance(self, tokens: Iterable[Token], spanning: bool = False) -> bool:
        """Build the next earleme from the tokens ending there.

        ``spanning`` says some token covers this earleme without ending at
        it, so an empty set is not yet a rejection. Returns False on reject.
        """
        if not self.sets:
            self.initialize()
        if self.rejection is not None:
            raise RecognizerError("session has already rejected its input")
        i = self.current_earleme + 1
        es = self._new_set(i)
        self.sets.append(es)
        self.scan_pass(i, tokens)
        if not es.items and not spanning:
            self.sets.pop()
            self.rejection = Rejection(i, self._last_expected(i), "no acceptable token")
            return False
        self.reduction_pass(i)
        self.current_earleme = i
        return True

    def read(self, symbol) -> bool:
        """Traditional input: one token of length 1 at the current earleme."""
        if not self.sets:
            self.initialize()
        return self.advance([Token(symbol, self.current_earleme, 1)])

    def reject(self, earleme: int, reason: str) -> None:
        self.rejection = Rejection(earleme, self._last_expected(earleme + 1), reason)

    def _last_expected(self, i: int) -> tuple[str, ...]:
        for j in range(min(i, len(self.sets)) - 1, -1, -1):
            if self.sets[j].items:
                return tuple(sorted(self.expected_terminals(j)))
        return ()

    def fork(self) -> "Session":
        """Copy of this session sharing its completed Earley sets."""
        other = object.__new__(Session)
        other.__dict__.update(self.__dict__)
        other.sets = list(self.sets)
        return other

    # -- queries ----------------------------------------------------------

    def accepted(self) -> bool:
        if self.rejection is not None:
            return False
        if self.current_earleme == 0:
            return self.grammar.null_accepts
        first = self.sets[0]
        return any(eim.origin is first and self.states[eim.state].is_accepting
                   for eim in self.sets[self.current_earleme].items)

    def _check_index(self, i: int) -> EarleySet:
        if not 0 <= i < len(self.sets):
            raise IndexError(f"no Earley set at earleme {i}")
        return self.sets[i]

    def expected_terminals(self, i: int | None = None) -> set[str]:
        """Names of the tokens acceptable right after earleme ``i``."""
        es = self._check_index(self.current_earleme if i is None else i)
        symbols = self.grammar.symbols
        out = set()
        for sid in es.postdot:
            sym = symbols[sid]
            if sym.terminal_allowed:
                out.add(sym.source.name if sym.source is not None else sym.name)
        return out

    def progress_report(self, i: int) -> list[ProgressEntry]:
        es = self._check_index(i)
        accept = self.grammar.accept_rule
        entries = set()
        for eim in es.items:
            for dr in self.states[eim.state].items:
                rule = dr.rule
                if rule is accept or rule.source is None:
                    entries.add((rule, dr.pos, eim.origin.earleme))
                    continue
                dot = 0 if dr.pos == 0 else rule.source_positions[dr.pos - 1] + 1
                entries.add((rule.source, dot, eim.origin.earleme))

        def key(e):
            rule, dot, origin = e
            return (origin, -1 if rule is accept else rule.id, dot)

        return [ProgressEntry(*e) for e in sorted(entries, key=key)]

    def eim_view(self, i: int) -> list[tuple[frozenset, int]]:
        """(dotted rules, origin earleme) for every EIM of set ``i``."""
        return [(frozenset(self.states[e.state].items), e.origin.earleme) for e in self.sets[i].items]

    def check_set(self, i: int) -> None:
        es = self.sets[i]
        pairs = {(e.state, e.origin.earleme) for e in es.items}
        if len(pairs) != len(es.items):
            raise AssertionError(f"duplicate EIM in set {i}")
        if len(es.items) > (i + 1) * len(self.states):
            raise AssertionError(f"set {i} exceeds the size bound")
        if len(es.leo) != len(set(es.leo)):
            raise AssertionError(f"more than one LIM per symbol in set {i}")


def new_session(grammar: Grammar, automaton: Automaton | None = None, **options) -> Session:
    return Session(grammar, automaton, **options)


def recognize(grammar: Grammar, symbols: Iterable, **options) -> bool:
    """Recognize a traditional token sequence (one symbol per earleme)."""
    session = Session(grammar, **options)
    session.initialize()
    for sym in symbols:
        if not session.read(sym):
            return False
    return session.accepted()
