"""Shared fixtures: sample grammars, a random grammar generator and the
prefix-tree driver used by the differential tests."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from marpa import GrammarError, build_ahfa, build_grammar, parse_grammar, preprocess
from marpa.oracle import EarleyOracle, correspondence_check, language
from marpa.recognizer import Session

G1 = "S ::= 'a' S | 'a'"
AMBIGUOUS = "S ::= S S | 'a'"
CASCADE = """
S ::= A
A ::= B
B ::= 'b'
"""
PARENS = """
S ::= P
P ::= '(' P ')' | 'x'
"""

# unambiguous sample grammars, with the symbol repeated to build inputs
UNAMBIGUOUS = {
    "right": (G1, "a"),
    "left": ("S ::= S 'a' | 'a'", "a"),
    "indirect-right": ("S ::= 'a' T | 'a'\nT ::= 'a' S | 'a'", "a"),
    "nullable-tail": ("S ::= 'a' S N | 'a'\nN ::= 'c' | ;", "a"),
}


def compile_text(text: str):
    raw = parse_grammar(text)
    core = preprocess(raw)
    return raw, core


def random_grammar(rng: random.Random, max_symbols: int = 5, max_rules: int = 6,
                   allow_empty: bool = True):
    """A valid random raw grammar with at most the given sizes."""
    while True:
        n_term = rng.randint(1, 2)
        n_nonterm = rng.randint(1, max_symbols - n_term)
        terms = ["a", "b"][:n_term]
        nonterms = ["S", "A", "B", "C", "D"][:n_nonterm]
        everything = terms + nonterms
        n_rules = rng.randint(n_nonterm, max_rules)
        rules = [(nt, _rhs(rng, everything, allow_empty)) for nt in nonterms]
        while len(rules) < n_rules:
            rules.append((rng.choice(nonterms), _rhs(rng, everything, allow_empty)))
        try:
            return build_grammar(everything, rules, "S")
        except GrammarError:
            continue


def _rhs(rng, symbols, allow_empty):
    length = rng.choice([0, 1, 1, 2, 2, 3]) if allow_empty else rng.randint(1, 3)
    return [rng.choice(symbols) for _ in range(length)]


def corpus(count: int, seed: int = 20240601):
    rng = random.Random(seed)
    return [random_grammar(rng) for _ in range(count)]


@dataclass
class Tally:
    inputs: int = 0
    disagreements: list = field(default_factory=list)
    correspondence_failures: list = field(default_factory=list)
    sets_checked: int = 0
    bound_violations: int = 0
    leo_singleton_violations: int = 0
    leo_reductions: int = 0

    def charge(self, before: Session | None, after: Session) -> None:
        # counters are cumulative along a fork lineage; add the increment
        for name in ("set_bound_violations", "leo_singleton_violations", "leo_reductions"):
            delta = getattr(after, name) - (getattr(before, name) if before else 0)
            key = "bound_violations" if name == "set_bound_violations" else name
            setattr(self, key, getattr(self, key) + delta)


def explore(raw, max_len: int, *, brute: bool = True, correspond: bool = False,
            tally: Tally | None = None) -> Tally:
    """Check every input over the grammar's terminals up to ``max_len``.

    The prefix tree is walked depth first with forked sessions. Once the
    recognizer rejects a prefix it rejects every extension, so the subtree
    is settled by checking that the oracle's set is empty as well and that
    no sentence of the language starts with that prefix.
    """
    tally = tally or Tally()
    core = preprocess(raw)
    automaton = None if core.trivial else build_ahfa(core)
    alphabet = sorted(s.name for s in raw.symbols if s.terminal_allowed)
    sentences = language(raw, max_len)[raw.start] if brute else frozenset()
    prefixes = {s[:k] for s in sentences for k in range(len(s) + 1)}

    session = Session(core, automaton, checks=True)
    session.initialize()
    oracle = EarleyOracle(core, leo=True)
    oracle.initialize()
    if correspond:
        _correspond(tally, raw, (), session, oracle, 0)

    def subtree_size(depth):
        k = len(alphabet)
        return sum(k ** d for d in range(0, max_len - depth + 1))

    def visit(prefix, session, oracle):
        tally.inputs += 1
        marpa_ok = session.accepted()
        oracle_ok = oracle.accepted()
        answers = (marpa_ok, oracle_ok)
        if brute:
            answers += (prefix in sentences,)
        if len(set(answers)) != 1:
            tally.disagreements.append((raw, "".join(prefix), answers))
        if len(prefix) == max_len:
            return
        for sym in alphabet:
            nxt = prefix + (sym,)
            s2, o2 = session.fork(), oracle.fork()
            alive = s2.read(sym)
            o2.read(sym)
            tally.charge(session, s2)
            if not alive:
                depth = len(nxt)
                tally.inputs += subtree_size(depth)
                if o2.sets[-1] or (brute and nxt in prefixes):
                    tally.disagreements.append((raw, "".join(nxt), "rejected prefix is live"))
                continue
            if correspond:
                _correspond(tally, raw, nxt, s2, o2, len(nxt))
            visit(nxt, s2, o2)

    tally.charge(None, session)
    visit((), session, oracle)
    return tally


def _correspond(tally, raw, prefix, session, oracle, i):
    tally.sets_checked += 1
    report = correspondence_check([session.eim_view(i)], [oracle.sets[i]])
    if not report.ok:
        tally.correspondence_failures.append((raw, "".join(prefix), i, report.witnesses[:3]))
