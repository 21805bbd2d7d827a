"""Aycock-Horspool finite automaton (split LR(0) epsilon-DFA).

Confirmed states hold the initial dotted rule or dotted rules with the dot
past position 0; predicted states hold only predictions and are reached only
through a null transition. Each state's GOTO row is computed from that state's
own dotted rules, so an Earley item's origin carries over unchanged to every
dotted rule of its successor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .grammar import Grammar, GrammarError, Rule, Symbol

CONFIRMED, PREDICTED = "confirmed", "predicted"


class DottedRule(NamedTuple):
    rule: Rule
    pos: int

    @property
    def postdot(self) -> Symbol | None:
        rhs = self.rule.rhs
        return rhs[self.pos] if self.pos < len(rhs) else None

    @property
    def next(self) -> "DottedRule | None":
        if self.pos < len(self.rule.rhs):
            return DottedRule(self.rule, self.pos + 1)
        return None

    @property
    def is_completion(self) -> bool:
        return self.pos == len(self.rule.rhs)

    @property
    def penult(self) -> Symbol | None:
        """Postdot symbol when everything after it is nullable and it is not."""
        rhs = self.rule.rhs
        if self.pos >= len(rhs) or rhs[self.pos].is_nullable:
            return None
        if all(s.is_nullable for s in rhs[self.pos + 1:]):
            return rhs[self.pos]
        return None

    def sort_key(self) -> tuple[int, int]:
        return (self.rule.id, self.pos)

    def format(self) -> str:
        return self.rule.format(self.pos)

    def __repr__(self) -> str:
        return f"[{self.format()}]"


@dataclass(eq=False)
class AhfaState:
    id: int
    items: tuple[DottedRule, ...]
    kind: str
    goto_table: dict[int, int] = field(default_factory=dict)
    null_goto: int | None = None
    completed_lhs: frozenset[int] = frozenset()
    postdot_symbols: frozenset[int] = frozenset()
    # postdot symbol id -> dotted rules of this state with that postdot
    postdot_rules: dict[int, tuple[DottedRule, ...]] = field(default_factory=dict)
    is_accepting: bool = False

    def __repr__(self) -> str:
        return f"AhfaState({self.id}, {self.kind}, {list(self.items)})"


@dataclass(eq=False)
class Automaton:
    grammar: Grammar
    states: list[AhfaState]
    initial: int

    @property
    def state_count(self) -> int:
        return len(self.states)

    def goto(self, state: int, symbol: Symbol | int) -> int | None:
        sid = symbol if isinstance(symbol, int) else symbol.id
        return self.states[state].goto_table.get(sid)

    def dump(self) -> str:
        out = []
        names = {s.id: s.name for s in self.grammar.symbols}
        for st in self.states:
            out.append(f"state {st.id} {st.kind}")
            for dr in st.items:
                out.append(f"  {dr.format()}")
            for sid in sorted(st.goto_table, key=lambda k: names[k]):
                out.append(f"  goto {names[sid]} -> {st.goto_table[sid]}")
            if st.null_goto is not None:
                out.append(f"  null -> {st.null_goto}")
        return "\n".join(out) + "\n"


def predict_closure(postdot: Iterable[Symbol], grammar: Grammar) -> frozenset[DottedRule]:
    """All predictions reachable through left corners of ``postdot``."""
    result: set[DottedRule] = set()
    seen: set[int] = set()
    stack = [s for s in postdot]
    while stack:
        sym = stack.pop()
        if sym.id in seen:
            continue
        seen.add(sym.id)
        for rule in grammar.rules_for(sym):
            if rule is grammar.accept_rule:
                continue
            result.add(DottedRule(rule, 0))
            stack.append(rule.rhs[0])
    return frozenset(result)


def build_ahfa(grammar: Grammar) -> Automaton:
    if not grammar.augmented:
        raise GrammarError("the AHFA needs an augmented grammar")
    if any(s.is_nullable for s in grammar.symbols):
        raise GrammarError("the AHFA needs a core grammar without nullable symbols")
    states: list[AhfaState] = []
    index: dict[tuple[frozenset[DottedRule], str], int] = {}
    worklist: list[int] = []

    def intern(items: frozenset[DottedRule], kind: str) -> int:
        key = (items, kind)
        sid = index.get(key)
        if sid is None:
            sid = len(states)
            index[key] = sid
            ordered = tuple(sorted(items, key=DottedRule.sort_key))
            states.append(AhfaState(sid, ordered, kind))
            worklist.append(sid)
        return sid

    accept = grammar.accept_rule
    initial = intern(frozenset({DottedRule(accept, 0)}), CONFIRMED)
    while worklist:
        st = states[worklist.pop(0)]
        by_symbol: dict[int, list[DottedRule]] = {}
        for dr in st.items:
            sym = dr.postdot
            if sym is not None:
                by_symbol.setdefault(sym.id, []).append(dr)
        st.postdot_rules = {k: tuple(v) for k, v in by_symbol.items()}
        st.postdot_symbols = frozenset(by_symbol)
        st.completed_lhs = frozenset(dr.rule.lhs.id for dr in st.items if dr.is_completion)
        st.is_accepting = any(dr.rule is accept and dr.is_completion for dr in st.items)
        for sid in sorted(by_symbol):
            kernel = frozenset(dr.next for dr in by_symbol[sid])
            st.goto_table[sid] = intern(kernel, CONFIRMED)
        if st.kind == CONFIRMED:
            postdot = [dr.postdot for dr in st.items if dr.postdot is not None]
            predicted = predict_closure(postdot, grammar)
            if predicted:
                st.null_goto = intern(predicted, PREDICTED)
    return Automaton(grammar, states, initial)
