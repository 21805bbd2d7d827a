"""Grammar model and the rewrite pipeline that feeds the recognizer.

A user grammar goes through three stages::

    raw   -> rewrite_nnf   -> nnf   (no empty rules, every nullable is nulling)
    nnf   -> strip_nulling -> core  (nulling symbols removed)
    core  -> augment                (dedicated accept rule added)

Every step appends to a :class:`RewriteHistory` and every internal symbol and
rule keeps a pointer back to the user symbol/rule it came from, so reports can
be phrased in terms of the grammar the user wrote.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, NamedTuple, Sequence

RAW, NNF, CORE = "raw", "nnf", "core"

ACCEPT_NAME = "[accept]"


class GrammarError(ValueError):
    """Raised for malformed or unusable grammars."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


@dataclass(eq=False)
class Symbol:
    id: int
    name: str
    is_nullable: bool = False
    is_nulling: bool = False
    terminal_allowed: bool = False
    # user-level symbol this one was derived from (itself for raw grammars)
    source: "Symbol | None" = None

    @property
    def display(self) -> str:
        return f"'{self.name}'" if self.terminal_allowed else self.name

    def __repr__(self) -> str:
        return f"Symbol({self.id}, {self.name!r})"


@dataclass(eq=False)
class Rule:
    id: int
    lhs: Symbol
    rhs: tuple[Symbol, ...]
    is_right_recursive: bool = False
    # originating user rule, and for each rhs symbol its index in that rule
    source: "Rule | None" = None
    source_positions: tuple[int, ...] = ()

    def format(self, dot: int | None = None) -> str:
        parts = [s.display for s in self.rhs]
        if dot is not None:
            parts.insert(dot, "•")
        return f"{self.lhs.name} ::= {' '.join(parts)}".rstrip()

    def __repr__(self) -> str:
        return f"Rule({self.id}, {self.format()!r})"


class HistoryEntry(NamedTuple):
    kind: str
    before: object
    after: object


class RewriteHistory(list):
    """Append-only log of (kind, before, after) rewrite steps."""

    def record(self, kind: str, before, after) -> None:
        self.append(HistoryEntry(kind, before, after))


@dataclass(eq=False)
class Grammar:
    symbols: list[Symbol]
    rules: list[Rule]
    start: Symbol | None
    stage: str = RAW
    accept_symbol: Symbol | None = None
    accept_rule: Rule | None = None
    history: RewriteHistory = field(default_factory=RewriteHistory)
    # the grammar only recognizes the empty string
    trivial: bool = False
    # the empty input is in the language
    null_accepts: bool = False
    raw: "Grammar | None" = None

    def __post_init__(self) -> None:
        self._by_name = {s.name: s for s in self.symbols}
        self._rules_by_lhs: dict[int, list[Rule]] = {}
        for r in self.rules:
            self._rules_by_lhs.setdefault(r.lhs.id, []).append(r)
        self._terminals: dict[str, Symbol] = {}
        for s in self.symbols:
            if s.terminal_allowed:
                key = s.source.name if s.source is not None else s.name
                self._terminals[key] = s

    def symbol(self, name: str) -> Symbol:
        try:
            return self._by_name[name]
        except KeyError:
            raise GrammarError(f"unknown symbol {name}") from None

    def has_symbol(self, name: str) -> bool:
        return name in self._by_name

    def terminal(self, name: str) -> Symbol | None:
        """Internal symbol that scans a token named ``name`` (by user name)."""
        return self._terminals.get(name)

    def rules_for(self, sym: Symbol) -> list[Rule]:
        return self._rules_by_lhs.get(sym.id, [])

    @property
    def augmented(self) -> bool:
        return self.accept_rule is not None

    def format(self) -> str:
        lines = [r.format() for r in self.rules]
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"Grammar(stage={self.stage}, symbols={len(self.symbols)}, rules={len(self.rules)})"


# ---------------------------------------------------------------------------
# construction


def build_grammar(
    symbols: Iterable[str | tuple[str, bool]],
    rules: Iterable[tuple[str, Sequence[str]]],
    start: str,
) -> Grammar:
    """Build and validate a raw grammar.

    ``symbols`` lists names in declaration order; a ``(name, terminal)`` pair
    sets whether the symbol may be read as a token. A bare name is a terminal
    exactly when no rule has it on the LHS.
    """
    decls: list[tuple[str, bool | None]] = []
    seen: set[str] = set()
    for decl in symbols:
        name, terminal = (decl, None) if isinstance(decl, str) else decl
        if name in seen:
            raise GrammarError(f"duplicate symbol {name}")
        seen.add(name)
        decls.append((name, terminal))
    rule_list = [(lhs, tuple(rhs)) for lhs, rhs in rules]
    if not rule_list:
        raise GrammarError("grammar has no rules")
    if start not in seen:
        raise GrammarError(f"start symbol {start} is not declared")
    lhs_names = set()
    for lhs, rhs in rule_list:
        for name in (lhs, *rhs):
            if name not in seen:
                raise GrammarError(f"rule references undeclared symbol {name}")
        lhs_names.add(lhs)

    syms = []
    for i, (name, terminal) in enumerate(decls):
        if terminal is None:
            terminal = name not in lhs_names
        s = Symbol(i, name, terminal_allowed=terminal)
        s.source = s
        syms.append(s)
    by_name = {s.name: s for s in syms}
    rule_objs = []
    for i, (lhs, rhs) in enumerate(rule_list):
        r = Rule(i, by_name[lhs], tuple(by_name[n] for n in rhs))
        r.source = r
        r.source_positions = tuple(range(len(rhs)))
        rule_objs.append(r)
    g = Grammar(syms, rule_objs, by_name[start], stage=RAW)
    _validate(g)
    nullable = compute_nullable(g)
    nonempty = _nonempty(g)
    for s in syms:
        s.is_nullable = s in nullable
        s.is_nulling = s.is_nullable and s not in nonempty
    _mark_right_recursion(g)
    g.null_accepts = g.start.is_nullable
    g.trivial = g.start.is_nulling
    g.raw = g
    return g


def _productive(g: Grammar) -> set[Symbol]:
    result = {s for s in g.symbols if s.terminal_allowed}
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in result and all(s in result for s in r.rhs):
                result.add(r.lhs)
                changed = True
    return result


def _reachable(g: Grammar, root: Symbol) -> set[Symbol]:
    seen = {root}
    stack = [root]
    while stack:
        for r in g.rules_for(stack.pop()):
            for s in r.rhs:
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
    return seen


def _root_cause(g: Grammar, bad: list[Symbol], depends) -> Symbol:
    # prefer a bad symbol whose badness is not inherited from another one
    for s in bad:
        if not any(o is not s and depends(s, o) for o in bad):
            return s
    return bad[0]


def _validate(g: Grammar) -> None:
    productive = _productive(g)
    bad = [s for s in g.symbols if s not in productive]
    if bad:
        # S is unproductive because of A when some S-rule uses A
        culprit = _root_cause(g, bad, lambda s, o: any(o in r.rhs for r in g.rules_for(s)))
        raise GrammarError(f"unproductive symbol {culprit.name}")
    reachable = _reachable(g, g.start)
    bad = [s for s in g.symbols if s not in reachable]
    if bad:
        # b is unreachable because B is when some B-rule uses b
        culprit = _root_cause(g, bad, lambda s, o: any(s in r.rhs for r in g.rules_for(o)))
        raise GrammarError(f"unreachable symbol {culprit.name}")


def compute_nullable(g: Grammar) -> set[Symbol]:
    """Least fixed point of the symbols that derive the empty string."""
    nullable: set[Symbol] = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in nullable and all(s in nullable for s in r.rhs):
                nullable.add(r.lhs)
                changed = True
    return nullable


def _nonempty(g: Grammar) -> set[Symbol]:
    # symbols that derive at least one non-empty string
    result = {s for s in g.symbols if s.terminal_allowed}
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in result and any(s in result for s in r.rhs):
                result.add(r.lhs)
                changed = True
    return result


def rightmost_nonnull(rhs: Sequence[Symbol]) -> Symbol | None:
    for s in reversed(rhs):
        if not s.is_nullable:
            return s
    return None


def _right_nn_graph(g: Grammar) -> dict[Symbol, set[Symbol]]:
    edges: dict[Symbol, set[Symbol]] = {}
    for r in g.rules:
        rnn = rightmost_nonnull(r.rhs)
        if rnn is not None:
            edges.setdefault(r.lhs, set()).add(rnn)
    return edges


def _reaches(edges: dict[Symbol, set[Symbol]], src: Symbol, dst: Symbol) -> bool:
    if src is dst:
        return True
    seen = {src}
    stack = [src]
    while stack:
        for nxt in edges.get(stack.pop(), ()):
            if nxt is dst:
                return True
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def is_right_recursive(rule: Rule, g: Grammar) -> bool:
    rnn = rightmost_nonnull(rule.rhs)
    if rnn is None:
        return False
    return _reaches(_right_nn_graph(g), rnn, rule.lhs)


def _mark_right_recursion(g: Grammar) -> None:
    edges = _right_nn_graph(g)
    for r in g.rules:
        rnn = rightmost_nonnull(r.rhs)
        r.is_right_recursive = rnn is not None and _reaches(edges, rnn, r.lhs)


# ---------------------------------------------------------------------------
# rewrites


def rewrite_nnf(g: Grammar) -> tuple[Grammar, RewriteHistory]:
    """Remove empty rules and proper nullables.

    Each proper nullable ``X`` becomes a non-null ``X[nn]`` carrying X's
    non-empty derivations and a nulling ``X[null]``. Rules are factored over
    every nonnull/null choice for their proper-nullable occurrences, left to
    right; variants made only of nulling symbols are dropped, since their LHS
    is non-null after the split.
    """
    if g.stage == NNF:
        return g, RewriteHistory()
    if g.stage != RAW:
        raise GrammarError(f"rewrite_nnf expects a raw grammar, got stage {g.stage}")
    history = RewriteHistory()
    syms: list[Symbol] = []

    def new_symbol(name, nullable, nulling, terminal, source):
        s = Symbol(len(syms), name, nullable, nulling, terminal, source)
        syms.append(s)
        return s

    nonnull: dict[Symbol, Symbol] = {}
    null: dict[Symbol, Symbol] = {}
    for s in g.symbols:
        proper = s.is_nullable and not s.is_nulling
        if proper:
            nonnull[s] = new_symbol(f"{s.name}[nn]", False, False, s.terminal_allowed, s.source)
            null[s] = new_symbol(f"{s.name}[null]", True, True, False, s.source)
            history.record("split", s, (nonnull[s], null[s]))
        elif s.is_nulling:
            null[s] = new_symbol(s.name, True, True, False, s.source)
        else:
            nonnull[s] = new_symbol(s.name, False, False, s.terminal_allowed, s.source)

    rules: list[Rule] = []
    for r in g.rules:
        if not r.rhs:
            history.record("drop-empty", r, None)
            continue
        lhs = nonnull.get(r.lhs) or null[r.lhs]
        choices = []
        for s in r.rhs:
            if s in nonnull and s in null:
                choices.append((nonnull[s], null[s]))
            elif s in nonnull:
                choices.append((nonnull[s],))
            else:
                choices.append((null[s],))
        variants = []
        for rhs in product(*choices):
            if not lhs.is_nulling and all(x.is_nulling for x in rhs):
                continue
            nr = Rule(len(rules), lhs, tuple(rhs), source=r.source,
                      source_positions=tuple(r.source_positions[k] for k in range(len(rhs))))
            rules.append(nr)
            variants.append(nr)
        if any(len(c) > 1 for c in choices):
            history.record("factor", r, tuple(variants))

    start = nonnull.get(g.start)
    trivial = start is None
    out = Grammar(syms, rules, start if start is not None else null[g.start], stage=NNF,
                  history=RewriteHistory(g.history + history), trivial=trivial,
                  null_accepts=g.start.is_nullable, raw=g.raw)
    _mark_right_recursion(out)
    return out, history


def strip_nulling(g: Grammar) -> tuple[Grammar, RewriteHistory]:
    """Remove nulling symbols from every RHS, along with rules left empty."""
    if g.stage == CORE:
        return g, RewriteHistory()
    if g.stage != NNF:
        raise GrammarError(f"strip_nulling expects an nnf grammar, got stage {g.stage}")
    history = RewriteHistory()
    syms: list[Symbol] = []
    mapping: dict[Symbol, Symbol] = {}
    for s in g.symbols:
        if s.is_nulling:
            history.record("strip-symbol", s, None)
            continue
        ns = Symbol(len(syms), s.name, False, False, s.terminal_allowed, s.source)
        syms.append(ns)
        mapping[s] = ns
    rules: list[Rule] = []
    for r in g.rules:
        keep = [k for k, s in enumerate(r.rhs) if not s.is_nulling]
        if r.lhs.is_nulling or not keep:
            history.record("strip-rule", r, None)
            continue
        nr = Rule(len(rules), mapping[r.lhs], tuple(mapping[r.rhs[k]] for k in keep),
                  source=r.source, source_positions=tuple(r.source_positions[k] for k in keep))
        if len(keep) != len(r.rhs):
            history.record("strip-occurrence", r, nr)
        rules.append(nr)
    start = mapping.get(g.start)
    out = Grammar(syms, rules, start, stage=CORE,
                  history=RewriteHistory(g.history + history), trivial=g.trivial,
                  null_accepts=g.null_accepts, raw=g.raw)
    _mark_right_recursion(out)
    return out, history


def augment(g: Grammar, start: Symbol | str | None = None) -> Grammar:
    """Add a fresh accept symbol and the rule ``[accept] ::= start``."""
    if g.augmented:
        raise GrammarError("grammar is already augmented")
    if start is None:
        start = g.start
    elif isinstance(start, str):
        start = g.symbol(start)
    if start is None or all(s is not start for s in g.symbols):
        raise GrammarError("start symbol is not in the grammar")
    accept = Symbol(len(g.symbols), ACCEPT_NAME)
    rule = Rule(len(g.rules), accept, (start,))
    g.history.record("augment", start, rule)
    out = Grammar(g.symbols + [accept], g.rules + [rule], start, stage=g.stage,
                  accept_symbol=accept, accept_rule=rule, history=g.history,
                  trivial=g.trivial, null_accepts=g.null_accepts, raw=g.raw)
    _mark_right_recursion(out)
    return out


def preprocess(raw: Grammar) -> Grammar:
    """Run the full pipeline: raw -> nnf -> core -> augmented."""
    nnf, _ = rewrite_nnf(raw)
    core, _ = strip_nulling(nnf)
    if core.trivial:
        return core
    return augment(core)


# ---------------------------------------------------------------------------
# text format

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<assign>::=)
      | (?P<bar>\|)
      | (?P<semi>;)
      | '(?P<sq>[^']*)'
      | "(?P<dq>[^"]*)"
      | (?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)
    )""",
    re.VERBOSE,
)


def _tokenize(line: str, lineno: int):
    pos = 0
    text = line.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise GrammarError(f"unexpected character {text[col - 1]!r}", lineno, col)
        kind = m.lastgroup
        # literals are reported at their opening quote
        col = m.start(kind) + (0 if kind in ("sq", "dq") else 1)
        value = m.group(kind)
        if kind in ("sq", "dq"):
            if value == "":
                raise GrammarError("empty literal", lineno, col)
            kind = "lit"
        yield kind, value, col
        pos = m.end()


def parse_grammar(text: str) -> Grammar:
    """Parse the BNF text format into a validated raw grammar.

    One rule per line, ``LHS ::= alt | alt``; a line starting with ``|``
    continues the previous LHS. Quoted literals declare terminals, ``;`` or
    an empty alternative is an empty rule, ``:start NAME`` picks the start
    symbol and ``:terminal NAME...`` declares named terminals. ``#`` starts a
    comment.
    """
    order: list[str] = []
    kinds: dict[str, bool | None] = {}
    rules: list[tuple[str, list[str]]] = []
    refs: list[tuple[str, int, int]] = []
    start = None
    current = None

    def declare(name, terminal):
        if name not in kinds:
            order.append(name)
            kinds[name] = terminal
        elif terminal and kinds[name] is False:
            kinds[name] = True

    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith(":"):
            col = line.index(":") + 1
            parts = stripped.split()
            if parts[0] == ":start" and len(parts) == 2:
                start = parts[1]
            elif parts[0] == ":terminal" and len(parts) >= 2:
                for name in parts[1:]:
                    declare(name, True)
            else:
                raise GrammarError(f"unknown directive {parts[0]}", lineno, col)
            continue
        toks = list(_tokenize(line, lineno))
        if toks[0][0] == "bar":
            if current is None:
                raise GrammarError("continuation without a rule", lineno, toks[0][2])
            lhs, body = current, toks
        else:
            if len(toks) < 2 or toks[0][0] != "ident" or toks[1][0] != "assign":
                raise GrammarError("expected 'LHS ::= ...'", lineno, toks[0][2])
            lhs, body = toks[0][1], toks[1:]
            current = lhs
            declare(lhs, None)
        alts: list[list[str]] = [[]]
        for kind, value, col in body[1:]:
            if kind == "bar":
                alts.append([])
            elif kind == "semi":
                if alts[-1]:
                    raise GrammarError("';' must stand alone", lineno, col)
            elif kind == "assign":
                raise GrammarError("unexpected '::='", lineno, col)
            elif kind == "lit":
                if value in kinds and kinds[value] is not True:
                    raise GrammarError(f"literal '{value}' clashes with symbol {value}", lineno, col)
                declare(value, True)
                alts[-1].append(value)
            else:
                refs.append((value, lineno, col))
                alts[-1].append(value)
        for alt in alts:
            rules.append((lhs, alt))
    if not rules:
        raise GrammarError("grammar has no rules")
    for name, lineno, col in refs:
        if name not in kinds:
            raise GrammarError(f"undeclared symbol {name}", lineno, col)
    if start is None:
        start = rules[0][0]
    decls = [(n, bool(kinds[n])) if kinds[n] else n for n in order]
    return build_grammar(decls, rules, start)
