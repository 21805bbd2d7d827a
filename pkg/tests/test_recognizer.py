import random

import pytest
from hypothesis import given, settings, strategies as st

from marpa import Session, Token, augment, parse_grammar, preprocess, recognize, rewrite_nnf, strip_nulling
from marpa.oracle import oracle_run
from marpa.recognizer import Link, RecognizerError

from support import CASCADE, G1, compile_text, random_grammar

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def session_for(text, **options):
    _, core = compile_text(text)
    s = Session(core, checks=True, **options)
    s.initialize()
    return s


def state_rules(session, eim):
    return [dr.format() for dr in session.states[eim.state].items]


def set_rules(session, i):
    return sorted((tuple(state_rules(session, e)), e.origin.earleme) for e in session.sets[i].items)


def feed(session, text):
    for c in text:
        if not session.read(c):
            return False
    return True


# -- initialization ---------------------------------------------------------

def test_initialize_set0():
    s = session_for("S ::= 'a'")
    assert s.current_earleme == 0
    assert set_rules(s, 0) == [(("S ::= • 'a'",), 0), (("[accept] ::= • S",), 0)]


def test_initialize_terminal_start():
    nnf, _ = rewrite_nnf(parse_grammar(G1))
    core, _ = strip_nulling(nnf)
    core = augment(core, core.terminal("a"))
    s = Session(core)
    s.initialize()
    assert set_rules(s, 0) == [(("[accept] ::= • 'a'",), 0)]


def test_reinitialize_is_an_error():
    s = session_for(G1)
    with pytest.raises(RecognizerError):
        s.initialize()


def test_null_input_special_cases():
    assert session_for("S ::= ;").accepted()
    assert session_for("S ::= 'a' | ;").accepted()
    assert not session_for(G1).accepted()


# -- scanning and reduction --------------------------------------------------

def test_scan_g1():
    s = session_for(G1)
    assert s.read("a")
    assert set_rules(s, 1) == [
        (("S ::= 'a' • S", "S ::= 'a' •"), 0),
        (("S ::= • 'a' S", "S ::= • 'a'"), 1),
        (("[accept] ::= S •",), 0),
    ]


def test_scan_unknown_token_adds_nothing():
    s = session_for(G1)
    assert not s.read("b")
    assert len(s.sets) == 1
    assert s.rejection.earleme == 1


def test_ambiguous_tokens_both_scanned():
    s = session_for("S ::= 'a' | 'b'")
    assert s.advance([Token("a", 0, 1), Token("b", 0, 1)])
    got = {r for rules, origin in set_rules(s, 1) for r in rules}
    assert {"S ::= 'a' •", "S ::= 'b' •", "[accept] ::= S •"} <= got


def test_completion_cascade_in_one_set():
    s = session_for(CASCADE)
    assert s.read("b")
    got = [rules for rules, origin in set_rules(s, 1)]
    for rule in ("B ::= 'b' •", "A ::= B •", "S ::= A •", "[accept] ::= S •"):
        assert (rule,) in got
    assert s.accepted()


def test_multiple_predecessors_one_attempt_each():
    lines = []
    s = session_for("S ::= A | B\nA ::= 'x'\nB ::= 'x'", trace=lines.append)
    s.read("x")
    reduces = [line for line in lines if line.startswith("earleme=1 op=reduce")]
    # A and B each reduce over their single predecessor, then S twice
    assert len(reduces) == 4
    assert sum(line.endswith(" dup") for line in reduces) == 1
    assert s.accepted()


def test_earley_reduction_from_initial():
    s = session_for(G1)
    s.read("a")
    es1 = s.sets[1]
    before = len(es1.items)
    s.earley_reduction(1, s.sets[0].items[0], s.grammar.symbol("S").id)
    assert len(es1.items) == before  # already there: a duplicate
    final = [e for e in es1.items if s.states[e.state].is_accepting]
    assert len(final) == 1 and final[0].origin is s.sets[0]
    attempts = s.total_attempts
    s.earley_reduction(1, s.sets[0].items[0], s.grammar.terminal("a").id)
    assert s.total_attempts == attempts + 1
    assert len(es1.items) == before


# -- Leo ----------------------------------------------------------------------

def test_lim_for_right_recursion():
    s = session_for(G1)
    s.read("a")
    sym = s.grammar.symbol("S").id
    lim = s.sets[1].transitions(sym)
    assert lim.transition == sym
    assert lim.top_origin is s.sets[0]
    # set 0 has no LIM for S ([accept] is not right-recursive), so the top is
    # the completed right-recursive rule itself
    assert [dr.format() for dr in s.states[lim.top_state].items] == ["S ::= 'a' S •"]


def test_no_lim_without_uniqueness_or_right_recursion():
    s = session_for("S ::= 'a' T | 'a' U\nT ::= 'b'\nU ::= 'b'")
    s.read("a")
    assert s.sets[1].leo == {}
    s = session_for("S ::= 'a' T | 'a' 'b' T\nT ::= 'c'")
    s.read("a")
    # postdot T belongs to one dotted rule, but the rule is not right-recursive
    assert s.grammar.symbol("T").id in s.sets[1].postdot
    assert s.sets[1].leo == {}


def test_leo_keeps_sets_small():
    s = session_for(G1)
    assert feed(s, "aaaa")
    assert [len(es) for es in s.sets] == [2, 3, 4, 4, 4]
    final = [e for e in s.sets[3].items if s.states[e.state].is_accepting]
    assert len(final) == 1 and final[0].origin is s.sets[0]
    assert s.leo_reductions > 0 and s.leo_singleton_violations == 0
    plain = oracle_run(s.grammar, "aaaa", leo=False)
    assert [len(x) for x in plain.sets] == [3, 5, 6, 7, 8]


# -- add_eim_pair and the PSL -------------------------------------------------

def test_add_eim_pair_duplicate():
    s = session_for(G1)
    es0 = s.sets[0]
    attempts, items = s.total_attempts, s.total_items
    link = Link("scan", None, None, None)
    to = s.states[s.states[s.automaton.initial].null_goto].goto_table[s.grammar.terminal("a").id]
    s.add_eim_pair(es0, to, es0, link, "scan")
    s.add_eim_pair(es0, to, es0, link, "scan")
    added = [e for e in es0.items if e.state == to]
    assert len(added) == 1 and len(added[0].links) == 2
    assert s.total_attempts - attempts == 2
    # the predicted EIM was already in set 0
    assert s.total_items - items == 1


def test_add_eim_pair_without_prediction():
    s = session_for(G1)
    es0 = s.sets[0]
    final = s.automaton.goto(s.automaton.initial, s.grammar.symbol("S"))
    n = len(es0.items)
    s.add_eim_pair(es0, final, es0, Link("scan", None, None, None), "scan")
    assert len(es0.items) == n + 1


def test_psl_stamps():
    s = session_for(G1)
    s.read("a")
    origin = s.sets[0]
    es = s._new_set(5)
    assert s.psl_is_new(es, origin, 4)
    assert not s.psl_is_new(es, origin, 4)
    later = s._new_set(6)
    assert s.psl_is_new(later, origin, 4)


# -- queries --------------------------------------------------------------------

@pytest.mark.parametrize("text, expected", [("aaa", True), ("", False), ("ab", False), ("a", True)])
def test_accepted_g1(text, expected):
    _, core = compile_text(G1)
    assert recognize(core, list(text)) is expected
    assert oracle_run(core, list(text)).accepted is expected


def test_rejection_at_earleme_2():
    s = session_for(G1)
    assert s.read("a")
    assert not s.read("b")
    assert s.rejection.message() == "rejected at earleme 2; expected: 'a'"


def test_expected_terminals():
    s = session_for(G1)
    assert s.expected_terminals(0) == {"a"}
    feed(s, "aaa")
    assert s.expected_terminals(3) == {"a"}
    # a spanned earleme can hold an empty set
    s = session_for(G1)
    s.advance([], spanning=True)
    assert s.expected_terminals(1) == set()


def test_progress_report_set0():
    s = session_for(G1)
    report = [e.format() for e in s.progress_report(0)]
    assert report == ["[accept] ::= • S @0", "S ::= • 'a' S @0", "S ::= • 'a' @0"]
    with pytest.raises(IndexError):
        s.progress_report(3)


def test_progress_report_uses_user_names():
    s = session_for("S ::= A 'b'\nA ::= 'a' | ;")
    s.read("b")
    report = [e.format() for e in s.progress_report(1)]
    assert "S ::= A 'b' • @0" in report
    assert not any("[nn]" in line or "[null]" in line for line in report)
    s = session_for("S ::= A 'b'\nA ::= 'a' | ;")
    s.read("a")
    report = [e.format() for e in s.progress_report(1)]
    assert "A ::= 'a' • @0" in report
    assert "S ::= A • 'b' @0" in report


def test_trace_format_deterministic():
    def run():
        lines = []
        s = session_for(G1, trace=lines.append)
        feed(s, "aaa")
        return lines
    first = run()
    assert first[0] == "earleme=0 op=init state=0 origin=0 new"
    assert first == run()
    ops = {line.split()[1] for line in first}
    assert {"op=init", "op=predict", "op=scan", "op=leo"} <= ops
    assert all(line.split()[-1] in ("new", "dup") for line in first)


def test_fork_is_independent():
    s = session_for(G1)
    s.read("a")
    t = s.fork()
    assert t.read("a")
    assert not s.read("b")
    assert t.accepted() and not s.accepted()
    assert len(t.sets) == 3 and len(s.sets) == 2


def test_session_needs_preprocessed_grammar():
    with pytest.raises(RecognizerError):
        Session(parse_grammar(G1))


# -- properties over random grammars and inputs ---------------------------------

@settings(max_examples=300, deadline=None)
@given(seeds, st.lists(st.sampled_from("ab"), max_size=10))
def test_set_invariants(seed, text):
    core = preprocess(random_grammar(random.Random(seed)))
    s = Session(core, checks=True)  # check_set asserts dedup, bound, one LIM per symbol
    s.initialize()
    for c in text:
        if not s.read(c):
            break
    fa = len(s.states)
    for es in s.sets:
        pairs = [(e.state, e.origin.earleme) for e in es.items]
        assert len(pairs) == len(set(pairs))
        assert len(es.items) <= (es.earleme + 1) * max(fa, 1)
        for e in es.items:
            if s.states[e.state].kind == "predicted":
                assert e.origin is es
    assert s.leo_singleton_violations == 0
    assert s.set_bound_violations == 0
    links = sum(len(e.links) for es in s.sets for e in es.items)
    assert links == s.total_attempts + s.predicted_attempts
    assert s.total_attempts - s.confirmed_items == s.duplicate_links
    assert s.total_items == sum(len(es) for es in s.sets)


def test_no_links_mode():
    s = session_for(G1, links=False)
    feed(s, "aaa")
    assert s.accepted()
    assert all(e.links is None for es in s.sets for e in es.items)
