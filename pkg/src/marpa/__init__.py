"""Earley recognition with Leo memoization over Aycock-Horspool states."""
from .ahfa import Automaton, AhfaState, DottedRule, build_ahfa, predict_closure
from .grammar import (
    Grammar,
    GrammarError,
    Rule,
    Symbol,
    augment,
    build_grammar,
    compute_nullable,
    is_right_recursive,
    parse_grammar,
    preprocess,
    rewrite_nnf,
    rightmost_nonnull,
    strip_nulling,
)
from .input import InputError, InputStream, Status, Token, complete_earleme, recognize_stream
from .recognizer import Session, new_session, recognize

__all__ = [
    "Automaton", "AhfaState", "DottedRule", "build_ahfa", "predict_closure",
    "Grammar", "GrammarError", "Rule", "Symbol", "augment", "build_grammar",
    "compute_nullable", "is_right_recursive", "parse_grammar", "preprocess",
    "rewrite_nnf", "rightmost_nonnull", "strip_nulling",
    "InputError", "InputStream", "Status", "Token", "complete_earleme", "recognize_stream",
    "Session", "new_session", "recognize",
]
