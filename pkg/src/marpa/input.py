"""Generalized input: tokens with a start earleme and a length.

Tokens may be ambiguous (several at one start) and may overlap, but every
earleme below the end of input must be covered by some token. A token is
"at" the earleme where it ends, so it is scanned while that earleme is built.
"""
from __future__ import annotations

from collections import defaultdict
from enum import Enum
from typing import TYPE_CHECKING, Iterable, NamedTuple

if TYPE_CHECKING:
    from .grammar import Grammar
    from .recognizer import Session

DEFAULT_LIMIT = 64


class InputError(ValueError):
    pass


class Token(NamedTuple):
    symbol: object  # user-level terminal name, or an internal Symbol / id
    start: int
    length: int = 1

    @property
    def end(self) -> int:
        return self.start + self.length


class Status(Enum):
    CONTINUE = "continue"
    EXHAUSTED = "exhausted"
    REJECTED = "rejected"


class InputStream:
    """Tokens grouped by the earleme they end at.

    ``limit`` is the constant that bounds both token length and the number
    of tokens sharing a start earleme.
    """

    def __init__(self, tokens: Iterable[Token] = (), limit: int = DEFAULT_LIMIT,
                 grammar: "Grammar | None" = None):
        self.limit = limit
        self.grammar = grammar
        self.by_end: dict[int, list[Token]] = defaultdict(list)
        self.starts: dict[int, int] = defaultdict(int)
        self.furthest_end = 0
        self._covered: set[int] = set()
        self._spanned: set[int] = set()
        for t in tokens:
            self.push_token(t)

    def push_token(self, token: Token) -> None:
        if not isinstance(token, Token):
            token = Token(*token)
        if token.start < 0:
            raise InputError(f"token {token.symbol!r} starts before earleme 0")
        if token.length < 1:
            raise InputError(f"token {token.symbol!r} has length {token.length}; lengths start at 1")
        if token.length >= self.limit:
            raise InputError(f"restriction (1) violated: token length {token.length} "
                             f"is not below c={self.limit}")
        if self.starts[token.start] + 1 >= self.limit:
            raise InputError(f"restriction (2) violated: {self.starts[token.start] + 1} tokens "
                             f"start at earleme {token.start}, not below c={self.limit}")
        g = self.grammar
        if g is not None and isinstance(token.symbol, str) and g.terminal(token.symbol) is None \
                and _names_nonterminal(g, token.symbol):
            raise InputError(f"symbol {token.symbol} cannot be read as a token")
        self.starts[token.start] += 1
        self.by_end[token.end].append(token)
        self.furthest_end = max(self.furthest_end, token.end)
        self._covered.update(range(token.start, token.end))
        self._spanned.update(range(token.start + 1, token.end))

    def __len__(self) -> int:
        return self.furthest_end

    def ending_at(self, i: int) -> list[Token]:
        return self.by_end.get(i, [])

    def covered(self, i: int) -> bool:
        """Is location ``i`` (between earlemes i and i+1) inside some token?"""
        return i in self._covered

    def spans(self, i: int) -> bool:
        """Does some token start before earleme ``i`` and end after it?"""
        return i in self._spanned

    def gaps(self) -> list[int]:
        return [i for i in range(self.furthest_end) if i not in self._covered]

    @classmethod
    def from_text(cls, text: str, **kwargs) -> "InputStream":
        return cls((Token(c, i, 1) for i, c in enumerate(text)), **kwargs)

    @classmethod
    def from_token_lines(cls, text: str, **kwargs) -> "InputStream":
        """Parse ``<symbol> <start> <length>`` lines; ``#`` starts a comment."""
        stream = cls(**kwargs)
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if len(parts) != 3:
                    raise ValueError
                token = Token(parts[0], int(parts[1]), int(parts[2]))
            except ValueError:
                raise InputError(f"line {lineno}: expected '<symbol> <start> <length>'") from None
            stream.push_token(token)
        return stream


def _names_nonterminal(g: "Grammar", name: str) -> bool:
    return any(s.source is not None and s.source.name == name for s in g.symbols)


def complete_earleme(session: "Session", stream: InputStream) -> Status:
    """Build the next earleme of ``session`` from ``stream``."""
    if not session.sets:
        session.initialize()
    if session.rejection is not None:
        return Status.REJECTED
    i = session.current_earleme + 1
    if i > stream.furthest_end:
        return Status.EXHAUSTED
    if not stream.covered(i - 1):
        session.reject(i - 1, f"input gap at earleme {i - 1}")
        return Status.REJECTED
    if not session.advance(stream.ending_at(i), spanning=stream.spans(i)):
        return Status.REJECTED
    return Status.EXHAUSTED if i == stream.furthest_end else Status.CONTINUE


def recognize_stream(session: "Session", stream: InputStream) -> bool:
    """Run ``session`` over the whole stream and report acceptance."""
    if not session.sets:
        session.initialize()
    status = Status.CONTINUE if stream.furthest_end else Status.EXHAUSTED
    while status is Status.CONTINUE:
        status = complete_earleme(session, stream)
    return status is Status.EXHAUSTED and session.accepted()
