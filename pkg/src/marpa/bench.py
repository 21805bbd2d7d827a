"""Growth measurements in Earley items and attempts.

Counts stand in for time: every unit of work the recognizer does is charged
to an item or to an attempt to add one, so the counters grow exactly as the
running time does and are deterministic.
"""
from __future__ import annotations

import csv
import io
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .grammar import Grammar
from .input import InputStream, Token, recognize_stream
from .oracle import EarleyOracle
from .recognizer import Session

COLUMNS = ("n", "total_items", "total_attempts", "max_set_size")


class BenchError(ValueError):
    pass


class Row(NamedTuple):
    n: int
    total_items: int
    total_attempts: int
    max_set_size: int
    accepted: bool = True
    # (earleme + 1) * |fa| bound violations seen in this run
    bound_violations: int = 0
    # Leo reductions whose result state holds more than one dotted rule
    leo_violations: int = 0


def repeat(symbol: str) -> Callable[[int], list[Token]]:
    """Input family ``symbol^n``."""
    def generate(n: int) -> list[Token]:
        return [Token(symbol, i, 1) for i in range(n)]
    return generate


def measure(
    grammar: Grammar,
    generate: Callable[[int], Sequence[Token]],
    sizes: Iterable[int],
    *,
    leo: bool = True,
    links: bool = True,
    engine: str = "marpa",
) -> list[Row]:
    """Run one recognizer per size and collect its counters.

    ``engine`` is ``"marpa"`` or ``"oracle"`` (the dotted-rule recognizer).
    """
    rows = []
    for n in sizes:
        try:
            tokens = list(generate(n))
        except Exception as exc:
            raise BenchError(f"input generator failed for n={n}: {exc}") from exc
        if engine == "marpa":
            session = Session(grammar, leo=leo, links=links)
            ok = recognize_stream(session, InputStream(tokens))
            total = sum(len(s) for s in session.sets)
            assert total == session.total_items
            fa = len(session.states)
            violations = sum(len(s) > (s.earleme + 1) * fa for s in session.sets)
            rows.append(Row(n, session.total_items, session.total_attempts,
                            session.max_set_size, ok, violations,
                            session.leo_singleton_violations))
        elif engine == "oracle":
            oracle = EarleyOracle(grammar, leo=leo)
            oracle.initialize()
            end = max((t.end for t in tokens), default=0)
            for i in range(1, end + 1):
                oracle.advance([t for t in tokens if t.end == i])
            rows.append(Row(n, oracle.total_items, oracle.total_attempts,
                            oracle.max_set_size, oracle.accepted()))
        else:
            raise BenchError(f"unknown engine {engine!r}")
    return rows


def fit_growth(rows: Sequence[Row | Sequence[float]]) -> dict[str, float]:
    """Log-log least-squares slope of each counter against n."""
    if len(rows) < 3:
        raise BenchError("growth fit needs at least 3 sizes")
    data = np.array([[float(v) for v in row[:4]] for row in rows])
    if np.any(data <= 0):
        raise BenchError("growth fit needs positive sizes and counts")
    x = np.log(data[:, 0])
    if np.ptp(x) == 0:
        raise BenchError("growth fit needs distinct sizes")
    slopes = {}
    for k, name in enumerate(COLUMNS[1:], start=1):
        slope, _ = np.polyfit(x, np.log(data[:, k]), 1)
        slopes[name] = float(slope)
    return slopes


def to_csv(rows: Iterable[Row]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow(row[:4])
    return buf.getvalue()
