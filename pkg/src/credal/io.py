"""Reading and writing credal networks (V- and H-form) and benchmark CSVs.

Both network formats share a UAI-like preamble::

    V-CREDAL            (or H-CREDAL)
    n
    card_0 ... card_{n-1}
    n
    m  p_1 ... p_{m-1} child     (one scope line per table, child last)
    ...

followed, per table and per parent configuration (row-major, last parent
fastest), by a count and that many blocks of numbers: vertices of
``|child|`` floats in V-form, or rows of ``|child| + 1`` floats
(``coeffs . x <= bound``) in H-form. Tokens are whitespace separated and
``#`` starts a comment.
"""

from __future__ import annotations

import csv
import math
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from .geometry import HPolytope, h_to_v, v_to_h
from .model import (
    EPS_DUP,
    EPS_NORM,
    ConditionalCredalTable,
    CredalNetwork,
    CredalSet,
    Dag,
    Variable,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DuplicateVertexWarning(UserWarning):
    pass


@dataclass(frozen=True)
class HCredalNetwork:
    """A credal network whose local credal sets are given by linear constraints."""

    variables: tuple[Variable, ...]
    dag: Dag
    polytopes: tuple[tuple[HPolytope, ...], ...]

    @property
    def n(self) -> int:
        return len(self.variables)


@dataclass
class _Token:
    text: str
    line: int
    column: int


class _Tokens:
    def __init__(self, text: str):
        self._items: list[_Token] = []
        last_line = 1
        for lineno, raw in enumerate(text.splitlines(), start=1):
            last_line = lineno
            body = raw.split("#", 1)[0]
            for m in re.finditer(r"\S+", body):
                self._items.append(_Token(m.group(), lineno, m.start() + 1))
        self._eof_line = last_line
        self._pos = 0

    def _next(self, expected: str) -> _Token:
        if self._pos >= len(self._items):
            raise ParseError(f"unexpected end of input, expected {expected}", self._eof_line)
        tok = self._items[self._pos]
        self._pos += 1
        return tok

    def peek_position(self) -> tuple[int, int]:
        if self._pos >= len(self._items):
            return self._eof_line, 0
        tok = self._items[self._pos]
        return tok.line, tok.column

    def literal(self, word: str) -> _Token:
        tok = self._next(repr(word))
        if tok.text != word:
            raise ParseError(f"expected {word!r}, found {tok.text!r}", tok.line, tok.column)
        return tok

    def integer(self, what: str, lo: int = 0, hi: Optional[int] = None) -> int:
        tok = self._next(what)
        if not re.fullmatch(r"[+-]?\d+", tok.text):
            raise ParseError(f"expected integer {what}, found {tok.text!r}", tok.line, tok.column)
        value = int(tok.text)
        if value < lo or (hi is not None and value > hi):
            bound = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
            raise ParseError(f"{what} {value} outside {bound}", tok.line, tok.column)
        return value

    def real(self, what: str) -> float:
        tok = self._next(what)
        try:
            value = float(tok.text)
        except ValueError:
            raise ParseError(f"expected number {what}, found {tok.text!r}", tok.line, tok.column) from None
        if not math.isfinite(value):
            raise ParseError(f"non-finite number {tok.text!r}", tok.line, tok.column)
        return value

    def end(self) -> None:
        if self._pos < len(self._items):
            tok = self._items[self._pos]
            raise ParseError(f"trailing content {tok.text!r}", tok.line, tok.column)


# generous caps keep fuzzed counts from allocating absurd amounts of memory
_MAX_VARS = 10_000
_MAX_CARD = 1_000
_MAX_BLOCKS = 100_000


def _preamble(toks: _Tokens, header: str) -> tuple[list[int], list[tuple[int, ...]], list[int]]:
    """Header, cardinalities and scopes; returns cards, parents and the table order."""
    toks.literal(header)
    n = toks.integer("variable count", 1, _MAX_VARS)
    cards = [toks.integer(f"cardinality of variable {i}", 2, _MAX_CARD) for i in range(n)]
    line, col = toks.peek_position()
    if toks.integer("table count", 0) != n:
        raise ParseError(f"table count must equal the variable count {n}", line, col)
    parents: list = [None] * n
    order = []
    for t in range(n):
        line, col = toks.peek_position()
        m = toks.integer(f"scope size of table {t}", 1, n)
        scope = [toks.integer(f"scope variable of table {t}", 0, n - 1) for _ in range(m)]
        child = scope[-1]
        if len(set(scope)) != m:
            raise ParseError(f"repeated variable in scope {scope}", line, col)
        if parents[child] is not None:
            raise ParseError(f"second table for variable {child}", line, col)
        parents[child] = tuple(scope[:-1])
        order.append(child)
    dag = Dag(tuple(p or () for p in parents))
    if dag.topological_order() is None:
        raise ParseError("the declared scopes form a directed cycle", line, col)
    return cards, [tuple(p) for p in parents], order


def parse_vcredal(text: str) -> CredalNetwork:
    """Parse a V-form network. Duplicate vertices are dropped with a warning."""
    toks = _Tokens(text)
    cards, parents, order = _preamble(toks, "V-CREDAL")
    sets: dict[int, list[CredalSet]] = {}
    dropped = 0
    for child in order:
        n_cfg = math.prod(cards[p] for p in parents[child])
        if n_cfg > _MAX_BLOCKS:
            raise ParseError(f"table for variable {child} has too many parent configurations", *toks.peek_position())
        d = cards[child]
        sets[child] = []
        for cfg in range(n_cfg):
            v = toks.integer(f"vertex count (variable {child}, config {cfg})", 1, _MAX_BLOCKS)
            verts = []
            for _ in range(v):
                line, col = toks.peek_position()
                vert = np.array([toks.real("probability") for _ in range(d)])
                if vert.min() < -EPS_NORM or abs(vert.sum() - 1.0) > EPS_NORM:
                    raise ParseError(
                        f"vertex {vert.tolist()} is not a probability mass function", line, col
                    )
                verts.append(vert)
            cs, extra = CredalSet(np.array(verts)).deduplicated(EPS_DUP)
            dropped += extra
            sets[child].append(cs)
    toks.end()
    if dropped:
        warnings.warn(f"dropped {dropped} duplicate vertices", DuplicateVertexWarning, stacklevel=2)
    variables = tuple(Variable(i, c) for i, c in enumerate(cards))
    tables = tuple(ConditionalCredalTable(i, parents[i], tuple(sets[i])) for i in range(len(cards)))
    return CredalNetwork(variables, Dag(tuple(parents)), tables)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _preamble_lines(header: str, cards: Iterable[int], parents: Iterable[Iterable[int]]) -> list[str]:
    cards = list(cards)
    lines = [header, str(len(cards)), " ".join(map(str, cards)), str(len(cards))]
    for child, ps in enumerate(parents):
        scope = list(ps) + [child]
        lines.append(" ".join(map(str, [len(scope)] + scope)))
    return lines


def serialize_vcredal(net: CredalNetwork) -> str:
    lines = _preamble_lines("V-CREDAL", net.cards, net.dag.parents)
    for table in net.tables:
        for cs in table.sets:
            lines.append(str(len(cs)))
            lines.extend(" ".join(_fmt(x) for x in v) for v in cs.vertices)
    return "\n".join(lines) + "\n"


def parse_hcredal(text: str) -> HCredalNetwork:
    toks = _Tokens(text)
    cards, parents, order = _preamble(toks, "H-CREDAL")
    polys: dict[int, list[HPolytope]] = {}
    for child in order:
        n_cfg = math.prod(cards[p] for p in parents[child])
        if n_cfg > _MAX_BLOCKS:
            raise ParseError(f"table for variable {child} has too many parent configurations", *toks.peek_position())
        d = cards[child]
        polys[child] = []
        for cfg in range(n_cfg):
            c = toks.integer(f"row count (variable {child}, config {cfg})", 0, _MAX_BLOCKS)
            rows = np.array([[toks.real("coefficient") for _ in range(d + 1)] for _ in range(c)]).reshape(c, d + 1)
            polys[child].append(HPolytope(rows[:, :d], rows[:, d]))
    toks.end()
    variables = tuple(Variable(i, c) for i, c in enumerate(cards))
    return HCredalNetwork(variables, Dag(tuple(parents)), tuple(tuple(polys[i]) for i in range(len(cards))))


def serialize_hcredal(hnet: HCredalNetwork) -> str:
    lines = _preamble_lines("H-CREDAL", (v.cardinality for v in hnet.variables), hnet.dag.parents)
    for polys in hnet.polytopes:
        for hp in polys:
            lines.append(str(len(hp)))
            for coeff, bound in zip(hp.coeffs, hp.bounds):
                lines.append(" ".join(_fmt(x) for x in list(coeff) + [bound]))
    return "\n".join(lines) + "\n"


def to_hcredal(net: CredalNetwork) -> HCredalNetwork:
    polys = tuple(tuple(v_to_h(cs.vertices) for cs in table.sets) for table in net.tables)
    return HCredalNetwork(net.variables, net.dag, polys)


def from_hcredal(hnet: HCredalNetwork) -> CredalNetwork:
    tables = tuple(
        ConditionalCredalTable(i, hnet.dag.parents[i], tuple(CredalSet(h_to_v(hp)) for hp in polys))
        for i, polys in enumerate(hnet.polytopes)
    )
    return CredalNetwork(hnet.variables, hnet.dag, tables)


def read_network(path) -> CredalNetwork:
    """Load a network file in either form (H-form is converted to vertices)."""
    text = Path(path).read_text()
    head = text.lstrip().split(None, 1)[0] if text.strip() else ""
    if head == "H-CREDAL":
        return from_hcredal(parse_hcredal(text))
    return parse_vcredal(text)


# -- benchmark records ---------------------------------------------------------

CSV_FIELDS = ["model_id", "task", "target", "evidence", "method", "state", "lower", "upper", "time_ms"]


@dataclass(frozen=True)
class BenchmarkRecord:
    model_id: str
    task: str
    target: int
    evidence: dict = field(default_factory=dict)
    method: str = ""
    state: int = 0
    lower: float = 0.0
    upper: float = 0.0
    time_ms: float = 0.0

    def __post_init__(self):
        if self.task not in ("marginal", "conditional"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")
        if self.time_ms < 0:
            raise ValueError("time_ms must be nonnegative")

    def __hash__(self) -> int:
        return hash((self.model_id, self.task, self.target, tuple(sorted(self.evidence.items())), self.method, self.state))

    @property
    def key(self) -> tuple:
        return (self.model_id, self.task, self.state)


def encode_evidence(evidence: dict) -> str:
    return ";".join(f"{k}={v}" for k, v in sorted(evidence.items()))


def decode_evidence(text: str) -> dict:
    out = {}
    if not text:
        return out
    for part in text.split(";"):
        var, eq, state = part.partition("=")
        if not eq:
            raise ValueError(f"bad evidence item {part!r}")
        out[int(var)] = int(state)
    return out


def write_benchmark_csv(path, records: Iterable[BenchmarkRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow(
                [r.model_id, r.task, r.target, encode_evidence(r.evidence), r.method, r.state,
                 repr(float(r.lower)), repr(float(r.upper)), repr(float(r.time_ms))]
            )


def iter_benchmark_csv(path) -> Iterator[BenchmarkRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_FIELDS:
            raise ParseError(f"header {header} does not match {CSV_FIELDS}", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_FIELDS):
                raise ParseError(f"expected {len(CSV_FIELDS)} fields, found {len(row)}", lineno)
            try:
                yield BenchmarkRecord(
                    model_id=row[0],
                    task=row[1],
                    target=int(row[2]),
                    evidence=decode_evidence(row[3]),
                    method=row[4],
                    state=int(row[5]),
                    lower=float(row[6]),
                    upper=float(row[7]),
                    time_ms=float(row[8]),
                )
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None


def read_benchmark_csv(path) -> list[BenchmarkRecord]:
    return list(iter_benchmark_csv(path))
