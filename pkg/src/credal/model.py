"""Domain model: variables, DAGs, credal sets, conditional credal tables, networks.

Networks are plain immutable containers. Construction never raises on
semantic problems (cycles, unnormalized vertices, ...); call
:func:`validate_network` to get the list of violations.

Joint configurations are indexed row-major: the last variable of a scope
varies fastest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

EPS_NORM = 1e-9
EPS_DUP = 1e-9


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Variable:
    id: int
    cardinality: int


@dataclass(frozen=True)
class Dag:
    """Parent lists, one per variable id."""

    parents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(tuple(int(p) for p in ps) for ps in self.parents))

    def __len__(self) -> int:
        return len(self.parents)

    def children(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.parents]
        for child, ps in enumerate(self.parents):
            for p in ps:
                if 0 <= p < len(out):
                    out[p].append(child)
        return out

    def topological_order(self) -> list[int] | None:
        """Kahn's algorithm; ``None`` if the graph has a cycle."""
        n = len(self.parents)
        indeg = [len(set(ps)) for ps in self.parents]
        kids = self.children()
        ready = [v for v in range(n) if indeg[v] == 0]
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for c in sorted(set(kids[v])):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        return order if len(order) == n else None

    def roots(self) -> list[int]:
        return [v for v, ps in enumerate(self.parents) if not ps]

    def leaves(self) -> list[int]:
        return [v for v, kids in enumerate(self.children()) if not kids]


@dataclass(frozen=True, eq=False)
class CredalSet:
    """Finitely generated credal set given by its vertices (one row each)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "vertices", _frozen(v))

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CredalSet):
            return NotImplemented
        return self.vertices.shape == other.vertices.shape and bool(
            np.array_equal(self.vertices, other.vertices)
        )

    def __hash__(self) -> int:
        return hash((self.vertices.shape, self.vertices.tobytes()))

    def deduplicated(self, tol: float = EPS_DUP) -> tuple["CredalSet", int]:
        """Drop vertices within ``tol`` (max-norm) of an earlier one."""
        keep: list[int] = []
        for i, row in enumerate(self.vertices):
            if not any(np.max(np.abs(row - self.vertices[j])) <= tol for j in keep):
                keep.append(i)
        return CredalSet(self.vertices[keep]), len(self.vertices) - len(keep)


@dataclass(frozen=True)
class ConditionalCredalTable:
    """One credal set per parent configuration (row-major, last parent fastest)."""

    child: int
    parents: tuple[int, ...]
    sets: tuple[CredalSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(int(p) for p in self.parents))
        object.__setattr__(self, "sets", tuple(self.sets))


@dataclass(frozen=True)
class CredalNetwork:
    variables: tuple[Variable, ...]
    dag: Dag
    tables: tuple[ConditionalCredalTable, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "tables", tuple(self.tables))

    @classmethod
    def build(
        cls,
        cards: Sequence[int],
        parents: Sequence[Sequence[int]],
        sets: Sequence[Sequence[Iterable]],
    ) -> "CredalNetwork":
        """Convenience constructor from raw cardinalities, parent lists and vertex lists.

        ``sets[i][j]`` is the vertex list of variable ``i`` under parent
        configuration ``j``.
        """
        variables = tuple(Variable(i, int(c)) for i, c in enumerate(cards))
        dag = Dag(tuple(tuple(p) for p in parents))
        tables = tuple(
            ConditionalCredalTable(i, dag.parents[i], tuple(CredalSet(np.asarray(s, float)) for s in sets[i]))
            for i in range(len(cards))
        )
        return cls(variables, dag, tables)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def cards(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    def parent_cards(self, i: int) -> tuple[int, ...]:
        return tuple(self.variables[p].cardinality for p in self.dag.parents[i])


@dataclass(frozen=True)
class Query:
    target: int
    evidence: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "evidence", dict(sorted((int(k), int(v)) for k, v in dict(self.evidence).items())))

    def __hash__(self) -> int:
        return hash((self.target, tuple(self.evidence.items())))

    @property
    def is_marginal(self) -> bool:
        return not self.evidence

    def check(self, net: CredalNetwork) -> None:
        if not 0 <= self.target < net.n:
            raise ValueError(f"target {self.target} is not a variable of the network")
        if self.target in self.evidence:
            raise ValueError(f"target {self.target} is also observed")
        for var, state in self.evidence.items():
            if not 0 <= var < net.n:
                raise ValueError(f"evidence variable {var} is not in the network")
            if not 0 <= state < net.variables[var].cardinality:
                raise ValueError(f"evidence state {state} out of range for variable {var}")


@dataclass
class IntervalResult:
    lower: np.ndarray
    upper: np.ndarray
    method: str = ""
    time_ms: float = 0.0
    dropped: int = 0

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)

    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.lower.tolist(), self.upper.tolist()))


@dataclass(frozen=True)
class Violation:
    kind: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.location}: {self.message}"


def validate_network(net: CredalNetwork, eps_norm: float = EPS_NORM) -> list[Violation]:
    """Every invariant violation of ``net``; an empty list means well-formed."""
    out: list[Violation] = []
    n = len(net.variables)
    for i, var in enumerate(net.variables):
        if var.id != i:
            out.append(Violation("ids", f"variable {i}", f"id {var.id} breaks dense numbering"))
        if var.cardinality < 2:
            out.append(Violation("cardinality", f"variable {i}", f"cardinality {var.cardinality} < 2"))
    if len(net.dag.parents) != n:
        out.append(Violation("dag", "dag", f"{len(net.dag.parents)} parent lists for {n} variables"))
        return out
    for child, ps in enumerate(net.dag.parents):
        if child in ps:
            out.append(Violation("self-loop", f"variable {child}", "variable is its own parent"))
        if len(set(ps)) != len(ps):
            out.append(Violation("duplicate-parent", f"variable {child}", f"parents {list(ps)}"))
        for p in ps:
            if not 0 <= p < n:
                out.append(Violation("dangling-parent", f"variable {child}", f"parent {p} does not exist"))
    if not out and net.dag.topological_order() is None:
        out.append(Violation("cycle", "dag", "the graph has a directed cycle"))
    if len(net.tables) != n:
        out.append(Violation("tables", "network", f"{len(net.tables)} tables for {n} variables"))
        return out
    for i, table in enumerate(net.tables):
        where = f"table {i}"
        if table.child != i:
            out.append(Violation("table-child", where, f"child {table.child} != {i}"))
            continue
        if table.parents != net.dag.parents[i]:
            out.append(Violation("table-parents", where, f"parents {table.parents} != dag {net.dag.parents[i]}"))
            continue
        if any(not 0 <= p < n for p in table.parents):
            continue
        expected = int(np.prod([net.variables[p].cardinality for p in table.parents], dtype=int))
        if len(table.sets) != expected:
            out.append(Violation("table-shape", where, f"{len(table.sets)} credal sets, expected {expected}"))
        card = net.variables[i].cardinality
        for j, cs in enumerate(table.sets):
            loc = f"table {i}, config {j}"
            if len(cs) == 0:
                out.append(Violation("empty-set", loc, "credal set has no vertices"))
                continue
            if cs.dimension != card:
                out.append(Violation("set-dimension", loc, f"dimension {cs.dimension} != cardinality {card}"))
                continue
            for k, v in enumerate(cs.vertices):
                if not np.all(np.isfinite(v)):
                    out.append(Violation("non-finite", f"{loc}, vertex {k}", "non-finite entry"))
                    continue
                if v.min() < -eps_norm:
                    out.append(Violation("negative", f"{loc}, vertex {k}", f"min entry {v.min():.3g}"))
                gap = abs(v.sum() - 1.0)
                if gap > eps_norm:
                    out.append(Violation("normalization", f"{loc}, vertex {k}", f"|sum-1| = {gap:.3g}"))
            for a in range(len(cs)):
                for b in range(a + 1, len(cs)):
                    if np.max(np.abs(cs.vertices[a] - cs.vertices[b])) <= EPS_DUP:
                        out.append(Violation("duplicate-vertex", loc, f"vertices {a} and {b} coincide"))
    return out


def config_index(states: Sequence[int], cards: Sequence[int]) -> int:
    """Row-major index of a joint configuration (last variable fastest)."""
    if len(states) != len(cards):
        raise ValueError("states and cards differ in length")
    idx = 0
    for s, c in zip(states, cards):
        if not 0 <= s < c:
            raise ValueError(f"state {s} out of range for cardinality {c}")
        idx = idx * c + int(s)
    return idx


def config_states(index: int, cards: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`config_index`."""
    total = int(np.prod(cards, dtype=int))
    if not 0 <= index < total:
        raise ValueError(f"index {index} out of range for {total} configurations")
    out = []
    for c in reversed(cards):
        index, s = divmod(index, c)
        out.append(s)
    return tuple(reversed(out))
