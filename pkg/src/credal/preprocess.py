"""Query-preserving reduction of a credal network to its requisite graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import remove_redundant_vertices
from .model import ConditionalCredalTable, CredalNetwork, CredalSet, Dag, Query, Variable, config_index


@dataclass(frozen=True)
class RequisiteResult:
    reduced: CredalNetwork
    query: Query
    var_map: dict[int, int]

    @property
    def size(self) -> int:
        return self.reduced.n


def merge_states(cs: CredalSet, kept: int) -> CredalSet:
    """Collapse a credal set onto {kept state, any other state}.

    Each vertex v becomes (v[kept], 1 - v[kept]); the result is re-hulled, so
    it has at most two vertices.
    """
    if not 0 <= kept < cs.dimension:
        raise ValueError(f"state {kept} out of range for dimension {cs.dimension}")
    p = cs.vertices[:, kept]
    pts = np.column_stack([p, 1.0 - p])
    return CredalSet(remove_redundant_vertices(pts))


def _barren_pruned(net: CredalNetwork, q: Query) -> set[int]:
    keep = set(range(net.n))
    protected = {q.target} | set(q.evidence)
    while True:
        has_child = {p for v in keep for p in net.dag.parents[v]}
        barren = {v for v in keep if v not in has_child and v not in protected}
        if not barren:
            return keep
        keep -= barren


def requisite_graph(net: CredalNetwork, q: Query) -> RequisiteResult:
    """Drop everything the query does not depend on.

    In order: iterated barren-node removal, cutting arcs out of observed
    variables (children keep the slice for the observed state), binarizing
    observed variables with three or more states, and keeping the target's
    connected component. Ids of the survivors are renumbered densely in
    their original order.
    """
    q.check(net)
    keep = _barren_pruned(net, q)

    cards = list(net.cards)
    parents = {v: list(net.dag.parents[v]) for v in keep}
    sets = {v: list(net.tables[v].sets) for v in keep}

    # cut arcs leaving observed variables
    for v in sorted(keep):
        ps = parents[v]
        if not any(p in q.evidence for p in ps):
            continue
        pcards = [cards[p] for p in ps]
        free = [p for p in ps if p not in q.evidence]
        free_cards = [cards[p] for p in free]
        new_sets = []
        for j in range(int(np.prod(free_cards, dtype=int))):
            states = []
            rem = j
            for c in reversed(free_cards):
                rem, s = divmod(rem, c)
                states.append(s)
            free_states = dict(zip(free, reversed(states)))
            full = [q.evidence[p] if p in q.evidence else free_states[p] for p in ps]
            new_sets.append(sets[v][config_index(full, pcards)])
        parents[v] = free
        sets[v] = new_sets

    evidence = dict(q.evidence)
    for v in sorted(q.evidence):
        if cards[v] > 2:
            sets[v] = [merge_states(cs, evidence[v]) for cs in sets[v]]
            cards[v] = 2
            evidence[v] = 0

    # connected component of the target (undirected view of the cut graph)
    adj: dict[int, set[int]] = {v: set() for v in keep}
    for v in keep:
        for p in parents[v]:
            adj[v].add(p)
            adj[p].add(v)
    comp = {q.target}
    stack = [q.target]
    while stack:
        u = stack.pop()
        for w in adj[u] - comp:
            comp.add(w)
            stack.append(w)

    old_ids = sorted(comp)
    var_map = {old: new for new, old in enumerate(old_ids)}
    variables = tuple(Variable(var_map[v], cards[v]) for v in old_ids)
    new_parents = tuple(tuple(var_map[p] for p in parents[v]) for v in old_ids)
    tables = tuple(
        ConditionalCredalTable(var_map[v], new_parents[var_map[v]], tuple(sets[v])) for v in old_ids
    )
    reduced = CredalNetwork(variables, Dag(new_parents), tables)
    query = Query(var_map[q.target], {var_map[v]: s for v, s in evidence.items() if v in comp})
    return RequisiteResult(reduced, query, var_map)
