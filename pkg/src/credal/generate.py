"""Random credal networks and inference-task selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import remove_redundant_vertices
from .model import ConditionalCredalTable, CredalNetwork, CredalSet, Dag, Query, Variable
from .preprocess import requisite_graph

MAX_NODES = 10
MAX_INDEGREE = 6
MAX_VERTICES = 6


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenParams:
    n_nodes: int = 5
    card_range: tuple[int, int] = (2, 3)
    max_indegree: int = 2
    vertex_range: tuple[int, int] = (2, 6)
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.card_range
        vlo, vhi = self.vertex_range
        if not 1 <= self.n_nodes <= MAX_NODES:
            raise ValueError(f"n_nodes must be in [1, {MAX_NODES}]")
        if not 2 <= lo <= hi <= 3:
            raise ValueError("card_range must lie within [2, 3]")
        if not 0 <= self.max_indegree <= MAX_INDEGREE:
            raise ValueError(f"max_indegree must be in [0, {MAX_INDEGREE}]")
        if not 1 <= vlo <= vhi <= MAX_VERTICES:
            raise ValueError(f"vertex_range must lie within [1, {MAX_VERTICES}]")


def sample_simplex(d: int, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Uniform draw(s) from the probability simplex over ``d`` states.

    Normalized i.i.d. unit exponentials, i.e. Dirichlet(1, ..., 1).
    Normalizing independent uniforms instead would not be uniform.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    shape = (d,) if size is None else (size, d)
    g = rng.exponential(1.0, size=shape)
    return g / g.sum(axis=-1, keepdims=True)


def sample_credal_set(d: int, v: int, rng: np.random.Generator, max_tries: int = 1000) -> CredalSet:
    """A credal set with exactly ``v`` vertices drawn uniformly from the simplex.

    Each attempt draws ``v`` fresh points and keeps them only if all of them
    are extreme.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if v < 1:
        raise ValueError(f"v must be >= 1, got {v}")
    for _ in range(max_tries):
        pts = sample_simplex(d, rng, size=v)
        verts = remove_redundant_vertices(pts)
        if len(verts) == v:
            return CredalSet(verts)
    raise SamplingError(f"no {v}-vertex credal set over {d} states after {max_tries} attempts")


def random_network(p: GenParams) -> CredalNetwork:
    """A random credal network; a pure function of ``p`` (seed included).

    Binary variables get at most two vertices per credal set, since a
    segment has no more extreme points.
    """
    rng = np.random.default_rng(p.seed)
    n = p.n_nodes
    topo = rng.permutation(n)
    parents: list[tuple[int, ...]] = [()] * n
    for pos, node in enumerate(topo):
        preds = topo[:pos]
        k = int(rng.integers(0, min(p.max_indegree, len(preds)) + 1))
        chosen = rng.choice(preds, size=k, replace=False) if k else []
        parents[node] = tuple(sorted(int(c) for c in chosen))
    cards = [int(rng.integers(p.card_range[0], p.card_range[1] + 1)) for _ in range(n)]
    tables = []
    for i in range(n):
        n_cfg = int(np.prod([cards[q] for q in parents[i]], dtype=int))
        vhi = min(p.vertex_range[1], 2) if cards[i] == 2 else p.vertex_range[1]
        vlo = min(p.vertex_range[0], vhi)
        sets = tuple(
            sample_credal_set(cards[i], int(rng.integers(vlo, vhi + 1)), rng) for _ in range(n_cfg)
        )
        tables.append(ConditionalCredalTable(i, parents[i], sets))
    return CredalNetwork(tuple(Variable(i, c) for i, c in enumerate(cards)), Dag(tuple(parents)), tuple(tables))


def requisite_size(net: CredalNetwork, q: Query) -> int:
    return requisite_graph(net, q).size


def select_tasks(net: CredalNetwork) -> tuple[Query, Optional[Query]]:
    """A marginal and a conditional task whose requisite graphs are largest.

    The marginal task scans every target; the conditional one scans every
    root target with one leaf observed in state 0. Ties go to the smallest
    target, then the smallest evidence variable. Networks without a
    (root, distinct leaf) pair get no conditional task.
    """
    marginal = max(
        (Query(t) for t in range(net.n)),
        key=lambda q: (requisite_size(net, q), -q.target),
    )
    candidates = [
        Query(r, {leaf: 0}) for r in net.dag.roots() for leaf in net.dag.leaves() if leaf != r
    ]
    if not candidates:
        return marginal, None
    conditional = max(
        candidates,
        key=lambda q: (requisite_size(net, q), -q.target, -next(iter(q.evidence))),
    )
    return marginal, conditional
