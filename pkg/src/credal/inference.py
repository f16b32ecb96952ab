"""Credal variable elimination and a brute-force oracle.

A :class:`CredalFactor` holds a finite set of real tables over one joint
scope; the factor stands for their convex hull. Combination multiplies every
pair of tables and then prunes the result, either exactly (hull) or with a
k-reduction, which bounds the number of tables and yields an inner
approximation of the exact probability intervals.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import geometry
from .model import ConditionalCredalTable, CredalNetwork, CredalSet, IntervalResult, Query

log = logging.getLogger(__name__)

EPS_ZERO = 1e-12
ORACLE_CAP = 10**6


class ZeroEvidenceError(ArithmeticError):
    """Every candidate joint gives the evidence probability zero."""


@dataclass(frozen=True)
class ReductionPolicy:
    mode: str = "exact-hull"
    k: Optional[int] = None
    metric: str = "euclidean"
    pair_rule: str = "any"

    def __post_init__(self):
        if self.mode not in ("exact-hull", "k-reduce"):
            raise ValueError(f"unknown reduction mode {self.mode!r}")
        if self.mode == "k-reduce" and (self.k is None or self.k < 1):
            raise ValueError("k-reduce needs k >= 1")
        if self.metric not in geometry.METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")

    @classmethod
    def exact(cls) -> "ReductionPolicy":
        return cls("exact-hull")

    @classmethod
    def k_reduce(cls, k: int, metric: str = "euclidean", pair_rule: str = "any") -> "ReductionPolicy":
        return cls("k-reduce", k, metric, pair_rule)

    @property
    def tag(self) -> str:
        if self.mode == "exact-hull":
            return "cve"
        suffix = "" if self.metric == "euclidean" else f"-{self.metric}"
        return f"k{self.k}{suffix}"

    def reduce(self, tables: np.ndarray) -> np.ndarray:
        if self.mode == "exact-hull":
            return geometry.remove_redundant_vertices(tables)
        return geometry.k_reduction(tables, self.k, self.metric, pair_rule=self.pair_rule)


@dataclass(frozen=True, eq=False)
class CredalFactor:
    """Scope, cardinalities, and a ``(n_tables, prod(cards))`` array of tables."""

    scope: tuple[int, ...]
    cards: tuple[int, ...]
    tables: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(int(v) for v in self.scope))
        object.__setattr__(self, "cards", tuple(int(c) for c in self.cards))
        tables = np.atleast_2d(np.asarray(self.tables, dtype=float))
        size = int(np.prod(self.cards, dtype=int))
        if len(self.scope) != len(self.cards) or len(set(self.scope)) != len(self.scope):
            raise ValueError("scope and cards must match and the scope be duplicate-free")
        if tables.shape[1] != size or tables.shape[0] < 1:
            raise ValueError(f"tables must have shape (n>=1, {size}), got {tables.shape}")
        object.__setattr__(self, "tables", tables)

    def __len__(self) -> int:
        return self.tables.shape[0]

    def tensor(self) -> np.ndarray:
        return self.tables.reshape((len(self),) + self.cards)

    @classmethod
    def unit(cls) -> "CredalFactor":
        return cls((), (), np.ones((1, 1)))


def factor_from_table(table: ConditionalCredalTable, cards: Sequence[int]) -> CredalFactor:
    """Every conditional table obtained by picking one vertex per parent configuration.

    ``cards`` are the cardinalities of the whole network. Scope is the parents
    followed by the child.
    """
    scope = table.parents + (table.child,)
    fcards = tuple(cards[v] for v in scope)
    choices = [cs.vertices for cs in table.sets]
    grids = np.meshgrid(*[np.arange(len(c)) for c in choices], indexing="ij")
    picks = [g.reshape(-1) for g in grids]
    n_tables = len(picks[0])
    out = np.empty((n_tables, len(choices), fcards[-1]))
    for cfg, (verts, idx) in enumerate(zip(choices, picks)):
        out[:, cfg, :] = verts[idx]
    return CredalFactor(scope, fcards, out.reshape(n_tables, -1))


def _aligned(f: CredalFactor, scope: tuple[int, ...], cards: tuple[int, ...]) -> np.ndarray:
    """f's tensor with axes permuted/expanded to ``(n, *scope)`` for broadcasting."""
    t = f.tensor()
    perm = [0] + [1 + f.scope.index(v) for v in scope if v in f.scope]
    t = np.transpose(t, perm)
    shape = (len(f),) + tuple(c if v in f.scope else 1 for v, c in zip(scope, cards))
    return t.reshape(shape)


def combine(f: CredalFactor, g: CredalFactor, policy: Optional[ReductionPolicy] = None) -> CredalFactor:
    """All pairwise products of the tables of ``f`` and ``g``, then reduced per ``policy``.

    ``policy=None`` skips the reduction.
    """
    for v, c in zip(g.scope, g.cards):
        if v in f.scope and f.cards[f.scope.index(v)] != c:
            raise ValueError(f"cardinality mismatch on variable {v}")
    scope = f.scope + tuple(v for v in g.scope if v not in f.scope)
    cards = f.cards + tuple(c for v, c in zip(g.scope, g.cards) if v not in f.scope)
    a = _aligned(f, scope, cards)
    b = _aligned(g, scope, cards)
    prod = a[:, None, ...] * b[None, :, ...]
    tables = prod.reshape(len(f) * len(g), -1)
    if policy is not None:
        tables = policy.reduce(tables)
    return CredalFactor(scope, cards, tables)


def marginalize_out(f: CredalFactor, v: int) -> CredalFactor:
    if v not in f.scope:
        raise ValueError(f"variable {v} not in scope {f.scope}")
    ax = f.scope.index(v)
    summed = f.tensor().sum(axis=1 + ax)
    scope = f.scope[:ax] + f.scope[ax + 1 :]
    cards = f.cards[:ax] + f.cards[ax + 1 :]
    return CredalFactor(scope, cards, summed.reshape(len(f), -1))


def restrict_evidence(f: CredalFactor, v: int, state: int) -> CredalFactor:
    if v not in f.scope:
        raise ValueError(f"variable {v} not in scope {f.scope}")
    ax = f.scope.index(v)
    if not 0 <= state < f.cards[ax]:
        raise ValueError(f"state {state} out of range for variable {v}")
    sliced = np.take(f.tensor(), state, axis=1 + ax)
    scope = f.scope[:ax] + f.scope[ax + 1 :]
    cards = f.cards[:ax] + f.cards[ax + 1 :]
    return CredalFactor(scope, cards, sliced.reshape(len(f), -1))


def moral_graph(net: CredalNetwork) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {v: set() for v in range(net.n)}
    for child, ps in enumerate(net.dag.parents):
        family = list(ps) + [child]
        for a, b in itertools.combinations(family, 2):
            adj[a].add(b)
            adj[b].add(a)
    return adj


def _fill_in(adj: dict[int, set[int]], v: int) -> int:
    nbrs = sorted(adj[v])
    return sum(1 for a, b in itertools.combinations(nbrs, 2) if b not in adj[a])


def elimination_order(net: CredalNetwork, q: Query) -> list[int]:
    """Greedy min-fill order over every variable but the target.

    Ties go to the smaller degree, then the smaller id.
    """
    adj = {v: set(ns) for v, ns in moral_graph(net).items()}
    todo = set(range(net.n)) - {q.target}
    order = []
    while todo:
        v = min(todo, key=lambda u: (_fill_in(adj, u), len(adj[u]), u))
        nbrs = adj.pop(v)
        for a in nbrs:
            adj[a].discard(v)
            adj[a].update(nbrs - {a})
        order.append(v)
        todo.remove(v)
    return order


def _bounds(final: CredalFactor, q: Query) -> tuple[np.ndarray, np.ndarray, int]:
    tables = final.tables
    if q.is_marginal:
        return tables.min(axis=0), tables.max(axis=0), 0
    mass = tables.sum(axis=1)
    ok = mass > EPS_ZERO
    dropped = int(np.sum(~ok))
    if not ok.any():
        raise ZeroEvidenceError("conditioning on probability-zero evidence")
    if dropped:
        log.warning("dropped %d zero-evidence tables", dropped)
    ratios = tables[ok] / mass[ok, None]
    return ratios.min(axis=0), ratios.max(axis=0), dropped


def credal_ve(
    net: CredalNetwork,
    q: Query,
    policy: Optional[ReductionPolicy] = None,
    *,
    preprocess: bool = True,
    order: Optional[Sequence[int]] = None,
    stats: Optional[dict] = None,
) -> IntervalResult:
    """Lower/upper probabilities of every target state.

    With the exact-hull policy the bounds are exact; with k-reduce every
    factor keeps at most ``k`` tables and the interval is nested in the exact
    one. ``preprocess`` first reduces the network to the requisite graph.
    ``stats``, if given, receives ``max_tables`` (largest table count of any
    reduced factor) and ``max_products`` (largest pre-reduction count).
    """
    from .preprocess import requisite_graph

    policy = policy or ReductionPolicy.exact()
    q.check(net)
    start = time.perf_counter()
    if preprocess:
        req = requisite_graph(net, q)
        net, q = req.reduced, req.query
    if order is None:
        order = elimination_order(net, q)
    max_tables = 0
    max_products = 0

    def reduced(tables: np.ndarray) -> np.ndarray:
        nonlocal max_tables
        out = policy.reduce(tables)
        max_tables = max(max_tables, len(out))
        return out

    factors: list[CredalFactor] = []
    for table in net.tables:
        # vertices of a product of polytopes are the products of their vertices,
        # so hulling each local set makes the exact initial factor already pruned
        hulled = ConditionalCredalTable(
            table.child,
            table.parents,
            tuple(CredalSet(geometry.remove_redundant_vertices(cs.vertices)) for cs in table.sets),
        )
        f = factor_from_table(hulled, net.cards)
        observed = [v for v in f.scope if v in q.evidence]
        for v in observed:
            f = restrict_evidence(f, v, q.evidence[v])
        if observed or policy.mode == "k-reduce":
            f = CredalFactor(f.scope, f.cards, reduced(f.tables))
        max_tables = max(max_tables, len(f))
        factors.append(f)

    def product(fs: list[CredalFactor]) -> CredalFactor:
        nonlocal max_products
        acc = fs[0]
        for g in fs[1:]:
            raw = combine(acc, g)
            max_products = max(max_products, len(raw))
            acc = CredalFactor(raw.scope, raw.cards, reduced(raw.tables))
        return acc

    for v in order:
        if v in q.evidence:
            continue
        touching = [f for f in factors if v in f.scope]
        if not touching:
            continue
        factors = [f for f in factors if v not in f.scope]
        summed = marginalize_out(product(touching), v)
        # summing out can only shrink the hull; prune without merging
        factors.append(CredalFactor(summed.scope, summed.cards, geometry.remove_redundant_vertices(summed.tables)))

    final = product(factors) if factors else CredalFactor.unit()
    if final.scope != (q.target,):
        missing = set(final.scope) - {q.target}
        for v in missing:
            final = marginalize_out(final, v)
        if q.target not in final.scope:
            raise RuntimeError("target vanished from the final factor")
    lower, upper, dropped = _bounds(final, q)
    elapsed = (time.perf_counter() - start) * 1000.0
    if stats is not None:
        stats["max_tables"] = max_tables
        stats["max_products"] = max_products
        stats["final_tables"] = final.tables
    return IntervalResult(lower, upper, method=policy.tag, time_ms=elapsed, dropped=dropped)


def selection_count(net: CredalNetwork) -> int:
    """Number of global vertex selections (product of all local vertex counts)."""
    total = 1
    for table in net.tables:
        for cs in table.sets:
            total *= len(cs)
    return total


def brute_force_oracle(net: CredalNetwork, q: Query, cap: int = ORACLE_CAP) -> IntervalResult:
    """Exact bounds by enumerating every global vertex selection.

    For each selection the full joint is built by direct multiplication and
    the query evaluated on it; the bounds are the min and max over all
    selections.
    """
    q.check(net)
    count = selection_count(net)
    if count > cap:
        raise ValueError(f"{count} vertex selections exceed the cap of {cap}")
    start = time.perf_counter()
    cards = net.cards
    n = net.n
    # per variable: every full CPT choice, as an array shaped for broadcasting over the joint
    cpt_choices = []
    for i, table in enumerate(net.tables):
        ps = table.parents
        picks = itertools.product(*[range(len(cs)) for cs in table.sets])
        arrs = []
        for pick in picks:
            cpt = np.stack([table.sets[cfg].vertices[j] for cfg, j in enumerate(pick)])
            cpt = cpt.reshape(tuple(cards[p] for p in ps) + (cards[i],))
            # move axes into joint order 0..n-1
            axes = list(ps) + [i]
            full = np.moveaxis(cpt, range(len(axes)), np.argsort(np.argsort(axes)))
            shape = [1] * n
            for a in axes:
                shape[a] = cards[a]
            arrs.append(full.reshape(shape))
        cpt_choices.append(arrs)
    others = tuple(a for a in range(n) if a != q.target)
    lo = np.full(cards[q.target], np.inf)
    hi = np.full(cards[q.target], -np.inf)
    dropped = 0
    index = [slice(None)] * n
    for var, state in q.evidence.items():
        index[var] = slice(state, state + 1)
    kept = 0
    for sel in itertools.product(*cpt_choices):
        joint = sel[0]
        for arr in sel[1:]:
            joint = joint * arr
        joint = joint[tuple(index)]
        marg = joint.sum(axis=others) if others else joint
        marg = marg.reshape(-1)
        if not q.is_marginal:
            mass = marg.sum()
            if mass <= EPS_ZERO:
                dropped += 1
                continue
            marg = marg / mass
        kept += 1
        np.minimum(lo, marg, out=lo)
        np.maximum(hi, marg, out=hi)
    if kept == 0:
        raise ZeroEvidenceError("conditioning on probability-zero evidence")
    elapsed = (time.perf_counter() - start) * 1000.0
    return IntervalResult(lo, hi, method="oracle", time_ms=elapsed, dropped=dropped)


def is_normalized(tables: np.ndarray, tol: float = 1e-6) -> bool:
    return bool(np.all(np.abs(tables.sum(axis=1) - 1.0) <= tol))


__all__ = [
    "CredalFactor",
    "ReductionPolicy",
    "ZeroEvidenceError",
    "brute_force_oracle",
    "combine",
    "credal_ve",
    "elimination_order",
    "factor_from_table",
    "marginalize_out",
    "moral_graph",
    "restrict_evidence",
    "selection_count",
]
