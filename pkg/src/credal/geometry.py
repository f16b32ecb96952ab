"""Convex-set machinery for finitely generated credal sets.

Point sets are plain ``(m, d)`` float arrays, one point per row. The module
covers redundant-vertex removal, closest-pair merging (k-reduction),
distances, the Gram-Schmidt full-rank embedding and V/H conversion.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .model import EPS_DUP

EPS_FEAS = 1e-9
RANK_TOL = 1e-9
EPS_KL = 1e-12
METRICS = ("euclidean", "sym-kl")

_TIE_RTOL = 1e-12
_QHULL_MAX_RANK = 6
_SHADOW_ROUNDS = 40
_SHADOW_DIM = 4


class InfeasibleError(ValueError):
    """An H-representation describes no point of the probability simplex.

    ``empty`` is False when loosening the tolerance tenfold does produce
    vertices, i.e. the failure is numerical rather than a truly empty set.
    """

    def __init__(self, message: str, empty: bool = True):
        super().__init__(message)
        self.empty = empty


def as_points(ps, d: Optional[int] = None) -> np.ndarray:
    arr = np.asarray(ps, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d point array, got shape {arr.shape}")
    if d is not None and arr.shape[1] != d:
        raise ValueError(f"points have dimension {arr.shape[1]}, expected {d}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    return arr


@dataclass(frozen=True)
class Hyperplane:
    """The set {x : normal . x = offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        if not np.any(normal):
            raise ValueError("hyperplane normal must be nonzero")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    def value(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.normal - self.offset

    def contains(self, x, tol: float = EPS_FEAS) -> bool:
        return bool(np.all(np.abs(self.value(x)) <= tol))

    def supports(self, points, tol: float = EPS_FEAS) -> bool:
        """True if every point lies on the non-positive side."""
        return bool(np.all(self.value(as_points(points)) <= tol))


@dataclass(frozen=True)
class HPolytope:
    """Rows ``coeffs @ x <= bounds``; sum(x) = 1 and x >= 0 are implicit.

    ``origin`` and ``basis`` record the affine subspace the rows were
    computed in (rows of ``basis`` are orthonormal), when known.
    """

    coeffs: np.ndarray
    bounds: np.ndarray
    origin: Optional[np.ndarray] = None
    basis: Optional[np.ndarray] = None

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        bounds = np.asarray(self.bounds, dtype=float).reshape(-1)
        if coeffs.ndim != 2 or coeffs.shape[0] != bounds.shape[0]:
            raise ValueError("coeffs must be (rows, d) with one bound per row")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "bounds", bounds)

    @property
    def dimension(self) -> int:
        return self.coeffs.shape[1]

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def contains(self, x, tol: float = EPS_FEAS) -> bool:
        x = np.asarray(x, dtype=float)
        if abs(x.sum() - 1.0) > tol or x.min() < -tol:
            return False
        return bool(np.all(self.coeffs @ x <= self.bounds + tol))


def distance(metric: str, p, q) -> float:
    """Euclidean distance or symmetrized (Jeffreys) KL divergence.

    ``sym-kl`` is KL(p||q) + KL(q||p) = sum_i (p_i - q_i) log(p_i / q_i),
    each coordinate shifted by ``EPS_KL`` before the log ratio.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    if metric == "euclidean":
        return float(np.linalg.norm(p - q))
    if metric == "sym-kl":
        return float(np.sum((p - q) * (np.log(p + EPS_KL) - np.log(q + EPS_KL))))
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def _distances_to(points: np.ndarray, x: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        return np.linalg.norm(points - x, axis=1)
    if metric == "sym-kl":
        return np.sum((points - x) * (np.log(points + EPS_KL) - np.log(x + EPS_KL)), axis=1)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def _distance_matrix(points: np.ndarray, metric: str) -> np.ndarray:
    # row by row through the same kernel as _distances_to, so ties compare exactly
    out = np.empty((len(points), len(points)))
    for i, x in enumerate(points):
        out[i] = _distances_to(points, x, metric)
    return out


def _lex_ranks(points: np.ndarray) -> np.ndarray:
    order = np.lexsort(points.T[::-1])
    ranks = np.empty(len(points), dtype=int)
    ranks[order] = np.arange(len(points))
    return ranks


def _pick_tie(pairs: list[tuple[int, int]], points: np.ndarray) -> tuple[int, int]:
    if len(pairs) == 1:
        return pairs[0]
    ranks = _lex_ranks(points)
    return min(pairs, key=lambda ij: tuple(sorted((ranks[ij[0]], ranks[ij[1]]))))


def pairwise_min_distance(ps, metric: str = "euclidean") -> tuple[int, int]:
    """Indices ``(i, j)``, ``i < j``, of the closest pair of points.

    Ties go to the pair that is lexicographically smallest when the points
    are ranked by lexicographic coordinate order, so the chosen pair does
    not depend on the input order.
    """
    pts = as_points(ps)
    m = len(pts)
    if m < 2:
        raise ValueError("need at least two points")
    dist = _distance_matrix(pts, metric)
    iu = np.triu_indices(m, 1)
    vals = dist[iu]
    dmin = vals.min()
    hits = np.nonzero(vals <= dmin + _TIE_RTOL * max(dmin, 1e-300))[0]
    pairs = [(int(iu[0][h]), int(iu[1][h])) for h in hits]
    return _pick_tie(pairs, pts)


def hull_residual(x, ps) -> float:
    """Max-norm distance from ``x`` to the convex hull of ``ps``.

    Solved as an LP over convex weights; the returned value is recomputed
    from the (clipped, renormalized) weights, so it is always achieved by an
    actual convex combination.
    """
    pts = as_points(ps)
    x = np.asarray(x, dtype=float)
    m, d = pts.shape
    if m == 1:
        return float(np.max(np.abs(pts[0] - x)))
    # variables: lam (m), t; minimize t
    c = np.zeros(m + 1)
    c[-1] = 1.0
    ones = np.ones((d, 1))
    a_ub = np.block([[pts.T, -ones], [-pts.T, -ones]])
    b_ub = np.concatenate([x, -x])
    a_eq = np.concatenate([np.ones(m), [0.0]])[None, :]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"hull LP failed: {res.message}")
    lam = np.clip(res.x[:m], 0.0, None)
    lam /= lam.sum()
    return float(np.max(np.abs(lam @ pts - x)))


def in_hull(x, ps, tol: float = EPS_FEAS) -> bool:
    return hull_residual(x, ps) <= tol


def _others(x: np.ndarray, pts: np.ndarray) -> np.ndarray:
    same = np.max(np.abs(pts - x), axis=1) <= EPS_DUP
    return pts[~same]


def certify_vertex(x, ps, tol: float = EPS_FEAS) -> bool:
    """True iff ``x`` is not a convex combination of the points of ``ps`` other than ``x``."""
    pts = as_points(ps)
    if len(pts) == 0:
        raise ValueError("empty point set")
    x = np.asarray(x, dtype=float)
    if x.shape != (pts.shape[1],):
        raise ValueError("x and ps differ in dimension")
    others = _others(x, pts)
    if len(others) == 0:
        return True
    return not in_hull(x, others, tol)


def full_rank_embedding(ps, tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal coordinates for the affine hull of ``ps``.

    Modified Gram-Schmidt with pivoting on the differences to the first
    point. Returns ``(origin, basis, coords)`` with ``basis`` of shape
    ``(r, d)`` (orthonormal rows, r the affine rank) and ``coords`` of shape
    ``(m, r)`` such that ``origin + coords @ basis`` reproduces the points.
    """
    pts = as_points(ps)
    origin = pts[0].copy()
    diffs = pts - origin
    resid = diffs[1:].copy()
    basis: list[np.ndarray] = []
    while resid.size:
        norms = np.linalg.norm(resid, axis=1)
        j = int(np.argmax(norms))
        if norms[j] <= tol:
            break
        q = resid[j] / norms[j]
        for b in basis:
            q -= (q @ b) * b
        q /= np.linalg.norm(q)
        basis.append(q)
        resid = resid - np.outer(resid @ q, q)
    d = pts.shape[1]
    basis_arr = np.array(basis).reshape(len(basis), d)
    coords = diffs @ basis_arr.T
    return origin, basis_arr, coords


def _dedup_indices(pts: np.ndarray, tol: float = EPS_DUP) -> list[int]:
    keep: list[int] = []
    for i in range(len(pts)):
        if keep and np.min(np.max(np.abs(pts[keep] - pts[i]), axis=1)) <= tol:
            continue
        keep.append(i)
    return keep


def _surely_extreme(coords: np.ndarray, rng: np.random.Generator, n_dirs: int) -> np.ndarray:
    """Points that are the strict unique maximizer of some direction."""
    m, r = coords.shape
    dirs = np.vstack([np.eye(r), -np.eye(r), rng.standard_normal((n_dirs, r))])
    vals = coords @ dirs.T
    flags = np.zeros(m, dtype=bool)
    scale = max(1.0, float(np.max(np.abs(coords))))
    for col in vals.T:
        order = np.argsort(col)
        best, second = order[-1], order[-2]
        if col[best] - col[second] > 1e-7 * scale:
            flags[best] = True
    return flags


def _self_extreme(coords: np.ndarray) -> np.ndarray:
    """Points that strictly maximize their own whitened position vector.

    Cheap and exact as a certificate; catches almost every point of sets in
    which nearly all points are vertices, like products of vertex sets.
    """
    m, r = coords.shape
    centered = coords - coords.mean(axis=0)
    cov = centered.T @ centered / max(m - 1, 1)
    try:
        chol = np.linalg.cholesky(cov + 1e-12 * np.trace(cov) * np.eye(r))
    except np.linalg.LinAlgError:
        return np.zeros(m, dtype=bool)
    w = np.linalg.solve(chol, centered.T).T
    flags = np.zeros(m, dtype=bool)
    for lo in range(0, m, 1024):
        block = w[lo : lo + 1024]
        vals = coords @ (block @ np.linalg.inv(chol)).T
        own = vals[np.arange(lo, lo + len(block)), np.arange(len(block))].copy()
        vals[np.arange(lo, lo + len(block)), np.arange(len(block))] = -np.inf
        scale = np.max(np.abs(own)) + 1.0
        flags[lo : lo + len(block)] = own > vals.max(axis=0) + 1e-9 * scale
    return flags


def _separate(p: np.ndarray, known: np.ndarray) -> tuple[np.ndarray, float]:
    """Direction ``a`` (max-norm <= 1) maximizing ``a.p - max_e a.e`` over ``known``.

    The optimal gap equals the l1 distance from ``p`` to the hull of ``known``.
    """
    r = len(p)
    c = np.concatenate([-p, [1.0]])
    a_ub = np.hstack([known, -np.ones((len(known), 1))])
    bounds = [(-1.0, 1.0)] * r + [(None, None)]
    # presolve costs more than it saves on these small dense LPs
    res = linprog(
        c, A_ub=a_ub, b_ub=np.zeros(len(known)), bounds=bounds, method="highs", options={"presolve": False}
    )
    if res.status != 0:
        res = linprog(c, A_ub=a_ub, b_ub=np.zeros(len(known)), bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"separation LP failed: {res.message}")
    return res.x[:r], float(-res.fun)


def _extreme_along(coords: np.ndarray, a: np.ndarray, tie_dir: np.ndarray) -> int:
    vals = coords @ a
    scale = max(1.0, float(np.max(np.abs(vals))))
    cand = np.nonzero(vals >= vals.max() - 1e-12 * scale)[0]
    if len(cand) == 1:
        return int(cand[0])
    sub = coords[cand]
    second = sub @ tie_dir
    cand = cand[second >= second.max() - 1e-12 * max(1.0, float(np.max(np.abs(second))))]
    if len(cand) == 1:
        return int(cand[0])
    return int(cand[np.lexsort(coords[cand].T[::-1])[-1]])


def _qhull_vertices(coords: np.ndarray) -> Optional[list[int]]:
    """Hull vertices from qhull, keeping only points whose normal cone is full-dimensional.

    The rank test rejects points qhull reports that merely sit on an edge or
    face. Returns None if qhull fails.
    """
    try:
        hull = ConvexHull(coords)
    except QhullError:
        return None
    r = coords.shape[1]
    normals = hull.equations[:, :-1]
    owners = np.repeat(np.arange(len(hull.simplices)), r)
    members = hull.simplices.ravel()
    order = np.argsort(members, kind="stable")
    members, owners = members[order], owners[order]
    starts = np.searchsorted(members, np.arange(len(coords) + 1))
    out = []
    for v in sorted(int(i) for i in hull.vertices):
        facets = owners[starts[v] : starts[v + 1]]
        if len(facets) >= r and np.linalg.matrix_rank(normals[facets], tol=1e-9) == r:
            out.append(v)
    return out


def _certify_by_projection(coords: np.ndarray, known: np.ndarray, rng: np.random.Generator) -> None:
    """Mark points that are vertices of a random low-dimensional shadow of the set.

    A vertex of a linear image with a unique preimage is a vertex of the
    original set. Stops after a few shadows add nothing new.
    """
    m, r = coords.shape
    idle = 0
    for _ in range(_SHADOW_ROUNDS):
        proj, _ = np.linalg.qr(rng.standard_normal((r, _SHADOW_DIM)))
        shadow = coords @ proj
        found = _qhull_vertices(shadow)
        if found is None:
            continue
        fresh = 0
        for v in found:
            if known[v]:
                continue
            gap = np.max(np.abs(shadow - shadow[v]), axis=1)
            gap[v] = np.inf
            if gap.min() > 1e-9:
                known[v] = True
                fresh += 1
        idle = idle + 1 if fresh == 0 else 0
        if idle >= 3 or known.all():
            return


def vertex_indices(ps, tol: float = EPS_FEAS) -> list[int]:
    """Indices (ascending) of the points of ``ps`` that are extreme points of its hull.

    Duplicates keep their first occurrence. Works in the full-rank embedding
    and grows a set of certified vertices output-sensitively: each remaining
    point is tested against the known vertices only, and a separating
    direction, when found, yields a new vertex.
    """
    pts = as_points(ps)
    if len(pts) == 0:
        raise ValueError("empty point set")
    keep = _dedup_indices(pts)
    if len(keep) == 1:
        return keep
    _, basis, coords = full_rank_embedding(pts[keep])
    r = basis.shape[0]
    if r == 0:
        return keep[:1]
    if r == 1:
        c = coords[:, 0]
        return sorted({keep[int(np.argmin(c))], keep[int(np.argmax(c))]})
    if len(keep) <= r + 1:
        return keep
    if r <= _QHULL_MAX_RANK and len(keep) > 2 * (r + 1):
        found = _qhull_vertices(coords)
        if found is not None:
            return [keep[i] for i in found]
    rng = np.random.default_rng(0)
    tie_dir = rng.standard_normal(r)
    known = _surely_extreme(coords, rng, 4 * r) | _self_extreme(coords)
    _certify_by_projection(coords, known, rng)
    for i in range(len(keep)):
        while not known[i]:
            a, gap = _separate(coords[i], coords[known])
            if gap <= tol:
                break
            if gap <= 10 * r * tol and hull_residual(coords[i], coords[known]) <= tol:
                break
            j = _extreme_along(coords, a, tie_dir)
            if known[j]:
                # numerically stuck; settle this point against all others directly
                others = np.ones(len(keep), dtype=bool)
                others[i] = False
                known[i] = not in_hull(coords[i], coords[others], tol)
                break
            known[j] = True
    return [keep[i] for i in np.nonzero(known)[0]]


def remove_redundant_vertices(ps, tol: float = EPS_FEAS) -> np.ndarray:
    """The extreme points of the convex hull of ``ps``, as a subset in input order."""
    pts = as_points(ps)
    return pts[vertex_indices(pts, tol)]


def are_adjacent(ps, i: int, j: int, tol: float = EPS_FEAS) -> bool:
    """True if vertices ``i`` and ``j`` of the vertex set ``ps`` span an edge of its hull.

    The segment is a face iff its midpoint admits no convex representation
    that puts positive weight on the other vertices.
    """
    pts = as_points(ps)
    m = len(pts)
    if m <= 2:
        return True
    mid = 0.5 * (pts[i] + pts[j])
    _, basis, coords = full_rank_embedding(pts)
    mid_c = (mid - pts[0]) @ basis.T
    c = np.ones(m)
    c[[i, j]] = 0.0
    res = linprog(
        -c,
        A_eq=np.vstack([coords.T, np.ones((1, m))]),
        b_eq=np.concatenate([mid_c, [1.0]]),
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"adjacency LP failed: {res.message}")
    return -res.fun <= tol


class _NearestNeighbors:
    """Closest-pair bookkeeping for repeated merges (points only ever appended or killed)."""

    def __init__(self, pts: np.ndarray, metric: str, extra: int):
        m, d = pts.shape
        self.metric = metric
        self.pts = np.empty((m + extra, d))
        self.pts[:m] = pts
        self.size = m
        self.alive = np.zeros(m + extra, dtype=bool)
        self.alive[:m] = True
        self.nn_dist = np.full(m + extra, np.inf)
        self.nn_idx = np.full(m + extra, -1)
        dist = _distance_matrix(pts, metric)
        np.fill_diagonal(dist, np.inf)
        self.nn_idx[:m] = np.argmin(dist, axis=1)
        self.nn_dist[:m] = dist[np.arange(m), self.nn_idx[:m]]

    def _row(self, i: int) -> np.ndarray:
        row = np.full(self.size, np.inf)
        mask = self.alive[: self.size].copy()
        mask[i] = False
        row[mask] = _distances_to(self.pts[: self.size][mask], self.pts[i], self.metric)
        return row

    def closest_pair(self) -> tuple[int, int]:
        nd = np.where(self.alive[: self.size], self.nn_dist[: self.size], np.inf)
        dmin = nd.min()
        thr = dmin + _TIE_RTOL * max(dmin, 1e-300)
        rows = np.nonzero(nd <= thr)[0]
        if len(rows) <= 2:
            i = int(rows[0])
            j = int(self.nn_idx[i])
            if len(rows) == 1 or int(rows[1]) == j:
                return (min(i, j), max(i, j))
        pairs = {(min(int(i), int(self.nn_idx[i])), max(int(i), int(self.nn_idx[i]))) for i in rows}
        for i in rows:
            for j in np.nonzero(self._row(int(i)) <= thr)[0]:
                pairs.add((min(int(i), int(j)), max(int(i), int(j))))
        live = np.nonzero(self.alive[: self.size])[0]
        ranks = np.full(self.size, -1)
        ranks[live] = _lex_ranks(self.pts[live])
        return min(pairs, key=lambda ij: tuple(sorted((ranks[ij[0]], ranks[ij[1]]))))

    def merge(self, i: int, j: int) -> np.ndarray:
        mid = 0.5 * (self.pts[i] + self.pts[j])
        self.alive[[i, j]] = False
        new = self.size
        self.pts[new] = mid
        self.size += 1
        self.alive[new] = True
        row = self._row(new)
        self.nn_idx[new] = int(np.argmin(row))
        self.nn_dist[new] = row[self.nn_idx[new]]
        live = np.nonzero(self.alive[: self.size])[0]
        for r in live:
            if r == new:
                continue
            if self.nn_idx[r] in (i, j):
                rr = self._row(int(r))
                self.nn_idx[r] = int(np.argmin(rr))
                self.nn_dist[r] = rr[self.nn_idx[r]]
            elif row[r] < self.nn_dist[r]:
                self.nn_idx[r] = new
                self.nn_dist[r] = row[r]
        return mid

    def points(self) -> np.ndarray:
        return self.pts[: self.size][self.alive[: self.size]].copy()


def k_reduction(
    ps,
    k: int,
    metric: str = "euclidean",
    *,
    pair_rule: str = "any",
    rehull: Optional[bool] = None,
    tol: float = EPS_FEAS,
    trace: Optional[list] = None,
) -> np.ndarray:
    """Reduce a point set to at most ``k`` points by merging closest vertex pairs.

    The input is first replaced by its extreme points. While more than ``k``
    points remain, the closest pair under ``metric`` is removed and its
    midpoint inserted. Every output point lies in the hull of the input.

    ``pair_rule="edge"`` only merges pairs spanning an edge of the current
    hull, which keeps every midpoint extreme for any metric. With the default
    ``"any"``, a non-Euclidean metric triggers one final hull pass
    (``rehull`` overrides that choice). ``trace``, if given, receives one
    ``(p, q, midpoint)`` tuple per merge.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    if pair_rule not in ("any", "edge"):
        raise ValueError(f"unknown pair rule {pair_rule!r}")
    pts = as_points(ps)
    if len(pts) == 0:
        raise ValueError("empty point set")
    verts = remove_redundant_vertices(pts, tol)
    if len(verts) <= k:
        return verts
    if rehull is None:
        rehull = metric != "euclidean" and pair_rule == "any"

    if pair_rule == "edge":
        cur = verts
        while len(cur) > k:
            i, j = _closest_adjacent_pair(cur, metric, tol)
            mid = 0.5 * (cur[i] + cur[j])
            if trace is not None:
                trace.append((cur[i].copy(), cur[j].copy(), mid))
            cur = np.vstack([np.delete(cur, [i, j], axis=0), mid])
        out = cur
    else:
        nn = _NearestNeighbors(verts, metric, extra=len(verts) - k)
        for _ in range(len(verts) - k):
            i, j = nn.closest_pair()
            p, q = nn.pts[i].copy(), nn.pts[j].copy()
            mid = nn.merge(i, j)
            if trace is not None:
                trace.append((p, q, mid.copy()))
        out = nn.points()
    if rehull:
        out = remove_redundant_vertices(out, tol)
    return out


def _closest_adjacent_pair(pts: np.ndarray, metric: str, tol: float) -> tuple[int, int]:
    m = len(pts)
    dist = _distance_matrix(pts, metric)
    ranks = _lex_ranks(pts)
    iu = np.triu_indices(m, 1)
    keys = sorted(
        zip(iu[0].tolist(), iu[1].tolist()),
        key=lambda ij: (dist[ij], tuple(sorted((ranks[ij[0]], ranks[ij[1]])))),
    )
    for i, j in keys:
        if are_adjacent(pts, i, j, tol):
            return i, j
    raise RuntimeError("no adjacent vertex pair found")


# -- V/H conversion -----------------------------------------------------------


def _complement_basis(basis: np.ndarray, d: int) -> np.ndarray:
    """Orthonormal rows spanning the directions orthogonal to ``basis`` and to (1,...,1)."""
    span = np.vstack([basis, np.ones((1, d)) / math.sqrt(d)])
    _, s, vt = np.linalg.svd(span, full_matrices=True)
    rank = int(np.sum(s > 1e-12))
    return vt[rank:]


def _facets(coords: np.ndarray, tol: float) -> list[tuple[np.ndarray, float]]:
    """Facet inequalities ``a @ y <= c`` of a full-rank point set in R^r, r >= 1."""
    m, r = coords.shape
    if r == 1:
        return [(np.array([1.0]), float(coords.max())), (np.array([-1.0]), float(-coords.min()))]
    scale = max(1.0, float(np.max(np.abs(coords))))
    found: list[tuple[np.ndarray, float]] = []
    for subset in itertools.combinations(range(m), r):
        base = coords[subset[0]]
        diffs = coords[list(subset[1:])] - base
        _, s, vt = np.linalg.svd(diffs, full_matrices=True)
        if np.sum(s > 1e-10 * scale) < r - 1:
            continue
        a = vt[-1]
        c = float(a @ base)
        side = coords @ a - c
        if np.all(side <= tol * scale):
            pass
        elif np.all(side >= -tol * scale):
            a, c = -a, -c
        else:
            continue
        if not any(np.allclose(a, fa, atol=1e-9) and abs(c - fc) <= 1e-9 * scale for fa, fc in found):
            found.append((a, c))
    return found


def _canonical_row(coeff: np.ndarray, bound: float) -> tuple[np.ndarray, float]:
    # shift by a multiple of sum(x) = 1 so the last coefficient vanishes, then rescale
    shift = coeff[-1]
    coeff = coeff - shift
    bound = bound - shift
    scale = np.max(np.abs(coeff))
    if scale > 1e-12:
        coeff, bound = coeff / scale, bound / scale
    return coeff, bound


def v_to_h(ps, tol: float = RANK_TOL) -> HPolytope:
    """H-representation of the hull of simplex points, via the full-rank embedding.

    Facets are enumerated in the embedded coordinates, where the vertex
    matrix has full affine rank, and mapped back to the original basis.
    Extra row pairs pin the points to their affine hull when it is smaller
    than the simplex's.
    """
    pts = as_points(ps)
    if len(pts) == 0:
        raise ValueError("empty point set")
    verts = remove_redundant_vertices(pts)
    d = verts.shape[1]
    origin, basis, coords = full_rank_embedding(verts, tol)
    rows: list[tuple[np.ndarray, float]] = []
    for n in _complement_basis(basis, d):
        rows.append((n, float(n @ origin)))
        rows.append((-n, float(-n @ origin)))
    if basis.shape[0] > 0:
        for a, c in _facets(coords, EPS_FEAS):
            coeff = a @ basis
            rows.append((coeff, float(c + coeff @ origin)))
    canon = [_canonical_row(c, b) for c, b in rows]
    coeffs = np.array([c for c, _ in canon]).reshape(len(canon), d)
    bounds = np.array([b for _, b in canon])
    return HPolytope(coeffs, bounds, origin=origin, basis=basis)


def _enumerate_vertices(hp: HPolytope, tol: float) -> np.ndarray:
    d = hp.dimension
    a_ineq = np.vstack([hp.coeffs, -np.eye(d)])
    b_ineq = np.concatenate([hp.bounds, np.zeros(d)])
    found: list[np.ndarray] = []
    if d == 1:
        candidates = [np.ones(1)]
    else:
        candidates = []
        for subset in itertools.combinations(range(len(a_ineq)), d - 1):
            mat = np.vstack([np.ones((1, d)), a_ineq[list(subset)]])
            if np.linalg.matrix_rank(mat, tol=1e-10) < d:
                continue
            rhs = np.concatenate([[1.0], b_ineq[list(subset)]])
            candidates.append(np.linalg.solve(mat, rhs))
    for x in candidates:
        if np.all(a_ineq @ x <= b_ineq + tol):
            x = np.where(np.abs(x) < tol, 0.0, x)
            if not any(np.max(np.abs(x - y)) <= max(EPS_DUP, tol) for y in found):
                found.append(x)
    return np.array(found).reshape(len(found), d)


def h_to_v(hp: HPolytope, tol: float = EPS_FEAS) -> np.ndarray:
    """Vertices of {x : rows hold, sum(x) = 1, x >= 0}, sorted lexicographically.

    Candidates are the basic solutions (d linearly independent active
    constraints including the normalization); feasible ones are kept,
    deduplicated and certified extreme.
    """
    verts = _enumerate_vertices(hp, tol)
    if len(verts) == 0:
        loose = _enumerate_vertices(hp, 10 * tol)
        if len(loose):
            raise InfeasibleError("constraint system is infeasible at tolerance but not at 10x; numerical failure", empty=False)
        raise InfeasibleError("constraint system describes an empty credal set", empty=True)
    keep = [i for i in range(len(verts)) if certify_vertex(verts[i], verts, tol)]
    verts = verts[keep]
    return verts[np.lexsort(verts.T[::-1])]
