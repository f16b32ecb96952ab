"""Benchmark harness: exact credal VE against k-reduced variants (and external results).

RMSE pools the lower and upper bounds of every aligned (model, task, state)
triple, across tasks. Speed-up is the ratio of total reference time to total
method time over the queries both methods answered. Only inference is timed;
parsing and requisite preprocessing happen before the clock starts.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .generate import GenParams, random_network, select_tasks
from .inference import ReductionPolicy, credal_ve
from .io import BenchmarkRecord, read_benchmark_csv, read_network, serialize_vcredal, write_benchmark_csv
from .model import Query
from .preprocess import requisite_graph

log = logging.getLogger(__name__)

REFERENCE = "cve"
MANIFEST = "manifest.json"


@dataclass
class BenchmarkSummary:
    method: str
    rmse: float
    speed_up: float
    queries: int
    dropped: int
    rmse_by_task: dict = field(default_factory=dict)
    width_loss: float = 0.0


def parse_method(name: str, metric: str = "euclidean") -> ReductionPolicy:
    """``exact``/``cve`` or ``k<N>`` (e.g. ``k10``)."""
    if name in ("exact", REFERENCE):
        return ReductionPolicy.exact()
    if name.startswith("k") and name[1:].isdigit():
        return ReductionPolicy.k_reduce(int(name[1:]), metric)
    raise ValueError(f"unknown method {name!r}; expected 'exact' or 'k<N>'")


def _align(approx: Iterable[BenchmarkRecord], exact: Iterable[BenchmarkRecord]):
    ref = {r.key: r for r in exact}
    return [(a, ref[a.key]) for a in approx if a.key in ref]


def compute_rmse(approx: Sequence[BenchmarkRecord], exact: Sequence[BenchmarkRecord]) -> float:
    pairs = _align(approx, exact)
    if not pairs:
        raise ValueError("no aligned (model, task, state) pairs")
    sq = [(a.lower - e.lower) ** 2 + (a.upper - e.upper) ** 2 for a, e in pairs]
    return math.sqrt(sum(sq) / (2 * len(pairs)))


def compute_speedup(baseline_ms, method_ms) -> float:
    base = np.atleast_1d(np.asarray(baseline_ms, dtype=float))
    meth = np.atleast_1d(np.asarray(method_ms, dtype=float))
    if np.any(base < 0) or np.any(meth < 0):
        raise ValueError("negative times")
    if base.sum() <= 0 or meth.sum() <= 0:
        raise ValueError("total times must be positive")
    return float(base.sum() / meth.sum())


def _query_times(records: Iterable[BenchmarkRecord]) -> dict:
    out = {}
    for r in records:
        out.setdefault((r.model_id, r.task), r.time_ms)
    return out


def summarize(records: Sequence[BenchmarkRecord], reference: str = REFERENCE) -> list[BenchmarkSummary]:
    """One summary per method other than ``reference``, in first-seen order."""
    by_method: dict[str, list[BenchmarkRecord]] = {}
    for r in records:
        by_method.setdefault(r.method, []).append(r)
    ref = by_method.get(reference, [])
    ref_times = _query_times(ref)
    out = []
    for method, recs in by_method.items():
        if method == reference:
            continue
        pairs = _align(recs, ref)
        times = _query_times(recs)
        common = sorted(set(times) & set(ref_times))
        dropped = len(set(ref_times) - set(times))
        rmse = compute_rmse(recs, ref) if pairs else float("nan")
        by_task = {}
        for task in ("marginal", "conditional"):
            sub = [a for a in recs if a.task == task]
            if _align(sub, ref):
                by_task[task] = compute_rmse(sub, ref)
        try:
            speed = compute_speedup([ref_times[k] for k in common], [times[k] for k in common])
        except ValueError:
            speed = float("nan")
        loss = float(np.mean([(e.upper - e.lower) - (a.upper - a.lower) for a, e in pairs])) if pairs else float("nan")
        out.append(BenchmarkSummary(method, rmse, speed, len(common), dropped, by_task, loss))
    return out


def format_summary(summaries: Sequence[BenchmarkSummary]) -> str:
    lines = [
        f"{'Method':<16} {'RMSE':>10} {'Speed up':>10} {'Queries':>8} {'Dropped':>8}",
        "-" * 56,
    ]
    for s in summaries:
        lines.append(f"{s.method:<16} {s.rmse:>10.4f} {s.speed_up:>10.3f} {s.queries:>8d} {s.dropped:>8d}")
    lines.append("RMSE pools lower and upper bounds over all states and tasks; speed-up is total-time ratio.")
    for s in summaries:
        if s.rmse_by_task:
            parts = ", ".join(f"{t} {v:.4f}" for t, v in s.rmse_by_task.items())
            lines.append(f"  {s.method}: {parts}")
    return "\n".join(lines)


# -- suites --------------------------------------------------------------------


def factor_tables(net) -> int:
    """Largest number of tables of any initial VE factor (product of local vertex counts)."""
    return max(math.prod(len(cs) for cs in t.sets) for t in net.tables)


def generate_suite(
    out_dir,
    n_models: int,
    nodes: int,
    seed: int,
    *,
    max_indegree: int = 2,
    card_range: tuple[int, int] = (2, 3),
    vertex_range: tuple[int, int] = (2, 4),
    max_factor_tables: Optional[int] = 256,
) -> list[dict]:
    """Write ``n_models`` random V-form networks plus ``manifest.json`` into ``out_dir``.

    Networks whose largest initial factor exceeds ``max_factor_tables`` are
    skipped in favour of the next seed, keeping exact inference tractable.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    ss = np.random.SeedSequence(seed)
    attempt = 0
    while len(entries) < n_models:
        model_seed = int(ss.spawn(1)[0].generate_state(1)[0])
        attempt += 1
        if attempt > 1000 * max(n_models, 1):
            raise RuntimeError("could not generate enough tractable networks")
        params = GenParams(nodes, card_range, max_indegree, vertex_range, model_seed)
        net = random_network(params)
        if max_factor_tables is not None and factor_tables(net) > max_factor_tables:
            continue
        marginal, conditional = select_tasks(net)
        model_id = f"n{nodes}_mID{max_indegree}_s{model_seed}"
        fname = f"{model_id}.v.txt"
        (out / fname).write_text(serialize_vcredal(net))
        tasks = [{"task": "marginal", "target": marginal.target, "evidence": {}}]
        if conditional is not None:
            tasks.append(
                {"task": "conditional", "target": conditional.target,
                 "evidence": {str(k): v for k, v in conditional.evidence.items()}}
            )
        entries.append({"id": model_id, "file": fname, "seed": model_seed, "tasks": tasks})
    (out / MANIFEST).write_text(json.dumps({"models": entries}, indent=1))
    return entries


def load_manifest(suite_dir) -> list[dict]:
    data = json.loads((Path(suite_dir) / MANIFEST).read_text())
    return data["models"]


def run_query(net, q: Query, policy: ReductionPolicy, model_id: str, task: str) -> list[BenchmarkRecord]:
    """Preprocess, then time one inference run; one record per target state."""
    req = requisite_graph(net, q)
    start = time.perf_counter()
    res = credal_ve(req.reduced, req.query, policy, preprocess=False)
    elapsed = (time.perf_counter() - start) * 1000.0
    return [
        BenchmarkRecord(model_id, task, q.target, dict(q.evidence), policy.tag, s, float(lo), float(hi), elapsed)
        for s, (lo, hi) in enumerate(res.intervals())
    ]


def run_benchmark(
    suite_dir,
    methods: Sequence[str] = ("exact", "k10", "k5"),
    out_csv=None,
    *,
    extern: Sequence = (),
    metric: str = "euclidean",
    repeats: int = 1,
) -> list[BenchmarkSummary]:
    """Run every method on every task of a suite and summarize against exact CVE.

    ``repeats`` > 1 keeps the fastest of several timings per query. Failures
    are logged and skipped; the exact reference always runs.
    """
    policies = [parse_method(m, metric) for m in methods]
    if not any(p.mode == "exact-hull" for p in policies):
        policies.insert(0, ReductionPolicy.exact())
    records: list[BenchmarkRecord] = []
    for entry in load_manifest(suite_dir):
        model_id = entry["id"]
        try:
            net = read_network(Path(suite_dir) / entry["file"])
        except Exception as exc:  # noqa: BLE001 - one bad model must not sink the suite
            log.error("model %s: load failed: %s", model_id, exc)
            continue
        for task in entry["tasks"]:
            q = Query(task["target"], {int(k): v for k, v in task["evidence"].items()})
            for policy in policies:
                try:
                    best = None
                    for _ in range(max(repeats, 1)):
                        recs = run_query(net, q, policy, model_id, task["task"])
                        if best is None or recs[0].time_ms < best[0].time_ms:
                            best = recs
                    records.extend(best)
                except Exception as exc:  # noqa: BLE001
                    log.error("model %s, %s task, %s: %s", model_id, task["task"], policy.tag, exc)
    for path in extern:
        records.extend(read_benchmark_csv(path))
    records.sort(key=lambda r: (r.model_id, r.task, r.method, r.state))
    if out_csv is not None:
        write_benchmark_csv(out_csv, records)
    return summarize(records)
