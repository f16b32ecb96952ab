import math

import numpy as np
import pytest

from credal import bench
from credal.io import BenchmarkRecord, read_benchmark_csv, write_benchmark_csv


def rec(model, method, state, lo, hi, t=1.0, task="marginal"):
    return BenchmarkRecord(model, task, 0, {}, method, state, lo, hi, t)


def test_rmse_identity():
    exact = [rec("a", "cve", 0, 0.2, 0.4), rec("a", "cve", 1, 0.6, 0.8)]
    assert bench.compute_rmse(exact, exact) == 0.0


def test_rmse_single_pair():
    exact = [rec("a", "cve", 0, 0.2, 0.4)]
    approx = [rec("a", "k5", 0, 0.3, 0.4)]
    assert bench.compute_rmse(approx, exact) == pytest.approx(math.sqrt(0.01 / 2))


def test_rmse_injected_errors():
    rng = np.random.default_rng(0)
    exact, approx, sq = [], [], []
    for i in range(40):
        lo, hi = sorted(rng.uniform(size=2))
        dlo, dhi = rng.uniform(0, 0.05, size=2)
        exact.append(rec(f"m{i}", "cve", 0, lo, hi))
        approx.append(rec(f"m{i}", "k5", 0, lo + dlo, max(lo + dlo, hi - dhi)))
        sq += [dlo**2, (hi - max(lo + dlo, hi - dhi)) ** 2]
    assert bench.compute_rmse(approx, exact) == pytest.approx(math.sqrt(np.mean(sq)), rel=1e-12)


def test_rmse_needs_aligned_pairs():
    with pytest.raises(ValueError):
        bench.compute_rmse([rec("a", "k5", 0, 0, 1)], [rec("b", "cve", 0, 0, 1)])


def test_speedup():
    assert bench.compute_speedup([5, 5], [5, 5]) == 1.0
    assert bench.compute_speedup([100, 100], [10, 10]) == 10.0
    with pytest.raises(ValueError):
        bench.compute_speedup([1], [0])
    with pytest.raises(ValueError):
        bench.compute_speedup([-1, 3], [1])


def test_summary_counts_and_drops():
    records = [
        rec("a", "cve", 0, 0.2, 0.4, 10),
        rec("a", "cve", 1, 0.6, 0.8, 10),
        rec("b", "cve", 0, 0.1, 0.9, 30),
        rec("b", "cve", 1, 0.1, 0.9, 30),
        rec("a", "k5", 0, 0.25, 0.35, 2),
        rec("a", "k5", 1, 0.65, 0.75, 2),
    ]
    (s,) = bench.summarize(records)
    assert s.method == "k5" and s.queries == 1 and s.dropped == 1
    assert s.speed_up == pytest.approx(5.0)
    assert s.rmse == pytest.approx(0.05)
    assert s.width_loss == pytest.approx(0.1)
    assert "k5" in bench.format_summary([s])


def test_parse_method():
    assert bench.parse_method("exact").mode == "exact-hull"
    assert bench.parse_method("k10").k == 10
    assert bench.parse_method("k3", "sym-kl").tag == "k3-sym-kl"
    for bad in ("k", "kx", "approx"):
        with pytest.raises(ValueError):
            bench.parse_method(bad)


@pytest.fixture(scope="module")
def small_suite(tmp_path_factory):
    path = tmp_path_factory.mktemp("suite")
    bench.generate_suite(path, 12, 4, 5, max_factor_tables=32)
    return path


def test_suite_manifest(small_suite):
    models = bench.load_manifest(small_suite)
    assert len(models) == 12
    for m in models:
        assert (small_suite / m["file"]).exists()
        assert m["tasks"][0]["task"] == "marginal"


def test_suite_generation_is_deterministic(tmp_path, small_suite):
    bench.generate_suite(tmp_path, 12, 4, 5, max_factor_tables=32)
    assert (tmp_path / bench.MANIFEST).read_text() == (small_suite / bench.MANIFEST).read_text()


def test_harness_invariants(small_suite, tmp_path):
    methods = ["exact", "k2", "k5", "k10", "k20"]
    summaries = bench.run_benchmark(small_suite, methods, tmp_path / "a.csv")
    first = read_benchmark_csv(tmp_path / "a.csv")
    bench.run_benchmark(small_suite, methods, tmp_path / "b.csv")
    second = read_benchmark_csv(tmp_path / "b.csv")
    strip = lambda rs: [(r.model_id, r.task, r.method, r.state, r.lower, r.upper) for r in rs]
    assert strip(first) == strip(second)

    n_states = {}
    for r in first:
        n_states[(r.model_id, r.task, r.method)] = n_states.get((r.model_id, r.task, r.method), 0) + 1
    n_tasks = sum(len(m["tasks"]) for m in bench.load_manifest(small_suite))
    assert len(n_states) == n_tasks * len(methods)

    exact = [r for r in first if r.method == "cve"]
    assert bench.compute_rmse(exact, exact) == 0.0
    ref = {r.key: r for r in exact}
    for r in first:
        assert r.lower >= ref[r.key].lower - 1e-9 and r.upper <= ref[r.key].upper + 1e-9
    by = {s.method: s for s in summaries}
    assert all(math.isfinite(s.rmse) for s in summaries)
    losses = [by[m].width_loss for m in ("k2", "k5", "k10", "k20")]
    assert all(a >= b - 1e-12 for a, b in zip(losses, losses[1:]))


def test_bayesian_suite_has_zero_error(tmp_path):
    bench.generate_suite(tmp_path, 5, 4, 1, vertex_range=(1, 1))
    (s,) = bench.run_benchmark(tmp_path, ["exact", "k5"])
    assert s.rmse == 0.0


def test_extern_results_are_merged(small_suite, tmp_path):
    exact = tmp_path / "exact.csv"
    bench.run_benchmark(small_suite, ["exact"], exact)
    fake = [
        BenchmarkRecord(r.model_id, r.task, r.target, r.evidence, "approxlp", r.state, r.lower, r.upper, r.time_ms)
        for r in read_benchmark_csv(exact)
        if r.method == "cve"
    ]
    write_benchmark_csv(tmp_path / "ext.csv", fake)
    summaries = bench.run_benchmark(small_suite, ["exact"], extern=[tmp_path / "ext.csv"])
    assert [s.method for s in summaries] == ["approxlp"]
    assert summaries[0].rmse == 0.0
