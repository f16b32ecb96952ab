"""End-to-end acceptance checks; each test records one verdict line."""

import itertools
import warnings

import numpy as np
import pytest
from scipy import stats

from credal import bench
from credal.generate import GenParams, random_network, sample_credal_set, sample_simplex, select_tasks
from credal.geometry import certify_vertex, h_to_v, k_reduction, remove_redundant_vertices, v_to_h
from credal.inference import ReductionPolicy, brute_force_oracle, credal_ve, selection_count
from credal.io import ParseError, parse_vcredal, serialize_vcredal

from conftest import exact_bounds, small_networks

PLANAR_POINTS = np.array([
    [0.864536004924652, 0.344633071964266],
    [0.0439424390127909, 0.834267041275926],
    [0.146369596460016, 0.562023118426994],
    [0.0932028139412838, 0.674301617404711],
    [0.700839289168985, 0.689625239048539],
    [0.396247535425765, 0.871731181837455],
    [0.944907220389489, 0.614592244388893],
    [0.393392135810945, 0.201281918117575],
    [0.10095490640833, 0.186136091795689],
    [0.483082749204841, 0.0609128873819137],
    [0.224675572590779, 0.369785296748755],
    [0.482996590168576, 0.455149312785737],
    [0.557659459252472, 0.644372823660673],
    [0.920207113094907, 0.581633179323039],
    [0.44032674656005, 0.402856926444781],
])
PLANAR_VERTICES = PLANAR_POINTS[[1, 8, 9, 0, 6, 5]]
PLANAR_MIDPOINTS = np.array([[0.90472161265707, 0.479612658176579], [0.220094987219278, 0.852999111556691]])


def _tasks(net):
    return [q for q in select_tasks(net) if q is not None]


def _sorted_rows(a):
    a = np.asarray(a)
    return a[np.lexsort(a.T[::-1])]


@pytest.mark.slow
def test_oracle_equivalence(report):
    worst, queries = 0.0, 0
    for i, net in enumerate(small_networks(200)):
        for q in _tasks(net):
            exact = exact_bounds((i, q), net, q)
            oracle = brute_force_oracle(net, q)
            worst = max(worst, np.abs(exact.lower - oracle.lower).max(), np.abs(exact.upper - oracle.upper).max())
            queries += 1
    ok = worst <= 1e-9
    report(1, ok, f"200 networks, {queries} queries, max deviation from oracle {worst:.2e}")
    assert ok


def test_planar_example_reduction(report):
    hull = remove_redundant_vertices(PLANAR_POINTS)
    hull_ok = np.array_equal(_sorted_rows(hull), _sorted_rows(PLANAR_VERTICES))
    trace = []
    out = k_reduction(PLANAR_POINTS, 4, "euclidean", trace=trace)
    mids = np.array([mid for _, _, mid in trace])
    mid_err = np.abs(mids - PLANAR_MIDPOINTS).max() if mids.shape == PLANAR_MIDPOINTS.shape else np.inf
    ok = hull_ok and len(out) == 4 and mid_err <= 1e-3
    report(2, ok, f"hull matches 6 vertices: {hull_ok}, {len(trace)} merges, midpoint error {mid_err:.1e}")
    assert ok


@pytest.mark.slow
def test_inner_approximation(report):
    violations, queries = 0, 0
    # shares its networks (and cached exact bounds) with the oracle check
    for i, net in enumerate(small_networks(300)):
        for q in _tasks(net):
            if queries == 500:
                break
            exact = exact_bounds((i, q), net, q)
            for k in (2, 5, 10):
                approx = credal_ve(net, q, ReductionPolicy.k_reduce(k))
                inside = np.all(approx.lower >= exact.lower - 1e-9) and np.all(approx.upper <= exact.upper + 1e-9)
                violations += not inside
            queries += 1
    ok = violations == 0 and queries == 500
    report(3, ok, f"{queries} queries x k in {{2,5,10}}, {violations} containment violations")
    assert ok


def _midpoint_failures(ps, k, pair_rule):
    trace = []
    k_reduction(ps, k, "euclidean", pair_rule=pair_rule, trace=trace)
    current = [tuple(v) for v in remove_redundant_vertices(ps)]
    failures = 0
    for p, q, mid in trace:
        current.remove(tuple(p))
        current.remove(tuple(q))
        current.append(tuple(mid))
        failures += not certify_vertex(mid, np.array(current))
    return failures


def _merge_sets():
    for seed in range(200):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 4))
        while True:
            ps = rng.uniform(size=(int(rng.integers(dim + 2, 13)), dim))
            n_vert = len(remove_redundant_vertices(ps))
            if n_vert >= dim + 1:
                break
        yield ps, int(rng.integers(1, n_vert))


@pytest.mark.xfail(
    strict=True,
    reason="closest-pair midpoints are not always vertices; counterexamples occur in about 1% of random sets",
)
def test_merge_midpoints_are_vertices(report):
    failed_sets = sum(_midpoint_failures(ps, k, "any") > 0 for ps, k in _merge_sets())
    ok = failed_sets == 0
    report(4, ok, f"200 point sets, {failed_sets} with a non-extreme midpoint (closest-pair rule)")
    assert ok


def test_edge_rule_midpoints_are_vertices():
    assert sum(_midpoint_failures(ps, k, "edge") for ps, k in _merge_sets()) == 0


@pytest.mark.slow
def test_desk_suite_pattern(report, tmp_path):
    bench.generate_suite(tmp_path, 100, 5, 2024, max_factor_tables=32)
    summaries = {s.method: s for s in bench.run_benchmark(tmp_path, ["exact", "k10", "k5"], tmp_path / "out.csv")}
    k10, k5 = summaries["k10"], summaries["k5"]
    ok = k10.rmse <= k5.rmse and k5.speed_up >= k10.speed_up > 1 and k10.dropped == k5.dropped == 0
    report(
        5,
        ok,
        f"RMSE k10 {k10.rmse:.4f} <= k5 {k5.rmse:.4f}; speed-up k5 {k5.speed_up:.1f} >= k10 {k10.speed_up:.1f} > 1",
    )
    assert ok


def _roundtrip_sets():
    rng = np.random.default_rng(7)
    for i in range(100):
        d = 2 + i % 2
        v = int(rng.integers(2, 7)) if d == 3 else 2
        if d == 3 and i % 5 == 1:
            # collinear: convex combinations of two endpoints
            ends = sample_simplex(3, rng, size=2)
            w = np.concatenate([[0.0, 1.0], rng.uniform(size=v - 2)])
            yield np.outer(w, ends[0]) + np.outer(1 - w, ends[1]), True
        else:
            yield sample_credal_set(d, v, rng).vertices, False


def test_vh_roundtrip(report):
    worst, collinear = 0.0, 0
    for ps, flat in _roundtrip_sets():
        collinear += flat
        expected = _sorted_rows(remove_redundant_vertices(ps))
        got = h_to_v(v_to_h(ps))
        err = np.abs(got - expected).max() if got.shape == expected.shape else np.inf
        worst = max(worst, err)
    ok = worst <= 1e-8 and collinear > 0
    report(6, ok, f"100 sets ({collinear} collinear), max vertex error {worst:.1e}")
    assert ok


def test_requisite_preservation(report):
    worst, nets, seed = 0.0, 0, 10_000
    while nets < 100:
        rng = np.random.default_rng(seed)
        net = random_network(GenParams(int(rng.integers(6, 11)), (2, 3), 2, (1, 3), seed))
        seed += 1
        if selection_count(net) > 1024:
            continue
        nets += 1
        for q in _tasks(net):
            full = credal_ve(net, q, preprocess=False)
            pruned = credal_ve(net, q, preprocess=True)
            worst = max(worst, np.abs(full.lower - pruned.lower).max(), np.abs(full.upper - pruned.upper).max())
    ok = worst <= 1e-9
    report(7, ok, f"100 networks of 6-10 nodes, max deviation {worst:.1e}")
    assert ok


def test_simplex_sampler(report):
    rng = np.random.default_rng(12345)
    n = 10_000
    ks = stats.kstest(sample_simplex(2, rng, size=n)[:, 0], "uniform")
    x3 = sample_simplex(3, rng, size=n)
    # each coordinate is Beta(1, 2): variance 1/18
    sigma = np.sqrt(1 / 18 / n)
    z = np.abs(x3.mean(axis=0) - 1 / 3) / sigma
    ok = ks.pvalue > 0.01 and np.all(z <= 3)
    report(8, ok, f"KS p-value {ks.pvalue:.3f}, d=3 mean z-scores {np.round(z, 2).tolist()}")
    assert ok


def _mutations(text, rng):
    tokens = text.split()
    kind = rng.integers(5)
    if kind == 0:
        return text[: int(rng.integers(0, len(text)))]
    if kind == 1:
        i = int(rng.integers(len(text)))
        return text[:i] + rng.choice(list("x-.9 #\n0e")) + text[i + 1 :]
    if kind == 2:
        i = int(rng.integers(len(tokens)))
        return " ".join(tokens[:i] + tokens[i + 1 :])
    if kind == 3:
        i = int(rng.integers(len(tokens)))
        tokens[i] = str(rng.choice(["-1", "nan", "inf", "1e400", "0", "7", "V-CREDAL", "0.5.5"]))
        return " ".join(tokens)
    i, j = sorted(rng.choice(len(tokens), size=2, replace=False))
    tokens[i], tokens[j] = tokens[j], tokens[i]
    return " ".join(tokens)


def test_format_robustness(report):
    rng = np.random.default_rng(99)
    texts, identical = [], 0
    for seed in range(100):
        p = GenParams(int(rng.integers(1, 8)), (2, 3), 3, (1, 4), seed)
        net = random_network(p)
        text = serialize_vcredal(net)
        back = parse_vcredal(text)
        same = back.cards == net.cards and back.dag == net.dag and all(
            a.parents == b.parents and all(np.array_equal(x.vertices, y.vertices) for x, y in zip(a.sets, b.sets))
            for a, b in zip(back.tables, net.tables)
        )
        identical += same
        texts.append(text)
    positioned, accepted, crashes = 0, 0, []
    for i in range(1000):
        bad = _mutations(texts[i % len(texts)], rng)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                parse_vcredal(bad)
            accepted += 1
        except ParseError as exc:
            positioned += exc.line >= 1
        except Exception as exc:  # noqa: BLE001 - any other exception is a crash
            crashes.append(repr(exc))
    ok = identical == 100 and not crashes and positioned + accepted == 1000
    report(
        9,
        ok,
        f"{identical}/100 round trips identical; 1000 mutations: {positioned} positioned errors, "
        f"{accepted} still valid, {len(crashes)} crashes",
    )
    assert ok, crashes[:3]
