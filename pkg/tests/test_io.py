import warnings

import numpy as np
import pytest

from credal.generate import GenParams, random_network
from credal.inference import credal_ve
from credal.io import (
    BenchmarkRecord,
    DuplicateVertexWarning,
    ParseError,
    decode_evidence,
    encode_evidence,
    from_hcredal,
    parse_hcredal,
    parse_vcredal,
    read_benchmark_csv,
    read_network,
    serialize_hcredal,
    serialize_vcredal,
    to_hcredal,
    write_benchmark_csv,
)
from credal.model import Query

MINIMAL = "V-CREDAL\n1\n2\n1\n1 0\n2\n0.2 0.8\n0.5 0.5\n"


def rows(a):
    a = np.asarray(a)
    return a[np.lexsort(a.T[::-1])]


def nets(count, seed0=0):
    rng = np.random.default_rng(seed0)
    return [random_network(GenParams(int(rng.integers(1, 8)), (2, 3), 3, (1, 4), seed0 + s)) for s in range(count)]


def same_structure(a, b):
    return a.cards == b.cards and a.dag == b.dag


def test_minimal_file():
    net = parse_vcredal(MINIMAL)
    assert net.n == 1 and net.cards == (2,)
    assert np.array_equal(net.tables[0].sets[0].vertices, [[0.2, 0.8], [0.5, 0.5]])


def test_comments_and_whitespace():
    text = "# header comment\nV-CREDAL 1   2 1 1 0 # scope\n2 0.2 0.8\n\n 0.5 0.5\n"
    assert parse_vcredal(text).tables[0].sets[0] == parse_vcredal(MINIMAL).tables[0].sets[0]


def test_v_roundtrip_is_exact():
    for net in nets(100):
        back = parse_vcredal(serialize_vcredal(net))
        assert same_structure(back, net)
        for a, b in zip(back.tables, net.tables):
            assert a.parents == b.parents and a.sets == b.sets


def test_roundtrip_preserves_bounds():
    net = random_network(GenParams(5, (2, 3), 2, (2, 3), 8))
    back = parse_vcredal(serialize_vcredal(net))
    for q in (Query(4), Query(0, {4: 0})):
        a, b = credal_ve(net, q), credal_ve(back, q)
        assert np.abs(a.lower - b.lower).max() <= 1e-15 and np.abs(a.upper - b.upper).max() <= 1e-15


def test_h_roundtrip_matches_vertices():
    for net in nets(30, seed0=500):
        hnet = parse_hcredal(serialize_hcredal(to_hcredal(net)))
        assert hnet.dag == net.dag
        back = from_hcredal(hnet)
        for a, b in zip(back.tables, net.tables):
            for x, y in zip(a.sets, b.sets):
                assert x.vertices.shape == y.vertices.shape
                assert np.abs(rows(x.vertices) - rows(y.vertices)).max() <= 1e-8


def test_h_interval_file():
    text = "H-CREDAL\n1\n2\n1\n1 0\n2\n1 0 0.5\n-1 0 -0.2\n"
    net = from_hcredal(parse_hcredal(text))
    assert np.allclose(net.tables[0].sets[0].vertices, [[0.2, 0.8], [0.5, 0.5]])


def test_h_empty_rows_is_simplex():
    net = from_hcredal(parse_hcredal("H-CREDAL 1 3 1 1 0 0\n"))
    assert np.allclose(rows(net.tables[0].sets[0].vertices), rows(np.eye(3)))


def test_read_network_detects_format(tmp_path):
    net = nets(1, seed0=3)[0]
    (tmp_path / "a.txt").write_text(serialize_hcredal(to_hcredal(net)))
    (tmp_path / "b.txt").write_text(serialize_vcredal(net))
    assert read_network(tmp_path / "a.txt").dag == read_network(tmp_path / "b.txt").dag


def test_duplicate_vertices_warn():
    with pytest.warns(DuplicateVertexWarning):
        net = parse_vcredal("V-CREDAL 1 2 1 1 0 2 0.2 0.8 0.2 0.8\n")
    assert len(net.tables[0].sets[0]) == 1


@pytest.mark.parametrize(
    "text, line",
    [
        ("V-CREDAL\n1\n2\n1\n1 0\n2\n0.2 0.8\n0.6 0.5\n", 8),
        ("V-CREDAL\n1\n2\n1\n1 0\n2\n0.2 0.8\n", 7),
        ("X-CREDAL\n", 1),
        ("V-CREDAL\n2\n2 2\n2\n2 1 0\n2 0 1\n", 6),
        ("V-CREDAL\n1\n2\n1\n1 0\n1\nabc 0.5\n", 7),
        ("V-CREDAL\n1\n2\n1\n1 0\n1\n0.5 0.5\nextra\n", 8),
        ("V-CREDAL\n1\n1\n", 3),
    ],
)
def test_errors_are_positioned(text, line):
    with pytest.raises(ParseError) as info:
        parse_vcredal(text)
    assert info.value.line == line


def test_truncations_always_error():
    text = serialize_vcredal(nets(1, seed0=11)[0])
    last_token = text.rstrip().rsplit(None, 1)[0]
    for cut in range(0, len(last_token), 3):
        with pytest.raises(ParseError):
            parse_vcredal(text[:cut])


def test_fuzzed_inputs_never_crash():
    rng = np.random.default_rng(0)
    alphabet = list("0123456789.-e \n#VHCREDAL")
    for _ in range(300):
        junk = "V-CREDAL " + "".join(rng.choice(alphabet, size=int(rng.integers(0, 60))))
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                parse_vcredal(junk)
        except ParseError as exc:
            assert exc.line >= 1


def test_evidence_codec():
    assert encode_evidence({3: 0, 1: 2}) == "1=2;3=0"
    assert decode_evidence("1=2;3=0") == {1: 2, 3: 0}
    assert decode_evidence("") == {}
    with pytest.raises(ValueError):
        decode_evidence("1:2")


def test_csv_roundtrip(tmp_path):
    recs = [
        BenchmarkRecord("m1", "marginal", 2, {}, "cve", 0, 0.1, 0.3, 1.5),
        BenchmarkRecord("m1", "conditional", 0, {3: 1}, "k5", 1, 0.2, 0.2, 0.25),
    ]
    write_benchmark_csv(tmp_path / "r.csv", recs)
    assert read_benchmark_csv(tmp_path / "r.csv") == recs
    write_benchmark_csv(tmp_path / "e.csv", [])
    assert read_benchmark_csv(tmp_path / "e.csv") == []


def test_csv_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("model_id,task\n")
    with pytest.raises(ParseError):
        read_benchmark_csv(path)
    path.write_text(
        "model_id,task,target,evidence,method,state,lower,upper,time_ms\nm,marginal,0,,cve,0,0.5,0.4,1\n"
    )
    with pytest.raises(ParseError) as info:
        read_benchmark_csv(path)
    assert info.value.line == 2


def test_record_validation():
    with pytest.raises(ValueError):
        BenchmarkRecord("m", "joint", 0)
    with pytest.raises(ValueError):
        BenchmarkRecord("m", "marginal", 0, time_ms=-1)
