import numpy as np
import pytest

from credal.generate import GenParams, random_network
from credal.inference import credal_ve, selection_count

_REPORT: dict[int, str] = {}


@pytest.fixture
def report():
    """Record a one-line pass/fail verdict for an acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> None:
        _REPORT[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_REPORT[number])

    return record


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_REPORT):
        terminalreporter.write_line(_REPORT[number])


def small_networks(count, *, base_seed=0, nodes=(2, 5), vertex_range=(1, 3), max_selections=20_000):
    """Deterministic stream of small random networks whose oracle stays cheap."""
    out = []
    seed = base_seed
    while len(out) < count:
        rng = np.random.default_rng(seed)
        n = int(rng.integers(nodes[0], nodes[1] + 1))
        net = random_network(GenParams(n, (2, 3), 2, vertex_range, seed))
        seed += 1
        if selection_count(net) <= max_selections:
            out.append(net)
    return out


_EXACT: dict = {}


def exact_bounds(key, net, q):
    """Exact credal VE result, memoized across tests by a caller-chosen key."""
    if key not in _EXACT:
        _EXACT[key] = credal_ve(net, q)
    return _EXACT[key]
