import itertools
import zlib

import numpy as np
import pytest

from rankstab.grid_domain import BinaryGrid
from rankstab.matching import INF
from rankstab.persistence import PersistenceDiagram
from rankstab.set_encodings import ScalarField

_ACCEPTANCE = []


def random_grid(rng, w, h, density=0.3, nonempty=True):
    while True:
        g = BinaryGrid(rng.random((h, w)) < density)
        if not nonempty or not g.is_empty():
            return g


def random_field(rng, w, h, scale=1.0):
    return ScalarField(rng.normal(scale=scale, size=(h, w)))


def brute_bottleneck(a: PersistenceDiagram, b: PersistenceDiagram) -> float:
    """Minimum over every partial matching of the worst cost; L-inf pairs, half-persistence deletions."""
    if len(a.essential) != len(b.essential):
        return INF
    ess = 0.0
    if a.essential:
        ess = min(max(abs(x - y) for x, y in zip(a.essential, perm))
                  for perm in itertools.permutations(b.essential))
    A, B = list(a.finite), list(b.finite)
    best = INF
    # assign each point of A to an index of B or to the diagonal (None)
    for choice in itertools.product([None] + list(range(len(B))), repeat=len(A)):
        used = [j for j in choice if j is not None]
        if len(used) != len(set(used)):
            continue
        cost = 0.0
        for p, j in zip(A, choice):
            if j is None:
                cost = max(cost, (p[1] - p[0]) / 2)
            else:
                q = B[j]
                cost = max(cost, abs(p[0] - q[0]), abs(p[1] - q[1]))
        for j, q in enumerate(B):
            if j not in used:
                cost = max(cost, (q[1] - q[0]) / 2)
        best = min(best, cost)
    return max(best, ess)


def random_diagram(rng, n_finite, n_essential, integer=False):
    pts = []
    for _ in range(n_finite):
        if integer:
            b = int(rng.integers(0, 5))
            d = b + int(rng.integers(1, 5))
        else:
            b = rng.uniform(-3, 3)
            d = b + rng.exponential(1.5) + 1e-6
        pts.append((b, d))
    ess = [float(rng.integers(0, 4)) if integer else rng.uniform(-3, 3) for _ in range(n_essential)]
    return PersistenceDiagram(tuple(pts), tuple(ess))


@pytest.fixture
def rng(request):
    # stable per-test seed
    seed = zlib.crc32(request.node.nodeid.encode())
    return np.random.default_rng(seed)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    def record(criterion, passed, detail=""):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
