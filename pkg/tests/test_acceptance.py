"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v -s``; the terminal
summary repeats every recorded line.
"""
import json
import time

import numpy as np
import pytest
from scipy import ndimage

from conftest import brute_bottleneck, random_diagram, random_field
from rankstab.cli import main
from rankstab.foliation import (AdmissiblePair, LeafPoint, leaf_point_to_query, reduce,
                                sample_admissible_2)
from rankstab.grid_domain import BinaryGrid, grid_graph, make_star
from rankstab.harness import (DEFAULT_SCHEDULE, default_leaves, perturb_salt_pepper, recovery_sweep,
                              verify_stability_fuzzy, verify_stability_hausdorff,
                              verify_stability_symdiff)
from rankstab.matching import dmatch_1d, scale_diagram
from rankstab.persistence import rank_from_diagram, rank_oracle_1d, rank_oracle_multi, sublevel_diagram_0
from rankstab.set_encodings import (ScalarField, centroid, disk_size, distance_transform, local_density,
                                    radial_field, stack, sup_distance)

# stability reports sample 8 directions x 9 offsets per leaf set
N_ANGLES, N_OFFSETS = 8, 9


def leaf_json(capsys, *args):
    assert main(["leaf", *map(str, args)]) == 0
    return json.loads(capsys.readouterr().out)


# --- 1: leaf parameters ------------------------------------------------------

def test_leaf_parameters_reference_point(acceptance, capsys):
    p = leaf_json(capsys, 0, -100, 3, -80)
    err = max(max(abs(a - b) for a, b in zip(p["l"], (0.1483, 0.9889))),
              max(abs(a - b) for a, b in zip(p["b"], (13.0434, -13.0434))))
    ok = err <= 1e-3
    acceptance("1 leaf (0,-100,3,-80) l,b", ok, f"max error {err:.2e} (tol 1e-3)")
    assert ok


# (alpha, u, beta, v) -> printed (s, t), and the tolerance each row is checked at
REFERENCE_ROWS = [
    ((0.5, -100, 24, -80), (-70.5866, -39.7272), 1e-3),
    ((0.5, -100, 16, -80), (-70.9216, -45.6179), 1e-3),
    ((0.5, -100, 8, -80), (-77.2843, -55.9262), 1e-3),
    ((0.5, -100, 1, -80), (-97.1120, -77.1040), 2e-2),
]


@pytest.mark.parametrize("row,expected,tol", REFERENCE_ROWS, ids=["beta24", "beta16", "beta8", "beta1"])
def test_leaf_parameters_reference_rows(acceptance, capsys, row, expected, tol):
    p = leaf_json(capsys, *row)
    err = max(abs(p["s"] - expected[0]), abs(p["t"] - expected[1]))
    ok = err <= tol
    acceptance(f"1 leaf {row} s,t", ok,
               f"got ({p['s']:.4f}, {p['t']:.4f}) vs ({expected[0]}, {expected[1]}), error {err:.2e} (tol {tol:g})")
    assert ok


# --- 2: reduction --------------------------------------------------------------

def test_reduction_equivalence(acceptance):
    rng = np.random.default_rng(2)
    g = grid_graph(8, 8)
    start = time.perf_counter()
    failures = 0
    for _ in range(100):
        F = stack([random_field(rng, 8, 8), random_field(rng, 8, 8, scale=2.0)])
        theta = rng.uniform(0.05, np.pi / 2 - 0.05)
        c = rng.uniform(-1, 1)
        pair = AdmissiblePair((np.cos(theta), np.sin(theta)), (c, -c))
        red = reduce(F, pair)
        s, t = np.sort(rng.uniform(red.values.min() - 0.1, red.values.max() + 0.1, size=2))
        q = leaf_point_to_query(LeafPoint(pair, s, t))
        failures += rank_oracle_multi(g, F, q) != rank_oracle_1d(g, red, s, t)
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 10
    acceptance("2 reduction oracle equivalence", ok, f"{failures}/100 failures, {elapsed:.2f}s")
    assert ok


# --- 3: diagram ----------------------------------------------------------------

def test_diagram_against_oracle(acceptance):
    rng = np.random.default_rng(3)
    g = grid_graph(12, 12)
    start = time.perf_counter()
    failures = 0
    for i in range(200):
        # every fourth field is integer valued to exercise ties
        f = random_field(rng, 12, 12) if i % 4 else ScalarField(rng.integers(0, 5, (12, 12)).astype(float))
        s, t = np.sort(rng.uniform(f.values.min() - 0.2, f.values.max() + 0.2, size=2))
        if i % 4 == 0:
            s, t = float(np.floor(s)), float(np.floor(s)) + float(rng.integers(1, 4))
        failures += rank_from_diagram(sublevel_diagram_0(g, f), s, t) != rank_oracle_1d(g, f, s, t)
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 10
    acceptance("3 diagram vs rank oracle", ok, f"{failures}/200 failures, {elapsed:.2f}s")
    assert ok


# --- 4: bottleneck ---------------------------------------------------------------

def test_bottleneck_exact(acceptance):
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        total = int(rng.integers(0, 5))
        na = int(rng.integers(0, total + 1))
        ne = int(rng.integers(0, 2))
        a = random_diagram(rng, na, ne, integer=rng.random() < 0.3)
        b = random_diagram(rng, total - na, ne)
        d, ref = dmatch_1d(a, b), brute_bottleneck(a, b)
        worst = max(worst, 0.0 if d == ref else abs(d - ref))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 10
    acceptance("4 bottleneck vs enumeration", ok, f"max error {worst:.1e}, {elapsed:.2f}s")
    assert ok


# --- 5-7: stability ----------------------------------------------------------------

@pytest.fixture(scope="module")
def star64():
    g = make_star(8, 28, 3, (64, 64))
    return g, radial_field(g.extent, centroid(g))


def test_hausdorff_stability(acceptance, star64):
    g, phi = star64
    start = time.perf_counter()
    held, slack = 0, []
    for seed in range(20):
        g2 = perturb_salt_pepper(g, 3, 0.3, 0.2, seed)
        F, G = stack([distance_transform(g), phi]), stack([distance_transform(g2), phi])
        r = verify_stability_hausdorff(g, g2, phi, phi, default_leaves(F, G, N_ANGLES, N_OFFSETS))
        held += r.dmatch_lower_bound <= r.set_distance + 1e-9
        slack.append(r.set_distance - r.dmatch_lower_bound)
    elapsed = time.perf_counter() - start
    ok = held == 20 and elapsed < 120
    acceptance("5 Hausdorff stability", ok, f"{held}/20 held, min slack {min(slack):.3f}, {elapsed:.1f}s")
    assert ok


def test_symdiff_stability(acceptance, star64):
    g, phi = star64
    start = time.perf_counter()
    held = total = 0
    for eps in (2, 4):
        for seed in range(20):
            g2 = perturb_salt_pepper(g, 3, 0.3, 0.2, seed)
            F = stack([-local_density(g, eps, clip=False), phi])
            G = stack([-local_density(g2, eps, clip=False), phi])
            r = verify_stability_symdiff(g, g2, eps, phi, phi, default_leaves(F, G, N_ANGLES, N_OFFSETS))
            total += 1
            held += r.dmatch_lower_bound <= r.bound + 1e-9 and r.bound == r.set_distance / disk_size(eps)
    # one far outlier: large Hausdorff distance, tiny symmetric difference
    mask = g.mask.copy()
    mask[1, 1] = True
    outlier = BinaryGrid(mask)
    outlier_ok = True
    for eps in (2, 4):
        r = verify_stability_symdiff(g, outlier, eps, phi, phi, sample_admissible_2(N_ANGLES, N_OFFSETS, 40.0))
        outlier_ok &= (r.extra["hausdorff"] > 10 and r.bound <= 1 / disk_size(eps) + 1e-15
                       and r.bound_satisfied)
    elapsed = time.perf_counter() - start
    ok = held == total and outlier_ok and elapsed < 120
    acceptance("6 symmetric-difference stability", ok,
               f"{held}/{total} held, outlier case {'ok' if outlier_ok else 'FAILED'}, {elapsed:.1f}s")
    assert ok


def random_density(rng, w, h):
    kind = rng.integers(0, 2)
    if kind == 0:
        raw = ndimage.gaussian_filter(rng.random((h, w)), float(rng.uniform(0.5, 3)))
        raw = (raw - raw.min()) / (raw.max() - raw.min())
        return ScalarField(np.clip(raw, 0, 1))
    grid = BinaryGrid(rng.random((h, w)) < rng.uniform(0.1, 0.6))
    return local_density(grid, float(rng.uniform(1, 3)))


def test_fuzzy_stability(acceptance):
    rng = np.random.default_rng(7)
    w = h = 24
    phi = radial_field((w, h), ((w - 1) / 2, (h - 1) / 2))
    start = time.perf_counter()
    held = 0
    for _ in range(20):
        p1, p2 = random_density(rng, w, h), random_density(rng, w, h)
        F, G = stack([-p1, phi]), stack([-p2, phi])
        r = verify_stability_fuzzy(p1, p2, phi, phi, default_leaves(F, G, N_ANGLES, N_OFFSETS))
        held += r.bound_satisfied and r.set_distance == sup_distance(p1, p2)
    elapsed = time.perf_counter() - start
    ok = held == 20 and elapsed < 60
    acceptance("7 fuzzy stability", ok, f"{held}/20 held, {elapsed:.1f}s")
    assert ok


# --- 8: recovery plateau ----------------------------------------------------------

def test_recovery_plateau(acceptance):
    start = time.perf_counter()
    g = make_star(8, 60, 3, (128, 128))
    phi = radial_field(g.extent, centroid(g))
    # phi <= -55.3 keeps only the arm tips; phi <= -30.7 keeps the arms, still disjoint outside the hub
    table = recovery_sweep(g, phi, -55.3, -30.7, DEFAULT_SCHEDULE)
    ranks = table.ranks()
    elapsed = time.perf_counter() - start
    ok = (table.direct_rank == 8 and table.longest_run(8) >= 3 and ranks[0] < 8 and elapsed < 60)
    acceptance("8 recovery plateau", ok, f"ranks {ranks}, direct {table.direct_rank}, {elapsed:.1f}s")
    assert ok


# --- 9-10: one-parameter stability and scaling ------------------------------------------

def test_function_stability(acceptance):
    rng = np.random.default_rng(9)
    g = grid_graph(12, 12)
    start = time.perf_counter()
    violations = 0
    for _ in range(100):
        f = random_field(rng, 12, 12)
        h = ScalarField(f.values + rng.normal(scale=rng.choice([0.01, 0.3, 2.0]), size=(12, 12)))
        violations += dmatch_1d(sublevel_diagram_0(g, f), sublevel_diagram_0(g, h)) > sup_distance(f, h)
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 30
    acceptance("9 one-parameter stability", ok, f"{violations}/100 violations, {elapsed:.2f}s")
    assert ok


def test_scaling_homogeneity(acceptance):
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(100):
        ne = int(rng.integers(0, 3))
        a = random_diagram(rng, int(rng.integers(0, 8)), ne)
        b = random_diagram(rng, int(rng.integers(0, 8)), ne)
        mu = float(rng.uniform(0.1, 10))
        lhs, rhs = dmatch_1d(scale_diagram(a, mu), scale_diagram(b, mu)), mu * dmatch_1d(a, b)
        worst = max(worst, abs(lhs - rhs))
    ok = worst <= 1e-12
    acceptance("10 scaling homogeneity", ok, f"max error {worst:.1e} (tol 1e-12)")
    assert ok
