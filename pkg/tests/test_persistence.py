import numpy as np
import pytest
from scipy import ndimage

from conftest import random_field
from rankstab.grid_domain import grid_graph
from rankstab.persistence import (PersistenceDiagram, RankQuery, diagram_from_csv, diagram_from_json,
                                  diagram_to_csv, diagram_to_json, n_components, rank_from_diagram,
                                  rank_oracle_1d, rank_oracle_multi, sublevel_diagram_0)
from rankstab.set_encodings import ScalarField, distance_transform, radial_field, stack


def path_field(values):
    return ScalarField([values])


def brute_rank(values: np.ndarray, s: float, t: float, within=None) -> int:
    """Rank by scipy image labelling (4-connectivity) of both sublevel sets."""
    space = np.ones(values.shape, bool) if within is None else within
    labels, _ = ndimage.label(space & (values <= t))
    touched = labels[space & (values <= s)]
    return len(set(touched.tolist()) - {0})


def test_path_two_minima():
    dgm = sublevel_diagram_0(grid_graph(3, 1), path_field([0, 1, 0]))
    assert dgm.finite == ((0.0, 1.0),)
    assert dgm.essential == (0.0,)


def test_constant_field():
    dgm = sublevel_diagram_0(grid_graph(5, 4), ScalarField.constant((5, 4), 2.5))
    assert dgm.finite == ()
    assert dgm.essential == (2.5,)


def test_monotone_staircase():
    dgm = sublevel_diagram_0(grid_graph(4, 1), path_field([3, 2, 1, 0]))
    assert dgm.finite == ()
    assert dgm.essential == (0.0,)


def test_diagram_extent_mismatch():
    with pytest.raises(ValueError):
        sublevel_diagram_0(grid_graph(3, 3), ScalarField.constant((3, 2), 0))


def test_diagram_invariants(rng):
    for _ in range(30):
        f = random_field(rng, 9, 7)
        g = grid_graph(9, 7)
        dgm = sublevel_diagram_0(g, f)
        assert len(dgm.essential) == n_components(g) == 1
        assert dgm.essential[0] == f.values.min()
        assert all(b < d for b, d in dgm.finite)
        # conservation: every local minimum (strict in the filtration order) births one class
        vals = f.values
        padded = np.pad(vals, 1, constant_values=np.inf)
        nb = np.stack([padded[:-2, 1:-1], padded[2:, 1:-1], padded[1:-1, :-2], padded[1:-1, 2:]])
        minima = int((vals[None] < nb).all(axis=0).sum())
        assert len(dgm.finite) + len(dgm.essential) == minima


def test_rank_from_diagram_examples():
    dgm = PersistenceDiagram(((0.0, 1.0),), (0.0,))
    assert rank_from_diagram(dgm, 0, 0.5) == 2
    assert rank_from_diagram(dgm, 0, 1.5) == 1
    assert rank_from_diagram(dgm, -1, 0.5) == 0
    with pytest.raises(ValueError):
        rank_from_diagram(dgm, 1, 1)


def test_oracle_trivial_cases():
    g = grid_graph(4, 4)
    c = ScalarField.constant((4, 4), 1.0)
    assert rank_oracle_1d(g, c, 1.0, 2.0) == 1
    assert rank_oracle_1d(g, c, 0.5, 2.0) == 0
    with pytest.raises(ValueError):
        rank_oracle_1d(g, c, 2.0, 2.0)


def test_oracle_matches_image_labelling(rng):
    g = grid_graph(10, 8)
    for _ in range(50):
        f = random_field(rng, 10, 8)
        s, t = np.sort(rng.uniform(-2, 2, size=2))
        mask = rng.random((8, 10)) < 0.7
        assert rank_oracle_1d(g, f, s, t) == brute_rank(f.values, s, t)
        assert rank_oracle_1d(g, f, s, t, within=mask) == brute_rank(f.values, s, t, mask)


def test_diagram_agrees_with_oracle_continuous(rng):
    g = grid_graph(8, 8)
    for _ in range(200):
        f = random_field(rng, 8, 8)
        s, t = np.sort(rng.uniform(f.values.min() - 0.2, f.values.max() + 0.2, size=2))
        assert rank_from_diagram(sublevel_diagram_0(g, f), s, t) == rank_oracle_1d(g, f, s, t)


def test_diagram_agrees_with_oracle_with_ties(rng):
    # integer values force ties in vertices, merges and query levels
    g = grid_graph(7, 6)
    for _ in range(200):
        f = ScalarField(rng.integers(0, 4, size=(6, 7)).astype(float))
        s = float(rng.integers(-1, 4))
        t = s + float(rng.integers(1, 4))
        dgm = sublevel_diagram_0(g, f)
        assert rank_from_diagram(dgm, s, t) == rank_oracle_1d(g, f, s, t)


def test_rank_monotonicity(rng):
    g = grid_graph(8, 8)
    for _ in range(50):
        F = stack([random_field(rng, 8, 8), random_field(rng, 8, 8)])
        u = rng.uniform(-1, 0.5, size=2)
        v = u + rng.uniform(0.1, 1.5, size=2)
        du = rng.uniform(0, 0.3, size=2)
        dv = rng.uniform(0, 0.3, size=2)
        base = rank_oracle_multi(g, F, RankQuery(u, v))
        # grow u (still below v)
        u2 = np.minimum(u + du, v - 1e-9)
        assert rank_oracle_multi(g, F, RankQuery(u2, v)) >= base
        assert rank_oracle_multi(g, F, RankQuery(u, v + dv)) <= base


def test_multi_oracle_specialises_to_1d(rng):
    g = grid_graph(8, 8)
    for _ in range(50):
        f = random_field(rng, 8, 8)
        s, t = np.sort(rng.uniform(-2, 2, size=2))
        assert rank_oracle_multi(g, stack([f]), RankQuery((s,), (t,))) == rank_oracle_1d(g, f, s, t)


def test_multi_oracle_empty_and_errors(rng):
    g = grid_graph(5, 5)
    F = stack([random_field(rng, 5, 5), random_field(rng, 5, 5)])
    low = F.array().min() - 1
    assert rank_oracle_multi(g, F, RankQuery((low - 1, low - 1), (low, low))) == 0
    with pytest.raises(ValueError):
        rank_oracle_multi(g, F, RankQuery((0,), (1,)))
    with pytest.raises(ValueError):
        RankQuery((0, 1), (1, 1))


def test_multi_oracle_at_zero_distance_level_is_set_rank():
    # with u1 = 0 the lower set is K itself; for v1 below the gap between pieces
    # of K the rank equals that of (K, phi|K)
    from rankstab.grid_domain import make_star
    grid = make_star(6, 20, 3, (48, 48))
    phi = radial_field(grid.extent, (23.5, 23.5))
    g = grid_graph(48, 48)
    F = stack([distance_transform(grid), phi])
    u, v = -18.3, -9.7
    direct = rank_oracle_1d(g, phi, u, v, within=grid.mask)
    assert direct == 6
    for v1 in (0.5, 0.99):
        assert rank_oracle_multi(g, F, RankQuery((0.0, u), (v1, v))) == direct


def test_diagram_round_trips(rng):
    g = grid_graph(6, 6)
    dgm = sublevel_diagram_0(g, random_field(rng, 6, 6))
    assert diagram_from_json(diagram_to_json(dgm)) == dgm
    assert diagram_from_csv(diagram_to_csv(dgm)) == dgm
    assert diagram_to_json(PersistenceDiagram()) == '{"finite": [], "essential": []}'
    assert "0.10000000000000001" in diagram_to_json(PersistenceDiagram(((0.1, 1.0),), ()))
    assert diagram_to_csv(PersistenceDiagram((), (2.0,))).splitlines()[1] == "2,inf"


def test_diagram_rejects_flat_points():
    with pytest.raises(ValueError):
        PersistenceDiagram(((1.0, 1.0),), ())
