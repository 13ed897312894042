from __future__ import annotations

import random
from fractions import Fraction

import pytest

from choiceid.dag import (
    Dag,
    DagError,
    PathCapExceeded,
    decompose_by,
    decompose_greedy,
    enumerate_paths,
    path_conjugates,
    recompose,
    topo_enumerate,
    validate_quasiflow,
)

from oracles import brute_conserves, random_dag

F = Fraction


def diamond() -> Dag:
    return Dag(["s", "u", "v", "t"], [(0, "s", "u"), (1, "s", "v"), (2, "u", "t"), (3, "v", "t"), (4, "u", "v")], "s", "t")


def test_construction_rejects_malformed_graphs():
    with pytest.raises(DagError, match="self-loop"):
        Dag(["s", "t"], [(0, "s", "s"), (1, "s", "t")], "s", "t")
    with pytest.raises(DagError, match="source must be the only"):
        Dag(["s", "x", "t"], [(0, "s", "t"), (1, "x", "t")], "s", "t")
    with pytest.raises(DagError, match="sink must be the only"):
        Dag(["s", "x", "t"], [(0, "s", "t"), (1, "s", "x")], "s", "t")
    with pytest.raises(DagError, match="duplicate edge"):
        Dag(["s", "t"], [(0, "s", "t"), (0, "s", "t")], "s", "t")
    with pytest.raises(DagError):
        Dag(["s", "u", "v", "t"], [(0, "s", "u"), (1, "u", "v"), (2, "v", "u"), (3, "v", "t")], "s", "t")


def test_topological_order_and_paths():
    g = diamond()
    assert topo_enumerate(g) == ("s", "u", "v", "t")
    assert enumerate_paths(g) == [(0, 2), (0, 4, 3), (1, 3)]
    assert g.count_paths() == 3
    with pytest.raises(PathCapExceeded):
        enumerate_paths(g, cap=2)


def test_validation_reports_each_kind():
    g = diamond()
    ok = {0: F(1, 2), 1: F(1, 2), 2: F(1, 4), 3: F(3, 4), 4: F(1, 4)}
    assert validate_quasiflow(g, ok, unit=True).ok
    bad = {**ok, 4: F(1, 2)}
    rep = validate_quasiflow(g, bad)
    assert rep.first.kind == "conservation" and rep.first.where == "u"
    assert validate_quasiflow(g, {**ok, 2: F(-1)}).first.kind == "negative"
    missing = {k: v for k, v in ok.items() if k != 3}
    assert validate_quasiflow(g, missing).first.kind == "missing-edge"
    assert validate_quasiflow(g, {k: 2 * v for k, v in ok.items()}, unit=True).first.kind == "source-outflow"
    assert validate_quasiflow(g, {**ok, 9: F(0)}).first.kind == "unknown-edge"


def test_decompose_rejects_non_flow():
    with pytest.raises(DagError):
        decompose_greedy(diamond(), {0: F(1), 1: F(0), 2: F(0), 3: F(0), 4: F(0)})


def test_greedy_decomposition_known_answer():
    g = diamond()
    f = {0: F(1, 2), 1: F(1, 2), 2: F(1, 4), 3: F(3, 4), 4: F(1, 4)}
    assert decompose_greedy(g, f) == {(0, 2): F(1, 4), (0, 4, 3): F(1, 4), (1, 3): F(1, 2)}


def test_path_conjugates_at_shared_node():
    g = diamond()
    assert path_conjugates(g, (0, 4, 3), (1, 3), "v") == ((0, 4, 3), (1, 3))
    assert path_conjugates(g, (0, 2), (0, 4, 3), "u") == ((0, 4, 3), (0, 2))
    with pytest.raises(DagError):
        path_conjugates(g, (0, 2), (1, 3), "u")


def test_json_round_trip():
    g = diamond()
    h = Dag.from_json(g.to_json())
    assert h.to_json() == g.to_json()


def test_recompose_of_greedy_is_identity_on_1000_random_dags():
    rng = random.Random(2024)
    for _ in range(1000):
        g = random_dag(rng, rng.randint(2, 7), rng.randint(0, 8))
        paths = enumerate_paths(g)
        pi = {p: F(rng.randint(0, 6), rng.randint(1, 4)) for p in rng.sample(paths, min(len(paths), rng.randint(1, 4)))}
        f = recompose(g, pi)
        assert validate_quasiflow(g, f).ok
        assert recompose(g, decompose_greedy(g, f)) == f
        rev = decompose_by(g, f, lambda _n, live: max(live))
        assert recompose(g, rev) == f


def test_validation_soundness_on_1000_random_assignments():
    rng = random.Random(99)
    agreed_ok = agreed_bad = 0
    for _ in range(1000):
        g = random_dag(rng, rng.randint(2, 6), rng.randint(0, 6))
        paths = enumerate_paths(g)
        f = recompose(g, {p: F(rng.randint(0, 3)) for p in paths})
        if rng.random() < 0.6:
            e = rng.choice(list(g.edges))
            f[e] += rng.choice([F(-1), F(1), F(1, 2)])
        verdict = validate_quasiflow(g, f).ok
        assert verdict == brute_conserves(g, f)
        agreed_ok += verdict
        agreed_bad += not verdict
    assert agreed_ok > 100 and agreed_bad > 100
