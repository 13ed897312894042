"""Frozen expected values and independent brute-force helpers shared by tests."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from choiceid.dag import Dag, Edge

F = Fraction

# Four-preference introductory example.
EX1 = {"abcd": F(1, 4), "badc": F(1, 4), "abdc": F(3, 8), "bacd": F(1, 8)}
EX1_ARGMIN = {"abcd": F(3, 8), "badc": F(3, 8), "abdc": F(1, 4)}
EX1_ARGMAX = {"abdc": F(5, 8), "bacd": F(3, 8)}
EX1_SUPPORT = ["abcd", "badc", "abdc", "bacd"]

# Six-alternative example: uniform on each triple, observationally equivalent.
EX4_FROM = ["abcdef", "baefcd", "cdbafe"]
EX4_TO = ["abefcd", "bacdfe", "cdbaef"]

# Monotone expected-utility preferences over four lotteries.
MONOTONE_EU = ["dcba", "dcab", "dbca", "cdab", "cadb"]

# Swap-progressive support of the uniform rule under a > b > c > d,
# with the misprinted third entry read as "dacb".
UNIFORM_PROGRESSIVE_ABCD = [
    "dcba", "dbca", "dacb", "cdab", "cbda", "cadb",
    "bdac", "bcad", "badc", "adbc", "acbd", "abcd",
]


def menus(labels: str) -> list[str]:
    return ["".join(c) for r in range(1, len(labels) + 1) for c in combinations(sorted(labels), r)]


def brute_phi(mu: dict[str, Fraction], labels: str) -> dict[str, dict[str, Fraction]]:
    """Choice probabilities by scanning each preference for its best menu item."""
    out = {m: {x: F(0) for x in m} for m in menus(labels)}
    for p, w in mu.items():
        for m in out:
            best = next(x for x in p if x in m)
            out[m][best] += w
    return out


def random_distribution(rng: random.Random, prefs: list[str], size: int, denom: int = 12) -> dict[str, Fraction]:
    chosen = rng.sample(prefs, size)
    weights = [rng.randint(1, denom) for _ in chosen]
    total = sum(weights)
    return {p: F(w, total) for p, w in zip(chosen, weights)}


def close(a: dict, b: dict) -> bool:
    keys = set(a) | set(b)
    return all(F(a.get(k, 0)) == F(b.get(k, 0)) for k in keys)


def random_dag(rng: random.Random, n_nodes: int, extra: int) -> Dag:
    """Nodes in topological order; a spine guarantees the source/sink shape."""
    nodes = [f"n{i}" for i in range(n_nodes)]
    pairs = {(i, i + 1) for i in range(n_nodes - 1)}
    for _ in range(extra):
        i = rng.randrange(n_nodes - 1)
        j = rng.randrange(i + 1, n_nodes)
        pairs.add((i, j))
    edges = [Edge(k, nodes[i], nodes[j]) for k, (i, j) in enumerate(sorted(pairs))]
    # parallel edges exercise multigraph handling
    if rng.random() < 0.3:
        i, j = sorted(pairs)[0]
        edges.append(Edge(len(edges), nodes[i], nodes[j]))
    return Dag(nodes, edges, nodes[0], nodes[-1])


def brute_conserves(g: Dag, f: dict[int, Fraction]) -> bool:
    if any(v < 0 for v in f.values()):
        return False
    for n in g.nodes:
        if n in (g.source, g.sink):
            continue
        inflow = sum(f[e.id] for e in g.edges.values() if e.head == n)
        outflow = sum(f[e.id] for e in g.edges.values() if e.tail == n)
        if inflow != outflow:
            return False
    return True
