"""Swap-progressive decompositions under an order on alternatives (or edges),
and support-orderability checks for swap-progressivity and single-crossing.
"""

from __future__ import annotations

from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from itertools import combinations
from typing import Mapping, Sequence

from .choicecore import ChoiceError, ChoiceRule, Measure, Universe
from .dag import Dag, Decomposition, decompose_by
from .rum import RumGraph, bm_flow, build_rum_graph, decomposition_to_dist


def check_order(u: Universe, order: Sequence[str]) -> tuple[str, ...]:
    order = tuple(order)
    if sorted(order) != list(u.labels):
        raise ChoiceError(f"order {''.join(order)!r} is not a permutation of {u.key!r}")
    return order


def lift_order(g: RumGraph, order: Sequence[str]) -> list[int]:
    """Edge ids from highest to lowest rank.

    Edges are ranked by their alternative; edges of one alternative are ranked
    by menu key, lexicographically.
    """
    order = check_order(g.universe, order)
    pos = {x: i for i, x in enumerate(order)}
    return sorted(g.key_of, key=lambda e: (pos[g.key_of[e][1]], g.key_of[e][0]))


def swap_progressive(g: Dag, f: Mapping[int, Fraction], edge_order: Sequence[int]) -> Decomposition:
    """Greedy decomposition that always leaves a node on its highest-ranked live edge."""
    rank = {e: i for i, e in enumerate(edge_order)}
    if set(rank) != set(g.edges):
        raise ChoiceError("edge order must rank every edge exactly once")
    return decompose_by(g, f, lambda _n, live: min(live, key=rank.__getitem__))


def swap_progressive_rule(rule: ChoiceRule, order: Sequence[str], u: Universe) -> Measure:
    """The swap-progressive rationalization of a choice rule."""
    g = build_rum_graph(u)
    f = bm_flow(rule, u)
    neg = [e for e, v in f.items() if v < 0]
    if neg:
        menu, alt = g.key_of[min(neg)]
        raise ChoiceError(f"choice rule is not rationalizable (negative Block-Marschak value at {menu}->{alt})")
    return decomposition_to_dist(swap_progressive(g.dag, f, lift_order(g, order)), u)


def _orderable(items: list[str], constraints: list[tuple[str, str]]) -> bool:
    ts = TopologicalSorter({x: set() for x in items})
    for before, after in constraints:
        ts.add(after, before)
    try:
        ts.prepare()
    except CycleError:
        return False
    return True


def progressive_constraints(support: Sequence[str], order: Sequence[str]) -> list[tuple[str, str]]:
    """``(earlier, later)`` pairs forced by swap-progressivity.

    Whenever two preferences share their top-k set and then diverge, the one
    whose next alternative ranks higher must come later.
    """
    pos = {x: i for i, x in enumerate(order)}
    out = []
    for p, q in combinations(sorted(support), 2):
        for k in range(len(p)):
            if set(p[:k]) != set(q[:k]) or p[k] == q[k]:
                continue
            out.append((q, p) if pos[p[k]] < pos[q[k]] else (p, q))
    return out


def is_swap_progressive(mu: Mapping[str, Fraction], order: Sequence[str], u: Universe) -> bool:
    order = check_order(u, order)
    supp = [u.check_preference(p) for p, w in mu.items() if w]
    return _orderable(supp, progressive_constraints(supp, order))


def single_crossing_constraints(support: Sequence[str], order: Sequence[str]) -> list[tuple[str, str]]:
    """For each pair x above y in the order, preferences ranking y over x come first."""
    out = []
    for p, q in combinations(sorted(support), 2):
        for x, y in combinations(order, 2):
            p_agrees = p.index(x) < p.index(y)
            q_agrees = q.index(x) < q.index(y)
            if p_agrees and not q_agrees:
                out.append((q, p))
            elif q_agrees and not p_agrees:
                out.append((p, q))
    return out


def is_single_crossing(mu: Mapping[str, Fraction], order: Sequence[str], u: Universe) -> bool:
    order = check_order(u, order)
    supp = [u.check_preference(p) for p, w in mu.items() if w]
    return _orderable(supp, single_crossing_constraints(supp, order))
