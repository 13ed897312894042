"""The menu-lattice graph of a universe, Block-Marschak flows, and the
preference/path bijection that turns rationalizations into path decompositions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Mapping

from .choicecore import ChoiceError, ChoiceRule, Measure, Preference, Universe, validate_rule
from .dag import Dag, Decomposition, Edge, Path, QuasiFlow, decompose_greedy, validate_quasiflow


@dataclass(frozen=True)
class RumGraph:
    universe: Universe
    dag: Dag
    edge_of: dict[tuple[str, str], int]  # (menu, alternative) -> edge id
    key_of: dict[int, tuple[str, str]]

    def edge(self, menu: str, alt: str) -> int:
        return self.edge_of[(menu, alt)]


def _all_subsets(labels: tuple[str, ...]) -> list[str]:
    """Every subset as a sorted string, largest first then lexicographic."""
    out = []
    for r in range(len(labels), -1, -1):
        out.extend("".join(c) for c in combinations(labels, r))
    return out


@lru_cache(maxsize=16)
def _build(u: Universe) -> RumGraph:
    nodes = _all_subsets(u.labels)
    edges = []
    edge_of: dict[tuple[str, str], int] = {}
    for menu in nodes:
        for a in menu:
            eid = len(edges)
            edges.append(Edge(eid, menu, menu.replace(a, "")))
            edge_of[(menu, a)] = eid
    dag = Dag(nodes, edges, u.key, "")
    return RumGraph(u, dag, edge_of, {v: k for k, v in edge_of.items()})


def build_rum_graph(u: Universe) -> RumGraph:
    """Nodes are all subsets (sorted strings, ``""`` for the empty set); edge
    ``A -> A minus a`` stands for choosing ``a`` from ``A``."""
    return _build(u)


def bm_flow(rho: Mapping[str, Mapping[str, Fraction]], u: Universe) -> QuasiFlow:
    """Block-Marschak values on every edge; may be negative.

    ``f(A -> A\\{a}) = sum over B containing A of (-1)^|B\\A| rho(a, B)``.
    """
    rho = validate_rule(u, rho)
    g = build_rum_graph(u)
    full = set(u.labels)
    f: QuasiFlow = {}
    for (menu, a), eid in g.edge_of.items():
        rest = sorted(full - set(menu))
        total = Fraction(0)
        for r in range(len(rest) + 1):
            sign = -1 if r % 2 else 1
            for extra in combinations(rest, r):
                b = "".join(sorted(menu + "".join(extra)))
                total += sign * rho[b][a]
        f[eid] = total
    return f


def pref_to_path(p: Preference, u: Universe) -> Path:
    u.check_preference(p)
    g = build_rum_graph(u)
    menu = u.key
    path = []
    for a in p:
        path.append(g.edge_of[(menu, a)])
        menu = menu.replace(a, "")
    return tuple(path)


def path_to_pref(path: Path, u: Universe) -> Preference:
    g = build_rum_graph(u)
    try:
        g.dag.check_path(path)
    except ValueError as exc:
        raise ChoiceError(f"malformed path: {exc}") from exc
    return "".join(g.key_of[e][1] for e in path)


def dist_to_decomposition(mu: Mapping[str, Fraction], u: Universe) -> Decomposition:
    return {pref_to_path(p, u): Fraction(w) for p, w in mu.items() if w}


def decomposition_to_dist(pi: Mapping[Path, Fraction], u: Universe) -> Measure:
    out = {path_to_pref(path, u): Fraction(w) for path, w in pi.items() if w}
    return dict(sorted(out.items()))


@dataclass
class Rationalization:
    ok: bool
    flow: QuasiFlow
    witness: Measure | None = None
    negative_edges: list[tuple[str, str, Fraction]] = field(default_factory=list)


def is_rationalizable(rho: ChoiceRule, u: Universe) -> Rationalization:
    """Nonnegative Block-Marschak values decide; the greedy decomposition is the witness."""
    g = build_rum_graph(u)
    f = bm_flow(rho, u)
    neg = [(*g.key_of[e], v) for e, v in sorted(f.items()) if v < 0]
    if neg:
        return Rationalization(False, f, None, neg)
    report = validate_quasiflow(g.dag, f, unit=True)
    if not report.ok:  # cannot happen for a valid rule; kept as a guard
        raise ChoiceError(f"Block-Marschak flow is not a flow: {report.first}")
    witness = decomposition_to_dist(decompose_greedy(g.dag, f), u)
    return Rationalization(True, f, witness)
