"""Directed acyclic multigraphs with a single source and sink, quasi-flows on
them, and path decompositions.

Edges carry integer ids.  A path is a tuple of edge ids from source to sink; a
path decomposition is ``dict[path, Fraction]`` and a quasi-flow is
``dict[edge_id, Fraction]``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

Node = Hashable
Path = tuple[int, ...]
QuasiFlow = dict[int, Fraction]
Decomposition = dict[Path, Fraction]

DEFAULT_PATH_CAP = 100_000


class DagError(ValueError):
    pass


class PathCapExceeded(DagError):
    def __init__(self, count: int, cap: int) -> None:
        super().__init__(f"graph has {count} source-sink paths, above the cap of {cap}")
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class Edge:
    id: int
    tail: Node
    head: Node


def _label(n: Node) -> str:
    return n if isinstance(n, str) else repr(n)


class Dag:
    """Immutable DAG; construction validates acyclicity and the source/sink shape."""

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge | tuple[int, Node, Node]], source: Node, sink: Node) -> None:
        self.nodes: tuple[Node, ...] = tuple(nodes)
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise DagError("duplicate node labels")
        es = [e if isinstance(e, Edge) else Edge(*e) for e in edges]
        self.edges: dict[int, Edge] = {}
        for e in es:
            if e.id in self.edges:
                raise DagError(f"duplicate edge id {e.id}")
            if e.tail not in node_set or e.head not in node_set:
                raise DagError(f"edge {e.id} references an unknown node")
            if e.tail == e.head:
                raise DagError(f"edge {e.id} is a self-loop at {_label(e.tail)}")
            self.edges[e.id] = e
        if source not in node_set or sink not in node_set:
            raise DagError("source and sink must be nodes")
        if source == sink:
            raise DagError("source and sink must differ")
        self.source = source
        self.sink = sink

        out_e: dict[Node, list[int]] = defaultdict(list)
        in_e: dict[Node, list[int]] = defaultdict(list)
        for eid in sorted(self.edges):
            e = self.edges[eid]
            out_e[e.tail].append(eid)
            in_e[e.head].append(eid)
        self._out = {n: tuple(out_e.get(n, ())) for n in self.nodes}
        self._in = {n: tuple(in_e.get(n, ())) for n in self.nodes}

        no_in = [n for n in self.nodes if not self._in[n]]
        no_out = [n for n in self.nodes if not self._out[n]]
        if no_in != [source]:
            raise DagError(f"source must be the only node without incoming edges; found {sorted(map(_label, no_in))}")
        if no_out != [sink]:
            raise DagError(f"sink must be the only node without outgoing edges; found {sorted(map(_label, no_out))}")
        self._topo = self._compute_topo()

    def out_edges(self, n: Node) -> tuple[int, ...]:
        return self._out[n]

    def in_edges(self, n: Node) -> tuple[int, ...]:
        return self._in[n]

    def _compute_topo(self) -> tuple[Node, ...]:
        indeg = {n: len(self._in[n]) for n in self.nodes}
        depth = {n: 0 for n in self.nodes}
        ready = [self.source]
        seen = 0
        while ready:
            n = ready.pop()
            seen += 1
            for eid in self._out[n]:
                h = self.edges[eid].head
                depth[h] = max(depth[h], depth[n] + 1)
                indeg[h] -= 1
                if indeg[h] == 0:
                    ready.append(h)
        if seen != len(self.nodes):
            stuck = sorted(_label(n) for n, d in indeg.items() if d > 0)
            raise DagError(f"graph has a cycle through {stuck}")
        # longest distance from the source, ties by label
        return tuple(sorted(self.nodes, key=lambda n: (depth[n], _label(n))))

    def topo_order(self) -> tuple[Node, ...]:
        return self._topo

    def path_nodes(self, path: Path) -> list[Node]:
        return [self.source] + [self.edges[e].head for e in path]

    def check_path(self, path: Sequence[int]) -> Path:
        path = tuple(path)
        if not path:
            raise DagError("empty path")
        at = self.source
        visited = {at}
        for eid in path:
            e = self.edges.get(eid)
            if e is None:
                raise DagError(f"unknown edge id {eid}")
            if e.tail != at:
                raise DagError(f"edge {eid} does not continue the path at {_label(at)}")
            at = e.head
            if at in visited:
                raise DagError(f"path revisits {_label(at)}")
            visited.add(at)
        if at != self.sink:
            raise DagError("path does not end at the sink")
        return path

    def count_paths(self) -> int:
        ways = {n: 0 for n in self.nodes}
        ways[self.sink] = 1
        for n in reversed(self._topo):
            if n != self.sink:
                ways[n] = sum(ways[self.edges[e].head] for e in self._out[n])
        return ways[self.source]

    def to_json(self) -> dict:
        return {
            "nodes": [_label(n) for n in self.nodes],
            "edges": [{"id": e.id, "tail": _label(e.tail), "head": _label(e.head)} for e in sorted(self.edges.values(), key=lambda e: e.id)],
            "source": _label(self.source),
            "sink": _label(self.sink),
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "Dag":
        try:
            edges = [Edge(int(e["id"]), e["tail"], e["head"]) for e in doc["edges"]]
            return cls(doc["nodes"], edges, doc["source"], doc["sink"])
        except (KeyError, TypeError) as exc:
            raise DagError(f"malformed DAG document: {exc}") from exc


def topo_enumerate(g: Dag) -> tuple[Node, ...]:
    """Nodes ordered by longest distance from the source, ties by label."""
    return g.topo_order()


def enumerate_paths(g: Dag, cap: int = DEFAULT_PATH_CAP) -> list[Path]:
    """All source-sink paths in lexicographic edge-id order; refuses above ``cap``."""
    count = g.count_paths()
    if count > cap:
        raise PathCapExceeded(count, cap)
    out: list[Path] = []

    def walk(n: Node, prefix: list[int]) -> None:
        if n == g.sink:
            out.append(tuple(prefix))
            return
        for eid in g.out_edges(n):
            prefix.append(eid)
            walk(g.edges[eid].head, prefix)
            prefix.pop()

    walk(g.source, [])
    return out


@dataclass(frozen=True)
class Violation:
    kind: str  # "missing-edge" | "unknown-edge" | "negative" | "conservation" | "source-outflow"
    where: str
    detail: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "where": self.where, "detail": self.detail}


@dataclass
class FlowReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Violation | None:
        return self.violations[0] if self.violations else None


def validate_quasiflow(g: Dag, f: Mapping[int, Fraction], *, unit: bool = False) -> FlowReport:
    """Check nonnegativity and conservation; ``unit`` also demands source outflow 1.

    Violations are listed in topological order of the node or edge tail.
    """
    vs: list[tuple[int, int, Violation]] = []
    pos = {n: i for i, n in enumerate(g.topo_order())}
    for eid in f:
        if eid not in g.edges:
            vs.append((-1, 0, Violation("unknown-edge", str(eid), "value given for an edge not in the graph")))
    for eid, e in sorted(g.edges.items()):
        if eid not in f:
            vs.append((pos[e.tail], 0, Violation("missing-edge", str(eid), "no value given")))
        elif Fraction(f[eid]) < 0:
            vs.append((pos[e.tail], 0, Violation("negative", str(eid), f"value {f[eid]} is negative")))

    def val(eid: int) -> Fraction:
        return Fraction(f.get(eid, 0))

    for n in g.topo_order():
        if n in (g.source, g.sink):
            continue
        inflow = sum((val(e) for e in g.in_edges(n)), Fraction(0))
        outflow = sum((val(e) for e in g.out_edges(n)), Fraction(0))
        if inflow != outflow:
            vs.append((pos[n], 1, Violation("conservation", _label(n), f"inflow {inflow} != outflow {outflow}")))
    if unit:
        out_s = sum((val(e) for e in g.out_edges(g.source)), Fraction(0))
        if out_s != 1:
            vs.append((0, 2, Violation("source-outflow", _label(g.source), f"source outflow is {out_s}, not 1")))
    vs.sort(key=lambda t: (t[0], t[1]))
    return FlowReport([v for _, _, v in vs])


def _require_quasiflow(g: Dag, f: Mapping[int, Fraction]) -> None:
    report = validate_quasiflow(g, f)
    if not report.ok:
        v = report.first
        raise DagError(f"not a quasi-flow: {v.kind} at {v.where} ({v.detail})")


EdgeChooser = Callable[[Node, list[int]], int]


def decompose_by(g: Dag, f: Mapping[int, Fraction], choose: EdgeChooser) -> Decomposition:
    """Greedy path peeling; ``choose`` picks among the positive out-edges of a node.

    Each round zeroes at least one edge, so at most ``|E|`` rounds run.
    """
    _require_quasiflow(g, f)
    residual = {eid: Fraction(f.get(eid, 0)) for eid in g.edges}
    pi: Decomposition = {}
    while True:
        start = [e for e in g.out_edges(g.source) if residual[e] > 0]
        if not start:
            break
        path = []
        at = g.source
        while at != g.sink:
            live = [e for e in g.out_edges(at) if residual[e] > 0]
            if not live:  # impossible for a valid quasi-flow
                raise DagError(f"conservation failed at {_label(at)} during decomposition")
            eid = choose(at, live)
            path.append(eid)
            at = g.edges[eid].head
        path_t = tuple(path)
        mass = min(residual[e] for e in path_t)
        for e in path_t:
            residual[e] -= mass
        pi[path_t] = pi.get(path_t, Fraction(0)) + mass
    if any(residual.values()):
        raise DagError("residual flow left after decomposition")
    return pi


def decompose_greedy(g: Dag, f: Mapping[int, Fraction]) -> Decomposition:
    """Follow the least-id positive edge from the source, subtract the bottleneck, repeat."""
    return decompose_by(g, f, lambda _n, live: min(live))


def recompose(g: Dag, pi: Mapping[Path, Fraction]) -> QuasiFlow:
    f: QuasiFlow = {eid: Fraction(0) for eid in g.edges}
    for path, w in pi.items():
        for eid in g.check_path(path):
            f[eid] += Fraction(w)
    return f


def path_conjugates(g: Dag, p1: Path, p2: Path, n: Node) -> tuple[Path, Path]:
    """Follow ``p1`` up to ``n`` then ``p2``, and the reverse."""

    def cut(p: Path) -> int:
        if n == g.source:
            return 0
        for i, eid in enumerate(p):
            if g.edges[eid].head == n:
                return i + 1
        raise DagError(f"node {_label(n)} is not on path {p}")

    i, j = cut(p1), cut(p2)
    return p1[:i] + p2[j:], p2[:j] + p1[i:]
