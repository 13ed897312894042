"""Three extensions built on the generic DAG machinery: random choice over a
menu collection, a two-frame frame-dependent model, and Markovian dynamic
discrete choice with a fixed menu.

Each model is wrapped in a :class:`GraphModel` that knows its graph, how to
turn data into a quasi-flow, and how to name paths.  Swaps, span membership,
bounds, extreme points and ordered decompositions are then shared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Callable, Mapping, Sequence

from .choicecore import ChoiceError, Universe
from .dag import DEFAULT_PATH_CAP, Dag, Decomposition, Edge, Path, PathCapExceeded, QuasiFlow, decompose_greedy, enumerate_paths, path_conjugates, recompose, validate_quasiflow
from .idset import dag_bounds, dag_extreme_points, paths_independent
from .linalg import RowSpace
from .ordered import swap_progressive

DEFAULT_SWAP_PATH_CAP = 2_000


@dataclass
class GraphModel:
    """A DAG whose source-sink paths are the model's types."""

    kind: str
    dag: Dag
    edge_alt: dict[int, str]  # alternative each edge stands for
    path_key: Callable[[Path], str]
    key_path: Callable[[str], Path]
    _paths: list[Path] | None = field(default=None, repr=False)

    def paths(self, cap: int = DEFAULT_PATH_CAP) -> list[Path]:
        if self._paths is None:
            self._paths = enumerate_paths(self.dag, cap)
        return self._paths

    def to_decomposition(self, mu: Mapping[str, Fraction]) -> Decomposition:
        return {self.key_path(k): Fraction(w) for k, w in mu.items() if w}

    def to_measure(self, pi: Mapping[Path, Fraction]) -> dict[str, Fraction]:
        return dict(sorted((self.path_key(p), Fraction(w)) for p, w in pi.items() if w))

    def flow_of(self, mu: Mapping[str, Fraction]) -> QuasiFlow:
        return recompose(self.dag, self.to_decomposition(mu))

    def edge_order(self, order: Sequence[str]) -> list[int]:
        """Edges ranked by alternative (highest first), ties by edge id."""
        pos = {x: i for i, x in enumerate(order)}
        missing = set(self.edge_alt.values()) - set(pos)
        if missing:
            raise ChoiceError(f"order does not rank {sorted(missing)}")
        return sorted(self.dag.edges, key=lambda e: (pos[self.edge_alt[e]], e))


# ---------------------------------------------------------------------------
# shared swap machinery


@dataclass(frozen=True)
class GraphSwap:
    minus: tuple[str, str]
    plus: tuple[str, str]
    node: str

    def measure(self) -> dict[str, Fraction]:
        m: dict[str, Fraction] = {}
        for k in self.plus:
            m[k] = m.get(k, Fraction(0)) + 1
        for k in self.minus:
            m[k] = m.get(k, Fraction(0)) - 1
        return {k: w for k, w in sorted(m.items()) if w}

    def to_json(self) -> dict:
        return {"plus": list(self.plus), "minus": list(self.minus), "node": self.node}


def graph_swaps(model: GraphModel, support: Sequence[str] | None = None, cap: int = DEFAULT_SWAP_PATH_CAP) -> list[GraphSwap]:
    """Nonzero conjugations of path pairs at shared interior nodes, up to sign."""
    g = model.dag
    if support is None:
        count = g.count_paths()
        if count > cap:
            raise PathCapExceeded(count, cap)
        paths = model.paths()
        allowed = None
    else:
        paths = sorted({model.key_path(k) for k in support})
        if len(paths) > cap:
            raise PathCapExceeded(len(paths), cap)
        allowed = set(paths)
    node_sets = {p: g.path_nodes(p)[1:-1] for p in paths}
    seen, out = set(), []
    for p, q in combinations(paths, 2):
        shared = [n for n in node_sets[p] if n in set(node_sets[q])]
        for n in shared:
            c1, c2 = path_conjugates(g, p, q, n)
            if {c1, c2} == {p, q}:
                continue
            if allowed is not None and (c1 not in allowed or c2 not in allowed):
                continue
            plus = tuple(sorted((model.path_key(c1), model.path_key(c2))))
            minus = tuple(sorted((model.path_key(p), model.path_key(q))))
            key = min((plus, minus), (minus, plus))
            if key in seen:
                continue
            seen.add(key)
            out.append(GraphSwap(minus, plus, str(n)))
    return out


@dataclass
class GraphBasis:
    keys: list[str]
    vectors: list[dict[str, Fraction]]
    _space: RowSpace

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def contains(self, m: Mapping[str, Fraction]) -> bool:
        index = {k: i for i, k in enumerate(self.keys)}
        vec = {}
        for k, w in m.items():
            if not w:
                continue
            if k not in index:
                return False
            vec[index[k]] = Fraction(w)
        return self._space.contains(vec)


def graph_basis(model: GraphModel, support: Sequence[str] | None = None, cap: int = DEFAULT_SWAP_PATH_CAP) -> GraphBasis:
    keys = sorted(model.path_key(p) for p in model.paths()) if support is None else sorted(set(support))
    index = {k: i for i, k in enumerate(keys)}
    space = RowSpace()
    for s in graph_swaps(model, support, cap):
        space.add({index[k]: w for k, w in s.measure().items()})
    vectors = [{keys[i]: w for i, w in sorted(v.items())} for v in space.canonical_basis()]
    return GraphBasis(keys, vectors, space)


def graph_equiv(model: GraphModel, mu: Mapping[str, Fraction], nu: Mapping[str, Fraction]) -> bool:
    """Observational equivalence read off the induced flows."""
    return model.flow_of(mu) == model.flow_of(nu)


@dataclass
class GraphRationalization:
    ok: bool
    flow: QuasiFlow
    witness: dict[str, Fraction] | None
    problem: str | None = None


def graph_rationalize(model: GraphModel, f: QuasiFlow) -> GraphRationalization:
    report = validate_quasiflow(model.dag, f, unit=True)
    if not report.ok:
        v = report.first
        return GraphRationalization(False, f, None, f"{v.kind} at {v.where}: {v.detail}")
    return GraphRationalization(True, f, model.to_measure(decompose_greedy(model.dag, f)))


def graph_swap_progressive(model: GraphModel, f: QuasiFlow, order: Sequence[str]) -> dict[str, Fraction]:
    return model.to_measure(swap_progressive(model.dag, f, model.edge_order(order)))


def graph_bounds(model: GraphModel, f: QuasiFlow, functional: Mapping[str, Fraction], support: Sequence[str] | None = None):
    keys = [model.path_key(p) for p in model.paths()] if support is None else list(support)
    paths = [model.key_path(k) for k in keys]
    res = dag_bounds(model.dag, f, paths, {model.key_path(k): Fraction(w) for k, w in functional.items()})
    res.argmin = model.to_measure(res.argmin)
    res.argmax = model.to_measure(res.argmax)
    return res


def graph_extreme_points(model: GraphModel, f: QuasiFlow, support: Sequence[str] | None = None, cap: int = 64) -> list[dict[str, Fraction]]:
    keys = [model.path_key(p) for p in model.paths()] if support is None else list(support)
    pts = dag_extreme_points(model.dag, f, [model.key_path(k) for k in keys], cap)
    return sorted((model.to_measure(pt) for pt in pts), key=lambda m: tuple(m))


def graph_is_extreme(model: GraphModel, mu: Mapping[str, Fraction]) -> bool:
    return paths_independent(model.dag, [model.key_path(k) for k, w in mu.items() if w])


# ---------------------------------------------------------------------------
# random choice over a menu collection


def check_sigma(u: Universe, sigma: Sequence[str]) -> list[str]:
    if not sigma:
        raise ChoiceError("menu collection must be nonempty")
    menus = [u.menu_key(m) for m in sigma]
    if len(set(menus)) != len(menus):
        raise ChoiceError("menu collection lists a menu twice")
    return menus


def build_rc_graph(u: Universe, sigma: Sequence[str]) -> GraphModel:
    """Chain graph with one layer per menu and one parallel edge per member.

    Paths are choice functions on the collection, keyed by the concatenated
    choices in collection order.
    """
    menus = check_sigma(u, sigma)
    nodes = [f"L{i}" for i in range(len(menus) + 1)]
    edges, edge_of, edge_alt = [], {}, {}
    for i, menu in enumerate(menus):
        for x in menu:
            eid = len(edges)
            edges.append(Edge(eid, nodes[i], nodes[i + 1]))
            edge_of[(i, x)] = eid
            edge_alt[eid] = x
    dag = Dag(nodes, edges, nodes[0], nodes[-1])

    def key_path(k: str) -> Path:
        if len(k) != len(menus) or any(x not in m for x, m in zip(k, menus)):
            raise ChoiceError(f"{k!r} is not a choice function on the collection")
        return tuple(edge_of[(i, x)] for i, x in enumerate(k))

    model = GraphModel("rc", dag, edge_alt, lambda p: "".join(edge_alt[e] for e in p), key_path)
    model.sigma = menus  # type: ignore[attr-defined]
    model.edge_of = edge_of  # type: ignore[attr-defined]
    return model


def rc_flow(model: GraphModel, rule: Mapping[str, Mapping[str, Fraction]], u: Universe) -> QuasiFlow:
    """``f(edge for x in layer i) = rho(x, A_i)``; the rule is validated on the collection."""
    from .choicecore import validate_rule

    rule = validate_rule(u, rule, model.sigma)  # type: ignore[attr-defined]
    return {eid: rule[model.sigma[i]][x] for (i, x), eid in model.edge_of.items()}  # type: ignore[attr-defined]


def rc_phi(model: GraphModel, mu: Mapping[str, Fraction]) -> dict[str, dict[str, Fraction]]:
    out = {m: {x: Fraction(0) for x in m} for m in model.sigma}  # type: ignore[attr-defined]
    for k, w in mu.items():
        for m, x in zip(model.sigma, k):  # type: ignore[attr-defined]
            out[m][x] += Fraction(w)
    return out


def rational_choice_function(model: GraphModel, pref: str) -> str:
    """Encode a preference as the choice function picking its best member of each menu."""
    return "".join(next(x for x in pref if x in m) for m in model.sigma)  # type: ignore[attr-defined]


def rc_swaps(model: GraphModel, support: Sequence[str] | None = None, cap: int = DEFAULT_SWAP_PATH_CAP) -> list[GraphSwap]:
    """Exchange the choices of two choice functions on one menu."""
    if support is None:
        count = model.dag.count_paths()
        if count > cap:
            raise PathCapExceeded(count, cap)
        keys = sorted(model.path_key(p) for p in model.paths())
    else:
        keys = sorted(set(support))
    allowed = set(keys)
    seen, out = set(), []
    for c1, c2 in combinations(keys, 2):
        for i in range(len(c1)):
            if c1[i] == c2[i]:
                continue
            d1 = c1[:i] + c2[i] + c1[i + 1 :]
            d2 = c2[:i] + c1[i] + c2[i + 1 :]
            if {d1, d2} == {c1, c2} or d1 not in allowed or d2 not in allowed:
                continue
            plus, minus = tuple(sorted((d1, d2))), tuple(sorted((c1, c2)))
            key = min((plus, minus), (minus, plus))
            if key not in seen:
                seen.add(key)
                out.append(GraphSwap(minus, plus, f"menu:{model.sigma[i]}"))  # type: ignore[attr-defined]
    return out


# ---------------------------------------------------------------------------
# dynamic discrete choice


@dataclass
class DdcData:
    alternatives: list[str]
    horizon: int
    rho1: dict[str, Fraction]
    cond: list[dict[str, dict[str, Fraction]]]  # cond[t-2][x][y] = rho_t(y | x)


def build_ddc_graph(u: Universe, horizon: int, evolution: Callable[[int, str | None], str] | None = None) -> GraphModel:
    """Layered graph ``src -> t:x -> ... -> snk``; paths are choice sequences.

    ``evolution(t, previous_choice)`` returns the menu available in period
    ``t`` (``previous_choice`` is None for t = 1).  The default keeps the
    whole universe available in every period.
    """
    if horizon < 1:
        raise ChoiceError("horizon must be at least 1")
    xs = list(u.labels)
    menu_at = evolution or (lambda _t, _x: u.key)
    nodes = ["src"] + [f"{t}:{x}" for t in range(1, horizon + 1) for x in xs] + ["snk"]
    edges, edge_alt = [], {}
    ends: dict[tuple[str, str], int] = {}

    def add(tail: str, head: str, alt: str) -> None:
        eid = len(edges)
        edges.append(Edge(eid, tail, head))
        edge_alt[eid] = alt
        ends[(tail, head)] = eid

    reached = sorted(set(menu_at(1, None)))
    for x in reached:
        add("src", f"1:{x}", x)
    for t in range(2, horizon + 1):
        nxt: set[str] = set()
        for x in reached:
            for y in sorted(set(menu_at(t, x))):
                add(f"{t - 1}:{x}", f"{t}:{y}", y)
                nxt.add(y)
        reached = sorted(nxt)
    for x in reached:
        add(f"{horizon}:{x}", "snk", x)
    used = {e.tail for e in edges} | {e.head for e in edges}
    dag = Dag([n for n in nodes if n in used], edges, "src", "snk")

    def key_path(k: str) -> Path:
        if len(k) != horizon or any(x not in xs for x in k):
            raise ChoiceError(f"{k!r} is not a choice sequence of length {horizon}")
        seq = ["src"] + [f"{t + 1}:{x}" for t, x in enumerate(k)] + ["snk"]
        try:
            return tuple(ends[(a, b)] for a, b in zip(seq, seq[1:]))
        except KeyError:
            raise ChoiceError(f"{k!r} leaves the available menus") from None

    def path_key(p: Path) -> str:
        return "".join(dag.edges[e].head.split(":")[1] for e in p[:-1])

    model = GraphModel("ddc", dag, edge_alt, path_key, key_path)
    model.ends = ends  # type: ignore[attr-defined]
    model.horizon = horizon  # type: ignore[attr-defined]
    model.fixed_menu = evolution is None  # type: ignore[attr-defined]
    return model


def validate_ddc(u: Universe, d: DdcData) -> None:
    if list(d.alternatives) != list(u.labels):
        raise ChoiceError("DDC alternatives must match the universe")
    if len(d.cond) != d.horizon - 1:
        raise ChoiceError(f"need {d.horizon - 1} conditional tables, got {len(d.cond)}")
    if any(Fraction(w) < 0 for w in d.rho1.values()) or sum(map(Fraction, d.rho1.values()), Fraction(0)) != 1:
        raise ChoiceError("first-period probabilities must be nonnegative and sum to 1")


def ddc_flow(model: GraphModel, d: DdcData, u: Universe) -> QuasiFlow:
    """Unconditional segment frequencies; rows for unreached choices must be all zero."""
    validate_ddc(u, d)
    if not getattr(model, "fixed_menu", False):
        raise ChoiceError("DDC flows are only defined for the fixed-menu graph")
    if d.horizon != model.horizon:  # type: ignore[attr-defined]
        raise ChoiceError(f"data horizon {d.horizon} does not match graph horizon {model.horizon}")  # type: ignore[attr-defined]
    ends = model.ends  # type: ignore[attr-defined]
    xs = list(u.labels)
    f: QuasiFlow = {}
    reach = {x: Fraction(d.rho1.get(x, 0)) for x in xs}
    for x in xs:
        f[ends[("src", f"1:{x}")]] = reach[x]
    for t in range(2, d.horizon + 1):
        table = d.cond[t - 2]
        nxt = {y: Fraction(0) for y in xs}
        for x in xs:
            row = {y: Fraction(table.get(x, {}).get(y, 0)) for y in xs}
            if any(v < 0 for v in row.values()):
                raise ChoiceError(f"negative conditional probability at period {t} given {x}")
            total = sum(row.values(), Fraction(0))
            if reach[x] > 0 and total != 1:
                raise ChoiceError(f"period {t} row given {x} does not sum to 1")
            if reach[x] == 0 and total != 0:
                raise ChoiceError(f"period {t} row given unreached {x} must be all zero")
            for y in xs:
                v = row[y] * reach[x]
                f[ends[(f"{t - 1}:{x}", f"{t}:{y}")]] = v
                nxt[y] += v
        reach = nxt
    for x in xs:
        f[ends[(f"{d.horizon}:{x}", "snk")]] = reach[x]
    return f


def ddc_phi(mu: Mapping[str, Fraction], u: Universe, horizon: int) -> DdcData:
    """Conditional choice tables generated by a distribution over sequences.

    This is the brute-force observable map used as an oracle: it never
    touches the graph.
    """
    xs = list(u.labels)
    rho1 = {x: Fraction(0) for x in xs}
    pair = [{(x, y): Fraction(0) for x in xs for y in xs} for _ in range(horizon - 1)]
    for k, w in mu.items():
        rho1[k[0]] += Fraction(w)
        for t in range(horizon - 1):
            pair[t][(k[t], k[t + 1])] += Fraction(w)
    cond = []
    for t in range(horizon - 1):
        table = {}
        for x in xs:
            reach = sum((pair[t][(x, y)] for y in xs), Fraction(0))
            table[x] = {y: (pair[t][(x, y)] / reach if reach else Fraction(0)) for y in xs}
        cond.append(table)
    # conditional tables alone lose the reach of each state; the reach is
    # recovered from rho1 and earlier tables, so (rho1, cond) is the full record
    return DdcData(xs, horizon, rho1, cond)


def ddc_tables_equal(a: DdcData, b: DdcData) -> bool:
    return a.rho1 == b.rho1 and a.cond == b.cond


# ---------------------------------------------------------------------------
# frame-dependent model (two frames)


def truncated_preferences(u: Universe) -> list[str]:
    """Keys ``"<framed prefix>|<non-framed>"``, e.g. ``"ab|a"``.

    The framed prefix lists distinct alternatives; the final non-framed
    alternative must already occur in the prefix.
    """
    out = []
    for j in range(1, u.size + 1):
        for prefix in permutations(u.labels, j):
            for z in prefix:
                out.append("".join(prefix) + "|" + z)
    return sorted(out)


def parse_truncated(u: Universe, key: str) -> tuple[str, str]:
    prefix, sep, z = key.partition("|")
    if not sep or len(z) != 1 or not prefix or len(set(prefix)) != len(prefix) or z not in prefix or not set(prefix) <= set(u.labels):
        raise ChoiceError(f"{key!r} is not a truncated preference")
    return prefix, z


def fd_choice(key_prefix: str, z: str, recommended: str) -> str:
    """The alternative chosen under recommendation set ``recommended``."""
    for y in key_prefix:
        if y in recommended:
            return y
    return z


def recommendation_sets(u: Universe) -> list[str]:
    out = [""]
    for r in range(1, u.size + 1):
        out.extend("".join(c) for c in combinations(u.labels, r))
    return sorted(out)


def fd_phi(mu: Mapping[str, Fraction], u: Universe) -> dict[str, dict[str, Fraction]]:
    """Frame-dependent choice probabilities for every recommendation set."""
    out = {a: {x: Fraction(0) for x in u.labels} for a in recommendation_sets(u)}
    for k, w in mu.items():
        prefix, z = parse_truncated(u, k)
        for a in out:
            out[a][fd_choice(prefix, z, a)] += Fraction(w)
    return out


def fd_swaps(u: Universe, support: Sequence[str] | None = None) -> list[tuple[tuple[str, str], tuple[str, str], int]]:
    """Exchange k-initial segments of truncated preferences sharing their k-best set."""
    keys = truncated_preferences(u) if support is None else sorted(set(support))
    allowed = set(keys)

    def seq(k: str) -> list[str]:
        prefix, z = parse_truncated(u, k)
        return [y + "F" for y in prefix] + [z + "N"]

    def unseq(s: list[str]) -> str:
        return "".join(x[0] for x in s[:-1]) + "|" + s[-1][0]

    seen, out = set(), []
    for p, q in combinations(keys, 2):
        sp, sq = seq(p), seq(q)
        for k in range(1, min(len(sp), len(sq))):
            if set(sp[:k]) != set(sq[:k]) or sp[:k] == sq[:k]:
                continue
            c1, c2 = unseq(sq[:k] + sp[k:]), unseq(sp[:k] + sq[k:])
            if {c1, c2} == {p, q} or c1 not in allowed or c2 not in allowed:
                continue
            plus, minus = tuple(sorted((c1, c2))), tuple(sorted((p, q)))
            key = min((plus, minus), (minus, plus))
            if key not in seen:
                seen.add(key)
                out.append((minus, plus, k))
    return out


def build_fd_graph(u: Universe) -> GraphModel:
    """Nodes are framed sets plus ``sink``.  From framed set A, the edge for
    ``x`` in A drops the frame from x; the edge for ``x`` outside A exits to
    the sink, meaning x is chosen once nothing framed ranks above it."""
    subsets = recommendation_sets(u)
    nodes = sorted(subsets, key=lambda s: (-len(s), s)) + ["sink"]
    edges, edge_alt, edge_of = [], {}, {}
    for a in nodes[:-1]:
        for x in u.labels:
            eid = len(edges)
            head = a.replace(x, "") if x in a else "sink"
            edges.append(Edge(eid, a, head))
            edge_alt[eid] = x
            edge_of[(a, x)] = eid
    dag = Dag(nodes, edges, u.key, "sink")

    def key_path(k: str) -> Path:
        prefix, z = parse_truncated(u, k)
        a, path = u.key, []
        for y in prefix:
            path.append(edge_of[(a, y)])
            a = a.replace(y, "")
        path.append(edge_of[(a, z)])
        return tuple(path)

    def path_key(p: Path) -> str:
        alts = [edge_alt[e] for e in p]
        return "".join(alts[:-1]) + "|" + alts[-1]

    model = GraphModel("fd", dag, edge_alt, path_key, key_path)
    model.edge_of = edge_of  # type: ignore[attr-defined]
    return model


def fd_flow(model: GraphModel, rule: Mapping[str, Mapping[str, Fraction]], u: Universe) -> QuasiFlow:
    """``y(x, A) = sum over B containing A with the same x-membership of (-1)^|B\\A| rho(x, B)``."""
    canon: dict[str, dict[str, Fraction]] = {}
    for a, row in rule.items():
        key = "".join(sorted(a))
        if not set(key) <= set(u.labels):
            raise ChoiceError(f"recommendation set {a!r} is not a subset of the universe")
        vals = {x: Fraction(row.get(x, 0)) for x in u.labels}
        if any(v < 0 for v in vals.values()) or sum(vals.values(), Fraction(0)) != 1:
            raise ChoiceError(f"probabilities under recommendation {key!r} must be nonnegative and sum to 1")
        canon[key] = vals
    for a in recommendation_sets(u):
        if a not in canon:
            raise ChoiceError(f"frame-dependent rule is missing recommendation set {a!r}")
    f: QuasiFlow = {}
    for (a, x), eid in model.edge_of.items():  # type: ignore[attr-defined]
        rest = [y for y in u.labels if y not in a and y != x]
        total = Fraction(0)
        for r in range(len(rest) + 1):
            for extra in combinations(rest, r):
                b = "".join(sorted(a + "".join(extra)))
                total += (-1) ** r * canon[b][x]
        f[eid] = total
    return f


def product_count(sigma: Sequence[str]) -> int:
    n = 1
    for m in sigma:
        n *= len(m)
    return n


def all_choice_functions(sigma: Sequence[str]) -> list[str]:
    return ["".join(c) for c in product(*sigma)]
