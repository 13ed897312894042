"""Ryser swaps: enumeration, the spanned subspace, membership, explicit
swap sequences between decompositions, and rearrangements of preference sequences.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .choicecore import ChoiceError, Measure, Preference, Universe, add_measures, conjugates, k_compatible
from .dag import Dag, DagError, Decomposition, Node, Path, path_conjugates, recompose
from .linalg import RowSpace
from .rum import build_rum_graph, pref_to_path

FULL_ENUMERATION_LIMIT = 5  # larger universes need allow_large or a support


@dataclass(frozen=True)
class RyserSwap:
    """``1{plus} - 1{minus}`` where ``plus`` are the k-conjugates of ``minus``."""

    minus: tuple[Preference, Preference]
    plus: tuple[Preference, Preference]
    k: int

    def measure(self) -> Measure:
        m: Measure = {}
        for p in self.plus:
            m[p] = m.get(p, Fraction(0)) + 1
        for p in self.minus:
            m[p] = m.get(p, Fraction(0)) - 1
        return {p: w for p, w in sorted(m.items()) if w}

    def to_json(self) -> dict:
        return {"plus": list(self.plus), "minus": list(self.minus), "k": self.k}


def _sign_key(plus: tuple[str, str], minus: tuple[str, str]) -> tuple:
    a, b = tuple(sorted(plus)), tuple(sorted(minus))
    return min((a, b), (b, a))


def enumerate_swaps(
    u: Universe,
    support: Sequence[Preference] | None = None,
    *,
    nontrivial_only: bool = True,
    allow_large: bool = False,
) -> list[RyserSwap]:
    """All nonzero swaps, deduplicated up to sign and pair order.

    With ``support`` given, only pairs and conjugates inside it are used.
    A swap is the zero measure exactly when the pair is trivially compatible,
    so zero measures are always dropped and ``nontrivial_only`` is kept only
    for interface symmetry.
    """
    del nontrivial_only
    if support is None:
        if u.size > FULL_ENUMERATION_LIMIT and not allow_large:
            raise ChoiceError(f"full swap enumeration over {u.size} alternatives needs allow_large=True")
        if u.size > 6:
            raise ChoiceError("full swap enumeration is limited to six alternatives")
        prefs = u.preferences()
        allowed = None
    else:
        prefs = sorted({u.check_preference(p) for p in support})
        allowed = set(prefs)
    seen: set = set()
    out: list[RyserSwap] = []
    n = u.size
    for p, q in combinations(prefs, 2):
        for k in range(2, n - 1):
            if not k_compatible(p, q, k) or p[:k] == q[:k] or p[k:] == q[k:]:
                continue
            c1, c2 = conjugates(p, q, k)
            if allowed is not None and (c1 not in allowed or c2 not in allowed):
                continue
            key = _sign_key((c1, c2), (p, q))
            if key in seen:
                continue
            seen.add(key)
            out.append(RyserSwap((p, q), (c1, c2), k))
    return out


@dataclass
class RyserBasis:
    universe: Universe
    preferences: list[Preference]  # coordinate order
    vectors: list[Measure]
    _space: RowSpace

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def contains(self, m: Mapping[str, Fraction]) -> bool:
        index = {p: i for i, p in enumerate(self.preferences)}
        vec = {}
        for p, w in m.items():
            if not w:
                continue
            if p not in index:
                return False
            vec[index[p]] = Fraction(w)
        return self._space.contains(vec)


def ryser_basis(u: Universe, support: Sequence[Preference] | None = None, *, allow_large: bool = False) -> RyserBasis:
    """Exact basis of the span of all swaps, as fully reduced echelon rows."""
    prefs = u.preferences() if support is None else sorted(set(support))
    index = {p: i for i, p in enumerate(prefs)}
    space = RowSpace()
    for s in enumerate_swaps(u, support, allow_large=allow_large):
        space.add({index[p]: w for p, w in s.measure().items()})
    vectors = [{prefs[i]: w for i, w in sorted(v.items())} for v in space.canonical_basis()]
    return RyserBasis(u, prefs, vectors, space)


def in_ryser_span(m: Mapping[str, Fraction], u: Universe, basis: RyserBasis | None = None) -> bool:
    basis = basis or ryser_basis(u)
    return basis.contains(m)


# ---------------------------------------------------------------------------
# swap sequences between decompositions


@dataclass(frozen=True)
class PathSwap:
    """``1{plus} - 1{minus}`` on paths; ``plus`` are the conjugates of ``minus`` at ``node``."""

    minus: tuple[Path, Path]
    plus: tuple[Path, Path]
    node: Node


def apply_path_swaps(pi: Mapping[Path, Fraction], swaps: Sequence[tuple[Fraction, PathSwap]]) -> Decomposition:
    """Apply weighted swaps in order; raises if any intermediate mass goes negative."""
    cur = dict(pi)
    for c, s in swaps:
        for p in s.minus:
            cur[p] = cur.get(p, Fraction(0)) - c
            if cur[p] < 0:
                raise DagError("swap sequence drives a path mass negative")
        for p in s.plus:
            cur[p] = cur.get(p, Fraction(0)) + c
        cur = {p: w for p, w in cur.items() if w}
    return cur


def zipper_transform(g: Dag, pi_from: Mapping[Path, Fraction], pi_to: Mapping[Path, Fraction]) -> list[tuple[Fraction, PathSwap]]:
    """Positive-weight swaps carrying ``pi_from`` to ``pi_to``.

    One target path is peeled per outer round.  Within a round the target's
    prefix is extended edge by edge: when too little mass follows the prefix
    onto the next edge, paths that share the prefix but leave elsewhere are
    crossed with paths that use the edge without the prefix.  Both groups carry
    at least the missing mass, so proportional weights keep every mass
    nonnegative.
    """
    src = {p: Fraction(w) for p, w in pi_from.items() if w}
    dst = {p: Fraction(w) for p, w in pi_to.items() if w}
    if any(w < 0 for w in src.values()) or any(w < 0 for w in dst.values()):
        raise DagError("decompositions must be nonnegative")
    if recompose(g, src) != recompose(g, dst):
        raise DagError("the two decompositions induce different flows")

    swaps: list[tuple[Fraction, PathSwap]] = []
    res_from, res_to = dict(src), dict(dst)
    while res_to:
        target = min(res_to)
        need = res_to[target]
        nodes = g.path_nodes(target)
        for j in range(1, len(target)):
            prefix, e = target[:j], target[j]
            n = nodes[j]
            have = sum((w for p, w in res_from.items() if p[: j + 1] == target[: j + 1]), Fraction(0))
            deficit = need - have
            if deficit <= 0:
                continue
            u0 = {p: w for p, w in res_from.items() if p[:j] == prefix and p[j] != e}
            v0 = {}
            for p, w in res_from.items():
                if e in p and p[:j] != prefix:
                    v0[p] = w
            su, sv = sum(u0.values(), Fraction(0)), sum(v0.values(), Fraction(0))
            if su < deficit or sv < deficit:
                raise DagError("zipper invariant failed; inputs are inconsistent")
            for up, uw in sorted(u0.items()):
                for vp, vw in sorted(v0.items()):
                    c = uw * vw * deficit / (su * sv)
                    plus = path_conjugates(g, up, vp, n)
                    swap = PathSwap((up, vp), plus, n)
                    swaps.append((c, swap))
                    res_from = apply_path_swaps(res_from, [(c, swap)])
        if res_from.get(target, Fraction(0)) < need:
            raise DagError("zipper failed to route enough mass onto the target path")
        for res in (res_from, res_to):
            res[target] -= need
            if not res[target]:
                del res[target]
    if res_from:
        raise DagError("residual mass left after peeling every target path")
    return swaps


def path_swap_to_pref_swap(s: PathSwap, u: Universe) -> RyserSwap:
    from .rum import path_to_pref

    minus = tuple(path_to_pref(p, u) for p in s.minus)
    plus = tuple(path_to_pref(p, u) for p in s.plus)
    return RyserSwap(minus, plus, u.size - len(s.node))  # type: ignore[arg-type]


def zipper_preferences(u: Universe, mu_from: Mapping[str, Fraction], mu_to: Mapping[str, Fraction]) -> list[tuple[Fraction, RyserSwap]]:
    """Preference-level wrapper of :func:`zipper_transform` on the menu-lattice graph."""
    from .rum import dist_to_decomposition

    g = build_rum_graph(u)
    seq = zipper_transform(g.dag, dist_to_decomposition(mu_from, u), dist_to_decomposition(mu_to, u))
    return [(c, path_swap_to_pref_swap(s, u)) for c, s in seq]


def apply_swaps(mu: Mapping[str, Fraction], swaps: Sequence[tuple[Fraction, RyserSwap]]) -> Measure:
    cur = dict(mu)
    for c, s in swaps:
        cur = add_measures(cur, s.measure(), c)
        if any(w < 0 for w in cur.values()):
            raise ChoiceError("swap sequence drives a preference mass negative")
    return dict(sorted(cur.items()))


# ---------------------------------------------------------------------------
# rearrangements


def compatibility_blocks(seq: Sequence[Preference], k: int) -> list[list[int]]:
    """Indices of ``seq`` grouped by their top-k set, in first-appearance order."""
    groups: dict[frozenset, list[int]] = {}
    for i, p in enumerate(seq):
        groups.setdefault(frozenset(p[:k]), []).append(i)
    return list(groups.values())


class Rearrangement:
    """Per-level permutations ``sigma_1 .. sigma_N`` of sequence positions.

    ``sigmas[k-1][i]`` is the image of position ``i`` at level ``k``.  Level k
    may only permute positions within blocks of the (k-1)-compatibility
    partition of the input sequence; this is checked on construction.
    """

    def __init__(self, seq: Sequence[Preference], sigmas: Sequence[Sequence[int]]) -> None:
        self.seq = list(seq)
        n, depth = len(seq), len(seq[0]) if seq else 0
        if len(sigmas) != depth:
            raise ChoiceError(f"need {depth} level permutations, got {len(sigmas)}")
        self.sigmas = [tuple(s) for s in sigmas]
        for k, s in enumerate(self.sigmas, start=1):
            if sorted(s) != list(range(n)):
                raise ChoiceError(f"level {k} is not a permutation of {n} positions")
            for block in compatibility_blocks(self.seq, k - 1):
                if sorted(s[i] for i in block) != sorted(block):
                    raise ChoiceError(f"level {k} permutation moves a position out of its block {block}")

    @classmethod
    def from_swaps(cls, seq: Sequence[Preference], swaps: Mapping[int, Sequence[tuple[int, int]]]) -> "Rearrangement":
        """Build from transpositions per level, e.g. ``{3: [(0, 1)]}``."""
        n, depth = len(seq), len(seq[0])
        sigmas = []
        for k in range(1, depth + 1):
            s = list(range(n))
            for i, j in swaps.get(k, ()):
                s[i], s[j] = s[j], s[i]
            sigmas.append(s)
        return cls(seq, sigmas)


def apply_rearrangement(seq: Sequence[Preference], r: Rearrangement) -> list[Preference]:
    """Braid the sequence: output n takes its k-th entry from the strand
    ``tau_k^{-1}(n)`` where ``tau_k = tau_{k-1} o sigma_k``."""
    if list(seq) != r.seq:
        raise ChoiceError("rearrangement was built for a different sequence")
    n = len(seq)
    if n == 0:
        return []
    tau = list(range(n))
    out = [[] for _ in range(n)]
    for k, sigma in enumerate(r.sigmas):
        tau = [tau[sigma[i]] for i in range(n)]
        inv = [0] * n
        for i, t in enumerate(tau):
            inv[t] = i
        for pos in range(n):
            out[pos].append(seq[inv[pos]][k])
    result = ["".join(x) for x in out]
    for p in result:
        if len(set(p)) != len(p):
            raise ChoiceError(f"rearrangement produced an invalid preference {p}")
    return result


def rearrangement_equivalent(seq1: Sequence[Preference], seq2: Sequence[Preference], u: Universe) -> bool:
    """Equal summed edge indicators on the menu-lattice graph."""
    if len(seq1) != len(seq2):
        raise ChoiceError("sequences must have equal length")

    def mass(seq: Sequence[Preference]) -> dict[int, int]:
        m: dict[int, int] = {}
        for p in seq:
            for e in pref_to_path(p, u):
                m[e] = m.get(e, 0) + 1
        return m

    return mass(seq1) == mass(seq2)
