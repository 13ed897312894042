"""Identified sets: bounds on linear functionals, extreme-point tests and
enumeration, and identification under support restrictions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .choicecore import ChoiceError, ChoiceRule, Measure, Preference, Universe, phi, validate_measure, validate_rule
from .dag import Dag, Path, recompose
from .linalg import LpProblem, RowSpace, lp_solve, rank, rref
from .rum import build_rum_graph, bm_flow, is_rationalizable, pref_to_path
from .ryser import ryser_basis

DEFAULT_EXTREME_CAP = 64


class InfeasibleError(ChoiceError):
    """No distribution in the restriction reproduces the data."""


@dataclass
class Bounds:
    min: Fraction
    argmin: Measure
    max: Fraction
    argmax: Measure


def _value(functional: Mapping[str, Fraction], mu: Mapping[str, Fraction]) -> Fraction:
    return sum((Fraction(w) * Fraction(mu.get(p, 0)) for p, w in functional.items()), Fraction(0))


def _clean(v: dict) -> dict:
    return dict(sorted((k, w) for k, w in v.items() if w))


def _base_distribution(u: Universe, base: Mapping[str, Fraction] | None, rule: ChoiceRule | None) -> Measure:
    if (base is None) == (rule is None):
        raise ChoiceError("give exactly one of a base distribution or a choice rule")
    if base is not None:
        return validate_measure(u, base, probability=True)
    rat = is_rationalizable(rule, u)
    if not rat.ok:
        raise InfeasibleError("choice rule is not rationalizable by random utility")
    return rat.witness


def bounds(
    u: Universe,
    functional: Mapping[str, Fraction],
    *,
    base: Mapping[str, Fraction] | None = None,
    rule: ChoiceRule | None = None,
    support: Sequence[Preference] | None = None,
    method: str = "ryser",
    allow_large: bool = False,
) -> Bounds:
    """Exact min and max of ``sum_p w_p mu(p)`` over the identified set.

    ``method="ryser"`` optimises over coefficients of a Ryser basis around the
    base distribution; ``method="simplex"`` optimises directly over
    distributions matching the choice probabilities and serves as a cross-check.
    """
    functional = {u.check_preference(p): Fraction(w) for p, w in functional.items()}
    mu0 = _base_distribution(u, base, rule)
    allowed = set(u.preferences()) if support is None else {u.check_preference(p) for p in support}
    if not allowed:
        raise ChoiceError("support restriction must be nonempty")
    if method == "ryser":
        return _bounds_ryser(u, functional, mu0, allowed, allow_large)
    if method == "simplex":
        return _bounds_simplex(u, functional, mu0, allowed)
    raise ChoiceError(f"unknown bounds method {method!r}")


def _bounds_ryser(u: Universe, functional: Measure, mu0: Measure, allowed: set[str], allow_large: bool) -> Bounds:
    basis = ryser_basis(u, allow_large=allow_large)
    prefs = basis.preferences
    r = basis.dimension
    allowed_list = [p for p in prefs if p in allowed]
    slack_of = {p: r + i for i, p in enumerate(allowed_list)}
    n_vars = r + len(allowed_list)
    rows, rhs = [], []
    for p in prefs:
        row = [Fraction(0)] * n_vars
        for i, v in enumerate(basis.vectors):
            row[i] = v.get(p, Fraction(0))
        if p in slack_of:
            row[slack_of[p]] = Fraction(-1)  # mu0 + R alpha = slack >= 0
        rows.append(row)
        rhs.append(-mu0.get(p, Fraction(0)))
    obj = [_value(functional, v) for v in basis.vectors] + [Fraction(0)] * len(allowed_list)
    nonneg = set(range(r, n_vars))
    lp = LpProblem(obj, rows, rhs, nonneg)
    base_val = _value(functional, mu0)
    out = []
    for sense in ("min", "max"):
        res = lp_solve(lp, sense)
        if res.status == "infeasible":
            raise InfeasibleError("no distribution in the support restriction reproduces the data")
        if res.status == "unbounded":  # impossible: the identified set is a polytope
            raise ChoiceError("bounds problem is unbounded")
        mu = dict(mu0)
        for i, v in enumerate(basis.vectors):
            for p, w in v.items():
                mu[p] = mu.get(p, Fraction(0)) + res.x[i] * w
        out.append((base_val + res.value, _clean(mu)))
    return Bounds(out[0][0], out[0][1], out[1][0], out[1][1])


def _bounds_simplex(u: Universe, functional: Measure, mu0: Measure, allowed: set[str]) -> Bounds:
    prefs = sorted(allowed)
    rho = phi(mu0, u)
    rows, rhs = [], []
    for menu, probs in rho.items():
        for x, pr in probs.items():
            rows.append([Fraction(int(p[min(p.index(y) for y in menu)] == x)) for p in prefs])
            rhs.append(pr)
    rows.append([Fraction(1)] * len(prefs))
    rhs.append(Fraction(1))
    obj = [functional.get(p, Fraction(0)) for p in prefs]
    lp = LpProblem(obj, rows, rhs)
    out = []
    for sense in ("min", "max"):
        res = lp_solve(lp, sense)
        if res.status != "optimal":
            raise InfeasibleError("no distribution in the support restriction reproduces the data")
        out.append((res.value, _clean(dict(zip(prefs, res.x)))))
    return Bounds(out[0][0], out[0][1], out[1][0], out[1][1])


def dag_bounds(g: Dag, f: Mapping[int, Fraction], paths: Sequence[Path], functional: Mapping[Path, Fraction]) -> Bounds:
    """Bounds over all decompositions of ``f`` supported on ``paths``."""
    paths = sorted(set(paths))
    edges = sorted(g.edges)
    rows = [[Fraction(int(e in p)) for p in paths] for e in edges]
    rhs = [Fraction(f.get(e, 0)) for e in edges]
    obj = [Fraction(functional.get(p, 0)) for p in paths]
    lp = LpProblem(obj, rows, rhs)
    out = []
    for sense in ("min", "max"):
        res = lp_solve(lp, sense)
        if res.status != "optimal":
            raise InfeasibleError("flow has no decomposition on the given paths")
        out.append((res.value, _clean(dict(zip(paths, res.x)))))
    return Bounds(out[0][0], out[0][1], out[1][0], out[1][1])


def _indicator_rows(u: Universe, prefs: Sequence[Preference]) -> list[list[Fraction]]:
    g = build_rum_graph(u)
    n_edges = len(g.dag.edges)
    out = []
    for p in prefs:
        row = [Fraction(0)] * n_edges
        for e in pref_to_path(p, u):
            row[e] = Fraction(1)
        out.append(row)
    return out


def paths_independent(g: Dag, paths: Sequence[Path]) -> bool:
    edges = sorted(g.edges)
    rows = [[Fraction(int(e in p)) for e in edges] for p in paths]
    return rank(rows) == len(rows) if rows else True


def is_extreme(mu: Mapping[str, Fraction], support: Sequence[Preference], u: Universe) -> bool:
    """Extreme in its identified set iff the support's path indicators are independent."""
    allowed = {u.check_preference(p) for p in support}
    supp = [p for p, w in sorted(mu.items()) if w]
    outside = [p for p in supp if p not in allowed]
    if outside:
        raise ChoiceError(f"distribution puts mass outside the support restriction: {outside}")
    return rank(_indicator_rows(u, supp)) == len(supp) if supp else True


def is_identifying_support(support: Sequence[Preference], u: Universe) -> bool:
    prefs = sorted({u.check_preference(p) for p in support})
    if not prefs:
        raise ChoiceError("support restriction must be nonempty")
    return rank(_indicator_rows(u, prefs)) == len(prefs)


def _solve_on(rows_by_path: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Solve ``sum_j x_j col_j = rhs`` for independent columns; None if inconsistent."""
    m = len(rhs)
    aug = [[rows_by_path[j][i] for j in range(len(rows_by_path))] + [rhs[i]] for i in range(m)]
    red, pivots = rref(aug)
    k = len(rows_by_path)
    if k in pivots:
        return None
    x = [Fraction(0)] * k
    for row, pc in zip(red, pivots):
        x[pc] = row[k]
    return x


def dag_extreme_points(g: Dag, f: Mapping[int, Fraction], paths: Sequence[Path], cap: int = DEFAULT_EXTREME_CAP) -> list[dict[Path, Fraction]]:
    """Vertices of the decomposition polytope of ``f`` restricted to ``paths``.

    Every vertex has a linearly independent support, and each independent
    support carries at most one decomposition, so we walk independent subsets
    and keep the strictly positive solutions.  Paths through zero-flow edges
    are dropped first.
    """
    live = sorted({p for p in paths if all(f.get(e, 0) > 0 for e in p)})
    if len(live) > cap:
        raise ChoiceError(f"{len(live)} candidate paths exceed the cap of {cap}")
    edges = sorted(g.edges)
    cols = [[Fraction(int(e in p)) for e in edges] for p in live]
    rhs = [Fraction(f.get(e, 0)) for e in edges]
    found: list[tuple[tuple, dict]] = []

    def walk(start: int, chosen: list[int], space: RowSpace) -> None:
        if chosen:
            x = _solve_on([cols[j] for j in chosen], rhs)
            if x is not None and all(v > 0 for v in x):
                pt = {live[j]: v for j, v in zip(chosen, x)}
                found.append((tuple(sorted(pt)), pt))
        for j in range(start, len(live)):
            vec = {i: v for i, v in enumerate(cols[j]) if v}
            trial = space.copy()
            if trial.add(vec):
                walk(j + 1, chosen + [j], trial)

    if not any(rhs):
        return [{}]
    walk(0, [], RowSpace())
    found.sort(key=lambda t: t[0])
    return [pt for _, pt in found]


def extreme_points(rule: ChoiceRule, support: Sequence[Preference], u: Universe, cap: int = DEFAULT_EXTREME_CAP) -> list[Measure]:
    """All vertices of the identified set of ``rule`` within ``support``."""
    rule = validate_rule(u, rule)
    g = build_rum_graph(u)
    f = bm_flow(rule, u)
    if any(v < 0 for v in f.values()):
        raise InfeasibleError("choice rule is not rationalizable by random utility")
    prefs = sorted({u.check_preference(p) for p in support})
    path_of = {pref_to_path(p, u): p for p in prefs}
    pts = dag_extreme_points(g.dag, f, list(path_of), cap)
    if not pts:
        raise InfeasibleError("no distribution in the support restriction reproduces the data")
    out = [dict(sorted((path_of[p], w) for p, w in pt.items())) for pt in pts]
    out.sort(key=lambda m: tuple(m))
    return out


def check_decomposes(g: Dag, f: Mapping[int, Fraction], pi: Mapping[Path, Fraction]) -> bool:
    return recompose(g, pi) == {e: Fraction(f.get(e, 0)) for e in g.edges}
