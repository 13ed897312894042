"""Exact rational linear algebra and a Bland's-rule simplex solver.

Everything here works on :class:`fractions.Fraction` so that ranks, nullspaces
and LP optima are exact.  Matrices are plain sequences of row sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Matrix = Sequence[Sequence[Fraction]]
SparseVec = dict[int, Fraction]


def parse_rational(value: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int into a Fraction.

    Floats are rejected; they would smuggle rounding error into exact code.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"expected an exact rational, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if not isinstance(value, str):
        raise ValueError(f"expected a rational string, got {type(value).__name__}")
    text = value.strip()
    if not text:
        raise ValueError("empty rational string")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {value!r}") from exc


def format_rational(q: Fraction | int) -> str:
    return str(Fraction(q))


def to_fraction_matrix(m: Iterable[Iterable[int | Fraction | str]]) -> list[list[Fraction]]:
    return [[parse_rational(x) for x in row] for row in m]


def rref(m: Matrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    rows = [[Fraction(x) for x in row] for row in m]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def _normalize_leading(v: list[Fraction]) -> list[Fraction]:
    lead = next((x for x in v if x != 0), None)
    if lead is None or lead == 1:
        return v
    return [x / lead for x in v]


def nullspace_basis(m: Matrix, ncols: int | None = None) -> list[list[Fraction]]:
    """Exact basis of the right nullspace, one vector per free column.

    Each vector is scaled so that its first nonzero entry is +1.  ``ncols`` is
    needed only when ``m`` has no rows.
    """
    if not m:
        if ncols is None:
            raise ValueError("ncols is required for an empty matrix")
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    width = len(m[0])
    reduced, pivots = rref(m)
    pivot_set = set(pivots)
    basis = []
    for free in range(width):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * width
        v[free] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            v[pc] = -row[free]
        basis.append(_normalize_leading(v))
    return basis


def mat_vec(m: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in m]


class RowSpace:
    """Incrementally maintained row space over the rationals.

    Vectors are sparse ``{column: value}`` dicts.  Stored rows are kept in
    echelon form (each row is zero on the pivots of earlier rows), which is all
    that membership testing needs.
    """

    def __init__(self) -> None:
        self._rows: list[tuple[int, SparseVec]] = []

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def dimension(self) -> int:
        return len(self._rows)

    def reduce(self, vec: Mapping[int, Fraction]) -> SparseVec:
        v = {k: Fraction(x) for k, x in vec.items() if x != 0}
        for pivot, row in self._rows:
            coef = v.get(pivot)
            if not coef:
                continue
            for k, x in row.items():
                nv = v.get(k, 0) - coef * x
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
        return v

    def add(self, vec: Mapping[int, Fraction]) -> bool:
        """Add ``vec``; return True if it enlarged the space."""
        v = self.reduce(vec)
        if not v:
            return False
        pivot = min(v)
        inv = 1 / v[pivot]
        self._rows.append((pivot, {k: x * inv for k, x in v.items()}))
        return True

    def contains(self, vec: Mapping[int, Fraction]) -> bool:
        return not self.reduce(vec)

    def copy(self) -> "RowSpace":
        other = RowSpace()
        other._rows = list(self._rows)
        return other

    def canonical_basis(self) -> list[SparseVec]:
        """Fully reduced basis, sorted by pivot; independent of insertion order."""
        rows = sorted(self._rows, key=lambda pr: pr[0])
        out: list[tuple[int, SparseVec]] = []
        for pivot, row in reversed(rows):
            v = dict(row)
            for p2, r2 in out:
                coef = v.get(p2)
                if coef:
                    for k, x in r2.items():
                        nv = v.get(k, 0) - coef * x
                        if nv:
                            v[k] = nv
                        else:
                            v.pop(k, None)
            out.append((pivot, v))
        out.reverse()
        return [v for _, v in out]


# ---------------------------------------------------------------------------
# Linear programming


@dataclass
class LpProblem:
    """``optimize c.x`` subject to ``A x = b``; variables in ``nonneg`` are >= 0.

    Variables not listed in ``nonneg`` are free.  ``nonneg=None`` means all
    variables are nonnegative.
    """

    objective: list[Fraction]
    a_eq: list[list[Fraction]]
    b_eq: list[Fraction]
    nonneg: set[int] | None = None

    def __post_init__(self) -> None:
        n = len(self.objective)
        if len(self.a_eq) != len(self.b_eq):
            raise ValueError("constraint rows and right-hand side differ in length")
        for row in self.a_eq:
            if len(row) != n:
                raise ValueError("constraint row length does not match variable count")
        if self.nonneg is not None and any(not 0 <= j < n for j in self.nonneg):
            raise ValueError("nonnegativity index out of range")

    @property
    def n_vars(self) -> int:
        return len(self.objective)


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    x: list[Fraction] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Dense simplex tableau for ``min c.x, A x = b, x >= 0`` with ``b >= 0``."""

    def __init__(self, a: list[list[Fraction]], b: list[Fraction]) -> None:
        self.a = a
        self.b = b
        self.basis: list[int] = []

    def pivot(self, r: int, c: int) -> None:
        a, b = self.a, self.b
        inv = 1 / a[r][c]
        if inv != 1:
            a[r] = [x * inv for x in a[r]]
            b[r] *= inv
        row_r, b_r = a[r], b[r]
        for i in range(len(a)):
            if i == r:
                continue
            f = a[i][c]
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], row_r)]
                b[i] -= f * b_r
        self.basis[r] = c

    def run(self, cost: list[Fraction], allowed: Sequence[bool]) -> str:
        """Bland's-rule primal simplex from the current basis."""
        n = len(cost)
        while True:
            cb = [cost[j] for j in self.basis]
            entering = None
            for j in range(n):
                if not allowed[j] or j in self.basis:
                    continue
                reduced = cost[j] - sum((cb[i] * self.a[i][j] for i in range(len(self.a))), Fraction(0))
                if reduced < 0:
                    entering = j
                    break
            if entering is None:
                return "optimal"
            best = None
            for i, row in enumerate(self.a):
                if row[entering] > 0:
                    ratio = self.b[i] / row[entering]
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], entering)


def _standard_form(p: LpProblem) -> tuple[list[list[Fraction]], list[Fraction], list[Fraction], list[tuple[int, int]]]:
    """Split free variables into differences of nonnegative ones."""
    nonneg = set(range(p.n_vars)) if p.nonneg is None else p.nonneg
    columns: list[tuple[int, int]] = []  # (original var, sign)
    for j in range(p.n_vars):
        columns.append((j, 1))
        if j not in nonneg:
            columns.append((j, -1))
    a = [[Fraction(row[j]) * s for j, s in columns] for row in p.a_eq]
    c = [Fraction(p.objective[j]) * s for j, s in columns]
    b = [Fraction(x) for x in p.b_eq]
    return a, b, c, columns


def lp_solve(p: LpProblem, sense: str = "min") -> LpResult:
    """Exact two-phase simplex with Bland's rule.

    Returns a vertex of the feasible region when an optimum exists.
    """
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    a, b, c, columns = _standard_form(p)
    if sense == "max":
        c = [-x for x in c]
    m, n = len(a), len(c)

    for i in range(m):
        if b[i] < 0:
            a[i] = [-x for x in a[i]]
            b[i] = -b[i]

    # phase 1: one artificial per row
    tab = _Tableau([row + [Fraction(int(i == k)) for k in range(m)] for i, row in enumerate(a)], list(b))
    tab.basis = list(range(n, n + m))
    phase1_cost = [Fraction(0)] * n + [Fraction(1)] * m
    tab.run(phase1_cost, [True] * (n + m))
    if sum((tab.b[i] for i in range(m) if tab.basis[i] >= n), Fraction(0)) != 0:
        return LpResult("infeasible")

    # drive remaining (zero-valued) artificials out, dropping redundant rows
    r = 0
    while r < len(tab.a):
        if tab.basis[r] >= n:
            col = next((j for j in range(n) if tab.a[r][j] != 0), None)
            if col is None:
                del tab.a[r], tab.b[r], tab.basis[r]
                continue
            tab.pivot(r, col)
        r += 1
    tab.a = [row[:n] for row in tab.a]

    status = tab.run(c, [True] * n)
    if status == "unbounded":
        return LpResult("unbounded")

    xs = [Fraction(0)] * n
    for i, j in enumerate(tab.basis):
        xs[j] = tab.b[i]
    x = [Fraction(0)] * p.n_vars
    for (j, s), val in zip(columns, xs):
        x[j] += s * val
    value = sum((Fraction(cj) * xj for cj, xj in zip(p.objective, x)), Fraction(0))
    return LpResult("optimal", value, x)
