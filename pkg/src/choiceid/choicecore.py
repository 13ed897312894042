"""Preferences, menus, choice rules and the map from preference distributions to choice rules.

Alternatives are single-character labels.  A preference is the string of all
labels in descending order (``"abcd"`` means a over b over c over d), and a menu
is the sorted string of its members.  Distributions and signed measures are
plain ``dict[str, Fraction]`` keyed by preference; choice rules are
``dict[menu, dict[alternative, Fraction]]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterable, Mapping

Preference = str
Menu = str
Measure = dict[str, Fraction]
ChoiceRule = dict[str, dict[str, Fraction]]

DEFAULT_MAX_ALTERNATIVES = 8


class ChoiceError(ValueError):
    """Raised on malformed preferences, menus, measures or rules."""


class SizeCapExceeded(ChoiceError):
    """A universe is larger than the configured cap."""


@dataclass(frozen=True)
class Universe:
    """A finite set of alternatives, stored sorted."""

    labels: tuple[str, ...]

    def __init__(self, labels: Iterable[str], *, max_size: int = DEFAULT_MAX_ALTERNATIVES) -> None:
        labs = tuple(sorted(labels))
        if not labs:
            raise ChoiceError("a universe needs at least one alternative")
        for lab in labs:
            if not isinstance(lab, str) or len(lab) != 1:
                raise ChoiceError(f"alternative labels must be single characters, got {lab!r}")
        if len(set(labs)) != len(labs):
            raise ChoiceError("alternative labels must be distinct")
        if len(labs) > max_size:
            raise SizeCapExceeded(f"universe of size {len(labs)} exceeds the cap {max_size}; raise the cap explicitly")
        object.__setattr__(self, "labels", labs)

    @classmethod
    def of(cls, spec: str | Iterable[str], **kwargs) -> "Universe":
        return cls(list(spec), **kwargs)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def key(self) -> str:
        return "".join(self.labels)

    def preferences(self) -> list[Preference]:
        return ["".join(p) for p in permutations(self.labels)]

    def menus(self) -> list[Menu]:
        """All nonempty menus, sorted by key."""
        out = []
        for r in range(1, self.size + 1):
            out.extend("".join(c) for c in combinations(self.labels, r))
        return sorted(out)

    def check_preference(self, p: str) -> Preference:
        if not isinstance(p, str) or len(p) != self.size or set(p) != set(self.labels):
            raise ChoiceError(f"{p!r} is not a preference over {self.key!r}")
        return p

    def menu_key(self, members: Iterable[str]) -> Menu:
        m = "".join(sorted(set(members)))
        if not m:
            raise ChoiceError("menus must be nonempty")
        if not set(m) <= set(self.labels):
            raise ChoiceError(f"menu {m!r} is not a subset of {self.key!r}")
        return m


def best_in(p: Preference, menu: str) -> str:
    """The top-ranked member of ``menu`` under ``p``."""
    for x in p:
        if x in menu:
            return x
    raise ChoiceError(f"menu {menu!r} shares nothing with {p!r}")


def validate_measure(u: Universe, m: Mapping[str, Fraction], *, probability: bool = False) -> Measure:
    """Check keys are preferences; drop zeros.  Optionally require a distribution."""
    out: Measure = {}
    for p, w in m.items():
        u.check_preference(p)
        w = Fraction(w)
        if w != 0:
            out[p] = w
    if probability:
        if any(w < 0 for w in out.values()):
            raise ChoiceError("probability masses must be nonnegative")
        if sum(out.values(), Fraction(0)) != 1:
            raise ChoiceError("probability masses must sum to exactly 1")
    return dict(sorted(out.items()))


def validate_rule(u: Universe, rho: Mapping[str, Mapping[str, Fraction]], menus: Iterable[str] | None = None) -> ChoiceRule:
    """Check a choice rule covers ``menus`` (default: every menu) and sums to one."""
    wanted = u.menus() if menus is None else [u.menu_key(m) for m in menus]
    canon = {u.menu_key(k): v for k, v in rho.items()}
    out: ChoiceRule = {}
    for menu in wanted:
        if menu not in canon:
            raise ChoiceError(f"choice rule is missing menu {menu!r}")
        row = {}
        for x, w in canon[menu].items():
            w = Fraction(w)
            if x not in menu:
                if w != 0:
                    raise ChoiceError(f"positive probability on {x!r} outside menu {menu!r}")
                continue
            if not 0 <= w <= 1:
                raise ChoiceError(f"probability of {x!r} in {menu!r} is outside [0, 1]")
            row[x] = w
        if sum(row.values(), Fraction(0)) != 1:
            raise ChoiceError(f"probabilities on menu {menu!r} do not sum to 1")
        out[menu] = {x: row.get(x, Fraction(0)) for x in menu}
    return dict(sorted(out.items()))


def phi(mu: Mapping[str, Fraction], u: Universe, menus: Iterable[str] | None = None) -> ChoiceRule:
    """Choice probabilities generated by a (signed) measure over preferences.

    Works for signed measures too, which is how swaps are shown to be
    invisible in the data.
    """
    menu_list = u.menus() if menus is None else sorted({u.menu_key(m) for m in menus})
    rule: ChoiceRule = {m: {x: Fraction(0) for x in m} for m in menu_list}
    for p, w in mu.items():
        if not w:
            continue
        for m in menu_list:
            rule[m][best_in(p, m)] += w
    return rule


def obs_equiv(mu: Mapping[str, Fraction], nu: Mapping[str, Fraction], u: Universe) -> bool:
    return phi(mu, u) == phi(nu, u)


def k_compatible(p: Preference, q: Preference, k: int) -> bool:
    if not 0 <= k <= len(p):
        raise ChoiceError(f"k={k} outside 0..{len(p)}")
    return set(p[:k]) == set(q[:k])


def nontrivially_k_compatible(p: Preference, q: Preference, k: int) -> bool:
    return k_compatible(p, q, k) and p[:k] != q[:k] and p[k:] != q[k:]


def conjugates(p: Preference, q: Preference, k: int) -> tuple[Preference, Preference]:
    """Exchange the bottom segments of a k-compatible pair."""
    if not k_compatible(p, q, k):
        raise ChoiceError(f"{p} and {q} are not {k}-compatible")
    return p[:k] + q[k:], q[:k] + p[k:]


def uniform(prefs: Iterable[Preference]) -> Measure:
    """Uniform distribution over a list (repeats accumulate mass)."""
    prefs = list(prefs)
    if not prefs:
        raise ChoiceError("cannot build a uniform distribution over nothing")
    w = Fraction(1, len(prefs))
    out: Measure = {}
    for p in prefs:
        out[p] = out.get(p, Fraction(0)) + w
    return out


def add_measures(a: Mapping[str, Fraction], b: Mapping[str, Fraction], scale: Fraction = Fraction(1)) -> Measure:
    """``a + scale * b`` with zero entries dropped."""
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k, Fraction(0)) + scale * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out
