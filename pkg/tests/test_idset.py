from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

import pytest

from choiceid.choicecore import ChoiceError, Universe, phi
from choiceid.idset import InfeasibleError, bounds, extreme_points, is_extreme, is_identifying_support
from choiceid.ordered import swap_progressive_rule
from oracles import EX1, EX1_ARGMAX, EX1_ARGMIN, EX1_SUPPORT, MONOTONE_EU, random_distribution

F = Fraction
U4 = Universe.of("abcd")


@pytest.mark.parametrize("method", ["ryser", "simplex"])
def test_first_example_bounds_exact(method):
    b = bounds(U4, {"abdc": F(1)}, base=EX1, method=method)
    assert (b.min, b.max) == (F(1, 4), F(5, 8))
    assert b.argmin == EX1_ARGMIN
    assert b.argmax == EX1_ARGMAX


def test_bounds_from_rule_match_bounds_from_base():
    via_rule = bounds(U4, {"abdc": F(1)}, rule=phi(EX1, U4))
    assert (via_rule.min, via_rule.max) == (F(1, 4), F(5, 8))


def test_bounds_needs_exactly_one_source():
    with pytest.raises(ChoiceError):
        bounds(U4, {"abdc": F(1)})
    with pytest.raises(ChoiceError):
        bounds(U4, {"abdc": F(1)}, base=EX1, rule=phi(EX1, U4))
    with pytest.raises(ChoiceError):
        bounds(U4, {"abdc": F(1)}, base=EX1, method="bogus")


@pytest.mark.parametrize("method", ["ryser", "simplex"])
def test_bounds_with_support_restriction(method):
    b = bounds(U4, {"abdc": F(1)}, base=EX1, support=EX1_SUPPORT, method=method)
    assert (b.min, b.max) == (F(1, 4), F(5, 8))
    narrow = bounds(U4, {"abdc": F(1)}, base=EX1_ARGMAX, support=["abdc", "bacd"], method=method)
    assert narrow.min == narrow.max == F(5, 8)


@pytest.mark.parametrize("method", ["ryser", "simplex"])
def test_infeasible_support_is_reported(method):
    with pytest.raises(InfeasibleError):
        bounds(U4, {"abdc": F(1)}, base=EX1, support=["abcd", "dcba"], method=method)


def test_ryser_and_simplex_agree_on_random_instances():
    rng = random.Random(17)
    prefs = U4.preferences()
    for _ in range(25):
        mu = random_distribution(rng, prefs, rng.randint(2, 8))
        functional = {p: F(rng.randint(-3, 3)) for p in rng.sample(prefs, 4)}
        a = bounds(U4, functional, base=mu, method="ryser")
        b = bounds(U4, functional, base=mu, method="simplex")
        assert (a.min, a.max) == (b.min, b.max)
        assert a.min <= sum(functional.get(p, 0) * w for p, w in mu.items()) <= a.max
        for opt in (a.argmin, a.argmax):
            assert phi(opt, U4) == phi(mu, U4)
            assert all(w >= 0 for w in opt.values())


@pytest.mark.parametrize("labels", ["a", "ab", "abc"])
def test_small_universes_are_point_identified(labels):
    u = Universe.of(labels)
    rng = random.Random(len(labels))
    prefs = u.preferences()
    for _ in range(30):
        mu = random_distribution(rng, prefs, rng.randint(1, len(prefs)))
        functional = {p: F(rng.randint(-5, 5)) for p in prefs}
        b = bounds(u, functional, rule=phi(mu, u))
        assert b.min == b.max


def test_first_example_support_is_not_identifying_but_subsets_are():
    assert not is_identifying_support(EX1_SUPPORT, U4)
    for sub in combinations(EX1_SUPPORT, 3):
        assert is_identifying_support(list(sub), U4)


def test_monotone_expected_utility_support_is_identifying():
    assert is_identifying_support(MONOTONE_EU, U4)


def test_full_domain_not_identifying_for_four_alternatives():
    assert not is_identifying_support(U4.preferences(), U4)
    assert is_identifying_support(Universe.of("abc").preferences(), Universe.of("abc"))


def test_extreme_point_checks_on_first_example():
    assert not is_extreme(EX1, EX1_SUPPORT, U4)
    assert is_extreme(EX1_ARGMIN, EX1_SUPPORT, U4)
    assert is_extreme(EX1_ARGMAX, EX1_SUPPORT, U4)
    with pytest.raises(ChoiceError):
        is_extreme(EX1, ["abcd"], U4)


def test_extreme_points_of_first_example_are_the_two_vertices():
    pts = extreme_points(phi(EX1, U4), EX1_SUPPORT, U4)
    assert pts == sorted([EX1_ARGMIN, EX1_ARGMAX], key=lambda m: tuple(m))


def test_extreme_points_respect_cap_and_feasibility():
    with pytest.raises(ChoiceError):
        extreme_points(phi(EX1, U4), U4.preferences(), U4, cap=3)
    with pytest.raises(InfeasibleError):
        extreme_points(phi(EX1, U4), ["abcd", "dcba"], U4)


def test_extreme_points_are_vertices_of_identified_set():
    rng = random.Random(4)
    prefs = U4.preferences()
    for _ in range(10):
        mu = random_distribution(rng, prefs, 4)
        support = sorted(set(mu) | set(rng.sample(prefs, 4)))
        pts = extreme_points(phi(mu, U4), support, U4)
        assert pts
        for pt in pts:
            assert phi(pt, U4) == phi(mu, U4)
            assert is_extreme(pt, support, U4)


def test_swap_progressive_outputs_are_extreme():
    rng = random.Random(8)
    prefs = U4.preferences()
    for _ in range(60):
        mu = random_distribution(rng, prefs, rng.randint(1, 24))
        order = rng.sample("abcd", 4)
        out = swap_progressive_rule(phi(mu, U4), order, U4)
        assert is_extreme(out, list(out), U4)
