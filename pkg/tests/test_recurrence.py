import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ergolab.abgroup import AbGroup
from ergolab.recurrence import density_scan, khintchine_scan, scan_elements, syndeticity_gap
from ergolab.systems import rotation_system

from _builders import cyclic_rotation


def _brute_corr(N, A, a, b, g):
    A = set(A)
    return Fraction(sum(1 for x in range(N) if all((x + c * g) % N in A for c in (0, a, b, a + b))), N)


def test_z5_example():
    rep = khintchine_scan(cyclic_rotation(5), [0, 1], 1, 2, 0.01)
    assert rep.bound == Fraction(39, 2500)
    assert rep.mu_A == Fraction(2, 5)
    for (g,), v in rep.correlations.items():
        assert v == _brute_corr(5, [0, 1], 1, 2, g)
    assert rep.good == [(0,)]
    assert rep.gap.covering_size == 5 and rep.gap.gap == 4
    assert rep.ergodic and not rep.exploratory


def test_zero_is_always_good():
    rng = random.Random(0)
    for _ in range(30):
        N = rng.randint(2, 20)
        A = rng.sample(range(N), rng.randint(0, N))
        a, b = rng.choice([(1, 2), (2, 3), (1, 3), (3, 5)])
        rep = khintchine_scan(cyclic_rotation(N), A, a, b, 0)
        assert (0,) in rep.good
        assert all(v <= rep.mu_A for v in rep.correlations.values())
        assert all(rep.correlations[g] >= rep.bound for g in rep.good)


@pytest.mark.parametrize("N", [4, 8, 17, 32, 64])
def test_half_interval_has_good_elements(N):
    A = list(range(N // 2))
    rep = khintchine_scan(cyclic_rotation(N), A, 1, 2, Fraction(1, 1000))
    assert rep.good
    assert rep.correlations == {(g,): _brute_corr(N, A, 1, 2, g) for g in range(N)}


def test_empty_set():
    rep = khintchine_scan(cyclic_rotation(6), [], 1, 2, Fraction(1, 100))
    assert len(rep.good) == 6 and rep.gap.gap == 0


def test_pattern_validation():
    X = cyclic_rotation(5)
    for a, b in ((0, 1), (1, 1), (2, -2), (1, 0)):
        with pytest.raises(ValueError):
            khintchine_scan(X, [0], a, b, 0)
    with pytest.raises(ValueError):
        khintchine_scan(X, [7], 1, 2, 0)


def test_index_preconditions_reported():
    K = AbGroup.from_moduli([3, 3])
    X = rotation_system(K, [(1, 0), (0, 1)], AbGroup(2))
    rep = khintchine_scan(X, [0, 1, 4], 1, 2, 0)
    assert not rep.exploratory
    assert scan_elements(X) == [(i, j) for i in range(3) for j in range(3)]
    T = rotation_system(AbGroup(0, (4,)), [(2,)], AbGroup(0, (4,)))
    rep = khintchine_scan(T, [0], 2, 3, 0)
    assert rep.preconditions["index_a"] == 2


def test_non_ergodic_aggregation():
    X = cyclic_rotation(12, 3)
    A = [0, 1, 4, 5, 10]
    rep = khintchine_scan(X, A, 1, 2, 0)
    assert not rep.ergodic and rep.aggregation_ok
    assert len(rep.components) == 3
    assert sum(c.mass for c in rep.components) == 1
    # mean of mu_i(A)^4 dominates mu(A)^4 by convexity
    assert rep.component_bound >= rep.mu_A ** 4


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 24), st.integers(1, 6), st.sets(st.integers(0, 23)))
def test_scan_matches_brute_force(N, step, A):
    A = sorted(x for x in A if x < N)
    X = cyclic_rotation(N, step)
    rep = khintchine_scan(X, A, 1, 2, Fraction(1, 50))
    for (g,), v in rep.correlations.items():
        assert v == _brute_corr(N, A, 1, 2, g * step)
    assert rep.aggregation_ok in (None, True)


def test_return_set():
    rep = khintchine_scan(cyclic_rotation(6), [0], 1, 2, 0)
    # T_g, T_2g, T_3g all trivial only for g = 0
    assert rep.return_set == [(0,)]


def test_syndeticity_gap_examples():
    G = AbGroup.cyclic(7)
    rep = syndeticity_gap(G.elements(), G)
    assert rep.gap == 0 and rep.covering_size == 1
    rep = syndeticity_gap(list(range(-10, 11, 2)))
    assert rep.gap == 2 and rep.kind == "Z-window" and rep.caveat
    rep = syndeticity_gap([], G)
    assert rep.gap == math.inf and rep.to_dict()["empty"]
    rep = syndeticity_gap([(0,), (3,)], AbGroup.cyclic(6))
    assert rep.covering_size == 3 and rep.cyclic_gap == 3


def test_covering_set_covers():
    rng = random.Random(3)
    for _ in range(20):
        N = rng.randint(2, 15)
        G = AbGroup.cyclic(N)
        good = [(x,) for x in rng.sample(range(N), rng.randint(1, N))]
        rep = syndeticity_gap(good, G)
        assert {(g[0] + c[0]) % N for g in good for c in rep.covering_set} == set(range(N))
        # a covering set needs at least N / |good| translates
        assert rep.covering_size * len(good) >= N


def test_density_scan_examples():
    Z = AbGroup(1)
    full = density_scan(Z, 40, lambda n: True, 1, 2, Fraction(1, 10))
    assert full.mu_A == 1 and len(full.good) == len(full.correlations)
    empty = density_scan(Z, 40, [], 1, 2, Fraction(1, 10))
    assert empty.mu_A == 0 and len(empty.good) == len(empty.correlations)
    evens = density_scan(Z, 40, lambda n: n % 2 == 0, 1, 2, Fraction(1, 100), g_values=range(0, 8))
    # the box window is [-40, 40], with 41 even points out of 81
    assert evens.mu_A == Fraction(41, 81)
    for (g,), v in evens.correlations.items():
        assert v == (Fraction(41, 81) if g % 2 == 0 else 0)
    assert "proxy" in evens.caveat


def test_density_scan_finite_group():
    G = AbGroup.cyclic(6)
    rep = density_scan(G, 1, [0, 2, 4], 1, 2, 0)
    assert rep.mu_A == Fraction(1, 2)
    assert rep.correlations[(2,)] == Fraction(1, 2) and rep.correlations[(1,)] == 0


def test_density_scan_random_set_is_seeded():
    Z = AbGroup(1)
    r1 = density_scan(Z, 60, ("random", 0.5), 1, 2, Fraction(1, 20), seed=4)
    r2 = density_scan(Z, 60, ("random", 0.5), 1, 2, Fraction(1, 20), seed=4)
    assert r1.correlations == r2.correlations and r1.mu_A == r2.mu_A
