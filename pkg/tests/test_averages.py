import math
import random
from fractions import Fraction

import numpy as np
import pytest

from ergolab.abgroup import AbGroup
from ergolab.averages import (characteristic_compare, fourier_u2, ghk_seminorm,
                              gowers_cubic_integral, kronecker_bound_check, multi_average,
                              torus_limit, torus_window_average, vdc_check, vector_family)
from ergolab.cocycles import counterexample_cocycle
from ergolab.phases import ExactComplex, Phase
from ergolab.systems import PointFunction, TrigPoly, abelian_extension, rotation_system, skew_product

from _builders import cyclic_rotation, random_rational_function, random_system

ALPHA, BETA = Phase.symbol("alpha"), Phase.symbol("beta")
SUBS = {"alpha": math.sqrt(2) - 1, "beta": math.sqrt(3) - 1}


def _chi(N, c=1):
    return PointFunction(tuple(ExactComplex.e(Phase(Fraction(c * x, N))) for x in range(N)))


def test_multi_average_examples():
    rng = random.Random(0)
    X = cyclic_rotation(7)
    f = random_rational_function(rng, 7)
    L = multi_average(X, (1,), [f]).limit
    assert L.equals(PointFunction.constant(7, X.mean(f)))
    Z5 = cyclic_rotation(5)
    chi = _chi(5)
    assert all(v.is_zero() for v in multi_average(Z5, (1, 2), [chi, chi]).limit)


def test_multi_average_counterexample_two_term():
    rho = counterexample_cocycle(2)
    Y, _ = abelian_extension(rho.system, rho.target, rho)
    one = PointFunction.constant(Y.n)
    for q in (Fraction(1, 2), Fraction(1, 4)):
        f2 = PointFunction(tuple(ExactComplex.e(Phase(q * u[0])) for _, u in Y.points))
        assert multi_average(Y, (1, 2), [one, f2]).limit.equals(f2)


def test_multi_average_rejects_bad_inputs():
    X = cyclic_rotation(3)
    f = PointFunction.constant(3)
    with pytest.raises(ValueError):
        multi_average(X, (0,), [f])
    with pytest.raises(ValueError):
        multi_average(X, (1, 2, 3, 4, 5), [f] * 5)


@pytest.mark.parametrize("seed", range(10))
def test_k1_average_is_invariant_projection(seed):
    rng = random.Random(seed)
    X = random_system(rng)
    f = random_rational_function(rng, X.n)
    assert multi_average(X, (1,), [f]).limit.equals(X.invariant_projection(f))


def test_finite_windows_attain_the_limit_on_finite_groups():
    rng = random.Random(1)
    X = cyclic_rotation(6)
    fs = [random_rational_function(rng, 6) for _ in range(2)]
    res = multi_average(X, (1, 2), fs, N_list=(12,), scheme="forward")
    # a forward window of length 12 covers two full periods of the orbit
    assert res.finite_N[0][1].equals(res.limit)


def test_brute_force_multi_average():
    rng = random.Random(2)
    X = cyclic_rotation(9, 2)
    fs = [random_rational_function(rng, 9) for _ in range(3)]
    L = multi_average(X, (1, 2, 3), fs).limit
    for x in range(9):
        s = sum(fs[0][(x + 2 * g) % 9] * fs[1][(x + 4 * g) % 9] * fs[2][(x + 6 * g) % 9] for g in range(9))
        assert L[x] == s * Fraction(1, 9)


def test_torus_scheme_independence_and_numeric():
    T = skew_product(ALPHA, BETA)
    fs = [TrigPoly.character((1, 0)), TrigPoly.character((-2, 0))]
    box = multi_average(T, (2, 1), fs, N_list=(50,), scheme="box", sample_points=[(0.1, 0.2)], subs=SUBS)
    shifted = multi_average(T, (2, 1), fs, N_list=(50,), scheme="shifted", sample_points=[(0.1, 0.2)], subs=SUBS)
    assert box.limit.equals(shifted.limit)
    # e(x + 2na) e(-2x - 2na) = e(-x): the limit is exactly e(-x)
    assert box.limit.equals(TrigPoly.character((-1, 0)))
    x = (0.3, 0.8)
    for scheme in ("forward", "box", "shifted"):
        v = torus_window_average(T, (2, 1), fs, 2000, x, SUBS, scheme)
        assert abs(v - box.limit.evaluate(x, SUBS)) < 1e-2


def test_torus_limit_weyl_vanishing():
    T = skew_product(ALPHA, BETA)
    # e(y) under T^n picks up the quadratic phase n(n-1)/2 alpha
    assert torus_limit(T, (1,), [TrigPoly.character((0, 1))]).terms == {}
    x = (0.3, 0.6)
    v = torus_window_average(T, (1,), [TrigPoly.character((0, 1))], 20000, x, SUBS)
    assert abs(v) < 2e-2


def test_seminorm_examples():
    X = cyclic_rotation(6)
    one = PointFunction.constant(6)
    for k in (1, 2, 3):
        assert ghk_seminorm(X, one, k) == 1
    rng = random.Random(3)
    f = random_rational_function(rng, 6)
    g = f - PointFunction.constant(6, X.mean(f))
    assert ghk_seminorm(X, g, 1) == 0


def test_u2_fourier_on_ergodic_z2_action():
    rng = random.Random(4)
    K = AbGroup(0, (2, 4))
    X = rotation_system(K, K.generators(), AbGroup(2))
    for _ in range(5):
        f = random_rational_function(rng, X.n)
        assert fourier_u2(X, f) == gowers_cubic_integral(X, f, 2)
        arr = np.array([float(v.as_fraction()) for v in f]).reshape(2, 4)
        coeffs = np.fft.fft2(arr) / 8
        assert abs(float(np.sum(np.abs(coeffs) ** 4)) - float(fourier_u2(X, f))) < 1e-12


@pytest.mark.parametrize("seed", range(12))
def test_seminorm_monotone(seed):
    rng = random.Random(40 + seed)
    X = random_system(rng)
    f = random_rational_function(rng, X.n)
    s = [ghk_seminorm(X, f, k) for k in (1, 2, 3)]
    # compare ||f||_{U^k} <= ||f||_{U^{k+1}} through exact powers: s_k^2 <= s_{k+1}
    for a, b in zip(s, s[1:]):
        assert a * a <= b


def test_vdc_examples():
    G = AbGroup.cyclic(5)
    v = np.array([1.0, 2.0, 0.5])
    rep = vdc_check(G, lambda g: v, ())
    r = rep.rows[0]
    assert math.isclose(r[1], float(v @ v)) and all(math.isclose(g.real, float(v @ v)) for g in rep.gammas.values())
    G, xs = vector_family("orthonormal", N=10)
    rep = vdc_check(G, xs, ())
    assert math.isclose(rep.rows[0][1], 0.1)
    assert all(abs(g) < 1e-12 for h, g in rep.gammas.items() if any(h))
    # finite groups: ||E x_g||^2 = E_h gamma_h exactly
    assert abs(rep.rows[0][3]) < 1e-12


def test_vdc_quadratic_weyl_sequence():
    a = math.sqrt(2) - 1
    N = 10**5
    n = np.arange(N, dtype=np.float64)
    vals = np.exp(2j * np.pi * ((a * n * n) % 1.0))
    assert abs(vals.mean()) < 0.05
    G, xs = vector_family("quadratic", seed=1)
    rep = vdc_check(G, xs, (128, 512))
    assert rep.passed and rep.rows[-1][1] < rep.rows[0][1] + 1e-9


def test_vdc_rejects_unsupported_group():
    with pytest.raises(ValueError):
        vdc_check(AbGroup(2), lambda g: [1.0], (4,))


def test_kronecker_bound_examples():
    X = cyclic_rotation(5)
    zero = PointFunction.constant(5, 0)
    chi = _chi(5)
    rep = kronecker_bound_check(X, 1, 2, zero, chi)
    assert rep.lhs == 0 and rep.passed
    f = chi - PointFunction.constant(5, X.mean(chi))
    rep = kronecker_bound_check(X, 1, 2, f, f)
    assert rep.passed and rep.limit_formula_ok
    with pytest.raises(ValueError):
        kronecker_bound_check(X, 2, 2, f, f)
    with pytest.raises(ValueError):
        kronecker_bound_check(cyclic_rotation(4, 2), 1, 2, PointFunction.constant(4), PointFunction.constant(4))


def test_characteristic_examples():
    rng = random.Random(6)
    X = cyclic_rotation(7)
    fs = [random_rational_function(rng, 7) for _ in range(3)]
    rep = characteristic_compare(X, 1, 2, fs)
    assert rep.exact_equal_two and rep.exact_equal_three
    assert rep.two_term_discrepancy == 0
    T = skew_product(ALPHA, BETA)
    fsT = [TrigPoly({(1, 0): 1, (0, 0): 2}), TrigPoly.character((0, 1)), TrigPoly.character((1, 1))]
    rep = characteristic_compare(T, 1, 2, fsT)
    assert rep.exact_equal_two and rep.exact_equal_three
    assert torus_limit(T, (1, 2), fsT[:2]).terms == {}


def test_characteristic_on_non_ergodic_system():
    rng = random.Random(7)
    X = cyclic_rotation(9, 3)
    fs = [random_rational_function(rng, 9) for _ in range(3)]
    rep = characteristic_compare(X, 1, 2, fs)
    assert rep.exact_equal_two and rep.exact_equal_three


def test_characteristic_index_precondition():
    with pytest.raises(ValueError):
        characteristic_compare(cyclic_rotation(5), 1, 1, [PointFunction.constant(5)] * 3)
