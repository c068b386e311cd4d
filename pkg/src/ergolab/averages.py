"""Multiple ergodic averages and uniformity seminorms.

On a finite system the Folner limit of E_g prod_i f_i(T_{a_i g} x) is the
uniform average over the finite image group K = {T_g}; it is attained, so all
finite answers are exact.  On torus systems the averages are expanded into
exponential sums of polynomial phases in n and evaluated by :func:`weyl_limit`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .abgroup import INFINITE, AbGroup, characters, folner_window, subgroup_index
from .phases import (ONE, ZERO, Cyclo, ExactComplex, Phase, PhasePolynomial, weyl_limit)
from .systems import (CUBE_CAP, FiniteSystem, PointFunction, TorusSystem, TrigPoly,
                      cubic_space, cubic_support_size, host_kra_projection,
                      host_kra_projection_torus, is_skew_product, kronecker_factor, perm_power)

MAX_TERMS = 4


def _as_pf(f) -> PointFunction:
    return f if isinstance(f, PointFunction) else PointFunction(tuple(f))


def _product_average(X: FiniteSystem, perms_list, fs) -> PointFunction:
    """mean over the given tuples of permutations (one per factor) of prod_i f_i o perm_i."""
    rat = [f.rational_values() for f in fs]
    n = X.n
    cnt = len(perms_list)
    if all(r is not None for r in rat):
        acc = [Fraction(0)] * n
        for perms in perms_list:
            for x in range(n):
                v = Fraction(1)
                for r, p in zip(rat, perms):
                    v *= r[p[x]]
                    if not v:
                        break
                acc[x] += v
        return PointFunction(tuple(a / cnt for a in acc))
    acc = [ZERO] * n
    for perms in perms_list:
        for x in range(n):
            v = ONE
            for f, p in zip(fs, perms):
                v = v * f[p[x]]
            acc[x] = acc[x] + v
    return PointFunction(tuple(a * Fraction(1, cnt) for a in acc))


@dataclass
class MultiAverageResult:
    limit: object                                  # PointFunction or TrigPoly
    finite_N: list = field(default_factory=list)   # [(N, values)]


def multi_average(X, coeffs, fs, N_list=(), *, scheme: str = "box",
                  sample_points=None, subs=None) -> MultiAverageResult:
    """lim_N E_{g in Phi_N} prod_i T_{a_i g} f_i, with optional finite-window values."""
    coeffs = [int(a) for a in coeffs]
    if not 1 <= len(coeffs) <= MAX_TERMS or len(coeffs) != len(fs):
        raise ValueError(f"between 1 and {MAX_TERMS} terms, one coefficient per function")
    if any(a == 0 for a in coeffs):
        raise ValueError("coefficients must be nonzero")
    if isinstance(X, TorusSystem):
        return _torus_multi_average(X, coeffs, fs, N_list, scheme, sample_points, subs)
    fs = [_as_pf(f) for f in fs]
    K = X.image_group
    limit = _product_average(X, [[perm_power(t, a) for a in coeffs] for t in K], fs)
    finite = []
    for N in N_list:
        W = folner_window(X.group, N, scheme)
        rows = []
        for g in W.elements:
            t = X.perm(g)
            rows.append([perm_power(t, a) for a in coeffs])
        finite.append((N, _product_average(X, rows, fs)))
    return MultiAverageResult(limit, finite)


def torus_limit(T: TorusSystem, coeffs, fs) -> TrigPoly:
    """Symbolic lim_N E_{n<N} prod_i f_i(T^{a_i n} x) as a TrigPoly in x (a.e. x)."""
    polys = [{m: T.orbit_polynomial(m, a) for m in f.terms} for a, f in zip(coeffs, fs)]
    out = TrigPoly()
    for combo in itertools.product(*[sorted(f.terms.items()) for f in fs]):
        p = PhasePolynomial((Phase(),))
        coeff = ONE
        for i, (m, c) in enumerate(combo):
            p = p + polys[i][m]
            coeff = coeff * c
        v = weyl_limit(p)
        if v:
            out = out + TrigPoly.from_exact(v * coeff, T.coord_symbols)
    return out


def _torus_multi_average(T, coeffs, fs, N_list, scheme, sample_points, subs):
    limit = torus_limit(T, coeffs, fs)
    finite = []
    if N_list and sample_points is not None:
        for N in N_list:
            finite.append((N, [torus_window_average(T, coeffs, fs, N, x, subs, scheme)
                               for x in sample_points]))
    return MultiAverageResult(limit, finite)


def eval_poly_many(p: PhasePolynomial, ns: np.ndarray, subs: dict) -> np.ndarray:
    """p(n) mod 1 for an integer array ns; rational parts exactly, symbolic parts in floats."""
    ns = np.asarray(ns, dtype=np.int64)
    out = np.zeros(ns.shape, dtype=np.float64)
    for j, c in enumerate(p.coeffs):
        a, b = c.q.numerator, c.q.denominator
        if a:
            pw = np.ones_like(ns) % b
            base = ns % b
            for _ in range(j):
                pw = (pw * base) % b
            out += (a * pw % b) / b
        if c.sym:
            x = sum(float(v) * subs[k] for k, v in c.sym)
            nj = ns.astype(np.float64) ** j
            out += np.mod(x * nj, 1.0)
    return np.mod(out, 1.0)


def torus_window_average(T: TorusSystem, coeffs, fs, N: int, x, subs: dict, scheme="forward") -> complex:
    """Numeric E_{n in Phi_N} prod_i f_i(T^{a_i n} x) at a point x (advisory, floats)."""
    W = folner_window(T.group, N, scheme)
    ns = np.array([g[0] for g in W.elements], dtype=np.int64)
    full = dict(subs)
    full.update({s: float(v) for s, v in zip(T.coord_symbols, x)})
    prod = np.ones(ns.shape, dtype=np.complex128)
    for a, f in zip(coeffs, fs):
        acc = np.zeros(ns.shape, dtype=np.complex128)
        for m, c in f.terms.items():
            ph = eval_poly_many(T.orbit_polynomial(m, a), ns, full)
            acc += c.to_complex(subs) * np.exp(2j * np.pi * ph)
        prod *= acc
    return complex(prod.mean())


# --- batched character averages on torus systems ------------------------------------------

def _phase_vector(ph: Phase, symbols: list) -> list:
    d = dict(ph.sym)
    return [ph.q] + [d.get(s, Fraction(0)) for s in symbols]


def torus_character_batch(T: TorusSystem, coeffs, freqs: np.ndarray):
    """Limits of prod_i e(m_i . T^{a_i n} x) for many frequency tuples at once.

    freqs has shape (M, k, d).  The exponent polynomial is linear in the
    frequencies, so it is assembled from the scalar engine's polynomials for
    unit vectors.  Returns (status, out_freq): status 1 where the term
    survives with value e(out_freq . x), 0 where the Weyl limit vanishes, and
    -1 where the batched shortcut does not decide (rational non-constant
    coefficients); callers evaluate those with :func:`torus_limit`.
    """
    M, k, d = freqs.shape
    basis = [[T.orbit_polynomial(tuple(int(i == c) for i in range(d)), a) for c in range(d)] for a in coeffs]
    deg = max(p.degree for row in basis for p in row)
    symbols = sorted({s for row in basis for p in row for c in p.coeffs for s, _ in c.sym})
    # B[i, c, j, t]: coefficient of n^j, component t (0 = rational part)
    B = [[[_phase_vector(p.coeffs[j] if j < len(p.coeffs) else Phase(), symbols)
           for j in range(deg + 1)] for p in row] for row in basis]
    den = 1
    for row in B:
        for col in row:
            for vec in col:
                for v in vec:
                    den = math.lcm(den, v.denominator)
    Bi = np.array([[[[int(v * den) for v in vec] for vec in col] for col in row] for row in B], dtype=np.int64)
    C = np.einsum("mkc,kcjt->mjt", freqs.astype(np.int64), Bi)   # (M, deg+1, comp)
    coord = list(T.coord_symbols)
    coord_cols = [1 + symbols.index(s) if s in symbols else None for s in coord]
    other_cols = [1 + i for i, s in enumerate(symbols) if s not in coord]
    nonconst = C[:, 1:, :]
    sym_zero = ~np.any(nonconst[:, :, 1:] != 0, axis=(1, 2))
    rat_zero = ~np.any(nonconst[:, :, 0] % den != 0, axis=1)
    const = C[:, 0, :]
    const_clean = (const[:, 0] % den == 0)
    for t in other_cols:
        const_clean &= const[:, t] == 0
    status = np.zeros(M, dtype=np.int8)
    status[sym_zero & rat_zero & const_clean] = 1
    status[sym_zero & ~(rat_zero & const_clean)] = -1
    out = np.zeros((M, d), dtype=np.int64)
    for i, col in enumerate(coord_cols):
        if col is not None:
            if np.any(const[:, col] % den):
                raise ValueError("non-integral output frequency")
            out[:, i] = const[:, col] // den
    out[status != 1] = 0
    return status, out


# --- seminorms -------------------------------------------------------------------

def _common_denominator(vals):
    D = 1
    for v in vals:
        D = math.lcm(D, v.denominator)
    return D, [int(v * D) for v in vals]


def gowers_cubic_integral(X: FiniteSystem, f, k: int):
    """int prod_omega C^{|omega|} f(x_omega) d mu^[k]."""
    f = _as_pf(f)
    C = cubic_space(X, k)
    rat = f.rational_values()
    if rat is not None:
        D, nums = _common_denominator(rat)
        Dm, mnums = _common_denominator(C.masses)
        bound = max(abs(v) for v in nums) or 1
        arr = C.array
        if bound ** (2 ** k) * len(C.tuples) * max(mnums) < 2 ** 62:
            vals = np.array(nums, dtype=np.int64)[arr]
            prod = np.prod(vals, axis=1)
            total = int(np.dot(prod, np.array(mnums, dtype=np.int64)))
        else:
            total = 0
            for t, m in zip(C.tuples, mnums):
                total += m * math.prod(nums[x] for x in t)
        return Fraction(total, Dm * D ** (2 ** k))
    fc = f.conj()
    total = ZERO
    for t, m in zip(C.tuples, C.masses):
        v = ExactComplex.from_rational(m)
        for w, x in enumerate(t):
            v = v * (fc[x] if bin(w).count("1") % 2 else f[x])
        total = total + v
    return total


def _recursive(X: FiniteSystem, f: PointFunction, k: int):
    if k == 1:
        P = X.invariant_projection(f)
        return X.norm2(P)
    acc = ZERO
    for t in X.image_group:
        acc = acc + _recursive(X, f.compose(t) * f.conj(), k - 1)
    return acc * Fraction(1, len(X.image_group))


def _recursive_rational(X: FiniteSystem, f: list, k: int) -> Fraction:
    if k == 1:
        total = Fraction(0)
        for orb in X.orbits:
            m = sum(X.weights[i] for i in orb)
            s = sum(X.weights[i] * f[i] for i in orb)
            total += s * s / m
        return total
    K = X.image_group
    return sum((_recursive_rational(X, [f[t[x]] * f[x] for x in range(X.n)], k - 1) for t in K),
               Fraction(0)) / len(K)


def gowers_recursive(X: FiniteSystem, f, k: int):
    """||f||^{2^k} from the recursion ||f||_{U^k}^{2^k} = E_g ||T_g f . conj f||_{U^{k-1}}^{2^{k-1}}."""
    f = _as_pf(f)
    rat = f.rational_values()
    if rat is not None:
        return _recursive_rational(X, rat, k)
    return _recursive(X, f, k)


def _simplify(v):
    if isinstance(v, ExactComplex):
        r = v.as_fraction()
        return r if r is not None else v
    return v


def ghk_seminorm(X: FiniteSystem, f, k: int, compare: bool = True):
    """||f||_{U^k}^{2^k} exactly (a Fraction when rational).

    Computed as the cubic integral; with compare=True the recursive form is
    computed too and any disagreement raises.
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    cub = _simplify(gowers_cubic_integral(X, f, k))
    if compare:
        rec = _simplify(gowers_recursive(X, f, k))
        if not (ExactComplex.coerce(cub) == ExactComplex.coerce(rec)):
            raise AssertionError(f"cubic {cub} and recursive {rec} seminorms disagree")
    return cub


def fourier_u2(X: FiniteSystem, f) -> Fraction | ExactComplex:
    """sum over characters chi of the rotation group of |<f, chi>|^4 (X must be a rotation)."""
    if X.rotation is None:
        raise ValueError("fourier_u2 needs a rotation system")
    K = X.rotation.group
    f = _as_pf(f)
    L = K.exponent
    n = X.n
    rat = f.rational_values()
    total = ExactComplex()
    for ch in characters(K):
        if rat is not None:
            D, nums = _common_denominator(rat)
            vec = [0] * L
            for x, v in zip(X.points, nums):
                vec[int(-ch(x) * L) % L] += v
            z = ExactComplex({(): Cyclo(L, vec, n * D)})
        else:
            z = ExactComplex()
            for x, v in zip(X.points, f):
                z = z + v * ExactComplex.e(Phase(-ch(x)))
            z = z * Fraction(1, n)
        a = z.abs2()
        total = total + a * a
    return _simplify(total)


def _real_sign(v) -> int:
    v = ExactComplex.coerce(v)
    if v.is_zero():
        return 0
    r = v.as_fraction()
    if r is not None:
        return (r > 0) - (r < 0)
    x = v.to_complex().real
    if abs(x) < 1e-9:
        raise ArithmeticError("sign undecided at double precision")
    return 1 if x > 0 else -1


# --- van der Corput -----------------------------------------------------------------

@dataclass
class VdcReport:
    rows: list          # (N, lhs, rhs, slack)
    gammas: dict        # h -> correlation average at the largest window
    M_estimate: float
    min_slack: float
    passed: bool


def vdc_check(G: AbGroup, xs, N_list, H: int | None = None, tol: float = 1e-9) -> VdcReport:
    """Check the van der Corput inequality on windows of G.

    xs(g) returns a vector (sequence of complex numbers).  For finite G the
    quantities are E_h gamma_h with gamma_h = E_g <x_{g+h}, x_g>, and
    ||E_g x_g||^2 = E_h gamma_h holds exactly.  For G = Z the check uses the
    finite inequality ||(1/N) sum_{n<N} x_n||^2 <= (N+H-1)/(N^2 H^2) sum_{|d|<H} (H-|d|) Re C(d),
    with C(d) = sum_{n, n+d in [0,N)} <x_{n+d}, x_n>.
    """
    rows = []
    gammas = {}
    if G.is_finite():
        els = G.elements()
        V = np.array([np.asarray(xs(g), dtype=np.complex128) for g in els])
        idx = {g: i for i, g in enumerate(els)}
        avg = V.mean(axis=0)
        lhs = float(np.vdot(avg, avg).real)
        for h in els:
            sh = np.array([idx[G.add(g, h)] for g in els])
            gammas[h] = complex(np.mean(np.sum(V[sh] * np.conj(V), axis=1)))
        rhs = float(np.mean([g.real for g in gammas.values()]))
        rows.append((len(els), lhs, rhs, rhs - lhs))
        M = rhs
    else:
        if G.free_rank != 1 or G.torsion:
            raise ValueError("vdc_check supports finite groups and Z")
        for N in N_list:
            Hn = H or max(1, int(math.isqrt(N)))
            Hn = min(Hn, N)
            V = np.array([np.asarray(xs((n,)), dtype=np.complex128) for n in range(N)])
            avg = V.mean(axis=0)
            lhs = float(np.vdot(avg, avg).real)
            total = Hn * float(np.sum(np.abs(V) ** 2))
            for d in range(1, Hn):
                total += 2 * (Hn - d) * float(np.sum(V[d:] * np.conj(V[:-d])).real)
            rhs = (N + Hn - 1) / (N * N * Hn * Hn) * total
            rows.append((N, lhs, rhs, rhs - lhs))
        N = N_list[-1]
        Hn = min(H or max(1, int(math.isqrt(N))), N)
        V = np.array([np.asarray(xs((n,)), dtype=np.complex128) for n in range(N)])
        for h in range(Hn):
            gammas[h] = complex(np.sum(V[h:] * np.conj(V[: N - h])) / N)
        M = float(np.mean([g.real for g in gammas.values()]))
    min_slack = min(r[3] for r in rows)
    return VdcReport(rows, gammas, M, min_slack, min_slack >= -tol)


# --- Kronecker bound on double averages -----------------------------------------------------

@dataclass
class KroneckerBoundReport:
    lhs: object
    rhs: float
    d: dict
    u2_powers: tuple       # ||f_i||_{U^2}^4
    passed: bool
    limit_formula_ok: bool


def kronecker_bound_check(X: FiniteSystem, a: int, b: int, f1, f2) -> KroneckerBoundReport:
    """||lim E_g T_{ag} f1 T_{bg} f2||^2 <= d_{b-a} min(d_a ||f1||_{U^2}, d_b ||f2||_{U^2})."""
    if a == b or a == 0 or b == 0:
        raise ValueError("need nonzero a != b")
    G = X.group
    d = {m: subgroup_index(G, m) for m in (a, b, b - a)}
    if any(v == INFINITE for v in d.values()):
        raise ValueError("index precondition fails")
    if not X.is_ergodic():
        raise ValueError("kronecker_bound_check needs an ergodic system")
    f1, f2 = _as_pf(f1), _as_pf(f2)
    L = multi_average(X, (a, b), [f1, f2]).limit
    lhs = _simplify(X.norm2(L))
    s1 = ghk_seminorm(X, f1, 2)
    s2 = ghk_seminorm(X, f2, 2)
    ok = True
    for dd, s in ((d[a], s1), (d[b], s2)):
        # lhs <= d_{b-a} dd s^{1/4}  iff  lhs^4 <= (d_{b-a} dd)^4 s, both sides nonnegative
        lhs4 = ExactComplex.coerce(lhs)
        lhs4 = lhs4 * lhs4
        lhs4 = lhs4 * lhs4
        ok &= _real_sign(ExactComplex.coerce(s) * (d[b - a] * dd) ** 4 - lhs4) >= 0
    rhs = d[b - a] * min(d[a] * _to_float(s1) ** 0.25, d[b] * _to_float(s2) ** 0.25)
    # the limit as an integral over the Kronecker rotation: E_y f1(x + a y) f2(x + b y)
    R, F = kronecker_factor(X)
    Kg = R.rotation.group
    inv = [0] * X.n
    for i, j in enumerate(F.point_map):
        inv[j] = i
    g1 = [f1[inv[j]] for j in range(R.n)]
    g2 = [f2[inv[j]] for j in range(R.n)]
    pts = R.points
    ok_formula = True
    for i in range(X.n):
        x = pts[F.point_map[i]]
        acc = ZERO
        for y in pts:
            acc = acc + g1[R.index(Kg.add(x, Kg.mul(a, y)))] * g2[R.index(Kg.add(x, Kg.mul(b, y)))]
        if not (acc * Fraction(1, R.n) == L[i]):
            ok_formula = False
            break
    return KroneckerBoundReport(lhs, rhs, d, (s1, s2), bool(ok), ok_formula)


def _to_float(v) -> float:
    if isinstance(v, Fraction):
        return float(v)
    return ExactComplex.coerce(v).to_complex().real


# --- characteristic factors ---------------------------------------------------------------

@dataclass
class CharacteristicReport:
    two_term_discrepancy: float
    three_term_discrepancy: float
    exact_equal_two: bool
    exact_equal_three: bool
    note: str = ""


def characteristic_compare(X, a: int, b: int, fs) -> CharacteristicReport:
    """Compare averages of f_i with averages of their projections onto Z_{<2} / Z_{<3}.

    Two-term average (a, b) against E(f_i | Z_{<2}); three-term average
    (a, b, a+b) against E(f_i | Z_{<3}).
    """
    G = AbGroup(1) if isinstance(X, TorusSystem) else X.group
    for m in (a, b, b - a, a + b):
        if m == 0 or subgroup_index(G, m) == INFINITE:
            raise ValueError("index precondition fails")
    if isinstance(X, TorusSystem):
        if not is_skew_product(X):
            raise ValueError("torus comparison is implemented for skew products")
        p2 = [host_kra_projection_torus(X, 2, f) for f in fs[:2]]
        p3 = [host_kra_projection_torus(X, 3, f) for f in fs[:3]]
        L2 = torus_limit(X, (a, b), fs[:2])
        M2 = torus_limit(X, (a, b), p2)
        L3 = torus_limit(X, (a, b, a + b), fs[:3])
        M3 = torus_limit(X, (a, b, a + b), p3)
        d2 = sum(abs(c.to_complex(_DEFAULT_SUBS)) ** 2 for c in (L2 - M2).terms.values())
        d3 = sum(abs(c.to_complex(_DEFAULT_SUBS)) ** 2 for c in (L3 - M3).terms.values())
        return CharacteristicReport(math.sqrt(d2), math.sqrt(d3), L2.equals(M2), L3.equals(M3))
    fs = [_as_pf(f) for f in fs]
    p2 = [host_kra_projection(X, 2, f) for f in fs[:2]]
    note = ""
    if cubic_support_size(X, 3) <= CUBE_CAP // 10:
        p3 = [host_kra_projection(X, 3, f) for f in fs[:3]]
    else:
        if not X.is_ergodic():
            raise ValueError("cubic space of level 3 too large for a non-ergodic system")
        p3 = fs[:3]
        note = "level-3 cube too large; E(f|Z_<3) = f on finite ergodic systems used"
    L2 = multi_average(X, (a, b), fs[:2]).limit
    M2 = multi_average(X, (a, b), p2).limit
    L3 = multi_average(X, (a, b, a + b), fs[:3]).limit
    M3 = multi_average(X, (a, b, a + b), p3).limit
    e2 = X.norm2(L2 - M2)
    e3 = X.norm2(L3 - M3)
    return CharacteristicReport(math.sqrt(max(_to_float(_simplify(e2)), 0.0)),
                                math.sqrt(max(_to_float(_simplify(e3)), 0.0)),
                                e2.is_zero(), e3.is_zero(), note)


_DEFAULT_SUBS = {"alpha": math.sqrt(2) - 1, "beta": math.sqrt(3) - 1}


def vector_family(kind: str, seed: int = 0, dim: int = 3, N: int = 16):
    """Seeded vector sequences for van der Corput checks: returns (G, xs).

    kinds: "orthonormal" (basis vectors over Z/N), "exponential" (e(n theta_j)
    over Z), "quadratic" (e(n^2 theta_j) over Z), "random" (independent unit
    vectors over Z).
    """
    rng = np.random.default_rng(seed)
    if kind == "orthonormal":
        eye = np.eye(N)
        return AbGroup.cyclic(N), lambda g: eye[g[0]]
    theta = rng.random(dim)
    if kind == "exponential":
        return AbGroup(1), lambda g: np.exp(2j * np.pi * theta * g[0]) / math.sqrt(dim)
    if kind == "quadratic":
        return AbGroup(1), lambda g: np.exp(2j * np.pi * theta * float(g[0]) ** 2) / math.sqrt(dim)
    if kind == "random":
        table: dict = {}

        def xs(g):
            n = g[0]
            if n not in table:
                v = np.random.default_rng([seed, n + 2**31]).normal(size=dim) + 0j
                table[n] = v / np.linalg.norm(v)
            return table[n]
        return AbGroup(1), xs
    raise ValueError(f"unknown vector family {kind!r}")
