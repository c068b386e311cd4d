"""Generalized spectrum, root extensions, towers, symmetric multilinear roots and
symmetric cocycles.

Phases here are Fractions read modulo 1.  Phase polynomials on a finite system
are searched with values in a lattice (1/L)Z/Z, which turns every question
into linear algebra over Z/L.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .abgroup import AbGroup, solve_group_linear
from .cocycles import Cocycle, solve_coboundary
from .phases import ExactComplex, Phase
from .systems import FactorMap, FiniteSystem, PointFunction, abelian_extension, ergodic_components, \
    kronecker_factor

SPEC_CAP = 4096
TOWER_CAP = 4096


def _mod1(q) -> Fraction:
    return Fraction(q) % 1


def _lcm_den(vals) -> int:
    L = 1
    for v in vals:
        L = math.lcm(L, Fraction(v).denominator)
    return L


def _image_exponent(X: FiniteSystem) -> int:
    """Exponent of the image group {T_g}: lcm of the generator permutation orders."""
    L = 1
    for p in X.action:
        seen = [False] * X.n
        for s in range(X.n):
            if seen[s]:
                continue
            c, x = 0, s
            while not seen[x]:
                seen[x] = True
                x = p[x]
                c += 1
            L = math.lcm(L, c)
    return L


def _derivative_rows(X: FiniteSystem, order: int, n_unknowns: int, offset: int = 0):
    """Rows (dict coefficient maps) of Delta_{j1}...Delta_{j_order} P(x) for all generator tuples."""
    r = X.group.rank
    rows = []
    for js in itertools.combinations_with_replacement(range(r), order):
        for x in range(X.n):
            # expand prod (T_j - 1) applied at x
            terms = {x: 1}
            for j in js:
                p = X.action[j]
                nt: dict = {}
                for y, c in terms.items():
                    nt[p[y]] = nt.get(p[y], 0) + c
                    nt[y] = nt.get(y, 0) - c
                terms = {y: c for y, c in nt.items() if c}
            rows.append((js, x, {offset + y: c for y, c in terms.items()}))
    return rows


@dataclass
class SpecElement:
    values: tuple              # lambda on generator tuples (sorted index tuples), as Fractions mod 1
    witness: tuple             # P as a tuple of Fractions mod 1 with Delta^k P = lambda


@dataclass
class SpectrumReport:
    k: int
    lattice: int               # values searched in (1/lattice) Z / Z
    index_tuples: list         # generator index tuples the values refer to
    elements: list             # SpecElement, sorted by values

    def values(self) -> set:
        return {e.values for e in self.elements}

    def contains(self, lam) -> bool:
        lam = tuple(_mod1(v) for v in lam)
        return lam in self.values()


def spectrum(X: FiniteSystem, k: int, lattice: int | None = None, cap: int = SPEC_CAP) -> SpectrumReport:
    """Spec_k(X): the k-th derivatives Delta_{g1}..Delta_{gk} P of phase polynomials P of degree <= k.

    Multilinear maps are recorded by their values on tuples of generators
    (combinations with repetition, the derivative operators commute).  The
    lattice defaults to exp(X) * 2^k.
    """
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    if not X.is_ergodic():
        raise ValueError("spectrum needs an ergodic system")
    L = lattice or _image_exponent(X) * 2 ** k
    U = AbGroup(0, (L,))
    n = X.n
    # P(x0) = 0 removes the constants
    eqs = [(row, (0,)) for _, _, row in _derivative_rows(X, k + 1, n)]
    eqs.append(({0: 1}, (0,)))
    sol = solve_group_linear(eqs, U, n)
    tuples = list(itertools.combinations_with_replacement(range(X.group.rank), k))
    rows = _derivative_rows(X, k, n)

    def lam_of(P):
        out = {}
        for js, x, row in rows:
            v = sum(c * P[y][0] for y, c in row.items()) % L
            if js in out and out[js] != v:
                raise AssertionError("derivative is not constant")
            out[js] = v
        return tuple(Fraction(out[js], L) for js in tuples)

    found: dict = {}
    if sol.size > cap:
        raise ValueError(f"phase polynomial family of size {sol.size} exceeds the cap")
    for P in sol:
        lam = lam_of(P)
        if lam not in found:
            found[lam] = tuple(Fraction(v[0], L) for v in P)
    els = [SpecElement(lam, found[lam]) for lam in sorted(found)]
    return SpectrumReport(k, L, tuples, els)


def eigenfunction_phase(X: FiniteSystem, lam) -> tuple | None:
    """P with P(T_j x) - P(x) = lam_j (mod 1) and P(x0) = 0, or None if lam is not an eigenvalue."""
    lam = [_mod1(v) for v in lam]
    L = _lcm_den(lam)
    U = AbGroup(0, (L,))
    eqs = []
    for j, p in enumerate(X.action):
        for x in range(X.n):
            row = {p[x]: 1}
            row[x] = row.get(x, 0) - 1
            eqs.append((row, ((lam[j] * L).numerator % L,)))
    eqs.append(({0: 1}, (0,)))
    sol = solve_group_linear(eqs, U, X.n)
    if sol is None:
        return None
    return tuple(Fraction(v[0], L) for v in sol.particular)


# --- root extensions -------------------------------------------------------------------------

@dataclass
class RootExtension:
    base: FiniteSystem
    system: FiniteSystem
    factor: FactorMap | None        # None when the extension is trivial
    lam: tuple
    mu: tuple                       # the chosen n-th root, n*mu = lam
    n: int
    image_order: int                # |V|, the minimal image of the root cocycle
    cocycle: Cocycle | None
    Q: PointFunction                # eigenfunction on system with eigenvalue mu
    ergodic: bool

    @property
    def trivial(self) -> bool:
        return self.image_order == 1


def _choose_root(G: AbGroup, lam, n: int) -> tuple:
    mu = []
    for l, d in zip(lam, G.moduli):
        for t in range(n):
            m = (l + t) / n
            if d == 0 or (m * d).denominator == 1:
                mu.append(_mod1(m))
                break
        else:
            raise ValueError("no n-th root of lambda respects the group relations")
    return tuple(mu)


def root_extension(X: FiniteSystem, lam, n: int, mu=None) -> RootExtension:
    """Extend X so that the eigenvalue lam acquires an n-th root.

    With P an eigenphase for lam and P~ = P/n (canonical lifts), the root
    cocycle sigma(g, x) = mu(g) - Delta_g P~(x) takes values in (1/n)Z/Z.  It
    is reduced to the smallest subgroup V of Z/n it is cohomologous into,
    and X is extended by V with the reduced cocycle.  The new eigenfunction is
    Q(x, v) = e(P~(x) + (F(x) + m v)/n) with m = n/|V|.
    """
    if n < 2:
        raise ValueError("n >= 2")
    if not X.is_ergodic():
        raise ValueError("root_extension needs an ergodic base")
    lam = tuple(_mod1(v) for v in lam)
    P = eigenfunction_phase(X, lam)
    if P is None:
        raise ValueError("lambda is not an eigenvalue of X")
    mu = tuple(_mod1(v) for v in mu) if mu is not None else _choose_root(X.group, lam, n)
    if any(_mod1(n * m) != l for m, l in zip(mu, lam)):
        raise ValueError("mu is not an n-th root of lambda")
    Pt = [p / n for p in P]
    # sigma in Z/n
    vals = []
    for j, p in enumerate(X.action):
        row = []
        for x in range(X.n):
            s = _mod1(mu[j] - (Pt[p[x]] - Pt[x]))
            assert (s * n).denominator == 1
            row.append((int(s * n) % n,))
        vals.append(tuple(row))
    for size in sorted(d for d in range(1, n + 1) if n % d == 0):
        m = n // size
        if m == 1:
            Fbar = tuple((0,) for _ in range(X.n))
        else:
            proj = Cocycle(X, AbGroup(0, (m,)), tuple(tuple((v[0] % m,) for v in row) for row in vals))
            Fbar = solve_coboundary(proj)
        if Fbar is not None:
            break
    F = [f[0] for f in Fbar]
    if size == 1:
        Q = PointFunction(tuple(ExactComplex.e(Phase(Pt[x] + Fraction(F[x], n))) for x in range(X.n)))
        return RootExtension(X, X, None, lam, mu, n, 1, None, Q, True)
    V = AbGroup(0, (size,))
    red = []
    for j, p in enumerate(X.action):
        row = []
        for x in range(X.n):
            w = (vals[j][x][0] - (F[p[x]] - F[x])) % n
            assert w % m == 0
            row.append((w // m,))
        red.append(tuple(row))
    tau = Cocycle(X, V, tuple(red))
    Y, pi = abelian_extension(X, V, tau)
    Q = PointFunction(tuple(ExactComplex.e(Phase(Pt[X.index(xl)] + Fraction(F[X.index(xl)] + m * v[0], n)))
                            for xl, v in Y.points))
    comps, _ = ergodic_components(Y)
    return RootExtension(X, Y, pi, lam, mu, n, size, tau, Q, len(comps) == 1)


def is_eigenfunction(X: FiniteSystem, Q: PointFunction, mu) -> bool:
    for j, p in enumerate(X.action):
        ev = ExactComplex.e(Phase(mu[j]))
        if not Q.compose(p).equals(Q * ev):
            return False
    return True


# --- towers -----------------------------------------------------------------------------------

@dataclass
class TowerStage:
    stage: int
    system: FiniteSystem
    group: tuple               # invariant factors of the Kronecker rotation group
    ergodic: bool
    new_roots: list            # eigenvalues of the previous stage that gained an n-th root
    factor: FactorMap | None = None

    def to_dict(self) -> dict:
        return {"stage": self.stage, "size": self.system.n, "group": list(self.group),
                "ergodic": self.ergodic, "new_roots": [[str(v) for v in lam] for lam in self.new_roots]}


def _spec1_generators(X: FiniteSystem) -> list:
    S = spectrum(X, 1)
    vals = sorted(S.values())
    gens, span = [], {tuple(Fraction(0) for _ in range(X.group.rank))}
    for v in vals:
        if v in span:
            continue
        gens.append(v)
        frontier = list(span)
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = tuple(_mod1(x + y) for x, y in zip(a, g))
                    if b not in span:
                        span.add(b)
                        nxt.append(b)
            frontier = nxt
    return gens, S


def divisible_tower(X: FiniteSystem, depth: int, n_list=(2,), cap: int = TOWER_CAP) -> list:
    """Repeated root extensions: at each stage every generator of Spec_1 gets an n-th root.

    Only finitely many stages are built; divisibility of the whole spectrum
    holds only in the inverse limit, which is not constructed.
    """
    if depth > 6:
        raise ValueError("depth <= 6")
    R, _ = kronecker_factor(X)
    stages = [TowerStage(0, X, R.rotation.group.torsion, X.is_ergodic(), [])]
    cur = X
    for st in range(1, depth + 1):
        gens, S_prev = _spec1_generators(cur)
        factor = None
        prev_vals = sorted(S_prev.values())
        for n in n_list:
            for lam in gens:
                # lam pulled back along the factor maps built so far at this stage is the same vector
                if cur.n * n > cap:
                    raise ValueError("tower exceeds the size cap")
                ext = root_extension(cur, lam, n)
                if not ext.trivial:
                    factor = ext.factor if factor is None else _compose_factor(ext.factor, factor)
                    cur = ext.system
        S_new = spectrum(cur, 1)
        new_vals = S_new.values()
        roots = []
        for lam in prev_vals:
            if any(lam != tuple(Fraction(0) for _ in lam) and
                   all(_mod1(n * m) == l for m, l in zip(mu, lam)) for mu in new_vals for n in n_list):
                roots.append(lam)
        R, _ = kronecker_factor(cur)
        stages.append(TowerStage(st, cur, R.rotation.group.torsion, cur.is_ergodic(), roots, factor))
    return stages


def _compose_factor(outer: FactorMap, inner: FactorMap) -> FactorMap:
    """outer: Y -> X', inner: X' -> X  gives Y -> X."""
    return FactorMap(outer.source, inner.target, tuple(inner.point_map[i] for i in outer.point_map),
                     inner.group_map)


# --- symmetric multilinear roots ------------------------------------------------------------------

@dataclass
class SymmetricMultilinear:
    """A symmetric m-linear map (Z^d)^m -> R/Z given on sorted basis index tuples."""

    d: int
    m: int
    values: dict              # sorted index tuple -> Fraction mod 1

    def __call__(self, *vectors) -> Fraction:
        if len(vectors) != self.m:
            raise ValueError(f"{self.m} arguments expected")
        total = Fraction(0)
        for idx in itertools.product(range(self.d), repeat=self.m):
            c = math.prod(v[i] for v, i in zip(vectors, idx))
            if c:
                total += c * self.values.get(tuple(sorted(idx)), Fraction(0))
        return total % 1

    def is_symmetric(self, trials: int = 50, seed: int = 0) -> bool:
        rng = random.Random(seed)
        for _ in range(trials):
            vs = [[rng.randint(-5, 5) for _ in range(self.d)] for _ in range(self.m)]
            perm = vs[:]
            rng.shuffle(perm)
            if self(*vs) != self(*perm):
                return False
        return True

    def is_multilinear(self, trials: int = 50, seed: int = 0) -> bool:
        rng = random.Random(seed)
        for _ in range(trials):
            vs = [[rng.randint(-5, 5) for _ in range(self.d)] for _ in range(self.m)]
            w = [rng.randint(-5, 5) for _ in range(self.d)]
            slot = rng.randrange(self.m)
            a = vs[:]
            a[slot] = [x + y for x, y in zip(vs[slot], w)]
            b = vs[:]
            b[slot] = w
            if self(*a) != (self(*vs) + self(*b)) % 1:
                return False
        return True


def sml_root(G: AbGroup, m: int, values: dict, n: int) -> SymmetricMultilinear:
    """mu symmetric multilinear on G^m with n*mu = lambda (G = Z^d, torsion-free)."""
    if G.torsion:
        raise ValueError("sml_root needs a torsion-free group")
    if not 1 <= m <= 3:
        raise ValueError("1 <= m <= 3")
    if n < 1:
        raise ValueError("n >= 1")
    d = G.free_rank
    vals = {}
    for idx in itertools.combinations_with_replacement(range(d), m):
        vals[idx] = (_mod1(values.get(idx, 0)) / n) % 1
    for key in values:
        if tuple(sorted(key)) != tuple(key) and values[key] != values.get(tuple(sorted(key)), values[key]):
            raise ValueError("values are not symmetric")
    return SymmetricMultilinear(d, m, vals)


# --- symmetric cocycles ---------------------------------------------------------------------------

def validate_symmetric_cocycle(Z: AbGroup, k) -> bool:
    els = Z.elements()
    for s in els:
        for t in els:
            if _mod1(k[(s, t)] - k[(t, s)]):
                return False
    for r in els:
        for s in els:
            for t in els:
                if _mod1(k[(Z.add(r, s), t)] + k[(r, s)] - k[(r, Z.add(s, t))] - k[(s, t)]):
                    return False
    return True


def split_symmetric_cocycle(Z: AbGroup, k, retries: int = 2):
    """phi: Z -> R/Z with k(s, t) = phi(s+t) - phi(s) - phi(t), or None.

    k maps pairs of elements to Fractions (a dict or callable).  Values of phi
    are searched in (1/L)Z/Z with L = |Z| ord(k), doubling L on failure.
    """
    if not Z.is_finite():
        raise ValueError("finite groups only")
    els = Z.elements()
    if callable(k):
        k = {(s, t): _mod1(k(s, t)) for s in els for t in els}
    else:
        k = {key: _mod1(v) for key, v in k.items()}
    if not validate_symmetric_cocycle(Z, k):
        raise ValueError("not a symmetric cocycle")
    L = Z.order * _lcm_den(k.values())
    idx = {g: i for i, g in enumerate(els)}
    for _ in range(retries + 1):
        U = AbGroup(0, (L,))
        eqs = []
        for s in els:
            for t in els:
                row: dict = {}
                for g, c in ((Z.add(s, t), 1), (s, -1), (t, -1)):
                    row[idx[g]] = row.get(idx[g], 0) + c
                row = {a: c for a, c in row.items() if c}
                eqs.append((row, (int(k[(s, t)] * L) % L,)))
        sol = solve_group_linear(eqs, U, len(els))
        if sol is not None:
            return {g: Fraction(sol.particular[idx[g]][0], L) for g in els}
        L *= 2
    return None


def coboundary_of(Z: AbGroup, phi: dict) -> dict:
    return {(s, t): _mod1(phi[Z.add(s, t)] - phi[s] - phi[t]) for s in Z.elements() for t in Z.elements()}


# --- the four-tuple set identity -----------------------------------------------------------------

@dataclass
class SetIdentityReport:
    equal: bool
    a_subset_b: bool
    b_subset_a: bool
    size_a: int
    size_b: int
    hypotheses: dict
    hypotheses_hold: bool
    witnesses: list = field(default_factory=list)   # up to 10 tuples in the symmetric difference

    def to_dict(self) -> dict:
        return {"equal": self.equal, "a_subset_b": self.a_subset_b, "b_subset_a": self.b_subset_a,
                "size_a": self.size_a, "size_b": self.size_b, "hypotheses": self.hypotheses,
                "hypotheses_hold": self.hypotheses_hold, "witnesses": [list(map(list, w)) for w in self.witnesses]}


def is_divisible(U: AbGroup, m: int) -> bool:
    """m U = U for a finite abelian group."""
    return len({U.mul(m, u) for u in U.elements()}) == U.order


def verify_ab_set_identity(U: AbGroup, a: int, b: int) -> SetIdentityReport:
    """Compare
        A = {(g, g + a g1 + C(a,2) g2, g + b g1 + C(b,2) g2, g + (a+b) g1 + C(a+b,2) g2)}
        B = {((a+b) u, t + (b-a) u, t + (b-a) v, (a+b) v)}
    inside U^4 (additive notation), by full enumeration."""
    if not U.is_finite():
        raise ValueError("finite groups only")
    if U.order ** 3 > 10**7:
        raise ValueError("|U|^3 exceeds 10^7")
    hyp = {"coprime": math.gcd(a, b) == 1}
    for name, m in (("a", a), ("b", b), ("a+b", a + b), ("b-a", b - a)):
        hyp[f"divisible_{name}"] = m != 0 and is_divisible(U, abs(m))
    els = U.elements()
    mul, add = U.mul, U.add
    ca, cb, cab = math.comb(a, 2) if a >= 0 else a * (a - 1) // 2, b * (b - 1) // 2, (a + b) * (a + b - 1) // 2
    A = set()
    for g in els:
        for g1 in els:
            for g2 in els:
                A.add((g, add(g, add(mul(a, g1), mul(ca, g2))), add(g, add(mul(b, g1), mul(cb, g2))),
                       add(g, add(mul(a + b, g1), mul(cab, g2)))))
    B = set()
    for u in els:
        for t in els:
            for v in els:
                B.add((mul(a + b, u), add(t, mul(b - a, u)), add(t, mul(b - a, v)), mul(a + b, v)))
    diff = sorted(A ^ B)[:10]
    return SetIdentityReport(A == B, A <= B, B <= A, len(A), len(B), hyp, all(hyp.values()), diff)
