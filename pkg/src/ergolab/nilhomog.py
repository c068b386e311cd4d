"""Two-step nilpotent groups, their homogeneous spaces and the limit formula.

Three group models are provided: finite groups given by a multiplication
(Heisenberg groups over Z/n, groups of permutations), and the symbolic SkewCL
group of triples (s, c, t) with s, t phases and c an integer, which is the CL
group of the skew product T(x, y) = (x + alpha, y + x + beta).
"""
from __future__ import annotations

import itertools
import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .abgroup import AbGroup
from .averages import multi_average, torus_character_batch, torus_limit, torus_window_average
from .cocycles import cl_group, cl_permutation, counterexample_cocycle
from .phases import ONE, ZERO, ExactComplex, Phase
from .systems import (FiniteSystem, PointFunction, TorusSystem, TrigPoly, abelian_extension,
                      compose, inverse, perm_power)

ENUM_CAP = 10**5


class DivisibilityRefusal(ValueError):
    """The commutator group lacks the divisibility the limit formula needs."""


# --- groups -------------------------------------------------------------------------

class FiniteNilGroup:
    """A finite group given by its elements and a multiplication callable."""

    def __init__(self, elements, mul, identity, name: str = "finite"):
        self.elements = list(elements)
        self._mul = mul
        self.identity = identity
        self.name = name
        self._set = set(self.elements)
        self._inv = {}
        for a in self.elements:
            for b in self.elements:
                if mul(a, b) == identity:
                    self._inv[a] = b
                    break
            else:
                raise ValueError("element without inverse")

    @classmethod
    def from_permutations(cls, gens, cap: int = ENUM_CAP, name: str = "permutations"):
        gens = [tuple(g) for g in gens]
        n = len(gens[0])
        ident = tuple(range(n))
        seen = {ident}
        order = [ident]
        q = deque([ident])
        while q:
            a = q.popleft()
            for g in gens:
                b = compose(g, a)
                if b not in seen:
                    seen.add(b)
                    order.append(b)
                    q.append(b)
                    if len(order) > cap:
                        raise ValueError("permutation group exceeds the cap")
        G = cls.__new__(cls)
        G.elements = sorted(order)
        G._mul = compose
        G.identity = ident
        G.name = name
        G._set = set(order)
        G._inv = {a: inverse(a) for a in order}
        return G

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, a, b):
        return self._mul(a, b)

    def inv(self, a):
        return self._inv[a]

    def power(self, a, i: int):
        if i < 0:
            a, i = self.inv(a), -i
        out, base = self.identity, a
        while i:
            if i & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            i >>= 1
        return out

    def commutator(self, a, b):
        """[a, b] = a b a^-1 b^-1."""
        return self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))

    def closure(self, gens) -> list:
        seen = {self.identity}
        q = deque([self.identity])
        gens = list(gens)
        while q:
            a = q.popleft()
            for g in gens:
                b = self.mul(a, g)
                if b not in seen:
                    seen.add(b)
                    q.append(b)
        return sorted(seen)

    def derived_subgroup(self) -> list:
        comms = {self.commutator(a, b) for a in self.elements for b in self.elements}
        return self.closure(comms)

    def is_two_step(self, samples: int | None = None, seed: int = 0) -> bool:
        els = self.elements
        if samples is None and len(els) ** 3 <= 10**6:
            triples = itertools.product(els, repeat=3)
        else:
            rng = random.Random(seed)
            triples = ((rng.choice(els), rng.choice(els), rng.choice(els)) for _ in range(samples or 1000))
        return all(self.commutator(self.commutator(a, b), c) == self.identity for a, b, c in triples)

    def contains(self, a) -> bool:
        return a in self._set


def heisenberg(n: int) -> FiniteNilGroup:
    """Triples over Z/n with (x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy')."""
    if n < 2:
        raise ValueError("n >= 2")

    def mul(a, b):
        return ((a[0] + b[0]) % n, (a[1] + b[1]) % n, (a[2] + b[2] + a[0] * b[1]) % n)

    els = list(itertools.product(range(n), repeat=3))
    G = FiniteNilGroup.__new__(FiniteNilGroup)
    G.elements = els
    G._mul = mul
    G.identity = (0, 0, 0)
    G.name = f"heisenberg({n})"
    G._set = set(els)
    # (x,y,z)^-1 = (-x, -y, -z + xy)
    G._inv = {a: ((-a[0]) % n, (-a[1]) % n, (-a[2] + a[0] * a[1]) % n) for a in els}
    G.modulus = n
    return G


class SkewCLGroup:
    """Triples (s, c, t): s, t phases, c an integer; (s,c,t)(s',c',t') = (s+s', c+c', t+t'+c s')."""

    name = "skew_cl"
    identity = (Phase(), 0, Phase())

    def mul(self, a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[1] * b[0])

    def inv(self, a):
        return (-a[0], -a[1], -a[2] + a[1] * a[0])

    def power(self, a, i: int):
        """(s,c,t)^i by repeated multiplication."""
        if i < 0:
            a, i = self.inv(a), -i
        out = self.identity
        for _ in range(i):
            out = self.mul(out, a)
        return out

    @staticmethod
    def power_law(a, i: int):
        """(is, ic, it + binom(i,2) c s)."""
        s, c, t = a
        return (s * i, c * i, t * i + s * (c * math.comb(i, 2)))

    def commutator(self, a, b):
        return self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))

    @staticmethod
    def commutator_formula(a, b):
        """(0, 0, c s' - c' s)."""
        return (Phase(), 0, b[0] * a[1] - a[0] * b[1])

    def random_element(self, rng: random.Random, symbolic: bool = False):
        def ph(tag):
            q = Fraction(rng.randint(0, 59), 60)
            if symbolic:
                return Phase(q, {tag: rng.randint(-3, 3)})
            return Phase(q)
        return (ph("u"), rng.randint(-5, 5), ph("v"))

    def is_two_step(self, samples: int = 1000, seed: int = 0, symbolic: bool = True) -> bool:
        rng = random.Random(seed)
        for _ in range(samples):
            a, b, c = (self.random_element(rng, symbolic) for _ in range(3))
            if self.commutator(self.commutator(a, b), c) != self.identity:
                return False
        return True

    def contains(self, a) -> bool:
        return isinstance(a[0], Phase) and isinstance(a[1], int) and isinstance(a[2], Phase)


def skew_cl_group() -> SkewCLGroup:
    return SkewCLGroup()


# --- commutator subgroups and divisibility -------------------------------------------------

@dataclass
class CommutatorGroup:
    """G_2 either as explicit elements of a finite group, or as a named divisible model."""

    elements: list | None
    description: str
    divisible: bool = False       # every m-th root exists (the circle)


def commutator_group(G) -> CommutatorGroup:
    if isinstance(G, SkewCLGroup):
        return CommutatorGroup(None, "{(0, 0, r)}: a circle", divisible=True)
    if isinstance(G, AbGroup):
        return CommutatorGroup(G.elements(), f"abelian group {G.torsion}")
    if isinstance(G, CommutatorGroup):
        return G
    els = G.derived_subgroup()
    return CommutatorGroup(els, f"derived subgroup of order {len(els)}")


def commutator_divisibility(G, ms) -> dict:
    """m -> True iff G_2^m = G_2.  G may be a group model or an AbGroup standing for G_2."""
    C = commutator_group(G)
    out = {}
    for m in ms:
        m = int(m)
        if m == 0:
            out[m] = len(C.elements or [None, None]) == 1
        elif C.divisible:
            out[m] = True
        elif isinstance(G, AbGroup):
            out[m] = len({G.mul(m, u) for u in C.elements}) == len(C.elements)
        else:
            out[m] = len({G.power(u, m) for u in C.elements}) == len(C.elements)
    return out


# --- homogeneous systems -----------------------------------------------------------------

@dataclass
class HomogSystem:
    group: object
    gamma: list                   # elements (finite) or None (SkewCL, Gamma = {(0,c,0)})
    phi: list                     # images of the acting generators
    acting: AbGroup
    system: object                # FiniteSystem or TorusSystem
    reps: list = field(default_factory=list)   # coset representatives, point order
    ergodic: bool = True
    flags: list = field(default_factory=list)

    def point_of(self, g) -> int:
        return self._coset_index[g]


def homogeneous_system(G, gamma, phi, acting: AbGroup | None = None) -> HomogSystem:
    """The G-system on the coset space G/Gamma with g acting by left multiplication by phi(g)."""
    acting = acting or AbGroup(1)
    phi = list(phi)
    if len(phi) != acting.rank:
        raise ValueError("one image per acting generator")
    if isinstance(G, SkewCLGroup):
        if gamma not in (None, "integers"):
            raise ValueError("the SkewCL model uses Gamma = {(0, c, 0)}")
        if len(phi) != 1:
            raise ValueError("the SkewCL model is implemented for Z-actions")
        T = skew_quotient_action(phi[0])
        return HomogSystem(G, None, phi, acting, T)
    gamma = sorted(set(gamma))
    gset = set(gamma)
    if G.identity not in gset or any(G.mul(a, b) not in gset for a in gamma for b in gamma) \
            or any(G.inv(a) not in gset for a in gamma):
        raise ValueError("Gamma is not a subgroup")
    for a, b in itertools.combinations(phi, 2):
        if G.mul(a, b) != G.mul(b, a):
            raise ValueError("phi images do not commute")
    for a, d in zip(phi, acting.moduli):
        if d and G.power(a, d) != G.identity:
            raise ValueError("phi does not respect the relations of the acting group")
    if G.order * len(gamma) > 10**7:
        raise ValueError("coset enumeration infeasible")
    index = {}
    reps = []
    for g in G.elements:
        if g in index:
            continue
        coset = [G.mul(g, h) for h in gamma]
        r = min(coset)
        for c in coset:
            index[c] = len(reps)
        reps.append(r)
    action = [tuple(index[G.mul(a, r)] for r in reps) for a in phi]
    n = len(reps)
    X = FiniteSystem(acting, tuple(range(n)), (Fraction(1, n),) * n, tuple(action))
    H = HomogSystem(G, gamma, phi, acting, X, reps, X.is_ergodic())
    H._coset_index = index
    if not H.ergodic:
        H.flags.append(f"non-ergodic: {len(X.orbits)} components")
    return H


def skew_quotient_action(a) -> TorusSystem:
    """Left multiplication by a on SkewCL/{(0,c,0)}, read off on the representatives (x0, 0, x1)."""
    G = SkewCLGroup()
    x = (Phase.symbol("x0"), 0, Phase.symbol("x1"))
    s, c, t = G.mul(a, x)
    # the new representative is (s, 0, t); read the affine map off the symbols
    coords = ("x0", "x1")
    A = tuple(tuple(int(dict(p.sym).get(v, 0)) for v in coords) for p in (s, t))
    b = tuple(Phase._raw(p.q, tuple((k, v) for k, v in p.sym if k not in coords)) for p in (s, t))
    return TorusSystem(2, (A,), (b,))


# --- the limit formula --------------------------------------------------------------------

def _check_divisibility(H: HomogSystem, coeffs, force: bool):
    ms = {2}
    if len(coeffs) == 3 and coeffs[2] == coeffs[0] + coeffs[1] and tuple(coeffs) != (1, 2, 3):
        a, b = coeffs[0], coeffs[1]
        ms |= {abs(a), abs(b), abs(a + b), abs(b - a)}
    ms = sorted(m for m in ms if m >= 2)
    res = commutator_divisibility(H.group, ms)
    bad = [m for m, ok in res.items() if not ok]
    if bad and not force:
        raise DivisibilityRefusal(f"commutator group is not {bad}-divisible")
    return res


def _pattern(k: int | None, coeffs):
    if coeffs is None:
        if k is None:
            raise ValueError("give k or coefficients")
        return tuple(range(1, k + 1))
    return tuple(int(c) for c in coeffs)


def limit_formula_rhs(H: HomogSystem, fs, k: int | None = None, coeffs=None, force: bool = False,
                      mode: str = "full"):
    """int_{G/Gamma} int_{G_2} prod_i f_i(x y1^{c_i} y2^{binom(c_i, 2)}) as a function of x.

    coeffs defaults to (1, ..., k).  On the SkewCL model the integral is
    evaluated symbolically term by term; on finite models it is an exact sum.
    mode="component" replaces G by the conjugate of the group generated by
    phi(G) at each point (for non-ergodic finite models).
    """
    coeffs = _pattern(k if k is not None else len(fs), coeffs)
    if len(coeffs) != len(fs):
        raise ValueError("one coefficient per function")
    _check_divisibility(H, coeffs, force)
    if isinstance(H.group, SkewCLGroup):
        return _skew_rhs(fs, coeffs)
    return _finite_rhs(H, fs, coeffs, mode)


def _skew_rhs(fs, coeffs) -> TrigPoly:
    G = SkewCLGroup()
    x = (Phase.symbol("x0"), 0, Phase.symbol("x1"))
    y1 = (Phase.symbol("s"), 0, Phase.symbol("t"))
    y2 = (Phase(), 0, Phase.symbol("r"))
    integ = {"s", "t", "r"}
    total = ONE
    for f, c in zip(fs, coeffs):
        p = G.mul(G.mul(x, G.power_law(y1, c)), G.power_law(y2, math.comb(c, 2)))
        u, v = p[0], p[2]       # coset of (u, c', v) is (u, v)
        val = ZERO
        for (m0, m1), coef in f.terms.items():
            val = val + coef * ExactComplex.e(u * m0 + v * m1)
        total = total * val
    # Haar integral over s, t, r: keep the parts with no s, t, r dependence
    kept = {key: cyc for key, cyc in total.parts.items() if not any(s in integ for s, _ in key)}
    return TrigPoly.from_exact(ExactComplex(kept), ("x0", "x1"))


def _finite_rhs(H: HomogSystem, fs, coeffs, mode: str) -> PointFunction:
    G = H.group
    fs = [f if isinstance(f, PointFunction) else PointFunction(tuple(f)) for f in fs]
    if mode == "full":
        ys = G.elements
        y2s = commutator_group(G).elements
    elif mode != "component":
        raise ValueError("mode is 'full' or 'component'")
    out = []
    for xi, g in enumerate(H.reps):
        if mode == "component":
            ginv = G.inv(g)
            Hsub = G.closure([G.mul(G.mul(ginv, a), g) for a in H.phi])
            ys = Hsub
            sub = FiniteNilGroup(Hsub, G.mul, G.identity)
            y2s = sub.derived_subgroup()
        acc = ZERO
        pw1 = {y: [G.power(y, c) for c in coeffs] for y in ys}
        pw2 = {y: [G.power(y, math.comb(c, 2)) for c in coeffs] for y in y2s}
        for y1 in ys:
            for y2 in y2s:
                v = ONE
                for i, f in enumerate(fs):
                    p = G.mul(G.mul(g, pw1[y1][i]), pw2[y2][i])
                    v = v * f[H.point_of(p)]
                    if v.is_zero():
                        break
                acc = acc + v
        out.append(acc * Fraction(1, len(ys) * len(y2s)))
    return PointFunction(tuple(out))


@dataclass
class LimitComparison:
    lhs: object
    rhs: object
    equal: bool
    coeffs: tuple
    mc_residual: float | None = None
    flags: list = field(default_factory=list)


def limit_formula_compare(H: HomogSystem, fs, k: int | None = None, coeffs=None, force: bool = False,
                          mode: str = "full", mc_samples: int = 0, seed: int = 0, subs=None) -> LimitComparison:
    """Both sides of the limit formula and the exact equality verdict."""
    coeffs = _pattern(k if k is not None else len(fs), coeffs)
    rhs = limit_formula_rhs(H, fs, coeffs=coeffs, force=force, mode=mode)
    X = H.system
    if isinstance(X, TorusSystem):
        lhs = torus_limit(X, coeffs, fs)
        eq = lhs.equals(rhs)
    else:
        lhs = multi_average(X, coeffs, fs).limit
        eq = lhs.equals(rhs)
    res = LimitComparison(lhs, rhs, eq, coeffs, flags=list(H.flags))
    if mc_samples and isinstance(X, TorusSystem):
        res.mc_residual = monte_carlo_residual(X, coeffs, fs, lhs, rhs, mc_samples, seed, subs)
    return res


DEFAULT_SUBS = {"alpha": math.sqrt(2) - 1, "beta": math.sqrt(3) - 1}


def monte_carlo_residual(T: TorusSystem, coeffs, fs, lhs: TrigPoly, rhs: TrigPoly, N: int = 10**5,
                         seed: int = 0, subs=None, points: int = 3) -> float:
    """max over seeded points x of |orbit average at N - lhs(x)| and |sampled RHS integral - rhs(x)|."""
    subs = dict(DEFAULT_SUBS if subs is None else subs)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(points):
        x = rng.random(2)
        orbit = torus_window_average(T, coeffs, fs, N, x, subs, scheme="forward")
        worst = max(worst, abs(orbit - lhs.evaluate(x, subs)))
        str_ = rng.random((N, 3))
        acc = np.ones(N, dtype=np.complex128)
        for f, c in zip(fs, coeffs):
            u = x[0] + c * str_[:, 0]
            v = x[1] + c * str_[:, 1] + math.comb(c, 2) * str_[:, 2]
            val = np.zeros(N, dtype=np.complex128)
            for (m0, m1), coef in f.terms.items():
                val += coef.to_complex(subs) * np.exp(2j * np.pi * (m0 * u + m1 * v))
            acc *= val
        worst = max(worst, abs(acc.mean() - rhs.evaluate(x, subs)))
    return worst


# --- batched sweep on the skew model ---------------------------------------------------------

def skew_rhs_batch(coeffs, freqs: np.ndarray):
    """RHS survival for character products on the SkewCL model: returns (survives, out_freq)."""
    c = np.array(coeffs, dtype=np.int64)
    c2 = np.array([math.comb(int(a), 2) for a in coeffs], dtype=np.int64)
    mx = freqs[:, :, 0].astype(np.int64)
    my = freqs[:, :, 1].astype(np.int64)
    surv = ((mx @ c) == 0) & ((my @ c) == 0) & ((my @ c2) == 0)
    out = freqs.astype(np.int64).sum(axis=1)
    out[~surv] = 0
    return surv, out


@dataclass
class SweepRow:
    coeffs: tuple
    count: int
    lhs_survivors: int
    rhs_survivors: int
    mismatches: int
    scalar_checked: int
    scalar_mismatches: int


def skew_sweep(T: TorusSystem, max_abs: int = 3, patterns=((1,), (1, 2), (1, 2, 3), (1, 2, 3, 4)),
               chunk: int = 1 << 19, crosscheck: int = 200, seed: int = 0) -> list:
    """All character tuples with max-norm |m_i| <= max_abs: compare LHS and RHS term lists.

    The batch results are cross-checked against the scalar engines on a
    seeded sample of tuples (every survivor included up to the sample size).
    """
    rng = random.Random(seed)
    vals = np.arange(-max_abs, max_abs + 1, dtype=np.int64)
    single = np.array(list(itertools.product(vals, vals)), dtype=np.int64)   # (S, 2)
    S = len(single)
    rows = []
    H = homogeneous_system(SkewCLGroup(), None, [(T.translations[0][0], 1, T.translations[0][1])])
    for coeffs in patterns:
        k = len(coeffs)
        total = S ** k
        lhs_s = rhs_s = mism = 0
        sample = []
        for start in range(0, total, chunk):
            idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
            digits = np.empty((len(idx), k), dtype=np.int64)
            rem = idx.copy()
            for i in range(k - 1, -1, -1):
                digits[:, i] = rem % S
                rem //= S
            freqs = single[digits]                         # (M, k, 2)
            st, lout = torus_character_batch(T, coeffs, freqs)
            undecided = np.nonzero(st == -1)[0]
            for j in undecided:     # scalar fallback (not expected on the skew model)
                L = torus_limit(T, coeffs, [TrigPoly.character(tuple(map(int, m))) for m in freqs[j]])
                st[j] = 1 if L.terms else 0
                if L.terms:
                    (m, _), = L.terms.items()
                    lout[j] = m
            rs, rout = skew_rhs_batch(coeffs, freqs)
            ls = st == 1
            lhs_s += int(ls.sum())
            rhs_s += int(rs.sum())
            mism += int(np.sum((ls != rs) | np.any(lout != rout, axis=1)))
            surv_idx = np.nonzero(ls | rs)[0]
            if len(sample) < crosscheck // 2 and len(surv_idx):
                take = surv_idx[: crosscheck // 2 - len(sample)]
                sample.extend(freqs[take].tolist())
            for _ in range(max(0, min(crosscheck - len(sample), 4))):
                sample.append(freqs[rng.randrange(len(idx))].tolist())
        scal_bad = 0
        for m in sample[:crosscheck]:
            fs = [TrigPoly.character(tuple(mi)) for mi in m]
            arr = np.array([m], dtype=np.int64)
            st, lout = torus_character_batch(T, coeffs, arr)
            rs, rout = skew_rhs_batch(coeffs, arr)
            Ls = torus_limit(T, coeffs, fs)
            Rs = limit_formula_rhs(H, fs, coeffs=coeffs)
            exp_l = TrigPoly.character(tuple(map(int, lout[0]))) if st[0] == 1 else TrigPoly()
            exp_r = TrigPoly.character(tuple(map(int, rout[0]))) if rs[0] else TrigPoly()
            scal_bad += (not Ls.equals(exp_l)) + (not Rs.equals(exp_r))
        rows.append(SweepRow(tuple(coeffs), total, lhs_s, rhs_s, mism, min(len(sample), crosscheck), scal_bad))
    return rows


# --- the counterexample -----------------------------------------------------------------------

@dataclass
class CounterexampleReport:
    d: int
    lhs: PointFunction
    rhs: PointFunction
    f2: PointFunction
    lhs_equals_f2: bool
    rhs_zero: bool
    discrepancy: Fraction          # sup |lhs - rhs|
    g2: list                       # commutator group used on the right-hand side
    divisible_by_2: bool
    cl_cross_reference: dict | None = None

    def to_dict(self) -> dict:
        return {"d": self.d, "lhs": self.lhs.to_list(), "rhs": self.rhs.to_list(),
                "lhs_equals_f2": self.lhs_equals_f2, "rhs_zero": self.rhs_zero,
                "discrepancy": str(self.discrepancy), "g2": [list(u) for u in self.g2],
                "divisible_by_2": self.divisible_by_2, "cl_cross_reference": self.cl_cross_reference}


def counterexample_f2(d: int, cross_reference: bool | None = None) -> CounterexampleReport:
    """The limit formula with f1 = 1, f2 = e(u/4) on the F_2^d extension by C_4.

    G_2 is the subgroup {0, 2} of C_4 (isomorphic to C_2), acting by vertical
    rotation.  Since 2g = 0 in F_2^d the left side is f2 itself, while the
    G_2-average of f2 vanishes at every point, so the right side is 0.
    """
    if not 2 <= d <= 10:
        raise ValueError("2 <= d <= 10")
    rho = counterexample_cocycle(d)
    Y, _ = abelian_extension(rho.system, rho.target, rho)
    U = rho.target
    us = U.elements()
    f1 = PointFunction.constant(Y.n)
    f2 = PointFunction(tuple(ExactComplex.e(Phase(Fraction(u[0], 4))) for _, u in Y.points))
    lhs = multi_average(Y, (1, 2), [f1, f2]).limit
    g2 = [(0,), (2,)]
    # y1 ranges over the group generated by the action and the vertical rotations (inside the CL group)
    vert = [cl_permutation(rho, rho.system.group.zero, tuple(u for _ in range(rho.system.n))) for u in us]
    gens = list(Y.action) + vert
    Gfin = FiniteNilGroup.from_permutations(gens)
    center = [cl_permutation(rho, rho.system.group.zero, tuple(u for _ in range(rho.system.n))) for u in g2]
    rhs = _perm_rhs(Gfin, center, [f1, f2], (1, 2), Y.n)
    diff = lhs - rhs
    disc = max(diff[i].abs2().as_fraction() for i in range(Y.n))
    xr = None
    if cross_reference is None:
        cross_reference = d == 2
    if cross_reference:
        rep = cl_group(rho)
        full = FiniteNilGroup.from_permutations([cl_permutation(rho, e.s, e.F) for e in rep.generators])
        rhs_full = _perm_rhs(full, center, [f1, f2], (1, 2), Y.n)
        xr = {"commutator_invariants": list(rep.commutator_invariants), "transitive": rep.transitive,
              "commutator_elements": [list(u) for u in rep.commutator_elements],
              "rhs_with_full_group_zero": all(v.is_zero() for v in rhs_full)}
    return CounterexampleReport(d, lhs, rhs, f2, lhs.equals(f2), all(v.is_zero() for v in rhs),
                                Fraction(math.isqrt(disc.numerator), math.isqrt(disc.denominator))
                                if _is_square(disc) else disc,
                                g2, commutator_divisibility(AbGroup(0, (2,)), [2])[2], xr)


def _is_square(q: Fraction) -> bool:
    return math.isqrt(q.numerator) ** 2 == q.numerator and math.isqrt(q.denominator) ** 2 == q.denominator


def _perm_rhs(G: FiniteNilGroup, center, fs, coeffs, n, base: int = 0) -> PointFunction:
    """E_{y1 in G} E_{y2 in center} prod f_i(y1^{c_i} y2^{binom(c_i,2)} . x) at every point x."""
    out = []
    pw1 = [[G.power(y, c) for c in coeffs] for y in G.elements]
    pw2 = [[perm_power(z, math.comb(c, 2)) for c in coeffs] for z in center]
    for x in range(n):
        acc = ZERO
        for p1 in pw1:
            for p2 in pw2:
                v = ONE
                for i, f in enumerate(fs):
                    v = v * f[p2[i][p1[i][x]]]
                acc = acc + v
        out.append(acc * Fraction(1, len(pw1) * len(pw2)))
    return PointFunction(tuple(out))
