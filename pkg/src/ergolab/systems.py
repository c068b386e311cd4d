"""Measure-preserving G-systems.

Finite systems are permutation actions of a finitely generated abelian group on
a weighted finite set.  A finite ergodic system of an abelian group is always a
group rotation (a transitive abelian permutation group acts regularly), so
genuinely higher-order behaviour lives on :class:`TorusSystem`, the affine
unipotent actions on tori, and on non-ergodic finite truncations.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .abgroup import AbGroup, quotient_group
from .phases import (ZERO, ExactComplex, Phase, PhasePolynomial, binomial_in_n,
                     phase_times_rational_poly, ZERO_PHASE)

CUBE_CAP = 10**6


# --- permutations ------------------------------------------------------------------

def compose(p, q) -> tuple:
    """(p o q)[i] = p[q[i]]."""
    return tuple(p[i] for i in q)


def inverse(p) -> tuple:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def perm_power(p, m: int) -> tuple:
    if m < 0:
        p, m = inverse(p), -m
    out = tuple(range(len(p)))
    base = tuple(p)
    while m:
        if m & 1:
            out = compose(base, out)
        base = compose(base, base)
        m >>= 1
    return out


# --- observables on finite systems ---------------------------------------------------

def _coerce_value(v) -> ExactComplex:
    return ExactComplex.coerce(Fraction(v) if isinstance(v, str) else v)


@dataclass(frozen=True, eq=False)
class PointFunction:
    """A function on the points of a finite system, one ExactComplex per point."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(_coerce_value(v) for v in self.values))

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i) -> ExactComplex:
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    def __add__(self, o):
        if isinstance(o, PointFunction):
            return PointFunction(tuple(a + b for a, b in zip(self.values, o.values)))
        return PointFunction(tuple(a + o for a in self.values))

    def __sub__(self, o):
        if isinstance(o, PointFunction):
            return PointFunction(tuple(a - b for a, b in zip(self.values, o.values)))
        return PointFunction(tuple(a - o for a in self.values))

    def __mul__(self, o):
        if isinstance(o, PointFunction):
            return PointFunction(tuple(a * b for a, b in zip(self.values, o.values)))
        return PointFunction(tuple(a * o for a in self.values))

    __rmul__ = __mul__

    def conj(self) -> "PointFunction":
        return PointFunction(tuple(a.conj() for a in self.values))

    def compose(self, perm) -> "PointFunction":
        """x -> f(perm[x]), i.e. T f when perm is T."""
        return PointFunction(tuple(self.values[j] for j in perm))

    def equals(self, o: "PointFunction") -> bool:
        return all(a == b for a, b in zip(self.values, o.values))

    def rational_values(self):
        out = [v.as_fraction() for v in self.values]
        return None if any(v is None for v in out) else out

    @cached_property
    def sup_bound(self) -> float:
        r = self.rational_values()
        if r is not None:
            return float(max((abs(x) for x in r), default=0))
        return max((abs(v.to_complex()) for v in self.values), default=0.0)

    def to_list(self) -> list:
        r = self.rational_values()
        if r is not None:
            return [str(x) for x in r]
        return [v.to_dict() for v in self.values]

    @classmethod
    def constant(cls, n: int, c=1) -> "PointFunction":
        return cls((c,) * n)

    @classmethod
    def indicator(cls, n: int, points) -> "PointFunction":
        s = set(points)
        return cls(tuple(1 if i in s else 0 for i in range(n)))


# --- finite systems -----------------------------------------------------------------

@dataclass(frozen=True)
class RotationData:
    group: AbGroup    # K
    phi: tuple        # images of the canonical generators of G in K


@dataclass(frozen=True, eq=False)
class FiniteSystem:
    group: AbGroup
    points: tuple
    weights: tuple
    action: tuple                 # one permutation per canonical generator of group
    rotation: RotationData | None = None

    def __post_init__(self):
        n = len(self.points)
        w = tuple(Fraction(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "action", tuple(tuple(p) for p in self.action))
        if len(w) != n or n == 0:
            raise ValueError("one positive weight per point required")
        if any(x <= 0 for x in w) or sum(w) != 1:
            raise ValueError("weights must be positive and sum to 1")
        if len(self.action) != self.group.rank:
            raise ValueError("one permutation per group generator required")
        ident = tuple(range(n))
        for p in self.action:
            if sorted(p) != list(ident):
                raise ValueError("action entries must be permutations")
            if any(w[p[i]] != w[i] for i in range(n)):
                raise ValueError("a generator does not preserve the measure")
        for p, q in itertools.combinations(self.action, 2):
            if compose(p, q) != compose(q, p):
                raise ValueError("generator permutations do not commute")
        for p, d in zip(self.action, self.group.moduli):
            if d and perm_power(p, d) != ident:
                raise ValueError(f"relation {d}*g = 0 is not respected")

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def _index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    def index(self, label) -> int:
        return self._index[label]

    def perm(self, g) -> tuple:
        """T_g as a permutation of point indices."""
        out = tuple(range(self.n))
        for p, c in zip(self.action, g):
            if c:
                out = compose(perm_power(p, c), out)
        return out

    @cached_property
    def inverse_action(self) -> tuple:
        return tuple(inverse(p) for p in self.action)

    @cached_property
    def image_group(self) -> list:
        """All permutations T_g, g in G (a finite abelian group K), in BFS order."""
        ident = tuple(range(self.n))
        seen = {ident: 0}
        order = [ident]
        q = deque([ident])
        while q:
            t = q.popleft()
            for p in self.action:
                u = compose(p, t)
                if u not in seen:
                    seen[u] = len(order)
                    order.append(u)
                    q.append(u)
        return order

    @cached_property
    def orbits(self) -> list:
        seen = [-1] * self.n
        out = []
        for s in range(self.n):
            if seen[s] >= 0:
                continue
            comp = [s]
            seen[s] = len(out)
            q = deque([s])
            while q:
                x = q.popleft()
                for p in self.action:
                    y = p[x]
                    if seen[y] < 0:
                        seen[y] = len(out)
                        comp.append(y)
                        q.append(y)
            out.append(sorted(comp))
        return out

    def is_ergodic(self) -> bool:
        return len(self.orbits) == 1

    @cached_property
    def _cubes(self) -> dict:
        return {}

    # integration
    def mean(self, f) -> ExactComplex:
        total = ZERO
        for w, v in zip(self.weights, f):
            total = total + v * w
        return total

    def inner(self, f, h) -> ExactComplex:
        total = ZERO
        for w, a, b in zip(self.weights, f, h):
            total = total + a * b.conj() * w
        return total

    def norm2(self, f) -> ExactComplex:
        return self.inner(f, f)

    def invariant_projection(self, f) -> PointFunction:
        """E(f | invariant sets): weighted average over each orbit."""
        out = [None] * self.n
        for orb in self.orbits:
            m = sum(self.weights[i] for i in orb)
            avg = ZERO
            for i in orb:
                avg = avg + f[i] * self.weights[i]
            avg = avg * (1 / m)
            for i in orb:
                out[i] = avg
        return PointFunction(tuple(out))

    def to_dict(self) -> dict:
        def lab(p):
            return list(lab(x) for x in p) if isinstance(p, tuple) else p
        d = {"group": self.group.to_dict(), "points": [lab(p) for p in self.points],
             "weights": [str(w) for w in self.weights], "action": [list(p) for p in self.action]}
        if self.rotation:
            d["rotation"] = {"group": self.rotation.group.to_dict(), "phi": [list(x) for x in self.rotation.phi]}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FiniteSystem":
        def lab(p):
            return tuple(lab(x) for x in p) if isinstance(p, list) else p
        rot = None
        if d.get("rotation"):
            rot = RotationData(AbGroup.from_dict(d["rotation"]["group"]),
                               tuple(tuple(x) for x in d["rotation"]["phi"]))
        return cls(AbGroup.from_dict(d["group"]), tuple(lab(p) for p in d["points"]),
                   tuple(Fraction(w) for w in d["weights"]), tuple(tuple(p) for p in d["action"]), rot)


@dataclass(frozen=True)
class FactorMap:
    source: FiniteSystem
    target: FiniteSystem
    point_map: tuple
    group_map: tuple | None = None   # images in target.group of the source generators

    def verify(self) -> bool:
        S, T = self.source, self.target
        push = [Fraction(0)] * T.n
        for i, j in enumerate(self.point_map):
            push[j] += S.weights[i]
        if tuple(push) != T.weights:
            return False
        hom = self.group_map or T.group.generators()
        for p, h in zip(S.action, hom):
            q = T.perm(h)
            if any(self.point_map[p[i]] != q[self.point_map[i]] for i in range(S.n)):
                return False
        return True

    def pullback(self, f) -> PointFunction:
        return PointFunction(tuple(f[j] for j in self.point_map))

    def is_bijective(self) -> bool:
        return sorted(self.point_map) == list(range(self.target.n))


def rotation_system(K: AbGroup, phi, G: AbGroup | None = None) -> FiniteSystem:
    """Translation action g.k = k + phi(g) on a finite group K with Haar measure."""
    if not K.is_finite():
        raise ValueError("rotation_system needs a finite K")
    phi = tuple(K.reduce(x) for x in phi)
    G = G if G is not None else AbGroup(len(phi))
    if len(phi) != G.rank:
        raise ValueError("phi needs one image per generator of G")
    for x, d in zip(phi, G.moduli):
        if d and K.mul(d, x) != K.zero:
            raise ValueError("phi is not a homomorphism: a torsion relation fails")
    pts = K.elements()
    idx = {p: i for i, p in enumerate(pts)}
    action = tuple(tuple(idx[K.add(p, x)] for p in pts) for x in phi)
    w = Fraction(1, len(pts))
    return FiniteSystem(G, tuple(pts), (w,) * len(pts), action, RotationData(K, phi))


def abelian_extension(X: FiniteSystem, U: AbGroup, rho):
    """Y = X x_rho U with S_g(x,u) = (T_g x, rho(g,x) + u); returns (Y, factor map to X)."""
    from .cocycles import validate_cocycle
    bad = validate_cocycle(rho)
    if bad is not None:
        raise ValueError(f"invalid cocycle: {bad}")
    us = U.elements()
    nu = len(us)
    uidx = {u: i for i, u in enumerate(us)}
    pts, wts = [], []
    for x, w in zip(X.points, X.weights):
        for u in us:
            pts.append((x, u))
            wts.append(w / nu)
    action = []
    for j, p in enumerate(X.action):
        vals = rho.values[j]
        action.append(tuple(p[i] * nu + uidx[U.add(vals[i], u)] for i in range(X.n) for u in us))
    Y = FiniteSystem(X.group, tuple(pts), tuple(wts), tuple(action))
    return Y, FactorMap(Y, X, tuple(i for i in range(X.n) for _ in us))


def ergodic_components(X: FiniteSystem):
    """(list of component systems, map point -> (component, local index))."""
    comps, cmap = [], [None] * X.n
    for c, orb in enumerate(X.orbits):
        loc = {p: i for i, p in enumerate(orb)}
        m = sum(X.weights[i] for i in orb)
        for p in orb:
            cmap[p] = (c, loc[p])
        action = tuple(tuple(loc[p[i]] for i in orb) for p in X.action)
        comps.append(FiniteSystem(X.group, tuple(X.points[i] for i in orb),
                                  tuple(X.weights[i] / m for i in orb), action))
    return comps, cmap


def kronecker_factor(X: FiniteSystem):
    """An ergodic finite system is a rotation of K = G/stabilizer; return it and the isomorphism."""
    if not X.is_ergodic():
        raise ValueError("kronecker_factor needs an ergodic system")
    n = X.group.rank
    words = {0: (0,) * n}
    q = deque([0])
    relations = []
    while q:
        x = q.popleft()
        for j, p in enumerate(X.action):
            y = p[x]
            step = tuple(a + (1 if i == j else 0) for i, a in enumerate(words[x]))
            if y not in words:
                words[y] = step
                q.append(y)
            else:
                relations.append(tuple(a - b for a, b in zip(step, words[y])))
    K, coords = quotient_group(n, relations)
    if K.order != X.n:
        raise AssertionError("transitive abelian action is not regular")
    phi = tuple(coords(tuple(int(i == j) for i in range(n))) for j in range(n))
    R = rotation_system(K, phi, X.group)
    pmap = tuple(R.index(coords(words[i])) for i in range(X.n))
    F = FactorMap(X, R, pmap)
    assert F.is_bijective() and F.verify()
    return R, F


# --- cubic spaces --------------------------------------------------------------------

def _diag_orbits(tuples, perms, index):
    seen = [-1] * len(tuples)
    orbits = []
    for s in range(len(tuples)):
        if seen[s] >= 0:
            continue
        seen[s] = len(orbits)
        orb = [s]
        q = deque([s])
        while q:
            t = tuples[q.popleft()]
            for p in perms:
                u = index[tuple(p[i] for i in t)]
                if seen[u] < 0:
                    seen[u] = len(orbits)
                    orb.append(u)
                    q.append(u)
        orbits.append(orb)
    return orbits


@dataclass(frozen=True, eq=False)
class CubicSpace:
    """The support of mu^[k] on X^[k]; tuples are indexed by omega in {0,1}^k
    (bit j of the position is omega_j; the top bit separates the two copies)."""

    base: FiniteSystem
    k: int
    tuples: tuple
    masses: tuple

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.tuples, dtype=np.int64).reshape(len(self.tuples), 2 ** self.k)

    @cached_property
    def as_system(self) -> FiniteSystem:
        idx = {t: i for i, t in enumerate(self.tuples)}
        action = tuple(tuple(idx[tuple(p[i] for i in t)] for t in self.tuples) for p in self.base.action)
        return FiniteSystem(self.base.group, self.tuples, self.masses, action)

    def side_transform(self, g, face: int) -> tuple:
        """Apply T_g to the coordinates with omega_face = 1; returns the permuted tuple list."""
        p = self.base.perm(g)
        return tuple(tuple(p[x] if (w >> face) & 1 else x for w, x in enumerate(t)) for t in self.tuples)

    def conditional_expectation(self, f) -> list:
        """E(f | I_k) for a function f on the support (list indexed like tuples)."""
        S = self.as_system
        return list(S.invariant_projection(PointFunction(tuple(f))).values)


def cubic_support_size(X: FiniteSystem, k: int) -> int:
    """|supp mu^[k]|, computed level by level without materializing the last level."""
    tuples = [(i,) for i in range(X.n)]
    size = len(tuples)
    for level in range(k):
        index = {t: i for i, t in enumerate(tuples)}
        orbits = _diag_orbits(tuples, X.action, index)
        size = sum(len(o) ** 2 for o in orbits)
        if level == k - 1:
            break
        if size > CUBE_CAP:
            return size
        tuples = [tuples[a] + tuples[b] for o in orbits for a in o for b in o]
    return size


def cubic_space(X: FiniteSystem, k: int, cap: int = CUBE_CAP) -> CubicSpace:
    if not 0 <= k <= 3:
        raise ValueError("cubic spaces are built for k <= 3")
    if k in X._cubes:
        return X._cubes[k]
    tuples = [(i,) for i in range(X.n)]
    masses = list(X.weights)
    for _ in range(k):
        index = {t: i for i, t in enumerate(tuples)}
        orbits = _diag_orbits(tuples, X.action, index)
        size = sum(len(o) ** 2 for o in orbits)
        if size > cap:
            raise ValueError(f"cubic support of size {size} exceeds the cap {cap}")
        nt, nm = [], []
        for o in orbits:
            mo = sum(masses[i] for i in o)
            for a in o:
                for b in o:
                    nt.append(tuples[a] + tuples[b])
                    nm.append(masses[a] * masses[b] / mo)
        tuples, masses = nt, nm
    C = CubicSpace(X, k, tuple(tuples), tuple(masses))
    X._cubes[k] = C
    return C


def dual_function(C: CubicSpace, b) -> PointFunction:
    """D_k(b)(x) = conditional integral of prod_{omega != 0} C^{|omega|} b(x_omega) given x_0 = x."""
    X = C.base
    acc = [ZERO] * X.n
    bc = [v.conj() for v in b]
    for t, m in zip(C.tuples, C.masses):
        prod = ExactComplex.from_rational(m)
        for w in range(1, len(t)):
            prod = prod * (bc[t[w]] if bin(w).count("1") % 2 else b[t[w]])
            if prod.is_zero():
                break
        acc[t[0]] = acc[t[0]] + prod
    return PointFunction(tuple(a * (1 / X.weights[i]) for i, a in enumerate(acc)))


def _indicator_dual(C: CubicSpace, p: int) -> list:
    X = C.base
    acc = [Fraction(0)] * X.n
    for t, m in zip(C.tuples, C.masses):
        if all(x == p for x in t[1:]):
            acc[t[0]] += m
    return [a / X.weights[i] for i, a in enumerate(acc)]


def host_kra_projection(X: FiniteSystem, k: int, f, check: bool = True) -> PointFunction:
    """E(f | Z_{<k}) as the projection onto the span of level-k dual functions."""
    f = f if isinstance(f, PointFunction) else PointFunction(tuple(f))
    if k < 1 or k > 3:
        raise ValueError("k must be 1, 2 or 3")
    if X.n <= 64:
        C = cubic_space(X, k)
        basis = []  # orthogonal (unnormalized) rational vectors
        for p in range(X.n):
            v = _indicator_dual(C, p)
            for u, uu in basis:
                c = sum(w * a * b for w, a, b in zip(X.weights, v, u)) / uu
                if c:
                    v = [a - c * b for a, b in zip(v, u)]
            vv = sum(w * a * a for w, a in zip(X.weights, v))
            if vv:
                basis.append((v, vv))
        out = [ZERO] * X.n
        for u, uu in basis:
            c = ZERO
            for w, a, b in zip(X.weights, f, u):
                if b:
                    c = c + a * (w * b)
            c = c * (1 / uu)
            if c:
                out = [o + c * b for o, b in zip(out, u)]
        P = PointFunction(tuple(out))
    else:
        # character basis: for k >= 2 the characters of each ergodic component
        # already span L^2, and for k = 1 only the orbit means survive
        P = X.invariant_projection(f) if k == 1 else f
    if check:
        from .averages import ghk_seminorm
        r = ghk_seminorm(X, f - P, k, compare=False)
        if not ExactComplex.coerce(r).is_zero():
            raise AssertionError("residual has nonzero U^k seminorm")
    return P


# --- torus systems -----------------------------------------------------------------

def _matmul(A, B):
    return tuple(tuple(sum(A[i][t] * B[t][j] for t in range(len(B))) for j in range(len(B[0])))
                 for i in range(len(A)))


def _rowvec_mat(v, A):
    return tuple(sum(v[i] * A[i][j] for i in range(len(v))) for j in range(len(A[0])))


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """sum_m c_m e(m . x) on a torus, with exact (possibly symbolic) coefficients."""

    terms: dict = field(default_factory=dict)   # frequency tuple -> ExactComplex

    def __post_init__(self):
        clean = {}
        for m, c in self.terms.items():
            c = ExactComplex.coerce(c)
            if not c.is_zero():
                clean[tuple(int(x) for x in m)] = c
        object.__setattr__(self, "terms", clean)

    @classmethod
    def character(cls, m, coeff=1) -> "TrigPoly":
        return cls({tuple(m): ExactComplex.coerce(coeff)})

    @classmethod
    def constant(cls, dim: int, c=1) -> "TrigPoly":
        return cls({(0,) * dim: ExactComplex.coerce(c)})

    def __add__(self, o: "TrigPoly") -> "TrigPoly":
        t = dict(self.terms)
        for m, c in o.terms.items():
            t[m] = t[m] + c if m in t else c
        return TrigPoly(t)

    def __sub__(self, o):
        return self + o * (-1)

    def __mul__(self, o) -> "TrigPoly":
        if not isinstance(o, TrigPoly):
            return TrigPoly({m: c * o for m, c in self.terms.items()})
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                v = c1 * c2
                t[m] = t[m] + v if m in t else v
        return TrigPoly(t)

    __rmul__ = __mul__

    def conj(self) -> "TrigPoly":
        return TrigPoly({tuple(-a for a in m): c.conj() for m, c in self.terms.items()})

    def mean(self) -> ExactComplex:
        for m, c in self.terms.items():
            if not any(m):
                return c
        return ZERO

    def equals(self, o: "TrigPoly") -> bool:
        d = self - o
        return not d.terms

    def sorted_terms(self) -> list:
        return sorted(self.terms.items())

    def evaluate(self, x, subs: dict | None = None) -> complex:
        z = 0j
        for m, c in self.terms.items():
            z += c.to_complex(subs) * np.exp(2j * np.pi * sum(a * b for a, b in zip(m, x)))
        return complex(z)

    @classmethod
    def from_exact(cls, value: ExactComplex, coord_symbols) -> "TrigPoly":
        """Split the coordinate symbols out of an ExactComplex into frequencies."""
        coord = set(coord_symbols)
        terms: dict = {}
        for key, cyc in value.parts.items():
            m = [0] * len(coord_symbols)
            rest = []
            for s, c in key:
                if s in coord:
                    if c.denominator != 1:
                        raise ValueError("non-integral frequency")
                    m[coord_symbols.index(s)] = int(c)
                else:
                    rest.append((s, c))
            piece = ExactComplex({tuple(rest): cyc})
            mt = tuple(m)
            terms[mt] = terms[mt] + piece if mt in terms else piece
        return cls(terms)

    def to_list(self) -> list:
        return [{"m": list(m), "c": c.to_dict()} for m, c in self.sorted_terms()]


@dataclass(frozen=True, eq=False)
class TorusSystem:
    """Z^r acting on T^d by x -> A_j x + b_j (A_j unipotent integer matrices)."""

    dim: int
    matrices: tuple
    translations: tuple

    def __post_init__(self):
        M = tuple(tuple(tuple(int(a) for a in row) for row in A) for A in self.matrices)
        B = tuple(tuple(p if isinstance(p, Phase) else Phase(p) for p in b) for b in self.translations)
        object.__setattr__(self, "matrices", M)
        object.__setattr__(self, "translations", B)
        d = self.dim
        if len(M) != len(B) or not M:
            raise ValueError("one matrix and one translation per generator")
        for A, b in zip(M, B):
            if len(A) != d or any(len(r) != d for r in A) or len(b) != d:
                raise ValueError("shape mismatch")
            N = tuple(tuple(A[i][j] - (i == j) for j in range(d)) for i in range(d))
            P = N
            for _ in range(d - 1):
                P = _matmul(P, N)
            if any(any(r) for r in P):
                raise ValueError("matrix is not unipotent")
        for (A, b), (C, c) in itertools.combinations(zip(M, B), 2):
            if _matmul(A, C) != _matmul(C, A):
                raise ValueError("generators do not commute")
            # A c + b == C b + c as phases
            lhs = [sum((c[j] * A[i][j] for j in range(d)), ZERO_PHASE) + b[i] for i in range(d)]
            rhs = [sum((b[j] * C[i][j] for j in range(d)), ZERO_PHASE) + c[i] for i in range(d)]
            if lhs != rhs:
                raise ValueError("generators do not commute")

    @property
    def group(self) -> AbGroup:
        return AbGroup(len(self.matrices))

    @property
    def coord_symbols(self) -> tuple:
        return tuple(f"x{i}" for i in range(self.dim))

    def transform(self, f: TrigPoly, j: int = 0) -> TrigPoly:
        """T_j f = f o T_j."""
        A, b = self.matrices[j], self.translations[j]
        out = {}
        for m, c in f.terms.items():
            mA = _rowvec_mat(m, A)
            shift = sum((b[i] * m[i] for i in range(self.dim)), ZERO_PHASE)
            out[mA] = c * ExactComplex.e(shift)
        return TrigPoly(out)

    def orbit_polynomial(self, m, a: int = 1) -> PhasePolynomial:
        """n -> m . T^{a n} x as a PhasePolynomial, x entering through coordinate symbols."""
        if len(self.matrices) != 1:
            raise NotImplementedError("orbit polynomials are implemented for Z-actions")
        A, b = self.matrices[0], self.translations[0]
        d = self.dim
        N = tuple(tuple(A[i][j] - (i == j) for j in range(d)) for i in range(d))
        poly = PhasePolynomial((ZERO_PHASE,))
        v = tuple(int(x) for x in m)
        j = 0
        syms = self.coord_symbols
        while any(v):
            xpart = Phase(0, {syms[i]: v[i] for i in range(d) if v[i]})
            bpart = sum((b[i] * v[i] for i in range(d)), ZERO_PHASE)
            poly = poly + phase_times_rational_poly(xpart, binomial_in_n(a, j))
            poly = poly + phase_times_rational_poly(bpart, binomial_in_n(a, j + 1))
            v = _rowvec_mat(v, N)
            j += 1
        return poly

    def is_eigenfunction(self, m) -> bool:
        """e(m.x) is an eigenfunction iff m (A_j - I) = 0 for every generator."""
        for A in self.matrices:
            mA = _rowvec_mat(m, A)
            if tuple(mA) != tuple(m):
                return False
        return True

    def to_dict(self) -> dict:
        return {"dim": self.dim, "matrices": [[list(r) for r in A] for A in self.matrices],
                "translations": [[p.to_dict() for p in b] for b in self.translations]}

    @classmethod
    def from_dict(cls, d: dict) -> "TorusSystem":
        return cls(d["dim"], tuple(tuple(tuple(r) for r in A) for A in d["matrices"]),
                   tuple(tuple(Phase.from_dict(p) for p in b) for b in d["translations"]))


def skew_product(alpha: Phase, beta: Phase, allow_rational: bool = False) -> TorusSystem:
    """T(x, y) = (x + alpha, y + x + beta) on T^2."""
    if not alpha.sym and not allow_rational:
        raise ValueError("alpha must carry an irrational symbol (rational alpha is not ergodic)")
    return TorusSystem(2, (((1, 0), (1, 1)),), ((alpha, beta),))


def is_skew_product(T: TorusSystem) -> bool:
    return T.dim == 2 and T.matrices == (((1, 0), (1, 1)),) and bool(T.translations[0][0].sym)


def host_kra_projection_torus(T: TorusSystem, k: int, f: TrigPoly) -> TrigPoly:
    """E(f | Z_{<k}) on a skew product: k=1 keeps the mean, k=2 the zero fiber
    frequencies, k>=3 everything."""
    if not is_skew_product(T):
        raise ValueError("torus projection is implemented for skew products")
    if k == 1:
        return TrigPoly({m: c for m, c in f.terms.items() if not any(m)})
    if k == 2:
        return TrigPoly({m: c for m, c in f.terms.items() if m[1] == 0})
    return f
