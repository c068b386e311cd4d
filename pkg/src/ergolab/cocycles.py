"""Cocycles into finite abelian groups and their cohomology.

Values are written additively: rho(g, x) is an element of the finite group U,
and the cocycle identity reads rho(g + g', x) = rho(g, x) + rho(g', T_g x).
Delta_g always differentiates along the G-action, Delta_s (for s in a
rotation group Z) along the translation V_s z = z + s; each function says
which one it uses.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .abgroup import AbGroup, homomorphisms, solve_group_linear, subgroup
from .phases import ExactComplex, Phase
from .systems import (FiniteSystem, PointFunction, TorusSystem, TrigPoly, compose, cubic_space,
                      inverse, rotation_system, _rowvec_mat)


@dataclass(frozen=True, eq=False)
class Cocycle:
    """values[j][x] = rho(e_j, x) for the canonical generators e_j of G."""

    system: FiniteSystem
    target: AbGroup
    values: tuple

    def __post_init__(self):
        X, U = self.system, self.target
        if not U.is_finite():
            raise ValueError("cocycle targets must be finite groups")
        if len(self.values) != X.group.rank:
            raise ValueError("one value table per generator required")
        vals = tuple(tuple(U.reduce(v) for v in row) for row in self.values)
        if any(len(row) != X.n for row in vals):
            raise ValueError("value tables must cover every point")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, X: FiniteSystem, U: AbGroup, fn) -> "Cocycle":
        """fn(j, point_index) -> element of U."""
        return cls(X, U, tuple(tuple(fn(j, x) for x in range(X.n)) for j in range(X.group.rank)))

    @classmethod
    def coboundary(cls, X: FiniteSystem, U: AbGroup, F) -> "Cocycle":
        """Delta_g F(x) = F(T_g x) - F(x)."""
        return cls(X, U, tuple(tuple(U.sub(F[p[x]], F[x]) for x in range(X.n)) for p in X.action))

    @classmethod
    def constant(cls, X: FiniteSystem, U: AbGroup, c) -> "Cocycle":
        """rho(e_j, x) = c[j]."""
        return cls(X, U, tuple(tuple(U.reduce(cj) for _ in range(X.n)) for cj in c))

    def __add__(self, o: "Cocycle") -> "Cocycle":
        U = self.target
        return Cocycle(self.system, U, tuple(tuple(U.add(a, b) for a, b in zip(r, s))
                                             for r, s in zip(self.values, o.values)))

    def __neg__(self) -> "Cocycle":
        U = self.target
        return Cocycle(self.system, U, tuple(tuple(U.neg(a) for a in r) for r in self.values))

    def __sub__(self, o: "Cocycle") -> "Cocycle":
        return self + (-o)

    def value(self, g, x: int):
        """rho(g, x) for any g in G, by walking generator steps."""
        X, U = self.system, self.target
        acc = U.zero
        for j, c in enumerate(g):
            p = X.action[j]
            if c > 0:
                for _ in range(c):
                    acc = U.add(acc, self.values[j][x])
                    x = p[x]
            elif c < 0:
                q = inverse(p)
                for _ in range(-c):
                    x = q[x]
                    acc = U.sub(acc, self.values[j][x])
        return acc

    def map_values(self, U2: AbGroup, fn) -> "Cocycle":
        return Cocycle(self.system, U2, tuple(tuple(fn(v) for v in row) for row in self.values))

    def to_dict(self) -> dict:
        return {"target": self.target.to_dict(), "values": [[list(v) for v in row] for row in self.values]}


@dataclass(frozen=True)
class CocycleViolation:
    g: tuple
    g_prime: tuple
    x: int
    expected: tuple
    got: tuple


def validate_cocycle(rho: Cocycle):
    """None if rho is a cocycle, else the first violating (g, g', x)."""
    X, U = rho.system, rho.target
    G = X.group
    gens = G.generators()
    for i, j in itertools.combinations(range(G.rank), 2):
        pi, pj = X.action[i], X.action[j]
        for x in range(X.n):
            a = U.add(rho.values[i][x], rho.values[j][pi[x]])
            b = U.add(rho.values[j][x], rho.values[i][pj[x]])
            if a != b:
                return CocycleViolation(gens[i], gens[j], x, b, a)
    for j, d in enumerate(G.moduli):
        if not d:
            continue
        p = X.action[j]
        for x in range(X.n):
            acc, y = U.zero, x
            for _ in range(d):
                acc = U.add(acc, rho.values[j][y])
                y = p[y]
            if acc != U.zero:
                gp = tuple((d - 1) if t == j else 0 for t in range(G.rank))
                return CocycleViolation(gens[j], gp, x, U.zero, acc)
    return None


# --- coboundaries ------------------------------------------------------------------

@dataclass(frozen=True)
class CycleObstruction:
    """A closed walk in the orbit graph along which rho sums to a nonzero value.

    steps: (point, generator index, +1/-1) in walking order.
    """

    steps: tuple
    value: tuple


def _spanning_tree(rho: Cocycle):
    X, U = rho.system, rho.target
    F = [None] * X.n
    parent = [None] * X.n   # (previous point, generator index, direction)
    for root in range(X.n):
        if F[root] is not None:
            continue
        F[root] = U.zero
        q = deque([root])
        while q:
            x = q.popleft()
            for j, p in enumerate(X.action):
                y = p[x]
                if F[y] is None:
                    F[y] = U.add(F[x], rho.values[j][x])
                    parent[y] = (x, j, 1)
                    q.append(y)
            for j, p in enumerate(X.action):
                y = X.inverse_action[j][x]
                if F[y] is None:
                    F[y] = U.sub(F[x], rho.values[j][y])
                    parent[y] = (x, j, -1)
                    q.append(y)
    return F, parent


def _path_to_root(parent, x):
    steps = []
    while parent[x] is not None:
        prev, j, d = parent[x]
        steps.append((prev, j, d))
        x = prev
    return steps[::-1]


def coboundary_obstruction(rho: Cocycle):
    """None if rho is a coboundary, else a CycleObstruction certificate."""
    X, U = rho.system, rho.target
    F, parent = _spanning_tree(rho)
    for j, p in enumerate(X.action):
        for x in range(X.n):
            y = p[x]
            if U.sub(F[y], F[x]) != rho.values[j][x]:
                down = _path_to_root(parent, x)
                up = _path_to_root(parent, y)
                # root -> x, edge x -> y, then y -> root reversed
                steps = list(down) + [(x, j, 1)]
                for prev, jj, d in reversed(up):
                    nxt = X.action[jj][prev] if d == 1 else X.inverse_action[jj][prev]
                    steps.append((nxt, jj, -d))
                val = U.zero
                for pt, jj, d in steps:
                    if d == 1:
                        val = U.add(val, rho.values[jj][pt])
                    else:
                        val = U.sub(val, rho.values[jj][X.inverse_action[jj][pt]])
                return CycleObstruction(tuple(steps), val)
    return None


def solve_coboundary(rho: Cocycle):
    """F (tuple over points) with rho = Delta F, or None.

    F is normalized to 0 at the first point of each ergodic component; on a
    failure, :func:`coboundary_obstruction` returns the certifying cycle.
    """
    X, U = rho.system, rho.target
    F, _ = _spanning_tree(rho)
    for j, p in enumerate(X.action):
        vals = rho.values[j]
        for x in range(X.n):
            if U.sub(F[p[x]], F[x]) != vals[x]:
                return None
    return tuple(F)


def are_cohomologous(rho: Cocycle, rho2: Cocycle):
    """Transfer F with rho - rho2 = Delta F, or None."""
    if rho.system is not rho2.system or rho.target != rho2.target:
        raise ValueError("cocycles live on different systems or targets")
    return solve_coboundary(rho - rho2)


# --- polynomial degree ---------------------------------------------------------------

def phase_of(value: ExactComplex):
    """q with value = e(q) if value is a rational root of unity, else None."""
    if value.as_fraction() is not None:
        r = value.as_fraction()
        return Fraction(0) if r == 1 else Fraction(1, 2) if r == -1 else None
    if len(value.parts) != 1 or () not in value.parts:
        return None
    cyc = value.parts[()]
    z = cyc.to_complex()
    if abs(abs(z) - 1) > 1e-9:
        return None
    L = math.lcm(cyc.level, 2)
    k = round((math.atan2(z.imag, z.real) / (2 * math.pi)) * L) % L
    q = Fraction(k, L)
    return q if ExactComplex.e(Phase(q)) == value else None


def _finite_degree(X: FiniteSystem, vals, sub, is_zero, k_max: int):
    funcs = [tuple(vals)]
    for k in range(0, k_max + 1):
        if all(all(is_zero(v) for v in f) for f in funcs):
            return k
        if k == k_max:
            break
        nxt = {}
        for f in funcs:
            for p in X.action:
                h = tuple(sub(f[p[x]], f[x]) for x in range(X.n))
                nxt[h] = None
        funcs = list(nxt)
    return None


def polynomial_degree(X, h, k_max: int = 4):
    """Smallest k with every k-fold derivative Delta_{g1}...Delta_{gk} h trivial, or None if > k_max.

    h may be a Cocycle (degree in x, maximized over generators), a PointFunction of
    roots of unity, a list of rational phases, or (on a TorusSystem) a single-term TrigPoly.
    Derivatives along generators suffice: Delta_{g+h} = Delta_g + Delta_h + Delta_g Delta_h.
    """
    if isinstance(X, TorusSystem):
        if not isinstance(h, TrigPoly) or len(h.terms) != 1:
            raise ValueError("torus degrees are defined for single characters")
        (m,) = h.terms
        if not any(m):
            return 1
        Ns = [tuple(tuple(A[i][j] - (i == j) for j in range(X.dim)) for i in range(X.dim)) for A in X.matrices]
        vecs = {tuple(m)}
        for k in range(2, k_max + 1):
            vecs = {_rowvec_mat(v, N) for v in vecs for N in Ns}
            if all(not any(v) for v in vecs):
                return k
        return None
    if isinstance(h, Cocycle):
        U = h.target
        best = 0
        for row in h.values:
            d = _finite_degree(X, row, U.sub, lambda v: v == U.zero, k_max)
            if d is None:
                return None
            best = max(best, d)
        return best
    if isinstance(h, PointFunction):
        phases = [phase_of(v) for v in h]
        if any(p is None for p in phases):
            raise ValueError("observable is not a root-of-unity valued phase function")
    else:
        phases = [Fraction(p) % 1 for p in h]
    return _finite_degree(X, phases, lambda a, b: (a - b) % 1, lambda v: v == 0, k_max)


@dataclass(frozen=True)
class SeparationReport:
    distance2: ExactComplex
    distance: float
    bound: float
    passed: bool
    skipped: bool = False


def separation_check(X: FiniteSystem, phi, psi, k: int) -> SeparationReport:
    """||e(phi) - e(psi)||_2 against sqrt(2)/2^(k-2) for phase polynomials of degree < k."""
    phi = [Fraction(p) % 1 for p in phi]
    psi = [Fraction(p) % 1 for p in psi]
    for f in (phi, psi):
        d = polynomial_degree(X, f, k)
        if d is None or d > k:
            raise ValueError("inputs must be phase polynomials of degree < k")
    diff = [(a - b) % 1 for a, b in zip(phi, psi)]
    bound = math.sqrt(2) / 2 ** (k - 2)
    if len(set(diff)) == 1:
        return SeparationReport(ExactComplex(), 0.0, bound, True, skipped=True)
    z = ExactComplex()
    for w, q in zip(X.weights, diff):
        z = z + ExactComplex.e(Phase(q)) * w
    d2 = ExactComplex.from_rational(2) - (z + z.conj())
    slack = d2 - ExactComplex.from_rational(Fraction(2, 4 ** (k - 2)) if k >= 2 else 8)
    if slack.is_zero():
        passed = True
    else:
        v = slack.to_complex().real
        if abs(v) < 1e-9:
            raise ArithmeticError("separation comparison undecided at double precision")
        passed = v > 0
    return SeparationReport(d2, math.sqrt(max(d2.to_complex().real, 0.0)), bound, passed)


# --- type <k -------------------------------------------------------------------------

def cubic_cocycle(rho: Cocycle, k: int):
    """d^[k] rho on the support of mu^[k]: sum_omega (-1)^{|omega|} rho(g, x_omega)."""
    C = cubic_space(rho.system, k)
    Y = C.as_system
    U = rho.target
    signs = [(-1) ** bin(w).count("1") for w in range(2 ** k)]
    vals = []
    for j in range(len(rho.values)):
        row = rho.values[j]
        out = []
        for t in C.tuples:
            acc = U.zero
            for s, x in zip(signs, t):
                acc = U.add(acc, row[x]) if s > 0 else U.sub(acc, row[x])
            out.append(acc)
        vals.append(tuple(out))
    return Cocycle(Y, U, tuple(vals))


def cocycle_type(rho: Cocycle, k: int):
    """(is type <k, certificate): the transfer on X^[k] or a cycle obstruction."""
    if k < 1 or k > 3:
        raise ValueError("k must be 1, 2 or 3")
    D = cubic_cocycle(rho, k)
    F = solve_coboundary(D)
    if F is not None:
        return True, F
    return False, coboundary_obstruction(D)


@dataclass(frozen=True)
class Type0Decomposition:
    """rho = c + Delta F inside the lattice group V (U embedded coordinatewise by scale)."""

    lattice: AbGroup
    scale: int
    c: tuple
    F: tuple


def embed_in_lattice(rho: Cocycle, scale: int) -> Cocycle:
    """Compose rho with U = + Z/e_l -> + Z/(e_l * scale), u -> scale * u."""
    U = rho.target
    V = AbGroup(0, tuple(e * scale for e in U.torsion))
    return rho.map_values(V, lambda v: tuple(scale * a for a in v))


def type0_decomposition(rho: Cocycle, scale: int | None = None, retries: int = 3):
    """Solve rho = c + Delta F with c a homomorphism, values in a circle lattice.

    The finite target alone may be too small (a cocycle of type <1 is
    cohomologous to a constant only after enlarging U inside the circle).
    """
    X = rho.system
    scale = scale or len(X.image_group)
    for _ in range(retries + 1):
        r = embed_in_lattice(rho, scale)
        sol = _solve_constant_plus_coboundary(r)
        if sol is not None:
            c, F = sol
            return Type0Decomposition(r.target, scale, c, F)
        scale *= 2
    return None


def _solve_constant_plus_coboundary(rho: Cocycle, shift=None):
    """Unknowns c_j (one per generator) then F(x); equations rho_j(x) = c_j + F(T_j x) - F(x)."""
    X, V = rho.system, rho.target
    G = X.group
    r = G.rank
    eqs = []
    for j, p in enumerate(X.action):
        for x in range(X.n):
            co = {j: 1}
            if p[x] != x:
                co[r + p[x]] = co.get(r + p[x], 0) + 1
                co[r + x] = co.get(r + x, 0) - 1
            eqs.append((co, rho.values[j][x]))
    for j, d in enumerate(G.moduli):
        if d:
            eqs.append(({j: d}, V.zero))
    sol = solve_group_linear(eqs, V, r + X.n)
    if sol is None:
        return None
    x = sol.particular
    return tuple(x[:r]), tuple(x[r:])


# --- Conze-Lesigne equations -----------------------------------------------------------

@dataclass(frozen=True)
class CLWitness:
    s: tuple
    c: tuple
    F: tuple


def _rotation_of(rho: Cocycle):
    rot = rho.system.rotation
    if rot is None:
        raise ValueError("CL equations need a base built by rotation_system")
    return rot.group


def delta_s(rho: Cocycle, s) -> Cocycle:
    """Delta_s rho(g, z) = rho(g, z + s) - rho(g, z)  (differentiating along V_s)."""
    Z = _rotation_of(rho)
    X, U = rho.system, rho.target
    shift = [X.index(Z.add(z, s)) for z in X.points]
    return Cocycle(X, U, tuple(tuple(U.sub(row[shift[x]], row[x]) for x in range(X.n)) for row in rho.values))


def cl_solutions(rho: Cocycle, s):
    """The full solution family (c, F) of Delta_s rho = c + Delta_g F, or None."""
    D = delta_s(rho, s)
    X, U = rho.system, rho.target
    G = X.group
    r = G.rank
    eqs = []
    for j, p in enumerate(X.action):
        for x in range(X.n):
            co = {j: 1}
            if p[x] != x:
                co[r + p[x]] = 1
                co[r + x] = -1
            eqs.append((co, D.values[j][x]))
    for j, d in enumerate(G.moduli):
        if d:
            eqs.append(({j: d}, U.zero))
    return solve_group_linear(eqs, U, r + X.n)


def solve_cl_equation(rho: Cocycle, s):
    """CLWitness (s, c, F) with Delta_s rho(g, z) = c(g) + Delta_g F(z), or None."""
    sol = cl_solutions(rho, s)
    if sol is None:
        return None
    r = rho.system.group.rank
    x = sol.particular
    return CLWitness(tuple(s), tuple(x[:r]), tuple(x[r:]))


def is_cl_element(rho: Cocycle, s, F) -> bool:
    """Check the membership condition for S_{s,F} directly."""
    X, U = rho.system, rho.target
    D = delta_s(rho, s)
    for j, p in enumerate(X.action):
        consts = {U.sub(D.values[j][x], U.sub(F[p[x]], F[x])) for x in range(X.n)}
        if len(consts) != 1:
            return False
        (c,) = consts
        d = X.group.moduli[j]
        if d and U.mul(d, c) != U.zero:
            return False
    return True


@dataclass(frozen=True)
class CLGroupElement:
    """S_{s,F}(z, u) = (z + s, F(z) + u); F is listed in the point order of the base."""

    s: tuple
    F: tuple


@dataclass
class CLGroupReport:
    elements: list                 # CLGroupElement, sorted by (s, F)
    orbit_size: int
    space_size: int
    transitive: bool
    stabilizer: list               # elements fixing the base point (0, 0)
    stabilizer_generators: list
    commutator_elements: list      # u with S_{0,u} in G_2
    commutator_invariants: tuple   # invariant factors of G_2
    generators: list
    membership_verified: bool
    two_step: bool
    closed: bool

    def to_dict(self) -> dict:
        def el(e):
            return {"s": list(e.s), "F": [list(v) for v in e.F]}
        return {
            "group_order": len(self.elements),
            "orbit_size": self.orbit_size,
            "space_size": self.space_size,
            "transitive": self.transitive,
            "commutator_invariants": list(self.commutator_invariants),
            "stabilizer_generators": [el(e) for e in self.stabilizer_generators],
            "membership_verified": self.membership_verified,
            "two_step": self.two_step,
            "closed": self.closed,
        }


def _greedy_generators(perms, cap):
    """Greedy generating set of the group generated by perms, and its closure."""
    n = len(perms[0]) if perms else 0
    closure = {tuple(range(n))}
    gens = []
    for p in perms:
        if p in closure:
            continue
        gens.append(p)
        frontier = list(closure)
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = compose(g, a)
                    if b not in closure:
                        closure.add(b)
                        nxt.append(b)
            if len(closure) > cap:
                raise ValueError("closure exceeds the cap")
            frontier = nxt
    return gens, closure


def cl_group(rho: Cocycle, cap: int = 10**5) -> CLGroupReport:
    """Enumerate the CL group of X = Z x_rho U and analyse its action on X."""
    X, U = rho.system, rho.target
    Z = _rotation_of(rho)
    if X.n * U.order > 64:
        raise ValueError("cl_group is capped at |Z||U| <= 64")
    us = U.elements()
    nu = len(us)
    uidx = {u: i for i, u in enumerate(us)}
    zpts = list(X.points)
    zidx = {z: i for i, z in enumerate(zpts)}
    r = X.group.rank

    def perm_of(s, F):
        out = []
        for zi, z in enumerate(zpts):
            t = zidx[Z.add(z, s)]
            for u in us:
                out.append(t * nu + uidx[U.add(F[zi], u)])
        return tuple(out)

    def decompose(perm):
        t = perm[0] // nu
        s = Z.sub(zpts[t], zpts[0])
        F = tuple(us[perm[zi * nu + uidx[U.zero]] % nu] for zi in range(len(zpts)))
        return s, F

    elements = {}
    for s in Z.elements():
        sol = cl_solutions(rho, s)
        if sol is None:
            continue
        for x in sol:
            F = tuple(x[r:])
            elements[perm_of(s, F)] = CLGroupElement(tuple(s), F)
            if len(elements) > cap:
                raise ValueError("CL group exceeds the closure cap")
    # closure from a greedy generating set; nothing may escape the enumerated set
    order = sorted(elements, key=lambda q: (elements[q].s, elements[q].F))
    ident = tuple(range(len(zpts) * nu))
    gens, closure = _greedy_generators(order, cap)
    closed = closure <= set(elements)
    membership = all(is_cl_element(rho, *decompose(p)) for p in closure)
    base = 0
    orbit = {p[base] for p in closure}
    stab_perms = sorted((p for p in closure if p[base] == base), key=decompose)
    stab = [CLGroupElement(*decompose(p)) for p in stab_perms]
    stab_gens = [CLGroupElement(*decompose(p)) for p in _greedy_generators(stab_perms, cap)[0]]
    # commutators
    closure_list = sorted(closure)
    pool = closure_list if len(closure_list) ** 2 <= cap else gens
    comm = set()
    for a in pool:
        ai = inverse(a)
        for b in pool:
            c = compose(ai, compose(inverse(b), compose(a, b)))
            comm.add(c)
    two_step = True
    comm_vals = set()
    for c in comm:
        s, F = decompose(c)
        if s != Z.zero or len(set(F)) != 1:
            two_step = False
            continue
        comm_vals.add(F[0])
        if any(compose(c, g) != compose(g, c) for g in gens):
            two_step = False
    H, comm_elems = subgroup(U, sorted(comm_vals))
    return CLGroupReport(
        elements=[CLGroupElement(*decompose(p)) for p in sorted(closure, key=decompose)],
        orbit_size=len(orbit), space_size=len(ident), transitive=len(orbit) == len(ident),
        stabilizer=stab, stabilizer_generators=stab_gens, commutator_elements=comm_elems, commutator_invariants=H.torsion,
        generators=[CLGroupElement(*decompose(g)) for g in gens], membership_verified=membership,
        two_step=two_step, closed=closed)


def character_stabilizer(rho: Cocycle) -> set:
    """{(0, p) : p in Hom(Z, U)} as (s, F) pairs, for comparison with the computed stabilizer."""
    X, U = rho.system, rho.target
    Z = _rotation_of(rho)
    out = set()
    for imgs in homomorphisms(Z, U):
        F = tuple(U.combine(z, imgs) for z in X.points)
        out.add((Z.zero, F))
    return out


def cl_permutation(rho: Cocycle, s, F) -> tuple:
    """S_{s,F} as a permutation of the points of Z x_rho U (index z*|U| + u)."""
    X, U = rho.system, rho.target
    Z = _rotation_of(rho)
    us = U.elements()
    uidx = {u: i for i, u in enumerate(us)}
    out = []
    for zi, z in enumerate(X.points):
        t = X.index(Z.add(z, s))
        for u in us:
            out.append(t * len(us) + uidx[U.add(F[zi], u)])
    return tuple(out)


def counterexample_cocycle(d: int) -> Cocycle:
    """The order-<3 cocycle over the F_2^d rotation on C_2^d with values in C_4.

    rho(e_i, z) = 2 z_i + 1 (mod 4).  The C_2-valued version with the binomial
    sign does not satisfy the cocycle identity; this lift does, and its
    vertical commutators are {0, 2} = C_2.
    """
    if not 1 <= d <= 10:
        raise ValueError("1 <= d <= 10")
    K = AbGroup(0, (2,) * d)
    gens = [tuple(int(i == j) for i in range(d)) for j in range(d)]
    Z = rotation_system(K, gens, K)
    return Cocycle.from_function(Z, AbGroup(0, (4,)), lambda j, x: ((2 * Z.points[x][j] + 1) % 4,))
