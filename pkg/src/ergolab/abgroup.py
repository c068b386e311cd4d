"""Finitely generated abelian groups Z^r + Z/d_1 + ... + Z/d_k.

Groups are kept in invariant-factor form (d_i | d_{i+1}).  Elements are plain
integer tuples: the free coordinates first, then the torsion coordinates
reduced into [0, d_i).  All linear algebra goes through one Smith normal form
routine with unimodular transforms.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

INFINITE = math.inf


# --- Smith normal form ------------------------------------------------------------

def _eye(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(matrix):
    """Return (D, P, Q) with P*A*Q = D diagonal, P and Q unimodular.

    The nonzero diagonal entries are positive and each divides the next.
    """
    A = [[int(x) for x in row] for row in matrix]
    m = len(A)
    n = len(A[0]) if m else 0
    P, Q = _eye(m), _eye(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        P[i], P[j] = P[j], P[i]

    def swap_cols(i, j):
        for M in (A, Q):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):  # row_dst += c * row_src
        for M in (A, P):
            rs, rd = M[src], M[dst]
            for k in range(len(rd)):
                if rs[k]:
                    rd[k] += c * rs[k]

    def add_col(dst, src, c):
        for M in (A, Q):
            for row in M:
                if row[src]:
                    row[dst] += c * row[src]

    for t in range(min(m, n)):
        while True:
            piv, best = None, None
            for i in range(t, m):
                for j in range(t, n):
                    v = A[i][j]
                    if v and (best is None or abs(v) < best):
                        piv, best = (i, j), abs(v)
                        if best == 1:
                            break
                if best == 1:
                    break
            if piv is None:
                return A, P, Q
            swap_rows(t, piv[0])
            swap_cols(t, piv[1])
            p = A[t][t]
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    clean = clean and A[i][t] == 0
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    clean = clean and A[t][j] == 0
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            for M in (A, P):
                M[t] = [-x for x in M[t]]
    return A, P, Q


def _matvec(M, v):
    return [sum(a * b for a, b in zip(row, v)) for row in M]


# --- groups ----------------------------------------------------------------------

@dataclass(frozen=True)
class AbGroup:
    free_rank: int = 0
    torsion: tuple = ()

    def __post_init__(self):
        t = tuple(int(d) for d in self.torsion)
        object.__setattr__(self, "torsion", t)
        if self.free_rank < 0:
            raise ValueError("free_rank must be nonnegative")
        for i, d in enumerate(t):
            if d < 2:
                raise ValueError(f"invariant factor {d} < 2")
            if i and d % t[i - 1]:
                raise ValueError(f"torsion {t} is not in invariant-factor form")

    # construction
    @classmethod
    def cyclic(cls, n: int) -> "AbGroup":
        return cls(1, ()) if n == 0 else cls(0, (n,) if n > 1 else ())

    @classmethod
    def from_moduli(cls, moduli) -> "AbGroup":
        """Canonical form of Z/m_1 + ... + Z/m_k (m = 0 stands for Z)."""
        return presented(moduli)[0]

    @classmethod
    def from_dict(cls, d: dict) -> "AbGroup":
        return cls(int(d.get("free_rank", 0)), tuple(d.get("torsion", ())))

    def to_dict(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}

    # basic data
    @property
    def rank(self) -> int:
        return self.free_rank + len(self.torsion)

    @property
    def moduli(self) -> tuple:
        """Order of each canonical generator (0 for free generators)."""
        return (0,) * self.free_rank + self.torsion

    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self):
        return math.prod(self.torsion) if self.is_finite() else INFINITE

    @property
    def exponent(self):
        if not self.is_finite():
            return INFINITE
        return self.torsion[-1] if self.torsion else 1

    @property
    def zero(self) -> tuple:
        return (0,) * self.rank

    def generators(self) -> list:
        return [tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)]

    # arithmetic
    def reduce(self, v) -> tuple:
        v = tuple(int(x) for x in v)
        if len(v) != self.rank:
            raise ValueError(f"element {v} does not belong to {self}")
        r = self.free_rank
        return v[:r] + tuple(x % d for x, d in zip(v[r:], self.torsion))

    def add(self, x, y) -> tuple:
        if len(x) != self.rank or len(y) != self.rank:
            raise ValueError("mismatched group")
        r = self.free_rank
        return tuple(a + b for a, b in zip(x[:r], y[:r])) + tuple(
            (a + b) % d for a, b, d in zip(x[r:], y[r:], self.torsion))

    def neg(self, x) -> tuple:
        return self.mul(-1, x)

    def sub(self, x, y) -> tuple:
        return self.add(x, self.neg(y))

    def mul(self, m: int, x) -> tuple:
        if len(x) != self.rank:
            raise ValueError("mismatched group")
        r = self.free_rank
        return tuple(m * a for a in x[:r]) + tuple((m * a) % d for a, d in zip(x[r:], self.torsion))

    def combine(self, coeffs, elems) -> tuple:
        acc = self.zero
        for c, x in zip(coeffs, elems):
            if c:
                acc = self.add(acc, self.mul(c, x))
        return acc

    def contains(self, x) -> bool:
        try:
            return self.reduce(x) == tuple(x)
        except (ValueError, TypeError):
            return False

    def element_order(self, x):
        if any(x[: self.free_rank]):
            return INFINITE
        o = 1
        for a, d in zip(x[self.free_rank:], self.torsion):
            o = math.lcm(o, d // gcd(a, d))
        return o

    # enumeration
    def elements(self) -> list:
        if not self.is_finite():
            raise ValueError("cannot enumerate an infinite group")
        return [tuple(t) for t in itertools.product(*(range(d) for d in self.torsion))]

    def index(self, x) -> int:
        """Position of x in :meth:`elements` (finite groups)."""
        i = 0
        for a, d in zip(x, self.torsion):
            i = i * d + a
        return i

    def __str__(self) -> str:
        parts = ["Z"] * self.free_rank + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def quotient_group(n: int, relations):
    """Z^n / <relations>, as (canonical AbGroup, coordinate map Z^n -> group)."""
    rel = [list(map(int, r)) for r in relations if any(r)]
    if not rel:
        G = AbGroup(n, ())
        return G, (lambda v: tuple(int(x) for x in v))
    # columns are relations
    R = [[rel[j][i] for j in range(len(rel))] for i in range(n)]
    D, P, _ = smith_normal_form(R)
    diag = [D[i][i] if i < len(rel) else 0 for i in range(n)]
    free_idx = [i for i in range(n) if diag[i] == 0]
    tors_idx = [i for i in range(n) if diag[i] > 1]
    G = AbGroup(len(free_idx), tuple(diag[i] for i in tors_idx))
    rows_free = [P[i] for i in free_idx]
    rows_tors = [(P[i], diag[i]) for i in tors_idx]

    def coords(v):
        return tuple(sum(a * b for a, b in zip(row, v)) for row in rows_free) + tuple(
            sum(a * b for a, b in zip(row, v)) % d for row, d in rows_tors)
    return G, coords


def presented(moduli):
    """Canonical form of the direct sum of cyclic groups Z/m_i (0 means Z)."""
    moduli = [int(m) for m in moduli]
    if any(m < 0 for m in moduli):
        raise ValueError("moduli must be nonnegative")
    n = len(moduli)
    rels = [[m if i == j else 0 for j in range(n)] for i, m in enumerate(moduli) if m]
    return quotient_group(n, rels)


def direct_sum(*groups: AbGroup):
    """Canonical direct sum, with the coordinate map from concatenated coordinates."""
    moduli = []
    for G in groups:
        moduli += list(G.moduli)
    return presented(moduli)


def subgroup_index(G: AbGroup, m: int):
    """[G : mG]."""
    m = int(m)
    if m == 0:
        return G.order
    t = 1
    for d in G.torsion:
        t *= gcd(m, d)
    return abs(m) ** G.free_rank * t


def subgroup(G: AbGroup, gens):
    """The subgroup of finite G generated by gens, as (canonical AbGroup, element list).

    The invariant factors come from Z^m / kernel(Z^m -> G).
    """
    if not G.is_finite():
        raise ValueError("subgroup structure implemented for finite groups only")
    gens = [G.reduce(g) for g in gens]
    # closure by BFS (finite groups are small here)
    seen = {G.zero}
    frontier = [G.zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.add(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    m = len(gens)
    if m == 0:
        return AbGroup(), [G.zero]
    # kernel of v -> sum v_i g_i: solve in Z^m the system sum v_i g_i = 0 mod torsion
    # build matrix [g_1 ... g_m | -diag(d)] and take its integer kernel
    k = G.rank
    M = [[gens[j][i] for j in range(m)] + [(-G.torsion[i] if ii == i else 0) for ii in range(k)]
         for i in range(k)]
    kernel = integer_kernel(M)
    rels = [v[:m] for v in kernel]
    for j in range(m):  # each generator has finite order; include it explicitly
        o = G.element_order(gens[j])
        rels.append([o if jj == j else 0 for jj in range(m)])
    H, _ = quotient_group(m, rels)
    assert H.order == len(seen)
    return H, sorted(seen)


def integer_kernel(M):
    """A Z-basis of {v in Z^n : M v = 0}."""
    if not M:
        return []
    n = len(M[0])
    D, _, Q = smith_normal_form(M)
    r = sum(1 for i in range(min(len(M), n)) if D[i][i])
    return [[Q[i][j] for i in range(n)] for j in range(r, n)]


# --- characters ------------------------------------------------------------------

@dataclass(frozen=True)
class Character:
    """chi(x) = sum_i x_i * phases[i] mod 1 on a finite group."""

    group: AbGroup
    phases: tuple

    def __post_init__(self):
        ph = tuple(Fraction(p) % 1 for p in self.phases)
        object.__setattr__(self, "phases", ph)
        if len(ph) != self.group.rank:
            raise ValueError("one phase per generator required")
        for p, d in zip(ph, self.group.moduli):
            if d and (p * d) % 1:
                raise ValueError(f"phase {p} is not killed by the generator order {d}")

    def __call__(self, x) -> Fraction:
        return sum((a * p for a, p in zip(x, self.phases)), Fraction(0)) % 1

    def __mul__(self, other: "Character") -> "Character":
        return Character(self.group, tuple(a + b for a, b in zip(self.phases, other.phases)))

    def label(self) -> tuple:
        """The element c of G with chi(x) = sum c_i x_i / d_i."""
        return tuple(int(p * d) for p, d in zip(self.phases, self.group.torsion))


def characters(G: AbGroup) -> list:
    if not G.is_finite():
        raise ValueError("characters(): infinite groups unsupported")
    return [Character(G, tuple(Fraction(c, d) for c, d in zip(cs, G.torsion))) for cs in G.elements()]


# --- Folner windows --------------------------------------------------------------

@dataclass(frozen=True)
class FolnerWindow:
    group: object
    N: int
    elements: tuple

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class DirectSumFamily:
    """The countable group + Z/p_i (i = 0, 1, ...), with p_i = moduli[i % len(moduli)].

    Elements are finitely supported; a window of index N consists of the
    elements supported on the first N summands.
    """

    moduli: tuple = (2,)

    def modulus(self, i: int) -> int:
        return self.moduli[i % len(self.moduli)]

    def truncation(self, N: int) -> AbGroup:
        return AbGroup.from_moduli([self.modulus(i) for i in range(N)])

    def add(self, x, y) -> tuple:
        n = max(len(x), len(y))
        x = tuple(x) + (0,) * (n - len(x))
        y = tuple(y) + (0,) * (n - len(y))
        return tuple((a + b) % self.modulus(i) for i, (a, b) in enumerate(zip(x, y)))


def folner_window(G, N: int, scheme: str = "box") -> FolnerWindow:
    """Explicit window Phi_N.

    scheme "box": [-N, N]^r on the free part; "shifted": [N, 3N]^r, a second
    Folner sequence used for independence spot checks; "forward": [0, N)^r.
    Finite groups always give the whole group; torsion coordinates are taken in full.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if isinstance(G, DirectSumFamily):
        els = itertools.product(*(range(G.modulus(i)) for i in range(N)))
        return FolnerWindow(G, N, tuple(tuple(e) for e in els))
    if G.is_finite():
        return FolnerWindow(G, N, tuple(G.elements()))
    if scheme == "box":
        rng = range(-N, N + 1)
    elif scheme == "shifted":
        rng = range(N, 3 * N + 1)
    elif scheme == "forward":
        rng = range(0, N)
    else:
        raise ValueError(f"unknown window scheme {scheme!r}")
    free = itertools.product(rng, repeat=G.free_rank)
    tors = [range(d) for d in G.torsion]
    els = tuple(tuple(f) + tuple(t) for f in free for t in itertools.product(*tors))
    return FolnerWindow(G, N, els)


# --- linear equations over finite groups -------------------------------------------

@dataclass
class LinearSolution:
    """particular + span of (generator, order) pairs; the sum is direct."""

    group: AbGroup
    n_unknowns: int
    particular: tuple
    generators: list = field(default_factory=list)   # [(tuple of elements, order)]

    @property
    def size(self) -> int:
        return math.prod(o for _, o in self.generators)

    def combination(self, ks) -> tuple:
        U = self.group
        x = list(self.particular)
        for k, (g, _) in zip(ks, self.generators):
            if k:
                x = [U.add(a, U.mul(k, b)) for a, b in zip(x, g)]
        return tuple(x)

    def __iter__(self):
        for ks in itertools.product(*(range(o) for _, o in self.generators)):
            yield self.combination(ks)


def _coeff_row(coeffs, n):
    if isinstance(coeffs, dict):
        row = [0] * n
        for j, c in coeffs.items():
            row[j] += int(c)
        return row
    row = [int(c) for c in coeffs]
    if len(row) != n:
        raise ValueError("coefficient row has the wrong length")
    return row


def solve_group_linear(equations, group: AbGroup, n_unknowns: int):
    """Solve sum_j a_ij x_j = b_i in a finite group U, all unknowns in U.

    equations: list of (coefficients, rhs) with coefficients a dict
    {unknown index: integer} or a full integer row, rhs an element of U.
    Returns a LinearSolution or None when the system has no solution.
    """
    U = group
    if not U.is_finite():
        raise ValueError("solve_group_linear needs a finite group")
    n = n_unknowns
    rows = [_coeff_row(c, n) for c, _ in equations]
    rhs = [U.reduce(b) for _, b in equations]
    if n == 0:
        return LinearSolution(U, 0, ()) if all(b == U.zero for b in rhs) else None
    if not rows:
        rows, rhs = [[0] * n], [U.zero]
    D, P, Q = smith_normal_form(rows)
    m = len(rows)
    r = sum(1 for i in range(min(m, n)) if D[i][i])
    diag = [D[i][i] for i in range(r)]
    # per torsion coordinate l, solve D z = P b (mod e_l), x = Q z
    xs = [[0] * U.rank for _ in range(n)]
    gens = []
    for l, e in enumerate(U.torsion):
        c = _matvec(P, [b[l] for b in rhs])
        if any(ci % e for ci in c[r:]):
            return None
        z = [0] * n
        hom = []
        for i in range(r):
            g = gcd(diag[i], e)
            if c[i] % g:
                return None
            mod = e // g
            if mod > 1:
                z[i] = (c[i] // g) * pow(diag[i] // g, -1, mod) % mod
            if g > 1:
                hom.append((i, mod, g))
        for i in range(r, n):
            hom.append((i, 1, e))
        for j in range(n):
            xs[j][l] = sum(Q[j][i] * z[i] for i in range(n)) % e
        for i, step, order in hom:
            vec = []
            for j in range(n):
                v = [0] * U.rank
                v[l] = Q[j][i] * step % e
                vec.append(tuple(v))
            gens.append((tuple(vec), order))
    return LinearSolution(U, n, tuple(tuple(x) for x in xs), gens)


def check_solution(equations, group: AbGroup, x) -> bool:
    n = len(x)
    for c, b in equations:
        row = _coeff_row(c, n)
        if group.combine(row, x) != group.reduce(b):
            return False
    return True


def homomorphisms(Z: AbGroup, U: AbGroup) -> list:
    """All homomorphisms Z -> U of finite groups, as tuples of generator images."""
    choices = []
    for d in Z.moduli:
        choices.append([u for u in U.elements() if d and U.mul(d, u) == U.zero])
    return [tuple(c) for c in itertools.product(*choices)]


def evaluate_hom(Z: AbGroup, U: AbGroup, images, z) -> tuple:
    return U.combine(z, images)
