"""Khintchine-type recurrence scans for the pattern {ag, bg, (a+b)g}.

On a finite system the correlation mu(A & T_ag A & T_bg A & T_(a+b)g A) depends
on g only through T_g, so scanning one period of the action is exhaustive.
Sets of points are handled as Python integer bitmasks.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .abgroup import INFINITE, AbGroup, folner_window, subgroup_index
from .systems import FiniteSystem, perm_power

ZLIKE_CAVEAT = "window gaps on Z are finite evidence, not a proof of syndeticity"
PROXY_CAVEAT = "densities are computed on the largest window as a proxy for the upper density"


def _exact(eps) -> Fraction:
    if isinstance(eps, float):
        return Fraction(repr(eps))
    return Fraction(eps)


def _check_pattern(a: int, b: int):
    a, b = int(a), int(b)
    if a == 0 or b == 0 or a + b == 0 or a == b:
        raise ValueError("pattern needs nonzero a, b with a != b and a + b != 0")
    return a, b


@dataclass
class SyndeticityReport:
    gap: float                     # math.inf when the good set is empty
    covering_size: int | None      # finite groups: size of a greedy covering set C with good + C = G
    covering_set: list = field(default_factory=list)
    kind: str = "finite"
    caveat: str = ""
    cyclic_gap: int | None = None  # cyclic groups: largest cyclic distance between consecutive goods

    def to_dict(self) -> dict:
        return {"gap": None if self.gap == math.inf else self.gap, "empty": self.gap == math.inf,
                "covering_size": self.covering_size, "covering_set": [list(c) for c in self.covering_set],
                "kind": self.kind, "caveat": self.caveat, "cyclic_gap": self.cyclic_gap}


def syndeticity_gap(good, group: AbGroup | None = None, periods=None) -> SyndeticityReport:
    """Gap of a good set.

    With a finite group (or a box of periods, added coordinatewise): a greedy
    covering set C with good + C = G; the gap is |C| - 1 (0 when good is
    everything).  Otherwise good is a sorted list of integers from a Z-window
    and the gap is the largest difference between consecutive elements.
    """
    good = list(good)
    if periods is not None:
        periods = tuple(int(p) for p in periods)
        els = [()]
        for per in periods:
            els = [g + (i,) for g in els for i in range(per)]
        add = lambda g, h: tuple((x + y) % p for x, y, p in zip(g, h, periods))
        cyclic_order = periods[0] if len(periods) == 1 else None
    elif group is not None and group.is_finite():
        els = group.elements()
        add = group.add
        cyclic_order = group.order if group.free_rank == 0 and len(group.torsion) <= 1 else None
    else:
        els = None
    if els is not None:
        if not good:
            return SyndeticityReport(math.inf, None, [], "finite")
        gs = {tuple(g) for g in good}
        uncovered = set(els)
        C = []
        while uncovered:
            best, best_cov = None, None
            for c in els:
                cov = {add(g, c) for g in gs} & uncovered
                if best_cov is None or len(cov) > len(best_cov):
                    best, best_cov = c, cov
            C.append(best)
            uncovered -= best_cov
        cyc = None
        if cyclic_order is not None:
            N = cyclic_order
            vals = sorted(g[0] if g else 0 for g in gs)
            cyc = max(((vals[(i + 1) % len(vals)] - vals[i]) % N or N) for i in range(len(vals)))
            if len(vals) == N:
                cyc = 1
        return SyndeticityReport(len(C) - 1, len(C), C, "finite", "", cyc)
    vals = sorted(int(g[0]) if isinstance(g, tuple) else int(g) for g in good)
    if not vals:
        return SyndeticityReport(math.inf, None, [], "Z-window", ZLIKE_CAVEAT)
    gap = max((b - a for a, b in zip(vals, vals[1:])), default=0)
    return SyndeticityReport(gap, None, [], "Z-window", ZLIKE_CAVEAT)


@dataclass
class ComponentRow:
    points: list
    mass: Fraction
    mu_A: Fraction
    correlations: dict            # g -> Fraction (relative to the component)


@dataclass
class RecurrenceReport:
    pattern: tuple
    eps: Fraction
    mu_A: Fraction
    bound: Fraction               # mu(A)^4 - eps
    correlations: dict            # g -> Fraction
    good: list
    gap: SyndeticityReport
    preconditions: dict
    exploratory: bool
    ergodic: bool
    components: list = field(default_factory=list)
    aggregation_ok: bool | None = None
    component_bound: Fraction | None = None   # sum_i mu(C_i) mu_i(A)^4 >= mu(A)^4
    return_set: list = field(default_factory=list)
    caveat: str = ""

    def rows(self) -> list:
        return [(g, self.correlations[g], g in set(self.good)) for g in sorted(self.correlations)]

    def to_dict(self) -> dict:
        return {"pattern": list(self.pattern), "eps": str(self.eps), "mu_A": str(self.mu_A),
                "bound": str(self.bound), "good": [list(g) for g in self.good], "gap": self.gap.to_dict(),
                "preconditions": {k: (None if v == INFINITE else v) for k, v in self.preconditions.items()},
                "exploratory": self.exploratory, "ergodic": self.ergodic,
                "aggregation_ok": self.aggregation_ok,
                "component_bound": None if self.component_bound is None else str(self.component_bound),
                "return_set_size": len(self.return_set), "caveat": self.caveat}


def scan_elements(X: FiniteSystem) -> list:
    """One representative g per residue of the action: G itself when finite, else a box of periods."""
    G = X.group
    if G.is_finite():
        return G.elements()
    periods = []
    for p, d in zip(X.action, G.moduli):
        if d:
            periods.append(d)
            continue
        m, q = 1, p
        ident = tuple(range(X.n))
        while q != ident:
            q = tuple(p[i] for i in q)
            m += 1
        periods.append(m)
    out = [()]
    for per in periods:
        out = [g + (i,) for g in out for i in range(per)]
    return out


def _mask(points) -> int:
    m = 0
    for i in points:
        m |= 1 << i
    return m


def _measure(X: FiniteSystem, mask: int, uniform: bool) -> Fraction:
    if uniform:
        return Fraction(bin(mask).count("1"), X.n)
    total = Fraction(0)
    i = 0
    while mask:
        if mask & 1:
            total += X.weights[i]
        mask >>= 1
        i += 1
    return total


def _preimage_mask(perm, mask: int) -> int:
    """{x : perm[x] in mask}."""
    out = 0
    for x, y in enumerate(perm):
        if (mask >> y) & 1:
            out |= 1 << x
    return out


def khintchine_scan(X: FiniteSystem, A, a: int, b: int, eps) -> RecurrenceReport:
    """Exact correlations mu(A & T_ag A & T_bg A & T_(a+b)g A) over one period of g."""
    a, b = _check_pattern(a, b)
    eps = _exact(eps)
    G = X.group
    pre = {f"index_{name}": subgroup_index(G, m) for name, m in
           (("a", a), ("b", b), ("b-a", b - a), ("a+b", a + b))}
    exploratory = any(v == INFINITE for v in pre.values())
    A = sorted(set(int(i) for i in A))
    if any(not 0 <= i < X.n for i in A):
        raise ValueError("A must list point indices")
    uniform = len(set(X.weights)) == 1
    mA = _mask(A)
    muA = _measure(X, mA, uniform)
    bound = muA ** 4 - eps
    gs = scan_elements(X)
    corr = {}
    masks = {}
    for g in gs:
        t = X.perm(g)
        m = mA
        for c in (a, b, a + b):
            m &= _preimage_mask(perm_power(t, c), mA)
        masks[g] = m
        corr[g] = _measure(X, m, uniform)
    good = [g for g in gs if corr[g] >= bound]
    if G.is_finite():
        gap = syndeticity_gap(good, G)
    else:
        gap = syndeticity_gap(good, periods=[max(g[j] for g in gs) + 1 for j in range(G.rank)])
    comps = []
    agg = None
    comp_bound = None
    ergodic = X.is_ergodic()
    if not ergodic:
        agg = True
        comp_bound = Fraction(0)
        for orb in X.orbits:
            om = _mask(orb)
            mass = _measure(X, om, False)
            mu_i = _measure(X, mA & om, False) / mass
            comp_bound += mass * mu_i ** 4
            cc = {g: _measure(X, masks[g] & om, False) / mass for g in gs}
            comps.append(ComponentRow(list(orb), mass, mu_i, cc))
        for g in gs:
            if sum(c.mass * c.correlations[g] for c in comps) != corr[g]:
                agg = False
    ident = tuple(range(X.n))
    ret = [g for g in gs if all(perm_power(X.perm(g), c) == ident for c in (a, b, a + b))]
    return RecurrenceReport((a, b), eps, muA, bound, corr, good, gap, pre, exploratory, ergodic,
                            comps, agg, comp_bound, ret)


# --- density scans on Z windows ----------------------------------------------------------------

def _membership(E, seed: int = 0):
    """A predicate n -> bool from an explicit collection, a callable, or ('random', density)."""
    if callable(E):
        return E
    if isinstance(E, tuple) and len(E) == 2 and E[0] == "random":
        density = float(E[1])
        cache: dict = {}

        def pred(n):
            if n not in cache:
                cache[n] = random.Random(hash((seed, n))).random() < density
            return cache[n]
        return pred
    s = {int(x) for x in E}
    return lambda n: n in s


def density_scan(G: AbGroup, N: int, E, a: int, b: int, eps, g_values=None, scheme: str = "box",
                 seed: int = 0) -> RecurrenceReport:
    """Window densities of E & (E - ag) & (E - bg) & (E - (a+b)g) on Phi_N, for g in g_values."""
    a, b = _check_pattern(a, b)
    eps = _exact(eps)
    if not (G.free_rank == 1 and not G.torsion) and not G.is_finite():
        raise ValueError("density_scan supports Z and finite groups")
    pred = _membership(E, seed)
    W = folner_window(G, N, scheme)
    pts = W.elements
    size = len(pts)
    if G.is_finite():
        inE = lambda g: pred(g if len(g) > 1 else g[0])
        dens = Fraction(sum(1 for g in pts if inE(g)), size)
        gvals = g_values if g_values is not None else G.elements()
        gvals = [tuple(g) if isinstance(g, (tuple, list)) else (int(g),) for g in gvals]
        corr = {}
        for g in gvals:
            cnt = 0
            for n in pts:
                if all(inE(G.add(n, G.mul(c, g))) for c in (0, a, b, a + b)):
                    cnt += 1
            corr[g] = Fraction(cnt, size)
        caveat = ""
        group = G
    else:
        ns = [p[0] for p in pts]
        dens = Fraction(sum(1 for n in ns if pred(n)), size)
        gvals = list(g_values) if g_values is not None else list(range(0, max(1, N // 4) + 1))
        gvals = [(int(g[0]) if isinstance(g, (tuple, list)) else int(g),) for g in gvals]
        corr = {}
        for (g,) in gvals:
            cnt = sum(1 for n in ns if pred(n) and pred(n + a * g) and pred(n + b * g) and pred(n + (a + b) * g))
            corr[(g,)] = Fraction(cnt, size)
        caveat = PROXY_CAVEAT + "; " + ZLIKE_CAVEAT
        group = None
    bound = dens ** 4 - eps
    good = [g for g in gvals if corr[g] >= bound]
    gap = syndeticity_gap(good, group)
    return RecurrenceReport((a, b), eps, dens, bound, corr, good, gap, {}, False, True, caveat=caveat)
