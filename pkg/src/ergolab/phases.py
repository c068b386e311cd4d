"""Exact arithmetic on the circle.

A :class:`Phase` is an element of R/Z written as ``q + sum_j c_j * sym_j`` with
``q`` rational and the ``sym_j`` formal irrationals, assumed linearly
independent over Q together with 1.  :class:`ExactComplex` is a finite
rational combination of exponentials ``e(p) = exp(2 pi i p)``; its rational
part lives in cyclotomic fields and is compared exactly by reduction modulo
cyclotomic polynomials.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm

FLOAT_TOL = 1e-9
MAX_DEGREE = 8
MAX_PERIOD = 10**6


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction or a string")
    return Fraction(x)


def _merge_sym(a: tuple, b: tuple, sign: int = 1) -> tuple:
    if not b:
        return a
    if not a and sign == 1:
        return b
    d = dict(a)
    for k, v in b:
        w = d.get(k, 0) + sign * v
        if w:
            d[k] = w
        else:
            d.pop(k, None)
    return tuple(sorted(d.items()))


class Phase:
    """An element q + sum c_j*sym_j of R/Z (q reduced into [0, 1))."""

    __slots__ = ("q", "sym", "_h")

    def __init__(self, q=0, sym=None):
        self.q = _frac(q) % 1
        if sym:
            items = sym.items() if isinstance(sym, dict) else sym
            cleaned = {}
            for k, v in items:
                v = _frac(v)
                if v:
                    cleaned[str(k)] = cleaned.get(str(k), 0) + v
            self.sym = tuple(sorted((k, v) for k, v in cleaned.items() if v))
        else:
            self.sym = ()
        self._h = None

    @classmethod
    def _raw(cls, q: Fraction, sym: tuple) -> "Phase":
        p = cls.__new__(cls)
        p.q = q
        p.sym = sym
        p._h = None
        return p

    @classmethod
    def symbol(cls, name: str, coeff=1) -> "Phase":
        return cls(0, {name: coeff})

    @property
    def symbols(self) -> dict:
        return dict(self.sym)

    def is_integral(self) -> bool:
        return self.q == 0 and not self.sym

    def is_rational(self) -> bool:
        return not self.sym

    def __add__(self, other: "Phase") -> "Phase":
        if not isinstance(other, Phase):
            return NotImplemented
        return Phase._raw((self.q + other.q) % 1, _merge_sym(self.sym, other.sym))

    def __sub__(self, other: "Phase") -> "Phase":
        if not isinstance(other, Phase):
            return NotImplemented
        return Phase._raw((self.q - other.q) % 1, _merge_sym(self.sym, other.sym, -1))

    def __neg__(self) -> "Phase":
        return Phase._raw((-self.q) % 1, tuple((k, -v) for k, v in self.sym))

    def __mul__(self, m) -> "Phase":
        if isinstance(m, bool) or not isinstance(m, int):
            return NotImplemented
        if m == 0:
            return ZERO_PHASE
        return Phase._raw((self.q * m) % 1, tuple((k, v * m) for k, v in self.sym))

    __rmul__ = __mul__

    def scale(self, r) -> "Phase":
        """Multiply the canonical representative (q in [0,1)) by a rational r.

        Only meaningful when the result is later paired with integers whose
        product with r is integral (e.g. binomial coefficients in n).
        """
        r = _frac(r)
        return Phase._raw((self.q * r) % 1, tuple((k, v * r) for k, v in self.sym if v * r))

    def __eq__(self, other) -> bool:
        if isinstance(other, Phase):
            return self.q == other.q and self.sym == other.sym
        return NotImplemented

    def __hash__(self) -> int:
        if self._h is None:
            self._h = hash((self.q, self.sym))
        return self._h

    def to_float(self, subs: dict | None = None) -> float:
        x = float(self.q)
        for k, v in self.sym:
            if subs is None or k not in subs:
                raise KeyError(f"no numeric value for symbol {k!r}")
            x += float(v) * subs[k]
        return x % 1.0

    def to_dict(self) -> dict:
        return {"q": str(self.q), "sym": {k: str(v) for k, v in self.sym}}

    @classmethod
    def from_dict(cls, d: dict) -> "Phase":
        return cls(Fraction(d.get("q", "0")), {k: Fraction(v) for k, v in d.get("sym", {}).items()})

    def __repr__(self) -> str:
        parts = [str(self.q)] if self.q or not self.sym else []
        parts += [f"{v}*{k}" for k, v in self.sym]
        return "Phase(" + " + ".join(parts) + ")"


ZERO_PHASE = Phase()


# --- cyclotomic numbers -------------------------------------------------------

def _poly_divexact(num: list, den: list) -> list:
    num = num[:]
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    assert not any(num), "inexact polynomial division"
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple:
    """Coefficients (low degree first) of the n-th cyclotomic polynomial."""
    p = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            p = _poly_divexact(p, list(cyclotomic_poly(d)))
    return tuple(p)


def _reduce_mod_phi(vec: list, level: int) -> list:
    phi = cyclotomic_poly(level)
    deg = len(phi) - 1
    v = vec[:]
    for i in range(len(v) - 1, deg - 1, -1):
        c = v[i]
        if c:
            base = i - deg
            for j in range(deg):
                if phi[j]:
                    v[base + j] -= c * phi[j]
            v[i] = 0
    return v[:deg]


class Cyclo:
    """sum_k coeffs[k] * zeta_level^k / den, kept reduced modulo Phi_level."""

    __slots__ = ("level", "coeffs", "den")

    def __init__(self, level: int, coeffs, den: int = 1, reduced: bool = False):
        coeffs = list(coeffs)
        if not reduced:
            full = [0] * level
            for k, c in enumerate(coeffs):
                full[k % level] += c
            coeffs = _reduce_mod_phi(full, level)
        if level > 1 and not any(coeffs[1:]):
            level, coeffs = 1, coeffs[:1]
        g = den
        for c in coeffs:
            if g == 1:
                break
            g = gcd(g, c)
        if den < 0:
            g = -g
        if g != 1 and g != 0:
            coeffs = [c // g for c in coeffs]
            den //= g
        if not any(coeffs):
            level, coeffs, den = 1, [0], 1
        self.level = level
        self.coeffs = tuple(coeffs)
        self.den = den

    @classmethod
    def rational(cls, r) -> "Cyclo":
        r = _frac(r)
        return cls(1, [r.numerator], r.denominator, reduced=True)

    @classmethod
    def root(cls, q: Fraction) -> "Cyclo":
        """zeta = e(q) for rational q."""
        q = _frac(q) % 1
        L = q.denominator
        v = [0] * L
        v[q.numerator] = 1
        return cls(L, v)

    def _lift(self, M: int) -> list:
        step = M // self.level
        v = [0] * M
        for k, c in enumerate(self.coeffs):
            if c:
                v[k * step] = c
        return v

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, o: "Cyclo") -> "Cyclo":
        if self.level == o.level:
            d = lcm(self.den, o.den)
            a, b = d // self.den, d // o.den
            return Cyclo(self.level, [a * x + b * y for x, y in zip(self.coeffs, o.coeffs)], d, reduced=True)
        M = lcm(self.level, o.level)
        d = lcm(self.den, o.den)
        a, b = d // self.den, d // o.den
        u, w = self._lift(M), o._lift(M)
        return Cyclo(M, [a * x + b * y for x, y in zip(u, w)], d)

    def __neg__(self) -> "Cyclo":
        return Cyclo(self.level, [-c for c in self.coeffs], self.den, reduced=True)

    def __sub__(self, o: "Cyclo") -> "Cyclo":
        return self + (-o)

    def __mul__(self, o: "Cyclo") -> "Cyclo":
        if o.level == 1:
            c = o.coeffs[0]
            return Cyclo(self.level, [c * x for x in self.coeffs], self.den * o.den, reduced=True)
        if self.level == 1:
            return o * self
        M = lcm(self.level, o.level)
        sa, sb = M // self.level, M // o.level
        out = [0] * M
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(o.coeffs):
                    if y:
                        out[(i * sa + j * sb) % M] += x * y
        return Cyclo(M, out, self.den * o.den)

    def scale(self, r) -> "Cyclo":
        r = _frac(r)
        return Cyclo(self.level, [r.numerator * c for c in self.coeffs], self.den * r.denominator, reduced=True)

    def conj(self) -> "Cyclo":
        if self.level == 1:
            return self
        v = [0] * self.level
        for k, c in enumerate(self.coeffs):
            v[(-k) % self.level] += c
        return Cyclo(self.level, v, self.den)

    def to_complex(self) -> complex:
        z = 0j
        for k, c in enumerate(self.coeffs):
            if c:
                z += c * cmath.exp(2j * cmath.pi * k / self.level)
        return z / self.den

    def as_fraction(self) -> Fraction | None:
        if self.level == 1:
            return Fraction(self.coeffs[0], self.den)
        return None

    def __eq__(self, o) -> bool:
        if not isinstance(o, Cyclo):
            return NotImplemented
        return (self - o).is_zero()

    def __hash__(self):
        raise TypeError("Cyclo is not hashable")

    def __repr__(self) -> str:
        if self.level == 1:
            return f"Cyclo({Fraction(self.coeffs[0], self.den)})"
        return f"Cyclo(level={self.level}, {list(self.coeffs)}/{self.den})"


_ZERO_C = Cyclo(1, [0], 1, reduced=True)
_ONE_C = Cyclo(1, [1], 1, reduced=True)


class ExactComplex:
    """Finite sum  sum_s e(s) * c_s  with s a purely symbolic phase and c_s cyclotomic.

    Equality means the difference is zero; instances are therefore unhashable.
    """

    __slots__ = ("parts",)

    def __init__(self, parts: dict | None = None):
        self.parts = {k: v for k, v in (parts or {}).items() if not v.is_zero()}

    @classmethod
    def e(cls, phase: Phase) -> "ExactComplex":
        return cls({phase.sym: Cyclo.root(phase.q)})

    @classmethod
    def from_rational(cls, r) -> "ExactComplex":
        return cls({(): Cyclo.rational(r)})

    @classmethod
    def coerce(cls, x) -> "ExactComplex":
        if isinstance(x, ExactComplex):
            return x
        if isinstance(x, (int, Fraction)):
            return cls.from_rational(x)
        if isinstance(x, Phase):
            return cls.e(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to ExactComplex")

    def is_zero(self) -> bool:
        return not self.parts

    def __bool__(self) -> bool:
        return bool(self.parts)

    def __add__(self, other) -> "ExactComplex":
        try:
            other = ExactComplex.coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self.parts)
        for k, v in other.parts.items():
            out[k] = out[k] + v if k in out else v
        return ExactComplex(out)

    __radd__ = __add__

    def __neg__(self) -> "ExactComplex":
        return ExactComplex({k: -v for k, v in self.parts.items()})

    def __sub__(self, other) -> "ExactComplex":
        try:
            other = ExactComplex.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "ExactComplex":
        return ExactComplex.coerce(other) - self

    def __mul__(self, other) -> "ExactComplex":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                return ExactComplex()
            return ExactComplex({k: v.scale(other) for k, v in self.parts.items()})
        try:
            other = ExactComplex.coerce(other)
        except TypeError:
            return NotImplemented
        out: dict = {}
        for k1, v1 in self.parts.items():
            for k2, v2 in other.parts.items():
                k = _merge_sym(k1, k2)
                p = v1 * v2
                out[k] = out[k] + p if k in out else p
        return ExactComplex(out)

    __rmul__ = __mul__

    def __truediv__(self, r) -> "ExactComplex":
        if isinstance(r, (int, Fraction)):
            return self * (1 / _frac(r))
        return NotImplemented

    def conj(self) -> "ExactComplex":
        return ExactComplex({tuple((s, -c) for s, c in k): v.conj() for k, v in self.parts.items()})

    def abs2(self) -> "ExactComplex":
        return self * self.conj()

    def __eq__(self, other) -> bool:
        try:
            other = ExactComplex.coerce(other)
        except TypeError:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def as_fraction(self) -> Fraction | None:
        """The value as a rational number, or None if it is not rational."""
        if not self.parts:
            return Fraction(0)
        if len(self.parts) == 1 and () in self.parts:
            return self.parts[()].as_fraction()
        return None

    def is_rational(self) -> bool:
        return self.as_fraction() is not None

    def symbolic_keys(self) -> list:
        return sorted(self.parts)

    def to_complex(self, subs: dict | None = None) -> complex:
        z = 0j
        for k, v in self.parts.items():
            w = v.to_complex()
            if k:
                w *= cmath.exp(2j * cmath.pi * Phase._raw(Fraction(0), k).to_float(subs))
            z += w
        return z

    def to_dict(self) -> dict:
        """Lossless form: per symbolic key, the reduced cyclotomic coefficient vector."""
        return {
            "terms": [
                {"sym": {s: str(c) for s, c in k}, "level": v.level,
                 "coeffs": list(v.coeffs), "den": v.den}
                for k, v in sorted(self.parts.items())
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExactComplex":
        parts = {}
        for t in d["terms"]:
            key = tuple(sorted((s, Fraction(c)) for s, c in t["sym"].items()))
            parts[key] = Cyclo(t["level"], t["coeffs"], t["den"])
        return cls(parts)

    def __repr__(self) -> str:
        if not self.parts:
            return "ExactComplex(0)"
        bits = []
        for k, v in sorted(self.parts.items()):
            s = " + ".join(f"{c}*{n}" for n, c in k)
            bits.append(f"{v!r}" + (f"*e({s})" if s else ""))
        return "ExactComplex(" + " + ".join(bits) + ")"


ZERO = ExactComplex()
ONE = ExactComplex.from_rational(1)


def e(phase) -> ExactComplex:
    """e(p) = exp(2 pi i p) for a Phase or a rational."""
    if not isinstance(phase, Phase):
        phase = Phase(phase)
    return ExactComplex.e(phase)


def window_average(values) -> ExactComplex:
    values = list(values)
    if not values:
        raise ValueError("window_average of an empty sequence")
    total = ExactComplex()
    for v in values:
        total = total + v
    return total * Fraction(1, len(values))


# --- polynomials in an integer variable -----------------------------------------

@dataclass(frozen=True)
class PhasePolynomial:
    """p(n) = sum_j coeffs[j] * n**j with Phase coefficients."""

    coeffs: tuple

    def __post_init__(self):
        c = list(self.coeffs) or [ZERO_PHASE]
        c = [x if isinstance(x, Phase) else Phase(x) for x in c]
        while len(c) > 1 and c[-1].is_integral():
            c.pop()
        if len(c) - 1 > MAX_DEGREE:
            raise ValueError(f"degree {len(c) - 1} exceeds the cap {MAX_DEGREE}")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "PhasePolynomial") -> "PhasePolynomial":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return PhasePolynomial(tuple(
            (a[i] if i < len(a) else ZERO_PHASE) + (b[i] if i < len(b) else ZERO_PHASE) for i in range(n)))

    def __neg__(self) -> "PhasePolynomial":
        return PhasePolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, m: int) -> "PhasePolynomial":
        return PhasePolynomial(tuple(c * m for c in self.coeffs))

    __rmul__ = __mul__

    def __call__(self, n: int) -> Phase:
        acc = ZERO_PHASE
        for j, c in enumerate(self.coeffs):
            acc = acc + c * (n ** j)
        return acc

    def period(self) -> int:
        L = 1
        for c in self.coeffs[1:]:
            L = lcm(L, c.q.denominator)
        return L

    def to_float_fn(self, subs: dict):
        """Numeric evaluator n -> p(n) mod 1 (floats, for Monte-Carlo checks)."""
        rat = [(c.q.numerator, c.q.denominator) for c in self.coeffs]
        irr = [sum(float(v) * subs[k] for k, v in c.sym) for c in self.coeffs]

        def f(n):
            t = 0.0
            for j, ((a, b), x) in enumerate(zip(rat, irr)):
                nj = n ** j
                t += (a * nj % b) / b  # rational part reduced exactly
                t += (x * nj) % 1.0
            return t % 1.0
        return f


def binomial_in_n(a: int, j: int) -> list:
    """Rational coefficients (low first) of C(a*n, j) as a polynomial in n."""
    poly = [Fraction(1)]
    for t in range(j):
        # multiply by (a n - t)
        new = [Fraction(0)] * (len(poly) + 1)
        for i, c in enumerate(poly):
            new[i] -= t * c
            new[i + 1] += a * c
        poly = new
    fact = 1
    for t in range(2, j + 1):
        fact *= t
    return [c / fact for c in poly]


def phase_times_rational_poly(phase: Phase, poly: list) -> PhasePolynomial:
    """phase * P(n) for an integer-valued rational polynomial P (coefficients low first)."""
    return PhasePolynomial(tuple(phase.scale(c) for c in poly))


def weyl_limit(p: PhasePolynomial, max_period: int = MAX_PERIOD) -> ExactComplex:
    """lim_N E_{n<N} e(p(n)), exactly."""
    c0 = p.coeffs[0]
    if p.degree == 0:
        return ExactComplex.e(c0)
    if any(c.sym for c in p.coeffs[1:]):
        # an irrational non-constant coefficient: Weyl equidistribution
        return ExactComplex()
    L = p.period()
    if L > max_period:
        raise ValueError(f"period {L} exceeds the cap {max_period}")
    nums = [int(c.q * L) for c in p.coeffs]
    nums[0] = 0
    counts = [0] * L
    for n in range(L):
        acc, pw = 0, 1
        for a in nums[1:]:
            pw = pw * n % L
            acc += a * pw
        counts[acc % L] += 1
    return ExactComplex({(): Cyclo(L, counts, L)}) * ExactComplex.e(c0)
