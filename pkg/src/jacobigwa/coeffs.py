"""Exact coefficient arithmetic for the shift calculus.

Three layers: dense univariate polynomials over Q (plain tuples, low degree
first), rational functions of the symbol H in a canonical reduced form, and
eventually rational eigenvalue sequences (a rational function of the position
plus finitely many exceptional values) together with their n-fold tensor
combinations.  The sequence value at position k is exc[k] if present, else
r evaluated at k+1; every positive-integer pole of r must be covered by an
exceptional value, so evaluation is total on N.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt

from .errors import NotInvertible

Q = Fraction

# ---------------------------------------------------------------------------
# polynomials: tuples of Fraction, ascending degree, no trailing zeros

P_ZERO = ()
P_ONE = (Q(1),)
P_H = (Q(0), Q(1))


def ptrim(cs):
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return ptrim(out)


def pneg(a):
    return tuple(-c for c in a)


def pmul(a, b):
    if not a or not b:
        return P_ZERO
    out = [Q(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return ptrim(out)


def pscale(a, c):
    if c == 0:
        return P_ZERO
    return tuple(x * c for x in a)


def pdeg(a):
    return len(a) - 1


def peval(a, x):
    acc = Q(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def pshift(a, c):
    """Substitute H -> H + c."""
    if c == 0:
        return a
    out = P_ZERO
    step = (Q(c), Q(1))
    for coeff in reversed(a):
        out = padd(pmul(out, step), (coeff,) if coeff else P_ZERO)
    return out


def pdivmod(a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Q(0)] * max(0, len(a) - len(b) + 1)
    r = list(a)
    lead = b[-1]
    while len(r) >= len(b) and any(r):
        if r[-1] == 0:
            r.pop()
            continue
        k = len(r) - len(b)
        c = r[-1] / lead
        q[k] = c
        for i, cb in enumerate(b):
            r[k + i] -= c * cb
        r.pop()
    return ptrim(q), ptrim(r)


def pgcd(a, b):
    while b:
        a, b = b, pdivmod(a, b)[1]
    if a:
        a = pscale(a, 1 / a[-1])
    return a


def pcontent_prim(a):
    """Split a nonzero polynomial as content * primitive-integer-positive-lead."""
    num_g = 0
    den_l = 1
    for c in a:
        num_g = gcd(num_g, c.numerator)
        den_l = den_l * c.denominator // gcd(den_l, c.denominator)
    content = Q(num_g, den_l)
    if a[-1] < 0:
        content = -content
    return content, tuple(c / content for c in a)


def _divisors(m):
    m = abs(m)
    out = []
    for d in range(1, isqrt(m) + 1):
        if m % d == 0:
            out.append(d)
            if d != m // d:
                out.append(m // d)
    return out


def integer_roots(a):
    """Integer roots with multiplicity of a nonzero integer polynomial.

    Returns (roots dict, remaining factor) with a = remaining * prod (H-r)^m.
    """
    roots = {}
    rest = list(a)
    k = 0
    while rest[0] == 0:
        rest.pop(0)
        k += 1
    if k:
        roots[0] = k
    rest = tuple(rest)
    if pdeg(rest) >= 1:
        const = rest[0]
        cands = sorted(set(d for d0 in _divisors(int(const)) for d in (d0, -d0)))
        for r in cands:
            while pdeg(rest) >= 1 and peval(rest, Q(r)) == 0:
                rest = pdivmod(rest, (Q(-r), Q(1)))[0]
                roots[r] = roots.get(r, 0) + 1
    return roots, rest


# ---------------------------------------------------------------------------


class RatFunc:
    """Rational function in H: gcd(num, den) = 1, den integer-primitive with
    positive leading coefficient."""

    __slots__ = ("num", "den", "_proots")

    def __init__(self, num, den=P_ONE):
        num = ptrim(num)
        den = ptrim(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            den = P_ONE
        else:
            g = pgcd(num, den)
            if pdeg(g) >= 1:
                num = pdivmod(num, g)[0]
                den = pdivmod(den, g)[0]
            content, den = pcontent_prim(den)
            num = pscale(num, 1 / content)
        self.num = num
        self.den = den
        self._proots = None

    # -- constructors

    @classmethod
    def const(cls, c):
        c = Q(c)
        return cls((c,) if c else P_ZERO)

    @classmethod
    def h(cls):
        return cls(P_H)

    @classmethod
    def linear(cls, j):
        """H + j."""
        return cls((Q(j), Q(1)))

    # -- predicates

    def is_zero(self):
        return not self.num

    def is_const(self):
        return pdeg(self.num) <= 0 and pdeg(self.den) == 0

    def const_value(self):
        if not self.is_const():
            raise ValueError("not constant")
        return (self.num[0] if self.num else Q(0)) / self.den[0]

    # -- arithmetic

    def __add__(self, other):
        other = _as_ratfunc(other)
        return RatFunc(padd(pmul(self.num, other.den), pmul(other.num, self.den)),
                       pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(pneg(self.num), self.den)

    def __sub__(self, other):
        return self + (-_as_ratfunc(other))

    def __rsub__(self, other):
        return _as_ratfunc(other) - self

    def __mul__(self, other):
        other = _as_ratfunc(other)
        return RatFunc(pmul(self.num, other.num), pmul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_ratfunc(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(pmul(self.num, other.den), pmul(self.den, other.num))

    def __pow__(self, m):
        if m < 0:
            if self.is_zero():
                raise ZeroDivisionError("inverting zero")
            return RatFunc(self.den, self.num) ** (-m)
        out = RatFunc(P_ONE)
        base = self
        while m:
            if m & 1:
                out = out * base
            base = base * base
            m >>= 1
        return out

    def inv(self):
        return self ** -1

    def shift(self, c):
        """Substitute H -> H + c."""
        return RatFunc(pshift(self.num, c), pshift(self.den, c))

    def eval(self, x):
        """Value at x, or None at a pole."""
        d = peval(self.den, x)
        if d == 0:
            return None
        return peval(self.num, x) / d

    def positive_pole_positions(self):
        """Positions k in N with den(k+1) = 0."""
        if self._proots is None:
            roots, _ = integer_roots(self.den)
            self._proots = frozenset(r - 1 for r in roots if r >= 1)
        return self._proots

    # -- identity

    def key(self):
        return (self.num, self.den)

    def __eq__(self, other):
        return isinstance(other, RatFunc) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"RatFunc({self.num}, {self.den})"


def _as_ratfunc(v):
    if isinstance(v, RatFunc):
        return v
    return RatFunc.const(v)


RF_ZERO = RatFunc(P_ZERO)
RF_ONE = RatFunc(P_ONE)
RF_H = RatFunc(P_H)


def factor_integer_linear(rf):
    """Factor a nonzero RatFunc as lam * prod (H - r)^m over integer roots r.

    Returns (lam, {r: m}) with m in Z; raises ValueError when numerator or
    denominator has an irreducible nonlinear (or non-integer-root) part.
    """
    if rf.is_zero():
        raise ValueError("zero has no unit factorization")
    c_num, prim_num = pcontent_prim(rf.num)
    nroots, nrest = integer_roots(prim_num)
    droots, drest = integer_roots(rf.den)
    if pdeg(nrest) >= 1 or pdeg(drest) >= 1:
        raise ValueError("non-integer roots")
    lam = c_num * nrest[0] / drest[0]
    exps = dict(nroots)
    for r, m in droots.items():
        exps[r] = exps.get(r, 0) - m
        if exps[r] == 0:
            del exps[r]
    return lam, exps


# ---------------------------------------------------------------------------


class EvSeq:
    """Eventually rational eigenvalue sequence."""

    __slots__ = ("r", "exc")

    def __init__(self, r, exc=None):
        exc = dict(exc or {})
        for k in r.positive_pole_positions():
            if k not in exc:
                raise ValueError(f"pole at position {k} not covered by an exception")
        poles = r.positive_pole_positions()
        for k in list(exc):
            if k not in poles and r.eval(Q(k + 1)) == exc[k]:
                del exc[k]
        self.r = r
        self.exc = exc

    # -- constructors

    @classmethod
    def const(cls, c):
        return cls(RatFunc.const(c))

    @classmethod
    def h(cls):
        return cls(RF_H)

    @classmethod
    def atom(cls, j):
        """The unit atom with index j: H+j for j >= 0, (H-|j|)_1 for j < 0."""
        if j >= 0:
            return cls(RatFunc.linear(j))
        return cls(RatFunc.linear(j), {-j - 1: Q(1)})

    @classmethod
    def proj(cls, k):
        """The idempotent E_kk as a sequence: 1 at k, 0 elsewhere."""
        return cls(RF_ZERO, {k: Q(1)})

    @classmethod
    def proj_from(cls, t):
        """The tail projection: 0 below t, 1 from t on."""
        return cls(RF_ONE, {k: Q(0) for k in range(t)})

    # -- evaluation and predicates

    def at(self, k):
        if k in self.exc:
            return self.exc[k]
        return self.r.eval(Q(k + 1))

    def is_zero(self):
        return self.r.is_zero() and not self.exc

    def is_one(self):
        return self.r == RF_ONE and not self.exc

    def is_const_r(self):
        return self.r.is_const()

    def finite_support(self):
        return self.r.is_zero()

    def max_exc(self):
        return max(self.exc) if self.exc else -1

    # -- ring operations (pointwise)

    def _join(self, other, op):
        r = op(self.r, other.r)
        exc = {}
        for k in set(self.exc) | set(other.exc):
            exc[k] = op(self.at(k), other.at(k))
        return EvSeq(r, exc)

    def __add__(self, other):
        return self._join(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._join(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._join(other, lambda a, b: a * b)

    def __neg__(self):
        return EvSeq(-self.r, {k: -v for k, v in self.exc.items()})

    def scale(self, c):
        c = Q(c)
        if c == 0:
            return EV_ZERO
        return EvSeq(self.r * c, {k: v * c for k, v in self.exc.items()})

    def inv(self):
        if self.r.is_zero():
            raise NotInvertible("finitely supported sequences are not invertible")
        positions = set(self.exc)
        _, prim = pcontent_prim(self.r.num)
        roots, _ = integer_roots(prim)
        positions |= {r - 1 for r in roots if r >= 1}
        exc = {}
        for k in positions:
            v = self.at(k)
            if v == 0:
                raise NotInvertible(f"sequence vanishes at position {k}")
            exc[k] = 1 / v
        return EvSeq(self.r.inv(), exc)

    def __pow__(self, m):
        if m < 0:
            return self.inv() ** (-m)
        out = EV_ONE
        for _ in range(m):
            out = out * self
        return out

    # -- the shift endomorphisms

    def sigma(self, m=1):
        """sigma^m: value 0 at positions < m, previous value shifted up."""
        if m == 0:
            return self
        r = self.r.shift(-m)
        exc = {k + m: v for k, v in self.exc.items()}
        for t in range(m):
            exc[t] = Q(0)
        return EvSeq(r, exc)

    def tau(self, m=1):
        """tau^m: value at k becomes the value at k+m."""
        if m == 0:
            return self
        r = self.r.shift(m)
        exc = {k - m: v for k, v in self.exc.items() if k >= m}
        return EvSeq(r, exc)

    def cross_shift(self, s):
        """Move this diagonal from the left of shift_s to its right."""
        return self.tau(s) if s >= 0 else self.sigma(-s)

    # -- identity

    def key(self):
        return (self.r.num, self.r.den, tuple(sorted(self.exc.items())))

    def __eq__(self, other):
        return isinstance(other, EvSeq) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"EvSeq({self.r!r}, {self.exc!r})"


EV_ZERO = EvSeq(RF_ZERO)
EV_ONE = EvSeq(RF_ONE)


# ---------------------------------------------------------------------------


class DiagN:
    """Finite sum of coefficient * (n-fold pure tensor of EvSeq factors).

    Normal form merges identical factor tuples and, for n = 1, collapses the
    whole sum into a single sequence; for n >= 2 the representation is not
    canonical and equality is decided by is_zero.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n, terms, _normalized=False):
        if not _normalized:
            terms = _normalize_terms(n, terms)
        self.n = n
        self.terms = terms

    # -- constructors

    @classmethod
    def const(cls, n, c):
        c = Q(c)
        if c == 0:
            return cls(n, [], _normalized=True)
        return cls(n, [(c, (EV_ONE,) * n)], _normalized=True)

    @classmethod
    def one(cls, n):
        return cls.const(n, 1)

    @classmethod
    def zero(cls, n):
        return cls(n, [], _normalized=True)

    @classmethod
    def from_slot(cls, n, i, f):
        """The pure tensor with f in slot i (0-based) and 1 elsewhere."""
        if f.is_zero():
            return cls.zero(n)
        factors = tuple(f if j == i else EV_ONE for j in range(n))
        return cls(n, [(Q(1), factors)], _normalized=True)

    # -- predicates / access

    def is_zero_form(self):
        return not self.terms

    def eval(self, point):
        total = Q(0)
        for c, factors in self.terms:
            v = c
            for f, k in zip(factors, point):
                v *= f.at(k)
                if v == 0:
                    break
            total += v
        return total

    def max_exc(self):
        m = -1
        for _, factors in self.terms:
            for f in factors:
                m = max(m, f.max_exc())
        return m

    # -- arithmetic

    def __add__(self, other):
        return DiagN(self.n, self.terms + other.terms)

    def __neg__(self):
        return DiagN(self.n, [(-c, fs) for c, fs in self.terms], _normalized=True)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = []
        for c1, f1 in self.terms:
            for c2, f2 in other.terms:
                out.append((c1 * c2, tuple(a * b for a, b in zip(f1, f2))))
        return DiagN(self.n, out)

    def scale(self, c):
        c = Q(c)
        if c == 0:
            return DiagN.zero(self.n)
        return DiagN(self.n, [(c * c0, fs) for c0, fs in self.terms], _normalized=True)

    def map_slot(self, i, fn):
        return DiagN(self.n, [(c, fs[:i] + (fn(fs[i]),) + fs[i + 1:])
                              for c, fs in self.terms])

    def cross_shift(self, beta):
        """Move the diagonal across shift_beta (componentwise tau/sigma)."""
        d = self
        for i, s in enumerate(beta):
            if s:
                d = d.map_slot(i, lambda f, s=s: f.cross_shift(s))
        return d

    def specialize(self, i, k):
        out = []
        for c, fs in self.terms:
            v = c * fs[i].at(k)
            if v != 0:
                out.append((v, fs[:i] + fs[i + 1:]))
        return DiagN(self.n - 1, out)

    # -- zero test (deterministic grid evaluation)

    def is_zero(self, starts=None):
        """True iff the function vanishes on prod [starts_i, infinity)."""
        if starts is None:
            starts = (0,) * self.n
        return _is_zero_rec(self.n, self.terms, starts)

    def key(self):
        return tuple(sorted((c, tuple(f.key() for f in fs)) for c, fs in self.terms))

    def __repr__(self):
        return f"DiagN({self.n}, {self.terms!r})"


def _normalize_terms(n, terms):
    merged = {}
    for c, fs in terms:
        if c == 0 or any(f.is_zero() for f in fs):
            continue
        key = tuple(f.key() for f in fs)
        if key in merged:
            merged[key] = (merged[key][0] + c, fs)
        else:
            merged[key] = (c, fs)
    out = [(c, fs) for c, fs in merged.values() if c != 0]
    if n == 1 and len(out) > 1:
        total = EV_ZERO
        for c, fs in out:
            total = total + fs[0].scale(c)
        out = [] if total.is_zero() else [(Q(1), (total,))]
    out.sort(key=lambda t: (tuple(f.key() for f in t[1]), t[0]))
    return out


def _is_zero_rec(n, terms, starts):
    if not terms:
        return True
    if n == 0:
        return sum(c for c, _ in terms) == 0
    if n == 1:
        total = EV_ZERO
        for c, fs in terms:
            total = total + fs[0].scale(c)
        if total.r.is_zero():
            return all(v == 0 for k, v in total.exc.items() if k >= starts[0])
        # a nonzero rational part survives on every tail
        return False

    s0 = starts[0]
    exc_positions = set()
    degree_sum = 0
    for _, fs in terms:
        f = fs[0]
        exc_positions |= set(f.exc)
        degree_sum += max(0, pdeg(f.r.num)) + max(0, pdeg(f.r.den))
    for b in sorted(p for p in exc_positions if p >= s0):
        spec = _specialize_terms(terms, b)
        if not _is_zero_rec(n - 1, _normalize_terms(n - 1, spec), starts[1:]):
            return False
    base = max([s0] + [p + 1 for p in exc_positions]) + 1
    for s in range(base, base + degree_sum + 1):
        spec = _specialize_terms(terms, s)
        if not _is_zero_rec(n - 1, _normalize_terms(n - 1, spec), starts[1:]):
            return False
    return True


def _specialize_terms(terms, k):
    out = []
    for c, fs in terms:
        v = c * fs[0].at(k)
        if v != 0:
            out.append((v, fs[1:]))
    return out


# ---------------------------------------------------------------------------
# operation-level aliases matching the public surface


def evseq_at(d, k):
    return d.at(k)


def evseq_add(a, b):
    return a + b


def evseq_mul(a, b):
    return a * b


def evseq_sigma(d):
    return d.sigma()


def evseq_tau(d):
    return d.tau()


def diag_is_zero(d):
    return d.is_zero()
