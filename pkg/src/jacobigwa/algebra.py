"""Z^n-graded normal-form arithmetic for the shift algebras.

An element is a finite sum of graded components shift_alpha . diag(d_alpha):
the diagonal acts first, then monomial exponents move by alpha (annihilating
whenever a coordinate would become negative).  Components whose diagonal
vanishes on the surviving positions are dropped, and exceptional data stored
at annihilated positions is normalized away, which keeps the n = 1 normal
form canonical.
"""

from __future__ import annotations

from fractions import Fraction

from .coeffs import (DiagN, EvSeq, Q, RatFunc, RF_H, RF_ONE, RF_ZERO,
                     _normalize_terms, pdeg)
from .errors import ArityMismatch, IndexOutOfRange, NoStabilization, NotFredholm

# ---------------------------------------------------------------------------


class Poly:
    """Polynomial in x_1..x_n: finite map from N^n exponents to rationals."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs=None):
        self.n = n
        self.coeffs = {k: Q(v) for k, v in (coeffs or {}).items() if v != 0}

    @classmethod
    def monomial(cls, n, beta, c=1):
        return cls(n, {tuple(beta): Q(c)})

    @classmethod
    def one(cls, n):
        return cls.monomial(n, (0,) * n)

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Q(0)) + v
        return Poly(self.n, out)

    def __sub__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Q(0)) - v
        return Poly(self.n, out)

    def scale(self, c):
        return Poly(self.n, {k: v * c for k, v in self.coeffs.items()})

    def degree(self):
        """Top total degree; -1 for zero (n = 1: top exponent)."""
        if not self.coeffs:
            return -1
        return max(sum(k) for k in self.coeffs)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.coeffs.items()))))

    def __repr__(self):
        return f"Poly({self.n}, {self.coeffs!r})"


# ---------------------------------------------------------------------------


def _thresholds(alpha):
    return tuple(max(0, -a) for a in alpha)


def _truncate_exc(f, t):
    """Drop exceptional values at annihilated positions k < t (keep 0 at poles)."""
    if t <= 0 or not f.exc:
        return f
    poles = f.r.positive_pole_positions()
    exc = {}
    for k, v in f.exc.items():
        if k >= t:
            exc[k] = v
        elif k in poles:
            exc[k] = Q(0)
    return EvSeq(f.r, exc)


class AElem:
    """Element of the n-th shift algebra in graded normal form."""

    __slots__ = ("n", "comps")

    def __init__(self, n, comps, _normalized=False):
        if not _normalized:
            comps = _normalize_comps(n, comps)
        self.n = n
        self.comps = comps

    # -- constructors

    @classmethod
    def zero(cls, n):
        return cls(n, {}, _normalized=True)

    @classmethod
    def const(cls, n, c):
        c = Q(c)
        if c == 0:
            return cls.zero(n)
        return cls(n, {(0,) * n: DiagN.const(n, c)}, _normalized=True)

    @classmethod
    def one(cls, n):
        return cls.const(n, 1)

    @classmethod
    def from_diag(cls, d):
        return cls(d.n, {(0,) * d.n: d})

    @classmethod
    def component(cls, n, alpha, d):
        return cls(n, {tuple(alpha): d})

    # -- predicates

    def is_zero(self):
        return not self.comps

    def is_one(self):
        return self == AElem.one(self.n)

    # -- ring structure

    def _check(self, other):
        if self.n != other.n:
            raise ArityMismatch(f"arity {self.n} vs {other.n}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.comps)
        for a, d in other.comps.items():
            out[a] = out[a] + d if a in out else d
        return AElem(self.n, out)

    def __neg__(self):
        return AElem(self.n, {a: -d for a, d in self.comps.items()}, _normalized=True)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        out = {}
        for a, d1 in self.comps.items():
            for b, d2 in other.comps.items():
                g = tuple(x + y for x, y in zip(a, b))
                d = d1.cross_shift(b) * d2
                out[g] = out[g] + d if g in out else d
        return AElem(self.n, out)

    def scale(self, c):
        c = Q(c)
        if c == 0:
            return AElem.zero(self.n)
        return AElem(self.n, {a: d.scale(c) for a, d in self.comps.items()},
                     _normalized=True)

    def __pow__(self, m):
        if m < 0:
            raise ValueError("negative powers need an explicit inverse")
        out = AElem.one(self.n)
        base = self
        while m:
            if m & 1:
                out = out * base
            base = base * base
            m >>= 1
        return out

    def __eq__(self, other):
        return isinstance(other, AElem) and self.n == other.n \
            and (self - other).is_zero()

    def __hash__(self):
        raise TypeError("AElem is unhashable; use eq")

    # -- module action on polynomials

    def act(self, p):
        if self.n != p.n:
            raise ArityMismatch(f"arity {self.n} vs {p.n}")
        out = {}
        for beta, c in p.coeffs.items():
            for alpha, d in self.comps.items():
                target = tuple(b + a for b, a in zip(beta, alpha))
                if any(t < 0 for t in target):
                    continue
                v = c * d.eval(beta)
                if v:
                    out[target] = out.get(target, Q(0)) + v
        return Poly(self.n, out)

    # -- involutions

    def eta(self):
        """The transpose involution: x_i <-> y_i, diagonals fixed."""
        out = {}
        for alpha, d in self.comps.items():
            nd = d
            for i, a in enumerate(alpha):
                if a:
                    nd = nd.map_slot(i, lambda f, a=a: f.sigma(a) if a > 0 else f.tau(-a))
            g = tuple(-a for a in alpha)
            out[g] = out[g] + nd if g in out else nd
        return AElem(self.n, out)

    def theta(self):
        """The Fourier-type involution x_i -> H_i y_i (eta after the H-twist)."""
        return _h_twist(self).eta()

    # -- quotient onto the skew Laurent algebra

    def quotient(self):
        comps = {}
        for alpha, d in self.comps.items():
            terms = [(c, tuple(f.r for f in fs)) for c, fs in d.terms]
            comps[alpha] = comps[alpha] + terms if alpha in comps else terms
        return QElem(self.n, comps)

    def in_sn(self):
        """True iff every diagonal factor has constant rational part."""
        return all(f.is_const_r()
                   for d in self.comps.values()
                   for _, fs in d.terms for f in fs)

    def support(self):
        return sorted(self.comps)

    def max_exc(self):
        return max([d.max_exc() for d in self.comps.values()], default=-1)

    def __repr__(self):
        return f"AElem({self.n}, {self.comps!r})"


def _normalize_comps(n, comps):
    out = {}
    for alpha, d in comps.items():
        t = _thresholds(alpha)
        if any(t):
            d = DiagN(n, [(c, tuple(_truncate_exc(f, ti) for f, ti in zip(fs, t)))
                          for c, fs in d.terms])
        if not d.is_zero(starts=t):
            out[alpha] = d
    return out


def _cocycle(u, u_inv, m):
    """The diagonal factor of mu_u on a degree-m monomial in one coordinate."""
    if m == 0:
        return None
    if m > 0:
        c = u
        for j in range(1, m):
            c = c * u.tau(j)
        return c
    m = -m
    c = u_inv
    for j in range(1, m):
        c = c * u_inv.tau(j)
    return c.sigma(m)


def _mu_apply(a, slot_units):
    """Apply mu_u for u given as per-slot (EvSeq, inverse EvSeq) pairs."""
    out = {}
    for alpha, d in a.comps.items():
        for i, m in enumerate(alpha):
            if m:
                u, ui = slot_units[i]
                c = _cocycle(u, ui, m)
                d = d.map_slot(i, lambda f, c=c: f * c)
        out[alpha] = d
    return AElem(a.n, out)


def _h_twist(a):
    """x_i -> x_i H_i, y_i -> H_i^{-1} y_i on all coordinates."""
    h = EvSeq.h()
    hi = h.inv()
    return _mu_apply(a, [(h, hi)] * a.n)


# ---------------------------------------------------------------------------
# generators


def _check_index(n, i):
    if not 1 <= i <= n:
        raise IndexOutOfRange(f"coordinate {i} out of range 1..{n}")


def _unit(n, i):
    e = [0] * n
    e[i - 1] = 1
    return tuple(e)


def x_gen(n, i=1):
    _check_index(n, i)
    return AElem.component(n, _unit(n, i), DiagN.one(n))


def y_gen(n, i=1):
    _check_index(n, i)
    return AElem.component(n, tuple(-e for e in _unit(n, i)), DiagN.one(n))


def h_gen(n, i=1):
    _check_index(n, i)
    return AElem.from_diag(DiagN.from_slot(n, i - 1, EvSeq.h()))


def hinv_gen(n, i=1):
    _check_index(n, i)
    return AElem.from_diag(DiagN.from_slot(n, i - 1, EvSeq.h().inv()))


def hs_gen(n, i, j):
    """(H_i - j)_1 for j >= 1; the plain unit H_i - j for j <= 0."""
    _check_index(n, i)
    return AElem.from_diag(DiagN.from_slot(n, i - 1, EvSeq.atom(-j)))


def e_gen(n, i, a, b):
    """The matrix unit E_ab in coordinate i."""
    _check_index(n, i)
    if a < 0 or b < 0:
        raise IndexOutOfRange("matrix unit indices must be natural numbers")
    alpha = tuple((a - b) * e for e in _unit(n, i))
    return AElem.component(n, alpha, DiagN.from_slot(n, i - 1, EvSeq.proj(b)))


def e_multi(n, alpha, beta):
    """The matrix unit E_{alpha beta} = prod_i E_{alpha_i beta_i}(i)."""
    alpha, beta = tuple(alpha), tuple(beta)
    if len(alpha) != n or len(beta) != n:
        raise ArityMismatch("index vectors must have length n")
    if any(a < 0 for a in alpha) or any(b < 0 for b in beta):
        raise IndexOutOfRange("matrix unit indices must be natural numbers")
    shift = tuple(a - b for a, b in zip(alpha, beta))
    d = DiagN(n, [(Q(1), tuple(EvSeq.proj(b) for b in beta))])
    return AElem.component(n, shift, d)


def partial_gen(n, i=1):
    """The derivation in coordinate i (equals H_i y_i)."""
    _check_index(n, i)
    alpha = tuple(-e for e in _unit(n, i))
    return AElem.component(n, alpha, DiagN.from_slot(n, i - 1, EvSeq(RatFunc.linear(-1))))


def integ_gen(n, i=1):
    """The integration in coordinate i (equals x_i H_i^{-1})."""
    _check_index(n, i)
    return AElem.component(n, _unit(n, i),
                           DiagN.from_slot(n, i - 1, EvSeq.h().inv()))


def proj_p(n, i, d):
    """The projection p(i, d) = sum_{j < d} E_jj(i)."""
    _check_index(n, i)
    return AElem.from_diag(DiagN.from_slot(
        n, i - 1, EvSeq(RF_ZERO, {j: Q(1) for j in range(d)})))


def proj_q(n, i, d):
    """The complementary projection q(i, d) = 1 - p(i, d)."""
    _check_index(n, i)
    return AElem.from_diag(DiagN.from_slot(n, i - 1, EvSeq.proj_from(d)))


def annihilator_basis(n, i, m):
    """E_{j,0}(i) for j < m: a left-annihilator basis slice for x_i
    (their eta images E_{0,j}(i) right-annihilate y_i)."""
    return [e_gen(n, i, j, 0) for j in range(m)]


# ---------------------------------------------------------------------------
# quotient algebra elements


class QElem:
    """Class of an element in the quotient by the maximal ideal: a skew
    Laurent polynomial sum x^alpha f_alpha with f_alpha a sum of pure tensors
    of rational functions."""

    __slots__ = ("n", "comps")

    def __init__(self, n, comps, _normalized=False):
        if not _normalized:
            comps = _normalize_qcomps(n, comps)
        self.n = n
        self.comps = comps

    @classmethod
    def zero(cls, n):
        return cls(n, {}, _normalized=True)

    @classmethod
    def const(cls, n, c):
        c = Q(c)
        if c == 0:
            return cls.zero(n)
        return cls(n, {(0,) * n: [(c, (RF_ONE,) * n)]}, _normalized=True)

    @classmethod
    def x_power(cls, n, alpha):
        return cls(n, {tuple(alpha): [(Q(1), (RF_ONE,) * n)]}, _normalized=True)

    def is_zero(self):
        return not self.comps

    def _check(self, other):
        if self.n != other.n:
            raise ArityMismatch(f"arity {self.n} vs {other.n}")

    def __add__(self, other):
        self._check(other)
        out = {a: list(t) for a, t in self.comps.items()}
        for a, t in other.comps.items():
            out.setdefault(a, []).extend(t)
        return QElem(self.n, out)

    def __neg__(self):
        return QElem(self.n, {a: [(-c, fs) for c, fs in t]
                              for a, t in self.comps.items()}, _normalized=True)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        out = {}
        for a, t1 in self.comps.items():
            for b, t2 in other.comps.items():
                g = tuple(x + y for x, y in zip(a, b))
                prods = []
                for c1, f1 in t1:
                    shifted = tuple(f.shift(s) for f, s in zip(f1, b))
                    for c2, f2 in t2:
                        prods.append((c1 * c2, tuple(p * q for p, q in zip(shifted, f2))))
                out.setdefault(g, []).extend(prods)
        return QElem(self.n, out)

    def __eq__(self, other):
        return isinstance(other, QElem) and self.n == other.n \
            and (self - other).is_zero()

    def __hash__(self):
        raise TypeError("QElem is unhashable; use eq")

    def top_degree(self):
        """Max degree in the distinguished (first) variable; None if zero."""
        if not self.comps:
            return None
        return max(a[0] for a in self.comps)

    def coefficient(self, alpha):
        return self.comps.get(tuple(alpha), [])

    def __repr__(self):
        return f"QElem({self.n}, {self.comps!r})"


def _normalize_qcomps(n, comps):
    out = {}
    for alpha, terms in comps.items():
        merged = {}
        for c, fs in terms:
            if c == 0 or any(f.is_zero() for f in fs):
                continue
            key = tuple(f.key() for f in fs)
            if key in merged:
                merged[key] = (merged[key][0] + c, fs)
            else:
                merged[key] = (c, fs)
        terms = [(c, fs) for c, fs in merged.values() if c != 0]
        if not terms:
            continue
        if n == 1:
            total = RF_ZERO
            for c, fs in terms:
                total = total + fs[0] * c
            if total.is_zero():
                continue
            terms = [(Q(1), (total,))]
        elif _rat_terms_zero(n, terms):
            continue
        terms.sort(key=lambda t: (tuple(f.key() for f in t[1]), t[0]))
        out[alpha] = terms
    return out


def _rat_terms_zero(n, terms):
    """Deterministic grid test for a sum of pure tensors of RatFunc."""
    samples = []
    for i in range(n):
        dsum = 0
        roots = set()
        for _, fs in terms:
            dsum += max(0, pdeg(fs[i].num)) + max(0, pdeg(fs[i].den))
            roots |= {p + 1 for p in fs[i].positive_pole_positions()}
        base = max([1] + [r + 1 for r in roots])
        samples.append([Q(base + t) for t in range(dsum + 1)])
    from itertools import product
    for point in product(*samples):
        total = Q(0)
        for c, fs in terms:
            v = c
            for f, x in zip(fs, point):
                val = f.eval(x)
                if val is None:
                    raise AssertionError("sample hit a pole")
                v *= val
            total += v
        if total != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Fredholm index


def index(a):
    """Fredholm index of a nonzero element of the n = 1 algebra."""
    if a.n != 1:
        raise ArityMismatch("index is defined for arity 1 only")
    q = a.quotient()
    if q.is_zero():
        raise NotFredholm("element lies in the matrix ideal")
    return -q.top_degree()


def index_oracle(a, cap=64):
    """Brute-force index from truncated matrices of the action.

    Detects the stable leading-degree offset of columns, then reports
    dim ker - dim coker of the truncation with the codomain cut there,
    requiring agreement for two consecutive N (NoStabilization past cap).
    """
    if a.n != 1:
        raise ArityMismatch("index oracle is defined for arity 1 only")
    if a.is_zero():
        raise NotFredholm("zero element")
    top = max(al[0] for al in a.comps)
    prev = None
    checkpoints = [8, 9, 16, 17, 24, 25, 32, 33, 48, 49, 63, 64]
    checkpoints = [N for N in checkpoints if N <= cap] or [cap]
    for N in checkpoints:
        cols = [a.act(Poly.monomial(1, (k,))) for k in range(N + 1)]
        offsets = [c.degree() - k if not c.is_zero() else None
                   for k, c in enumerate(cols)]
        lead = offsets[N]
        window = 6
        if lead is None or any(offsets[k] != lead for k in range(N - window, N + 1)):
            prev = None
            continue
        kerdim = _nullity(cols, N + max(0, top))
        rank_cut = _rank(cols, N + lead)
        cokerdim = (N + lead + 1) - rank_cut
        est = kerdim - cokerdim
        state = (est, lead, kerdim)
        if prev == state:
            return est
        prev = state
    raise NoStabilization(f"index did not stabilize by N = {cap}")


def _cols_to_matrix(cols, maxrow):
    rows = [[Q(0)] * len(cols) for _ in range(maxrow + 1)]
    for j, col in enumerate(cols):
        for (k,), v in col.coeffs.items():
            if k <= maxrow:
                rows[k][j] = v
    return rows


def _rank(cols, maxrow):
    rows = _cols_to_matrix(cols, maxrow)
    return _row_echelon_rank(rows)


def _nullity(cols, maxrow):
    return len(cols) - _rank(cols, maxrow)


def _row_echelon_rank(rows):
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        r += 1
        rank += 1
        if r == len(rows):
            break
    return rank
