"""Unit groups: the discrete diagonal-unit group, finite-support infinite
matrices with the global determinant, and certified units carried with their
inverses.

For arity one every unit decomposes as scalar * h * (1 + finite matrix) and
unit_decompose recovers the factors.  For higher arity no decision procedure
is attempted: units congruent to 1 modulo the maximal ideal are built only
from certified blocks (global matrices, slot lifts of arity-one matrices)
and remember their factor word so they can be serialized.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import AElem
from .coeffs import DiagN, EvSeq, Q
from .errors import (ArityMismatch, NonIntegerRoots, NotDegreeZero,
                     NotInvertible, NotUnit)
from .coeffs import RF_ONE, RatFunc, factor_integer_linear

# ---------------------------------------------------------------------------


class HUnit:
    """Exponent vectors over the diagonal unit atoms, one slot per coordinate.

    Slot entry at j >= 0 is the exponent of (H+j); the entry at -j (j >= 1)
    is the exponent of the corrected unit (H-j)_1.  The group law is
    entrywise addition.
    """

    __slots__ = ("n", "slots")

    def __init__(self, n, slots=None):
        slots = slots or [{}] * n
        self.n = n
        self.slots = tuple({j: e for j, e in s.items() if e} for s in slots)

    @classmethod
    def identity(cls, n):
        return cls(n)

    @classmethod
    def atom(cls, n, i, j, exp=1):
        """The atom with index j in coordinate i (1-based)."""
        slots = [{} for _ in range(n)]
        slots[i - 1] = {j: exp}
        return cls(n, slots)

    @classmethod
    def h_power(cls, n, alpha):
        return cls(n, [{0: a} if a else {} for a in alpha])

    def __mul__(self, other):
        if self.n != other.n:
            raise ArityMismatch(f"arity {self.n} vs {other.n}")
        slots = []
        for s1, s2 in zip(self.slots, other.slots):
            s = dict(s1)
            for j, e in s2.items():
                s[j] = s.get(j, 0) + e
            slots.append(s)
        return HUnit(self.n, slots)

    def inv(self):
        return HUnit(self.n, [{j: -e for j, e in s.items()} for s in self.slots])

    def is_identity(self):
        return all(not s for s in self.slots)

    def deg(self, k):
        """deg_H in coordinate k (1-based): the exponent sum of slot k."""
        return sum(self.slots[k - 1].values())

    def degs(self):
        return tuple(sum(s.values()) for s in self.slots)

    def slot_evseq(self, k):
        """The slot-k (1-based) factor as a sequence."""
        out = EvSeq.const(1)
        for j, e in sorted(self.slots[k - 1].items()):
            out = out * (EvSeq.atom(j) ** e)
        return out

    def slot_ratfunc(self, k):
        """The rational image of slot k (the quotient coefficient)."""
        out = RF_ONE
        for j, e in sorted(self.slots[k - 1].items()):
            out = out * (RatFunc.linear(j) ** e)
        return out

    def to_aelem(self):
        d = DiagN.one(self.n)
        for i in range(self.n):
            d = d.map_slot(i, lambda f, i=i: f * self.slot_evseq(i + 1))
        return AElem.from_diag(d)

    def split_h(self):
        """Unique factorization u = H^alpha * v with v of degree zero."""
        alpha = self.degs()
        slots = []
        for a, s in zip(alpha, self.slots):
            s = dict(s)
            if a:
                s[0] = s.get(0, 0) - a
            slots.append(s)
        return alpha, HUnit(self.n, slots)

    def key(self):
        return tuple(tuple(sorted(s.items())) for s in self.slots)

    def __eq__(self, other):
        return isinstance(other, HUnit) and self.n == other.n and self.key() == other.key()

    def __hash__(self):
        return hash((self.n, self.key()))

    def __repr__(self):
        return f"HUnit({self.n}, {list(self.slots)!r})"


def hunit_mul(a, b):
    return a * b


def hunit_inv(a):
    return a.inv()


def hunit_to_elem(u):
    return u.to_aelem()


def deg_h(u, k):
    return u.deg(k)


def psi(u):
    """The twist u -> tau(u)/u on exponent vectors: new_j = old_{j-1} - old_j."""
    slots = []
    for s in u.slots:
        out = {}
        for j, e in s.items():
            out[j + 1] = out.get(j + 1, 0) + e
            out[j] = out.get(j, 0) - e
        slots.append(out)
    return HUnit(u.n, slots)


def psi_inv(u):
    """Inverse twist on the degree-zero subgroup: new_j = sum_{k > j} old_k."""
    slots = []
    for k, s in enumerate(u.slots):
        if sum(s.values()) != 0:
            raise NotDegreeZero(f"slot {k + 1} has degree {sum(s.values())}")
        out = {}
        if s:
            acc = 0
            for j in range(max(s), min(s) - 1, -1):
                if acc:
                    out[j - 1] = acc
                acc += s.get(j, 0)
                if j - 1 in out and acc:
                    out[j - 1] = acc
                elif acc:
                    out[j - 1] = acc
        slots.append(out)
    return HUnit(u.n, slots)


def omega_as_mu(u):
    """Conjugation by a diagonal unit equals the psi-twisted coordinate map."""
    return psi(u)


# ---------------------------------------------------------------------------


class FinMat:
    """Finitely supported matrix over multi-index rows/columns."""

    __slots__ = ("n", "entries")

    def __init__(self, n, entries=None):
        self.n = n
        self.entries = {(tuple(a), tuple(b)): Q(v)
                        for (a, b), v in (entries or {}).items() if v != 0}

    @classmethod
    def zero(cls, n):
        return cls(n)

    def is_zero(self):
        return not self.entries

    def indices(self):
        idx = set()
        for a, b in self.entries:
            idx.add(a)
            idx.add(b)
        return sorted(idx)

    def to_aelem(self):
        from .algebra import e_multi
        out = AElem.zero(self.n)
        for (a, b), v in sorted(self.entries.items()):
            out = out + e_multi(self.n, a, b).scale(v)
        return out

    def __eq__(self, other):
        return isinstance(other, FinMat) and self.n == other.n \
            and self.entries == other.entries

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.entries.items()))))

    def __repr__(self):
        return f"FinMat({self.n}, {self.entries!r})"


def _block(m):
    idx = m.indices()
    pos = {a: i for i, a in enumerate(idx)}
    k = len(idx)
    rows = [[Q(1) if i == j else Q(0) for j in range(k)] for i in range(k)]
    for (a, b), v in m.entries.items():
        rows[pos[a]][pos[b]] += v
    return idx, rows


def det1p(m):
    """Global determinant of 1 + m on the finite support block."""
    _, rows = _block(m)
    return _bareiss_det(rows)


def _bareiss_det(rows):
    k = len(rows)
    if k == 0:
        return Q(1)
    rows = [r[:] for r in rows]
    sign = 1
    prev = Q(1)
    for i in range(k - 1):
        if rows[i][i] == 0:
            piv = next((r for r in range(i + 1, k) if rows[r][i] != 0), None)
            if piv is None:
                return Q(0)
            rows[i], rows[piv] = rows[piv], rows[i]
            sign = -sign
        for r in range(i + 1, k):
            for c in range(i + 1, k):
                rows[r][c] = (rows[r][c] * rows[i][i] - rows[r][i] * rows[i][c]) / prev
            rows[r][i] = Q(0)
        prev = rows[i][i]
    return sign * rows[k - 1][k - 1]


def inv1p(m):
    """The matrix m' with (1+m)(1+m') = 1; NotInvertible when det vanishes."""
    idx, rows = _block(m)
    k = len(idx)
    aug = [row[:] + [Q(1) if i == j else Q(0) for j in range(k)]
           for i, row in enumerate(rows)]
    for c in range(k):
        piv = next((r for r in range(c, k) if aug[r][c] != 0), None)
        if piv is None:
            raise NotInvertible("determinant is zero")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [v * inv for v in aug[c]]
        for r in range(k):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[c])]
    entries = {}
    for i, a in enumerate(idx):
        for j, b in enumerate(idx):
            v = aug[i][k + j] - (1 if i == j else 0)
            if v:
                entries[(a, b)] = v
    return FinMat(m.n, entries)


def finmat_from_aelem(f):
    """Exact finite-matrix form of an element of the matrix ideal, or None."""
    entries = {}
    for alpha, d in f.comps.items():
        for c, factors in d.terms:
            if any(not g.finite_support() for g in factors):
                return None
            # expand the tensor of finite supports
            supports = [sorted(g.exc.items()) for g in factors]
            stack = [((), Q(c))]
            for sup in supports:
                stack = [(pos + (k,), v * w) for pos, v in stack for k, w in sup]
            for pos, v in stack:
                if v == 0:
                    continue
                row = tuple(p + a for p, a in zip(pos, alpha))
                if any(r < 0 for r in row):
                    continue
                key = (row, pos)
                entries[key] = entries.get(key, Q(0)) + v
    return FinMat(f.n, entries)


# ---------------------------------------------------------------------------


class UnitElem:
    """Certified unit scalar * h * w with w = 1 mod the maximal ideal.

    w and its two-sided inverse are carried together; `factors` records the
    certified word that built w (for serialization), each item one of
    ("matrix", FinMat over n indices) or ("slot_matrix", i, FinMat over 1).
    """

    __slots__ = ("n", "scalar", "h", "w", "w_inv", "factors")

    def __init__(self, n, scalar, h, w, w_inv, factors=()):
        if scalar == 0:
            raise NotUnit("ZeroScalar")
        self.n = n
        self.scalar = Q(scalar)
        self.h = h
        self.w = w
        self.w_inv = w_inv
        self.factors = tuple(factors)

    @classmethod
    def identity(cls, n):
        one = AElem.one(n)
        return cls(n, Q(1), HUnit.identity(n), one, one)

    @classmethod
    def from_scalar(cls, n, c):
        one = AElem.one(n)
        return cls(n, c, HUnit.identity(n), one, one)

    @classmethod
    def from_hunit(cls, u):
        one = AElem.one(u.n)
        return cls(u.n, Q(1), u, one, one)

    @classmethod
    def from_finmat(cls, m):
        one = AElem.one(m.n)
        w = one + m.to_aelem()
        w_inv = one + inv1p(m).to_aelem()
        return cls(m.n, Q(1), HUnit.identity(m.n), w, w_inv, (("matrix", m),))

    @classmethod
    def from_slot_finmat(cls, n, i, m1):
        """Lift an arity-one matrix unit 1+m1 into coordinate i (1-based)."""
        if m1.n != 1:
            raise ArityMismatch("slot factor must have arity 1")
        lifted = FinMat(n, {(_embed(a, i, n), _embed(b, i, n)): v
                            for (a, b), v in m1.entries.items()})
        inv = inv1p(m1)
        lifted_inv = FinMat(n, {(_embed(a, i, n), _embed(b, i, n)): v
                                for (a, b), v in inv.entries.items()})
        one = AElem.one(n)
        return cls(n, Q(1), HUnit.identity(n),
                   one + lifted.to_aelem(), one + lifted_inv.to_aelem(),
                   (("slot_matrix", i, m1),))

    def is_phi_shape(self):
        return self.scalar == 1 and self.h.is_identity()

    def elem(self):
        return (self.h.to_aelem() * self.w).scale(self.scalar)

    def elem_inv(self):
        return (self.w_inv * self.h.inv().to_aelem()).scale(1 / self.scalar)

    def __mul__(self, other):
        if self.n != other.n:
            raise ArityMismatch(f"arity {self.n} vs {other.n}")
        hb = other.h.to_aelem()
        hb_inv = other.h.inv().to_aelem()
        conj_w = hb_inv * self.w * hb
        conj_winv = hb_inv * self.w_inv * hb
        factors = tuple(_conj_factor_by_h(f, other.h) for f in self.factors) \
            + other.factors
        return UnitElem(self.n, self.scalar * other.scalar, self.h * other.h,
                        conj_w * other.w, other.w_inv * conj_winv, factors)

    def inv(self):
        he = self.h.to_aelem()
        he_inv = self.h.inv().to_aelem()
        w = he * self.w_inv * he_inv
        w_inv = he * self.w * he_inv
        factors = tuple(_invert_factor(_conj_factor_by_h(f, self.h.inv()))
                        for f in reversed(self.factors))
        return UnitElem(self.n, 1 / self.scalar, self.h.inv(), w, w_inv, factors)

    def verify(self):
        one = AElem.one(self.n)
        return self.w * self.w_inv == one and self.w_inv * self.w == one \
            and self.w.quotient() == self.w.quotient().const(self.n, 1)

    def __repr__(self):
        return f"UnitElem({self.scalar}, {self.h!r}, factors={self.factors!r})"


def _embed(a, i, n):
    out = [0] * n
    out[i - 1] = a[0]
    return tuple(out)


def _conj_factor_by_h(factor, h):
    """h^{-1} (1+m) h is again 1 + finite matrix; rebuild the factor."""
    if factor[0] == "matrix":
        m = factor[1]
        entries = {}
        for (a, b), v in m.entries.items():
            scale = Q(1)
            for k in range(m.n):
                s = h.slot_evseq(k + 1)
                scale *= s.at(b[k]) / s.at(a[k])
            entries[(a, b)] = v * scale
        return ("matrix", FinMat(m.n, entries))
    _, i, m1 = factor
    s = h.slot_evseq(i)
    entries = {}
    for (a, b), v in m1.entries.items():
        entries[(a, b)] = v * s.at(b[0]) / s.at(a[0])
    return ("slot_matrix", i, FinMat(1, entries))


def _invert_factor(factor):
    if factor[0] == "matrix":
        return ("matrix", inv1p(factor[1]))
    return ("slot_matrix", factor[1], inv1p(factor[2]))


# ---------------------------------------------------------------------------


def unit_decompose(a):
    """Factor an arity-one unit as scalar * h * (1 + finite matrix)."""
    if a.n != 1:
        raise ArityMismatch("unit decomposition is defined for arity 1 only")
    q = a.quotient()
    if q.is_zero():
        raise NotUnit("ZeroQuotient", "element lies in the matrix ideal")
    if set(q.comps) != {(0,)}:
        raise NotUnit("NonzeroDegree",
                      f"quotient has x-degree support {sorted(q.comps)}")
    coeff = q.comps[(0,)][0][1][0]
    try:
        lam, roots = factor_integer_linear(coeff)
    except ValueError as e:
        raise NonIntegerRoots(str(e)) from None
    h = HUnit(1, [{-r: m for r, m in roots.items()}])
    resid = (h.inv().to_aelem() * a).scale(1 / lam) - AElem.one(1)
    m = finmat_from_aelem(resid)
    if m is None:
        raise NotUnit("ResidueNotFinite",
                      "residue modulo scalar * h is not a finite matrix")
    if det1p(m) == 0:
        raise NotUnit("ZeroDeterminant")
    one = AElem.one(1)
    return UnitElem(1, lam, h, one + m.to_aelem(), one + inv1p(m).to_aelem(),
                    (("matrix", m),))
