"""Exact arithmetic in Q(lambda) for a distinguished real algebraic number.

A field is the quotient Q[x]/(p) for an irreducible monic integer polynomial
p together with a rational interval isolating one real root.  Elements are
reduced coefficient vectors; the zero test is literal (all coefficients
zero), and signs are decided by interval refinement with exact endpoint
arithmetic, never by floating point.

Polynomials are coefficient lists in ascending order.  Integer polynomial
factorization is delegated to sympy; everything else is self-contained.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DimensionMismatch, NonPrimitiveRule
from .homology import mat_vec
from .rules import is_primitive


# ---------------------------------------------------------------------------
# integer/rational polynomial helpers (ascending coefficient lists)

def poly_trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def poly_eval(coeffs, x):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_mul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return poly_trim(out)


def poly_divmod(a, b):
    """Division in Q[x]; b must be nonzero."""
    a = [Fraction(c) for c in a]
    b = poly_trim([Fraction(c) for c in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    r = list(a)
    while len(poly_trim(r)) >= len(b):
        r = poly_trim(r)
        shift = len(r) - len(b)
        factor = r[-1] / b[-1]
        q[shift] += factor
        for i, bc in enumerate(b):
            r[shift + i] -= factor * bc
    return poly_trim(q), poly_trim(r)


def poly_xgcd(a, b):
    """(g, s, t) with s*a + t*b = g in Q[x], g monic when nonzero."""
    r0, r1 = [Fraction(c) for c in a], [Fraction(c) for c in b]
    s0, s1 = [Fraction(1)], []
    t0, t1 = [], [Fraction(1)]
    while poly_trim(r1):
        q, r = poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, poly_trim([x - y for x, y in _zip_pad(s0, poly_mul(q, s1))])
        t0, t1 = t1, poly_trim([x - y for x, y in _zip_pad(t0, poly_mul(q, t1))])
    g = poly_trim(r0)
    if g:
        lead = g[-1]
        g = [c / lead for c in g]
        s0 = [c / lead for c in s0]
        t0 = [c / lead for c in t0]
    return g, s0, t0


def _zip_pad(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return zip(a, b)


def berkowitz_charpoly(A):
    """Characteristic polynomial det(xI - A), ascending integer coefficients.

    Division-free Berkowitz recursion over the leading principal blocks, so
    everything stays in Z.
    """
    n = len(A)
    if n == 0:
        return [1]
    poly = [1, -A[0][0]]  # descending, leading block 1x1
    for k in range(1, n):
        a = A[k][k]
        row = A[k][:k]
        col = [A[i][k] for i in range(k)]
        sub = [r[:k] for r in A[:k]]
        t = [1, -a]
        v = col
        for _ in range(k):
            t.append(-sum(r * x for r, x in zip(row, v)))
            v = mat_vec(sub, v)
        new = [0] * (k + 2)
        for i, tv in enumerate(t):
            if tv:
                for j, pv in enumerate(poly):
                    if i + j < k + 2:
                        new[i + j] += tv * pv
        poly = new
    return list(reversed(poly))


def factor_integer_poly(coeffs):
    """Irreducible monic factors (ascending coeffs) with multiplicities."""
    from sympy import Poly, Symbol

    x = Symbol("x")
    p = Poly(list(reversed([int(c) for c in coeffs])), x, domain="ZZ")
    _, factors = p.factor_list()
    out = []
    for fac, mult in factors:
        fc = [int(c) for c in reversed(fac.all_coeffs())]
        out.append((fc, int(mult)))
    return out


def real_root_intervals(coeffs):
    """Disjoint rational isolating intervals for the real roots."""
    from sympy import Poly, Symbol

    x = Symbol("x")
    p = Poly(list(reversed([int(c) for c in coeffs])), x, domain="ZZ")
    out = []
    for (lo, hi), _mult in p.intervals():
        out.append((Fraction(lo.p, lo.q), Fraction(hi.p, hi.q)))
    return out


def _interval_eval(coeffs, lo, hi):
    """Exact range bounds for a polynomial over [lo, hi] via interval Horner."""
    vlo, vhi = Fraction(0), Fraction(0)
    for c in reversed(coeffs):
        cands = (vlo * lo, vlo * hi, vhi * lo, vhi * hi)
        vlo, vhi = min(cands) + c, max(cands) + c
    return vlo, vhi


class NumberField:
    """Q(lambda) for one real root of an irreducible monic integer polynomial.

    The isolating interval only ever shrinks (monotone refinement), so the
    cached endpoints act as a deterministic precision cache and concurrent
    readers stay consistent.
    """

    def __init__(self, minpoly, interval):
        minpoly = [int(c) for c in minpoly]
        if not minpoly or minpoly[-1] != 1:
            raise ValueError("minimal polynomial must be monic with integer coefficients")
        self.minpoly = tuple(minpoly)
        self.degree = len(minpoly) - 1
        lo, hi = Fraction(interval[0]), Fraction(interval[1])
        if self.degree == 1:
            root = Fraction(-minpoly[0], minpoly[1])
            lo = hi = root
        elif lo != hi:
            flo = poly_eval(self.minpoly, lo)
            fhi = poly_eval(self.minpoly, hi)
            if flo == 0:
                lo = hi = lo
            elif fhi == 0:
                lo = hi = hi
            elif (flo > 0) == (fhi > 0):
                raise ValueError("interval endpoints do not bracket a root")
        self._lo, self._hi = lo, hi

    def __repr__(self):
        return "NumberField(minpoly=%r, interval=(%s, %s))" % (list(self.minpoly), self._lo, self._hi)

    @property
    def interval(self):
        return self._lo, self._hi

    def refine(self):
        """Halve the isolating interval, keeping the sign change exact."""
        if self._lo == self._hi:
            return
        mid = (self._lo + self._hi) / 2
        fmid = poly_eval(self.minpoly, mid)
        if fmid == 0:
            self._lo = self._hi = mid
            return
        flo = poly_eval(self.minpoly, self._lo)
        if (flo > 0) != (fmid > 0):
            self._hi = mid
        else:
            self._lo = mid

    def element(self, coeffs):
        coeffs = [Fraction(c) for c in coeffs]
        if len(coeffs) > self.degree:
            _, coeffs = poly_divmod(coeffs, self.minpoly)
        coeffs = coeffs + [Fraction(0)] * (self.degree - len(coeffs))
        return AlgebraicNumber(self, tuple(coeffs))

    def rational(self, q):
        return self.element([Fraction(q)])

    def zero(self):
        return self.rational(0)

    def one(self):
        return self.rational(1)

    def gen(self):
        """The distinguished root itself."""
        if self.degree == 1:
            return self.rational(Fraction(-self.minpoly[0], self.minpoly[1]))
        return self.element([0, 1])


class AlgebraicNumber:
    """Element of a NumberField; arithmetic is exact and closed."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        self.field = field
        self.coeffs = tuple(Fraction(c) for c in coeffs)
        if len(self.coeffs) != field.degree:
            raise DimensionMismatch("element has %d coefficients, field degree is %d"
                                    % (len(self.coeffs), field.degree))

    # -- coercion -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, AlgebraicNumber):
            if other.field is not self.field:
                if other.field.minpoly != self.field.minpoly:
                    raise ValueError("cannot mix elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.rational(other)
        return NotImplemented

    # -- ring operations ----------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return AlgebraicNumber(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicNumber(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        prod = poly_mul(list(self.coeffs), list(o.coeffs))
        return self.field.element(prod)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        g, s, _ = poly_xgcd(list(self.coeffs), list(self.field.minpoly))
        if len(g) != 1:
            raise ArithmeticError("minimal polynomial is not irreducible")
        inv = [c / g[0] for c in s]
        return self.field.element(inv)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.field.rational(other) / self

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.field.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- order and display ---------------------------------------------------
    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def is_rational(self):
        return all(c == 0 for c in self.coeffs[1:])

    def as_rational(self):
        if not self.is_rational():
            raise ValueError("element is irrational")
        return self.coeffs[0]

    def sign(self):
        """Exact sign: -1, 0, or +1."""
        if self.is_zero():
            return 0
        for _ in range(10_000):
            lo, hi = self.field.interval
            vlo, vhi = _interval_eval(list(self.coeffs), lo, hi)
            if vlo > 0:
                return 1
            if vhi < 0:
                return -1
            self.field.refine()
        raise ArithmeticError("sign refinement did not converge")

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash((self.field.minpoly, self.coeffs))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def bounds(self, width):
        """Rational lo <= value <= hi with hi - lo <= width."""
        width = Fraction(width)
        for _ in range(10_000):
            lo, hi = self.field.interval
            vlo, vhi = _interval_eval(list(self.coeffs), lo, hi)
            if vhi - vlo <= width:
                return vlo, vhi
            self.field.refine()
        raise ArithmeticError("interval refinement did not converge")

    def __float__(self):
        lo, hi = self.bounds(Fraction(1, 10**17))
        return float((lo + hi) / 2)

    def decimal(self, places=10):
        """Deterministic decimal rendering with ``places`` fractional digits."""
        lo, hi = self.bounds(Fraction(1, 10 ** (places + 3)))
        mid = (lo + hi) / 2
        scaled = mid * 10**places
        # round half away from zero for stability across representations
        n = scaled.numerator
        d = scaled.denominator
        q, r = divmod(abs(n), d)
        if 2 * r >= d:
            q += 1
        text = str(q).rjust(places + 1, "0")
        sign = "-" if n < 0 else ""
        return "%s%s.%s" % (sign, text[:-places] if places else text, text[-places:])

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append("%s*l" % c)
            else:
                terms.append("%s*l^%d" % (c, i))
        return " + ".join(terms) if terms else "0"


def integer_field(value) -> NumberField:
    """Degree-one field for an integer scale factor."""
    v = int(value)
    return NumberField([-v, 1], (Fraction(v), Fraction(v)))


def perron_root_field(A) -> NumberField:
    """Field generated by the spectral radius of a primitive matrix.

    The characteristic polynomial is factored over Q; the factor whose real
    root interval contains the largest real root is the minimal polynomial.
    For primitive nonnegative matrices that largest real root is the Perron
    eigenvalue.
    """
    primitive, _ = is_primitive(A)
    if not primitive:
        raise NonPrimitiveRule("Perron data needs a primitive matrix")
    cp = berkowitz_charpoly(A)
    candidates = []
    for fac, _mult in factor_integer_poly(cp):
        if len(fac) < 2:
            continue
        for lo, hi in real_root_intervals(fac):
            candidates.append((fac, lo, hi))
    if not candidates:
        raise ArithmeticError("characteristic polynomial has no real roots")

    # refine until the intervals are pairwise disjoint, then take the maximum
    def refined(entry):
        fac, lo, hi = entry
        mid = (lo + hi) / 2
        fmid = poly_eval(fac, mid)
        if fmid == 0:
            return fac, mid, mid
        flo = poly_eval(fac, lo)
        if flo == 0:
            return fac, lo, lo
        if (flo > 0) != (fmid > 0):
            return fac, lo, mid
        return fac, mid, hi

    for _ in range(10_000):
        ordered = sorted(candidates, key=lambda e: e[1])
        disjoint = all(ordered[i][2] < ordered[i + 1][1] or ordered[i][1] == ordered[i][2] == ordered[i + 1][1] == ordered[i + 1][2]
                       for i in range(len(ordered) - 1))
        if disjoint or len(candidates) == 1:
            fac, lo, hi = max(candidates, key=lambda e: e[1])
            return NumberField(fac, (lo, hi))
        candidates = [refined(e) for e in candidates]
    raise ArithmeticError("root separation did not converge")
