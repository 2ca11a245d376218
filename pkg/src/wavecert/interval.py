"""Outward-rounded interval arithmetic at a fixed working precision.

An IntervalContext pins the endpoint precision for one pipeline run; every
Interval belongs to a context and mixing precisions raises PrecisionMismatch.
Endpoints live in the selected backend (MPFR via gmpy2, or pure Python).
Decimal strings and Fractions convert to the tightest enclosing interval,
never to a rounded point. Trigonometric range splitting resolves critical
points with pi evaluated at twice the working precision; an undecidable
comparison there degrades to a wider (still correct) enclosure.
"""

from fractions import Fraction

from ._core import backend as _B
from .errors import (DivisionByZeroInterval, DomainViolation, EmptyOperand,
                     PrecisionMismatch)

__all__ = ["IntervalContext", "Interval", "IVec2", "CInterval", "arith",
           "elem", "set_ops"]


class IntervalContext:
    """Working precision plus cached constants for one computation."""

    def __init__(self, bits=1024):
        if bits < 53:
            raise ValueError("working precision below 53 bits")
        self.bits = int(bits)
        self._b = _B
        self._pi_cache = {}
        z = _B.from_int(0, self.bits, "n")
        o = _B.from_int(1, self.bits, "n")
        self.zero = Interval(self, z, z)
        self.one = Interval(self, o, o)
        self._empty = Interval(self, None, None, _empty=True)

    # construction

    def empty(self):
        return self._empty

    def from_fraction(self, fr, hi=None):
        fr = Fraction(fr)
        if hi is None:
            hi = fr
        else:
            hi = Fraction(hi)
        if hi < fr:
            raise ValueError("upper endpoint below lower")
        b, p = self._b, self.bits
        return Interval(self, b.from_fraction(fr.numerator, fr.denominator, p, "d"),
                        b.from_fraction(hi.numerator, hi.denominator, p, "u"))

    def interval(self, lo, hi=None):
        return self.from_fraction(_to_fraction(lo), None if hi is None else _to_fraction(hi))

    def point_of(self, endpoint):
        return Interval(self, endpoint, endpoint)

    def pi(self):
        return self.pi_times(1)

    def pi_times(self, fr):
        """Tight enclosure of pi * fr for exact rational fr."""
        fr = Fraction(fr)
        got = self._pi_cache.get(fr)
        if got is not None:
            return got
        b, p = self._b, self.bits
        w = p + 32
        if fr >= 0:
            lo = b.mul(b.pi(w, "d"), b.from_fraction(fr.numerator, fr.denominator, w, "d"), p, "d")
            hi = b.mul(b.pi(w, "u"), b.from_fraction(fr.numerator, fr.denominator, w, "u"), p, "u")
        else:
            lo = b.mul(b.pi(w, "u"), b.from_fraction(fr.numerator, fr.denominator, w, "d"), p, "d")
            hi = b.mul(b.pi(w, "d"), b.from_fraction(fr.numerator, fr.denominator, w, "u"), p, "u")
        out = Interval(self, lo, hi)
        if len(self._pi_cache) < 65536:
            self._pi_cache[fr] = out
        return out

    def convert(self, iv):
        """Re-round an interval from another context outward into this one."""
        if iv._empty:
            return self._empty
        b, p = self._b, self.bits
        return Interval(self, b.add(iv._lo, b.from_int(0, p, "d"), p, "d"),
                        b.add(iv._hi, b.from_int(0, p, "u"), p, "u"))

    def hull_of(self, items):
        items = list(items)
        if not items:
            return self._empty
        out = items[0]
        for x in items[1:]:
            out = out.hull(x)
        return out

    def deserialize(self, pair):
        return Interval(self, _endpoint_from_hex(pair[0], self.bits),
                        _endpoint_from_hex(pair[1], self.bits))

    # trig critical points: superset of integers k with x ni pi*(k + shift)

    def _crit_superset(self, lo, hi, shift):
        b = self._b
        w = 2 * self.bits
        pi_d, pi_u = b.pi(w, "d"), b.pi(w, "u")
        sh = Fraction(shift)

        def div_pi(e, rnd):
            if b.sign(e) >= 0:
                return b.div(e, pi_u if rnd == "d" else pi_d, w, rnd)
            return b.div(e, pi_d if rnd == "d" else pi_u, w, rnd)

        t_lo = b.sub(div_pi(lo, "d"), b.from_fraction(sh.numerator, sh.denominator, w, "u"), w, "d")
        t_hi = b.sub(div_pi(hi, "u"), b.from_fraction(sh.numerator, sh.denominator, w, "d"), w, "u")
        kmin = -b.floor_int(b.neg(t_lo))
        kmax = b.floor_int(t_hi)
        return kmin, kmax


def _to_fraction(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot build an interval endpoint from {type(x).__name__}")


def _endpoint_from_hex(s, prec):
    if s == "0":
        return _B.from_int(0, prec, "n")
    neg = s.startswith("-")
    body = s[1:] if neg else s
    man_s, exp_s = body.split("p")
    m = int(man_s, 16)
    e = int(exp_s)
    if m.bit_length() > prec:
        raise ValueError("serialized endpoint exceeds working precision")
    out = _B.from_man_exp(m, e, prec)
    return _B.neg(out) if neg else out


def _endpoint_to_hex(e):
    m, ex = _B.man_exp(e)
    if m == 0:
        return "0"
    sign = "-" if m < 0 else ""
    return f"{sign}{hex(abs(m))[2:]}p{ex}"


class Interval:
    """Closed interval [lo, hi]; the empty set is a distinct sentinel."""

    __slots__ = ("_ctx", "_lo", "_hi", "_empty")

    def __init__(self, ctx, lo, hi, _empty=False):
        self._ctx = ctx
        self._lo = lo
        self._hi = hi
        self._empty = _empty
        if not _empty and _B.cmp(lo, hi) > 0:
            raise ValueError("endpoints out of order")

    # plumbing

    @property
    def ctx(self):
        return self._ctx

    @property
    def is_empty(self):
        return self._empty

    def _peer(self, other):
        if isinstance(other, Interval):
            if other._ctx is self._ctx or other._ctx.bits == self._ctx.bits:
                if other._empty or self._empty:
                    raise EmptyOperand("arithmetic on the empty interval")
                return other
            raise PrecisionMismatch(
                f"{self._ctx.bits}-bit operand mixed with {other._ctx.bits}-bit")
        if isinstance(other, (int, Fraction, str)):
            return self._ctx.from_fraction(_to_fraction(other))
        return NotImplemented

    def __repr__(self):
        if self._empty:
            return "Interval(empty)"
        b = self._ctx._b
        return f"Interval[{b.to_str(self._lo)}, {b.to_str(self._hi)}]"

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        if self._empty or other._empty:
            return self._empty and other._empty
        return (self._ctx.bits == other._ctx.bits
                and _B.cmp(self._lo, other._lo) == 0
                and _B.cmp(self._hi, other._hi) == 0)

    def __hash__(self):
        if self._empty:
            return hash(("iv", None))
        return hash(("iv", _B.man_exp(self._lo), _B.man_exp(self._hi)))

    # arithmetic

    def __add__(self, other):
        o = self._peer(other)
        if o is NotImplemented:
            return o
        c = self._ctx
        if self._empty:
            raise EmptyOperand("arithmetic on the empty interval")
        p, b = c.bits, c._b
        return Interval(c, b.add(self._lo, o._lo, p, "d"), b.add(self._hi, o._hi, p, "u"))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._peer(other)
        if o is NotImplemented:
            return o
        c = self._ctx
        if self._empty:
            raise EmptyOperand("arithmetic on the empty interval")
        p, b = c.bits, c._b
        return Interval(c, b.sub(self._lo, o._hi, p, "d"), b.sub(self._hi, o._lo, p, "u"))

    def __rsub__(self, other):
        o = self._peer(other)
        if o is NotImplemented:
            return o
        return o.__sub__(self)

    def __neg__(self):
        if self._empty:
            raise EmptyOperand("arithmetic on the empty interval")
        return Interval(self._ctx, _B.neg(self._hi), _B.neg(self._lo))

    def __mul__(self, other):
        o = self._peer(other)
        if o is NotImplemented:
            return o
        c = self._ctx
        if self._empty:
            raise EmptyOperand("arithmetic on the empty interval")
        p, b = c.bits, c._b
        al, ah, bl, bh = self._lo, self._hi, o._lo, o._hi
        sa = 2 if b.sign(al) >= 0 else (0 if b.sign(ah) <= 0 else 1)
        sb = 2 if b.sign(bl) >= 0 else (0 if b.sign(bh) <= 0 else 1)
        if sa == 2:
            if sb == 2:
                return Interval(c, b.mul(al, bl, p, "d"), b.mul(ah, bh, p, "u"))
            if sb == 0:
                return Interval(c, b.mul(ah, bl, p, "d"), b.mul(al, bh, p, "u"))
            return Interval(c, b.mul(ah, bl, p, "d"), b.mul(ah, bh, p, "u"))
        if sa == 0:
            if sb == 2:
                return Interval(c, b.mul(al, bh, p, "d"), b.mul(ah, bl, p, "u"))
            if sb == 0:
                return Interval(c, b.mul(ah, bh, p, "d"), b.mul(al, bl, p, "u"))
            return Interval(c, b.mul(al, bh, p, "d"), b.mul(al, bl, p, "u"))
        if sb == 2:
            return Interval(c, b.mul(al, bh, p, "d"), b.mul(ah, bh, p, "u"))
        if sb == 0:
            return Interval(c, b.mul(ah, bl, p, "d"), b.mul(al, bl, p, "u"))
        lo = _min_e(b.mul(al, bh, p, "d"), b.mul(ah, bl, p, "d"))
        hi = _max_e(b.mul(al, bl, p, "u"), b.mul(ah, bh, p, "u"))
        return Interval(c, lo, hi)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._peer(other)
        if o is NotImplemented:
            return o
        c = self._ctx
        if self._empty:
            raise EmptyOperand("arithmetic on the empty interval")
        p, b = c.bits, c._b
        al, ah, bl, bh = self._lo, self._hi, o._lo, o._hi
        if b.sign(bl) <= 0 <= b.sign(bh):
            raise DivisionByZeroInterval(f"divisor {o!r} contains zero")
        sa = 2 if b.sign(al) >= 0 else (0 if b.sign(ah) <= 0 else 1)
        if b.sign(bl) > 0:
            if sa == 2:
                return Interval(c, b.div(al, bh, p, "d"), b.div(ah, bl, p, "u"))
            if sa == 0:
                return Interval(c, b.div(al, bl, p, "d"), b.div(ah, bh, p, "u"))
            return Interval(c, b.div(al, bl, p, "d"), b.div(ah, bl, p, "u"))
        if sa == 2:
            return Interval(c, b.div(ah, bh, p, "d"), b.div(al, bl, p, "u"))
        if sa == 0:
            return Interval(c, b.div(ah, bl, p, "d"), b.div(al, bh, p, "u"))
        return Interval(c, b.div(ah, bh, p, "d"), b.div(al, bh, p, "u"))

    def __rtruediv__(self, other):
        o = self._peer(other)
        if o is NotImplemented:
            return o
        return o.__truediv__(self)

    def recip(self):
        return self._ctx.one / self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        c = self._ctx
        if self._empty:
            raise EmptyOperand("arithmetic on the empty interval")
        if n == 0:
            return c.one
        if n < 0:
            return c.one / self.__pow__(-n)
        p, b = c.bits, c._b
        al, ah = self._lo, self._hi
        if n % 2 == 1 or b.sign(al) >= 0:
            return Interval(c, b.pow_int(al, n, p, "d"), b.pow_int(ah, n, p, "u"))
        if b.sign(ah) <= 0:
            return Interval(c, b.pow_int(ah, n, p, "d"), b.pow_int(al, n, p, "u"))
        z = b.from_int(0, p, "d")
        return Interval(c, z, _max_e(b.pow_int(al, n, p, "u"), b.pow_int(ah, n, p, "u")))

    def __abs__(self):
        c = self._ctx
        if self._empty:
            raise EmptyOperand("arithmetic on the empty interval")
        b = c._b
        if b.sign(self._lo) >= 0:
            return self
        if b.sign(self._hi) <= 0:
            return Interval(c, b.neg(self._hi), b.neg(self._lo))
        return Interval(c, b.from_int(0, c.bits, "d"),
                        _max_e(b.neg(self._lo), self._hi))

    # elementary functions

    def sqrt(self):
        c = self._ctx
        if self._empty:
            raise EmptyOperand("elementary function on the empty interval")
        b, p = c._b, c.bits
        if b.sign(self._lo) < 0:
            raise DomainViolation("sqrt of an interval reaching below zero")
        return Interval(c, b.sqrt(self._lo, p, "d"), b.sqrt(self._hi, p, "u"))

    def exp(self):
        c = self._ctx
        if self._empty:
            raise EmptyOperand("elementary function on the empty interval")
        b, p = c._b, c.bits
        return Interval(c, b.exp(self._lo, p, "d"), b.exp(self._hi, p, "u"))

    def log(self):
        c = self._ctx
        if self._empty:
            raise EmptyOperand("elementary function on the empty interval")
        b, p = c._b, c.bits
        if b.sign(self._lo) <= 0:
            raise DomainViolation("log of an interval reaching zero")
        return Interval(c, b.log(self._lo, p, "d"), b.log(self._hi, p, "u"))

    def sin(self):
        c = self._ctx
        if self._empty:
            raise EmptyOperand("elementary function on the empty interval")
        b, p = c._b, c.bits
        kmin, kmax = c._crit_superset(self._lo, self._hi, Fraction(1, 2))
        lo_e = _min_e(b.sin(self._lo, p, "d"), b.sin(self._hi, p, "d"))
        hi_e = _max_e(b.sin(self._lo, p, "u"), b.sin(self._hi, p, "u"))
        if _parity_in(kmin, kmax, 0):
            hi_e = b.from_int(1, p, "u")
        if _parity_in(kmin, kmax, 1):
            lo_e = b.from_int(-1, p, "d")
        return Interval(c, lo_e, hi_e)

    def cos(self):
        c = self._ctx
        if self._empty:
            raise EmptyOperand("elementary function on the empty interval")
        b, p = c._b, c.bits
        kmin, kmax = c._crit_superset(self._lo, self._hi, 0)
        lo_e = _min_e(b.cos(self._lo, p, "d"), b.cos(self._hi, p, "d"))
        hi_e = _max_e(b.cos(self._lo, p, "u"), b.cos(self._hi, p, "u"))
        if _parity_in(kmin, kmax, 0):
            hi_e = b.from_int(1, p, "u")
        if _parity_in(kmin, kmax, 1):
            lo_e = b.from_int(-1, p, "d")
        return Interval(c, lo_e, hi_e)

    def tan(self):
        c = self._ctx
        if self._empty:
            raise EmptyOperand("elementary function on the empty interval")
        b, p = c._b, c.bits
        kmin, kmax = c._crit_superset(self._lo, self._hi, Fraction(1, 2))
        if kmax >= kmin:
            raise DomainViolation("tan over an interval that may contain a pole")
        return Interval(c, b.tan(self._lo, p, "d"), b.tan(self._hi, p, "u"))

    def cot(self):
        c = self._ctx
        if self._empty:
            raise EmptyOperand("elementary function on the empty interval")
        b, p = c._b, c.bits
        kmin, kmax = c._crit_superset(self._lo, self._hi, 0)
        if kmax >= kmin:
            raise DomainViolation("cot over an interval that may contain a pole")
        return Interval(c, b.cot(self._hi, p, "d"), b.cot(self._lo, p, "u"))

    def atan(self):
        c = self._ctx
        if self._empty:
            raise EmptyOperand("elementary function on the empty interval")
        b, p = c._b, c.bits
        return Interval(c, b.atan(self._lo, p, "d"), b.atan(self._hi, p, "u"))

    # set operations

    def hull(self, other):
        if other._empty:
            return self
        if self._empty:
            return other
        if self._ctx.bits != other._ctx.bits:
            raise PrecisionMismatch("hull across precisions")
        return Interval(self._ctx, _min_e(self._lo, other._lo), _max_e(self._hi, other._hi))

    def intersect(self, other):
        if self._empty or other._empty:
            return self._ctx._empty
        if self._ctx.bits != other._ctx.bits:
            raise PrecisionMismatch("intersection across precisions")
        lo = _max_e(self._lo, other._lo)
        hi = _min_e(self._hi, other._hi)
        if _B.cmp(lo, hi) > 0:
            return self._ctx._empty
        return Interval(self._ctx, lo, hi)

    def contains(self, other):
        if isinstance(other, Interval):
            if other._empty:
                return True
            if self._empty:
                return False
            return _B.cmp(self._lo, other._lo) <= 0 and _B.cmp(other._hi, self._hi) <= 0
        fr = _to_fraction(other)
        if self._empty:
            return False
        b, p = self._ctx._b, self._ctx.bits
        w = max(p, _frac_bits(fr)) + 8
        x_lo = b.from_fraction(fr.numerator, fr.denominator, w, "d")
        x_hi = b.from_fraction(fr.numerator, fr.denominator, w, "u")
        return b.cmp(self._lo, x_lo) <= 0 and b.cmp(x_hi, self._hi) <= 0

    def strictly_inside(self, other):
        if self._empty:
            return True
        if other._empty:
            return False
        return _B.cmp(other._lo, self._lo) < 0 and _B.cmp(self._hi, other._hi) < 0

    def width(self):
        c = self._ctx
        if self._empty:
            return c.zero
        u = c._b.sub(self._hi, self._lo, c.bits, "u")
        return Interval(c, u, u)

    def mid(self):
        c = self._ctx
        if self._empty:
            raise EmptyOperand("midpoint of the empty interval")
        b, p = c._b, c.bits
        two = b.from_int(2, p, "n")
        m = b.div(b.add(self._lo, self._hi, p, "n"), two, p, "n")
        if b.cmp(m, self._lo) < 0:
            m = self._lo
        if b.cmp(m, self._hi) > 0:
            m = self._hi
        return Interval(c, m, m)

    def mag(self):
        c = self._ctx
        if self._empty:
            return c.zero
        m = _max_e(_B.abs_(self._lo), _B.abs_(self._hi))
        return Interval(c, m, m)

    def mig(self):
        c = self._ctx
        if self._empty:
            return c.zero
        b = c._b
        if b.sign(self._lo) <= 0 <= b.sign(self._hi):
            return c.zero
        m = _min_e(b.abs_(self._lo), b.abs_(self._hi))
        return Interval(c, m, m)

    def sym_bound(self):
        """Smallest symmetric interval [-m, m] containing self."""
        c = self._ctx
        if self._empty:
            return c.zero
        m = _max_e(_B.abs_(self._lo), _B.abs_(self._hi))
        return Interval(c, _B.neg(m), m)

    def pad(self, err):
        """Widen by a nonnegative error bound on both sides."""
        c = self._ctx
        e = err._hi if isinstance(err, Interval) else c.from_fraction(_to_fraction(err))._hi
        b, p = c._b, c.bits
        return Interval(c, b.sub(self._lo, e, p, "d"), b.add(self._hi, e, p, "u"))

    def min_(self, other):
        o = self._peer(other)
        return Interval(self._ctx, _min_e(self._lo, o._lo), _min_e(self._hi, o._hi))

    def max_(self, other):
        o = self._peer(other)
        return Interval(self._ctx, _max_e(self._lo, o._lo), _max_e(self._hi, o._hi))

    # sign and order predicates (certain, i.e. hold for every member)

    def is_positive(self):
        return not self._empty and _B.sign(self._lo) > 0

    def is_negative(self):
        return not self._empty and _B.sign(self._hi) < 0

    def is_nonnegative(self):
        return not self._empty and _B.sign(self._lo) >= 0

    def contains_zero(self):
        return (not self._empty and _B.sign(self._lo) <= 0 <= _B.sign(self._hi))

    def certainly_lt(self, other):
        o = self._peer(other)
        return _B.cmp(self._hi, o._lo) < 0

    def certainly_gt(self, other):
        o = self._peer(other)
        return _B.cmp(self._lo, o._hi) > 0

    def is_zero(self):
        return (not self._empty and _B.sign(self._lo) == 0 and _B.sign(self._hi) == 0)

    # conversion

    def lo_float(self):
        return _B.to_float(self._lo, "d")

    def hi_float(self):
        return _B.to_float(self._hi, "u")

    def mid_float(self):
        return 0.5 * (_B.to_float(self._lo, "n") + _B.to_float(self._hi, "n"))

    def wid_float(self):
        c = self._ctx
        return _B.to_float(c._b.sub(self._hi, self._lo, c.bits, "u"), "u")

    def serialize(self):
        if self._empty:
            return ["empty", "empty"]
        return [_endpoint_to_hex(self._lo), _endpoint_to_hex(self._hi)]


def _min_e(a, b):
    return a if _B.cmp(a, b) <= 0 else b


def _max_e(a, b):
    return a if _B.cmp(a, b) >= 0 else b


def _parity_in(kmin, kmax, parity):
    if kmax < kmin:
        return False
    if kmax - kmin >= 1:
        return True
    return (kmin % 2) == parity


def _frac_bits(fr):
    return max(fr.numerator.bit_length(), fr.denominator.bit_length())


# spec-surface dispatchers

_ARITH = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def arith(op, a, b):
    try:
        f = _ARITH[op]
    except KeyError:
        raise ValueError(f"unknown arithmetic op {op!r}") from None
    return f(a, b)


def elem(fn, a, n=None):
    if fn == "pow-int":
        return a ** int(n)
    try:
        f = {"sin": Interval.sin, "cos": Interval.cos, "tan": Interval.tan,
             "cot": Interval.cot, "sqrt": Interval.sqrt, "abs": Interval.__abs__,
             "exp": Interval.exp, "log": Interval.log}[fn]
    except KeyError:
        raise ValueError(f"unknown elementary function {fn!r}") from None
    return f(a)


def set_ops(tag, *args):
    try:
        f = {"hull": Interval.hull, "intersect": Interval.intersect,
             "contains": Interval.contains, "width": Interval.width,
             "midpoint": Interval.mid}[tag]
    except KeyError:
        raise ValueError(f"unknown set operation {tag!r}") from None
    return f(*args)


class IVec2:
    """Interval vector in the plane."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = x
        self.y = y

    def __repr__(self):
        return f"IVec2({self.x!r}, {self.y!r})"

    def __add__(self, o):
        return IVec2(self.x + o.x, self.y + o.y)

    def __sub__(self, o):
        return IVec2(self.x - o.x, self.y - o.y)

    def __neg__(self):
        return IVec2(-self.x, -self.y)

    def scale(self, c):
        return IVec2(self.x * c, self.y * c)

    def dot(self, o):
        return self.x * o.x + self.y * o.y

    def perp(self):
        """Counterclockwise quarter turn: (a, b) -> (-b, a)."""
        return IVec2(-self.y, self.x)

    def norm2(self):
        return self.x ** 2 + self.y ** 2

    def norm(self):
        return self.norm2().sqrt()

    def sup_abs(self):
        return abs(self.x).max_(abs(self.y))

    def hull(self, o):
        return IVec2(self.x.hull(o.x), self.y.hull(o.y))


class CInterval:
    """Rectangular complex interval (re + i*im)."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = re
        self.im = im

    def __repr__(self):
        return f"CInterval({self.re!r}, {self.im!r})"

    def __add__(self, o):
        return CInterval(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return CInterval(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return CInterval(-self.re, -self.im)

    def __mul__(self, o):
        if isinstance(o, Interval):
            return CInterval(self.re * o, self.im * o)
        return CInterval(self.re * o.re - self.im * o.im,
                         self.re * o.im + self.im * o.re)

    def conj(self):
        return CInterval(self.re, -self.im)

    def abs2(self):
        return self.re ** 2 + self.im ** 2

    def recip(self):
        d = self.abs2()
        return CInterval(self.re / d, -self.im / d)

    def __truediv__(self, o):
        if isinstance(o, Interval):
            return CInterval(self.re / o, self.im / o)
        return self * o.recip()

    def times_i(self):
        return CInterval(-self.im, self.re)

    def pow_int(self, n):
        if n < 0:
            return self.pow_int(-n).recip()
        c = self
        out = None
        while n:
            if n & 1:
                out = c if out is None else out * c
            n >>= 1
            if n:
                c = c * c
        if out is None:
            raise ValueError("pow_int(0) needs a context; multiply by one instead")
        return out
