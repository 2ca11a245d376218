"""Interval-coefficient polynomials in one and two variables.

IPoly stores coefficients low order first; every operation is plain interval
arithmetic, so evaluation encloses the true range of any member polynomial.
Range bounds come from Horner evaluation over a subdivided argument interval,
which converges like the subdivision width. Definite integrals are exact up
to endpoint rounding since antiderivatives stay polynomial.
"""

from fractions import Fraction

from .interval import Interval

__all__ = ["IPoly", "BPoly"]


class IPoly:
    __slots__ = ("ctx", "c")

    def __init__(self, ctx, coeffs):
        self.ctx = ctx
        cs = list(coeffs)
        if not cs:
            cs = [ctx.zero]
        self.c = cs

    @classmethod
    def zero(cls, ctx):
        return cls(ctx, [ctx.zero])

    @classmethod
    def const(cls, ctx, v):
        return cls(ctx, [v if isinstance(v, Interval) else ctx.interval(v)])

    @classmethod
    def from_fractions(cls, ctx, fracs):
        return cls(ctx, [ctx.from_fraction(Fraction(f)) for f in fracs])

    @property
    def degree(self):
        return len(self.c) - 1

    def trimmed(self):
        c = self.c
        n = len(c)
        while n > 1 and c[n - 1].is_zero():
            n -= 1
        return self if n == len(c) else IPoly(self.ctx, c[:n])

    def __repr__(self):
        return f"IPoly(deg={self.degree})"

    def __add__(self, o):
        a, b = self.c, o.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] = out[i] + v
        return IPoly(self.ctx, out)

    def __sub__(self, o):
        return self + (-o)

    def __neg__(self):
        return IPoly(self.ctx, [-v for v in self.c])

    def scale(self, s):
        if not isinstance(s, Interval):
            s = self.ctx.interval(s)
        return IPoly(self.ctx, [v * s for v in self.c])

    def __mul__(self, o):
        if isinstance(o, Interval):
            return self.scale(o)
        z = self.ctx.zero
        out = [z] * (len(self.c) + len(o.c) - 1)
        for i, a in enumerate(self.c):
            if a.is_zero():
                continue
            for j, b in enumerate(o.c):
                out[i + j] = out[i + j] + a * b
        return IPoly(self.ctx, out)

    def mul_trunc(self, o, L):
        z = self.ctx.zero
        out = [z] * min(L, len(self.c) + len(o.c) - 1)
        for i, a in enumerate(self.c):
            if i >= L or a.is_zero():
                continue
            for j, b in enumerate(o.c):
                if i + j >= L:
                    break
                out[i + j] = out[i + j] + a * b
        return IPoly(self.ctx, out)

    def shift_degree(self, k):
        """Multiply by t^k."""
        return IPoly(self.ctx, [self.ctx.zero] * k + list(self.c))

    def derivative(self):
        if len(self.c) == 1:
            return IPoly.zero(self.ctx)
        return IPoly(self.ctx, [self.c[i] * i for i in range(1, len(self.c))])

    def antiderivative(self):
        out = [self.ctx.zero]
        for i, v in enumerate(self.c):
            out.append(v / (i + 1))
        return IPoly(self.ctx, out)

    def eval_iv(self, x):
        acc = self.c[-1]
        for v in reversed(self.c[:-1]):
            acc = acc * x + v
        return acc

    def eval_fr(self, fr):
        return self.eval_iv(self.ctx.from_fraction(Fraction(fr)))

    def compose_linear(self, a, b):
        """Coefficients of p(a + b t)."""
        ctx = self.ctx
        if not isinstance(a, Interval):
            a = ctx.interval(a)
        if not isinstance(b, Interval):
            b = ctx.interval(b)
        acc = IPoly.const(ctx, self.c[-1])
        lin = IPoly(ctx, [a, b])
        for v in reversed(self.c[:-1]):
            acc = acc * lin
            acc.c[0] = acc.c[0] + v
        return acc

    def shift(self, c):
        return self.compose_linear(c, self.ctx.one)

    def definite_integral(self, a, b):
        """Integral over [a, b] for exact rational endpoints."""
        anti = self.antiderivative()
        return anti.eval_fr(Fraction(b)) - anti.eval_fr(Fraction(a))

    def range_on(self, a, b, pieces=8):
        """Enclosure of the range over [a, b] (rational endpoints).

        Mean-value form per subinterval: p(m) + p'(box)(box - m), which is
        second-order accurate in the subdivision width.
        """
        a, b = Fraction(a), Fraction(b)
        if b < a:
            raise ValueError("range_on endpoints out of order")
        ctx = self.ctx
        if a == b:
            return self.eval_fr(a)
        dp = self.derivative()
        step = (b - a) / pieces
        out = None
        for i in range(pieces):
            lo = a + i * step
            hi = a + (i + 1) * step
            box = ctx.from_fraction(lo, hi)
            half = ctx.from_fraction((hi - lo) / 2).sym_bound()
            v = self.eval_fr((lo + hi) / 2) + dp.eval_iv(box) * half
            out = v if out is None else out.hull(v)
        return out

    def sup_abs_on(self, a, b, pieces=8):
        return self.range_on(a, b, pieces).mag()

    def l2sq_on(self, a, b):
        return (self * self).definite_integral(a, b)


class BPoly:
    """Sparse bivariate interval polynomial, monomials x^i y^j."""

    __slots__ = ("ctx", "m")

    def __init__(self, ctx, mono=None):
        self.ctx = ctx
        self.m = dict(mono) if mono else {}

    @classmethod
    def const(cls, ctx, v):
        if not isinstance(v, Interval):
            v = ctx.interval(v)
        return cls(ctx, {(0, 0): v})

    def copy(self):
        return BPoly(self.ctx, self.m)

    def add_term(self, i, j, v):
        key = (i, j)
        got = self.m.get(key)
        self.m[key] = v if got is None else got + v
        return self

    def __add__(self, o):
        out = BPoly(self.ctx, self.m)
        for k, v in o.m.items():
            out.add_term(k[0], k[1], v)
        return out

    def __sub__(self, o):
        out = BPoly(self.ctx, self.m)
        for k, v in o.m.items():
            out.add_term(k[0], k[1], -v)
        return out

    def __neg__(self):
        return BPoly(self.ctx, {k: -v for k, v in self.m.items()})

    def scale(self, s):
        if not isinstance(s, Interval):
            s = self.ctx.interval(s)
        return BPoly(self.ctx, {k: v * s for k, v in self.m.items()})

    def __mul__(self, o):
        if isinstance(o, Interval):
            return self.scale(o)
        out = BPoly(self.ctx)
        for (i1, j1), a in self.m.items():
            if a.is_zero():
                continue
            for (i2, j2), b in o.m.items():
                out.add_term(i1 + i2, j1 + j2, a * b)
        return out

    def mul_mono(self, i, j, v=None):
        out = BPoly(self.ctx)
        for (a, b), c in self.m.items():
            out.m[(a + i, b + j)] = c if v is None else c * v
        return out

    def eval_iv(self, x, y):
        # Horner in y of Horner-in-x rows
        if not self.m:
            return self.ctx.zero
        max_j = max(k[1] for k in self.m)
        rows = {}
        for (i, j), v in self.m.items():
            rows.setdefault(j, {})[i] = v
        acc = None
        for j in range(max_j, -1, -1):
            row = rows.get(j)
            if row is None:
                rv = self.ctx.zero
            else:
                mi = max(row)
                rv = row[mi]
                for i in range(mi - 1, -1, -1):
                    rv = rv * x + row.get(i, self.ctx.zero)
            acc = rv if acc is None else acc * y + rv
        return acc

    def integrate_y(self, a, b):
        """Integrate out y over rational [a, b]; returns IPoly in x."""
        a, b = Fraction(a), Fraction(b)
        ctx = self.ctx
        max_i = max((k[0] for k in self.m), default=0)
        out = [ctx.zero] * (max_i + 1)
        for (i, j), v in self.m.items():
            w = ctx.from_fraction((b ** (j + 1) - a ** (j + 1)) / (j + 1))
            out[i] = out[i] + v * w
        return IPoly(ctx, out)

    def as_ipoly_in_x(self):
        """Require no y dependence; collapse to IPoly."""
        ctx = self.ctx
        max_i = max((k[0] for k in self.m), default=0)
        out = [ctx.zero] * (max_i + 1)
        for (i, j), v in self.m.items():
            if j != 0 and not v.is_zero():
                raise ValueError("bivariate polynomial still depends on y")
            if j == 0:
                out[i] = out[i] + v
        return IPoly(ctx, out)
