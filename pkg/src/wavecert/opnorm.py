"""Certified inverse bounds for singular operators A + B*H + E on the circle.

Operators act on L2 of the torus as

    Sf(x) = A(x) f(x) + B(x) Hf(x) + integral E(x,y) f(y) dy,

with H the periodic Hilbert transform (H cos nx = sin nx, H sin nx =
-cos nx, constants die).  Everything is represented in the real
trigonometric basis {1, cos nx, sin nx}, where H is diagonal and all
composition kernels close up as bivariate trigonometric polynomials
with interval coefficients.

The inversion scheme: build a heuristic approximate inverse
St = Atilde + Btilde*H + Etilde (pointwise symbol inversion plus a
finite-rank kernel correction from Galerkin solves), then rigorously
bound delta >= ||S St - I|| by expanding the product term by term.
When delta < 1, the Neumann series gives a right inverse of norm at
most ||St|| / (1 - delta); composing in the other order bounds a left
inverse the same way.

Functions and kernels carry an optional uniform remainder ("slack"): a
bound s with |object - trig part| <= s everywhere.  Slack flows through
pointwise bounds and kernel-format terms, while the few compositions
that would push slack through a principal-value integral are bounded
directly in operator norm and folded into delta.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    CommonZero,
    DeltaTooLarge,
    KernelOverflow,
    RangeFailure,
    WindowTooWide,
)
from .interval import Interval

__all__ = [
    "TrigFn",
    "BivKernel",
    "SingularOp",
    "ApproxInverse",
    "InverseCertificate",
    "onb",
    "commutator_kernel",
    "galerkin_solve",
    "approx_inverse",
    "compose_defect",
    "certify_inverse",
    "time_extend",
    "operator_modulus",
]


def _finite(iv):
    return math.isfinite(iv.lo_float()) and math.isfinite(iv.hi_float())


def _half(ctx):
    return ctx.from_fraction(Fraction(1, 2))


def _conv(ctx, c1, c2):
    """Product of two real trig coefficient lists [a0, a1, b1, ...]."""
    d1 = (len(c1) - 1) // 2
    d2 = (len(c2) - 1) // 2
    out = [ctx.zero] * (2 * (d1 + d2) + 1)
    half = _half(ctx)

    def a_of(c, n):
        return c[0] if n == 0 else c[2 * n - 1]

    def b_of(c, n):
        return None if n == 0 else c[2 * n]

    for m in range(d1 + 1):
        am, bm = a_of(c1, m), b_of(c1, m)
        am = None if am is not None and am.is_zero() else am
        bm = None if bm is not None and bm.is_zero() else bm
        if am is None and bm is None:
            continue
        for n in range(d2 + 1):
            an, bn = a_of(c2, n), b_of(c2, n)
            an = None if an is not None and an.is_zero() else an
            bn = None if bn is not None and bn.is_zero() else bn
            if an is None and bn is None:
                continue
            aa = am * an if am is not None and an is not None else None
            ab = am * bn if am is not None and bn is not None else None
            ba = bm * an if bm is not None and an is not None else None
            bb = bm * bn if bm is not None and bn is not None else None
            p, q = m + n, m - n
            # cos(m)cos(n), sin(m)sin(n) -> cos(p), cos(q)
            # cross terms -> sin(p), sin(q); sin at index 0 vanishes
            if aa is not None or bb is not None:
                hi = half * ((aa if aa is not None else ctx.zero)
                             - (bb if bb is not None else ctx.zero))
                lo = half * ((aa if aa is not None else ctx.zero)
                             + (bb if bb is not None else ctx.zero))
                if p == 0:
                    out[0] = out[0] + hi
                else:
                    out[2 * p - 1] = out[2 * p - 1] + hi
                if q == 0:
                    out[0] = out[0] + lo
                else:
                    out[2 * abs(q) - 1] = out[2 * abs(q) - 1] + lo
            if ab is not None or ba is not None:
                hi = half * ((ab if ab is not None else ctx.zero)
                             + (ba if ba is not None else ctx.zero))
                lo = half * ((ba if ba is not None else ctx.zero)
                             - (ab if ab is not None else ctx.zero))
                if p != 0:
                    out[2 * p] = out[2 * p] + hi
                if q > 0:
                    out[2 * q] = out[2 * q] + lo
                elif q < 0:
                    out[2 * (-q)] = out[2 * (-q)] - lo
    return out


def _conv_float(c1, c2):
    d1 = (len(c1) - 1) // 2
    d2 = (len(c2) - 1) // 2
    out = [0.0] * (2 * (d1 + d2) + 1)
    for m in range(d1 + 1):
        am = c1[0] if m == 0 else c1[2 * m - 1]
        bm = 0.0 if m == 0 else c1[2 * m]
        if am == 0.0 and bm == 0.0:
            continue
        for n in range(d2 + 1):
            an = c2[0] if n == 0 else c2[2 * n - 1]
            bn = 0.0 if n == 0 else c2[2 * n]
            if an == 0.0 and bn == 0.0:
                continue
            p, q = m + n, m - n
            hi_c, lo_c = 0.5 * (am * an - bm * bn), 0.5 * (am * an + bm * bn)
            hi_s, lo_s = 0.5 * (am * bn + bm * an), 0.5 * (bm * an - am * bn)
            if p == 0:
                out[0] += hi_c
            else:
                out[2 * p - 1] += hi_c
                out[2 * p] += hi_s
            if q == 0:
                out[0] += lo_c
            elif q > 0:
                out[2 * q - 1] += lo_c
                out[2 * q] += lo_s
            else:
                out[2 * (-q) - 1] += lo_c
                out[2 * (-q)] -= lo_s
    return out


class TrigFn:
    """Real trigonometric polynomial with interval coefficients.

    Coefficients are stored as [a0, a1, b1, a2, b2, ...] for
    a0 + sum(a_n cos nx + b_n sin nx).  The optional slack is a uniform
    remainder bound: the represented object is any function within
    slack of the trigonometric part in sup norm.
    """

    __slots__ = ("ctx", "c", "slack")

    def __init__(self, ctx, coeffs, slack=None):
        coeffs = tuple(coeffs)
        if len(coeffs) % 2 == 0:
            raise ValueError("coefficient list must have odd length")
        self.ctx = ctx
        self.c = coeffs
        self.slack = ctx.zero if slack is None else slack.mag()

    @classmethod
    def from_floats(cls, ctx, vals):
        return cls(ctx, [ctx.interval(v) for v in vals])

    @classmethod
    def const(cls, ctx, v):
        return cls(ctx, [v if isinstance(v, Interval) else ctx.interval(v)])

    @classmethod
    def zero(cls, ctx):
        return cls.const(ctx, 0)

    @property
    def degree(self):
        return (len(self.c) - 1) // 2

    def with_slack(self, err):
        return TrigFn(self.ctx, self.c, slack=err)

    def split(self):
        return TrigFn(self.ctx, self.c), self.slack

    def trim(self):
        c = list(self.c)
        while len(c) > 1 and c[-1].is_zero() and c[-2].is_zero():
            c = c[:-2]
        return TrigFn(self.ctx, c, slack=self.slack)

    def _pad_to(self, n):
        if len(self.c) >= n:
            return list(self.c)
        return list(self.c) + [self.ctx.zero] * (n - len(self.c))

    def __add__(self, other):
        n = max(len(self.c), len(other.c))
        a, b = self._pad_to(n), other._pad_to(n)
        return TrigFn(self.ctx, [x + y for x, y in zip(a, b)],
                      slack=self.slack + other.slack)

    def __sub__(self, other):
        n = max(len(self.c), len(other.c))
        a, b = self._pad_to(n), other._pad_to(n)
        return TrigFn(self.ctx, [x - y for x, y in zip(a, b)],
                      slack=self.slack + other.slack)

    def __neg__(self):
        return TrigFn(self.ctx, [-x for x in self.c], slack=self.slack)

    def scale(self, s):
        if not isinstance(s, Interval):
            s = self.ctx.interval(s)
        return TrigFn(self.ctx, [x * s for x in self.c],
                      slack=self.slack * s.mag())

    def _coeff_mag(self):
        out = self.ctx.zero
        for x in self.c:
            out = out + x.mag()
        return out

    def __mul__(self, other):
        ctx = self.ctx
        c = _conv(ctx, self.c, other.c)
        slack = ctx.zero
        if not self.slack.is_zero() or not other.slack.is_zero():
            slack = (self.slack * other._coeff_mag()
                     + other.slack * self._coeff_mag()
                     + self.slack * other.slack)
        return TrigFn(ctx, c, slack=slack)

    def hilbert(self):
        """H(a cos nx + b sin nx) = a sin nx - b cos nx; constants die."""
        if not self.slack.is_zero():
            raise ValueError("Hilbert transform needs an exact trig part")
        ctx = self.ctx
        out = [ctx.zero] * len(self.c)
        for n in range(1, self.degree + 1):
            out[2 * n - 1] = -self.c[2 * n]
            out[2 * n] = self.c[2 * n - 1]
        return TrigFn(ctx, out)

    def deriv(self):
        if not self.slack.is_zero():
            raise ValueError("derivative needs an exact trig part")
        ctx = self.ctx
        out = [ctx.zero] * len(self.c)
        for n in range(1, self.degree + 1):
            out[2 * n - 1] = self.c[2 * n] * n
            out[2 * n] = -(self.c[2 * n - 1] * n)
        return TrigFn(ctx, out)

    def eval(self, x):
        if not isinstance(x, Interval):
            x = self.ctx.interval(x)
        acc = self.c[0]
        for n in range(1, self.degree + 1):
            t = x * n
            a, b = self.c[2 * n - 1], self.c[2 * n]
            if not a.is_zero():
                acc = acc + a * t.cos()
            if not b.is_zero():
                acc = acc + b * t.sin()
        if not self.slack.is_zero():
            acc = acc.pad(self.slack)
        return acc

    def eval_float(self, x):
        acc = self.c[0].mid_float()
        for n in range(1, self.degree + 1):
            acc += (self.c[2 * n - 1].mid_float() * math.cos(n * x)
                    + self.c[2 * n].mid_float() * math.sin(n * x))
        return acc

    def range_bound(self, cells=None):
        """Enclosure of the value range over the whole circle."""
        ctx = self.ctx
        if cells is None:
            cells = min(512, max(16, 8 * self.degree))
        out = None
        for k in range(cells):
            cell = ctx.pi_times(Fraction(2 * k, cells)).hull(
                ctx.pi_times(Fraction(2 * (k + 1), cells)))
            v = self.eval(cell)
            out = v if out is None else out.hull(v)
        return out

    def sup_bound(self, cells=None):
        """Upper bound for sup |f|; coefficient sum when cells is None."""
        if cells is None:
            return self._coeff_mag() + self.slack
        return self.range_bound(cells).mag()

    def l2(self):
        """Enclosure of the L2 norm over the circle."""
        ctx = self.ctx
        sq = ctx.pi_times(2) * self.c[0] * self.c[0]
        pi = ctx.pi()
        for n in range(1, self.degree + 1):
            a, b = self.c[2 * n - 1], self.c[2 * n]
            sq = sq + pi * (a * a + b * b)
        out = sq.sqrt()
        if not self.slack.is_zero():
            out = out.pad(self.slack * ctx.pi_times(2).sqrt())
        return out.max_(ctx.zero)


def onb(ctx, nu):
    """Orthonormal trig basis: 1/sqrt(2pi), cos(nx)/sqrt(pi), sin(nx)/sqrt(pi)."""
    if nu == 0:
        return TrigFn(ctx, [ctx.pi_times(2).sqrt().recip()])
    n = (nu + 1) // 2
    c = [ctx.zero] * (2 * n + 1)
    c[2 * n - 1 if nu % 2 == 1 else 2 * n] = ctx.pi().sqrt().recip()
    return TrigFn(ctx, c)


class BivKernel:
    """Bivariate trig polynomial kernel K(x,y) with interval coefficients.

    c[mu][nu] multiplies basis element mu in x and nu in y (same index
    convention as TrigFn).  slack is a uniform remainder bound on
    |K - trig part| over the whole square.
    """

    __slots__ = ("ctx", "c", "slack")

    def __init__(self, ctx, coeffs, slack=None):
        self.ctx = ctx
        self.c = tuple(tuple(row) for row in coeffs)
        if any(len(r) != len(self.c[0]) for r in self.c):
            raise ValueError("ragged coefficient array")
        self.slack = ctx.zero if slack is None else slack.mag()

    @classmethod
    def zero(cls, ctx):
        return cls(ctx, [[ctx.zero]])

    @classmethod
    def rank1(cls, u, v):
        ctx = u.ctx
        rows = [[cu * cv for cv in v.c] for cu in u.c]
        slack = ctx.zero
        if not u.slack.is_zero() or not v.slack.is_zero():
            slack = (u.slack * v._coeff_mag() + v.slack * u._coeff_mag()
                     + u.slack * v.slack)
        return cls(ctx, rows, slack=slack)

    @property
    def shape(self):
        return len(self.c), len(self.c[0])

    def with_slack(self, err):
        return BivKernel(self.ctx, self.c, slack=err)

    def split(self):
        return BivKernel(self.ctx, self.c), self.slack

    def _grown(self, rows, cols):
        z = self.ctx.zero
        out = [[z] * cols for _ in range(rows)]
        for i, row in enumerate(self.c):
            for j, v in enumerate(row):
                out[i][j] = v
        return out

    def add(self, other):
        rows = max(len(self.c), len(other.c))
        cols = max(len(self.c[0]), len(other.c[0]))
        a = self._grown(rows, cols)
        b = other._grown(rows, cols)
        out = [[a[i][j] + b[i][j] for j in range(cols)] for i in range(rows)]
        return BivKernel(self.ctx, out, slack=self.slack + other.slack)

    def neg(self):
        return BivKernel(self.ctx, [[-v for v in row] for row in self.c],
                         slack=self.slack)

    def scale(self, s):
        if not isinstance(s, Interval):
            s = self.ctx.interval(s)
        return BivKernel(self.ctx, [[v * s for v in row] for row in self.c],
                         slack=self.slack * s.mag())

    def pad(self, err):
        """Widen every coefficient enclosure outward by err."""
        return BivKernel(self.ctx, [[v.pad(err) for v in row] for row in self.c],
                         slack=self.slack)

    def transpose(self):
        rows, cols = self.shape
        out = [[self.c[i][j] for i in range(rows)] for j in range(cols)]
        return BivKernel(self.ctx, out, slack=self.slack)

    def sup_bound(self):
        out = self.ctx.zero
        for row in self.c:
            for v in row:
                out = out + v.mag()
        return out + self.slack

    def _trig_sup(self):
        out = self.ctx.zero
        for row in self.c:
            for v in row:
                out = out + v.mag()
        return out

    def mul_x(self, fn):
        """Pointwise multiply by fn(x)."""
        ctx = self.ctx
        rows, cols = self.shape
        new_rows = 2 * ((len(fn.c) - 1) // 2 + (rows - 1) // 2) + 1
        out = [[ctx.zero] * cols for _ in range(new_rows)]
        for nu in range(cols):
            col = [self.c[mu][nu] for mu in range(rows)]
            prod = _conv(ctx, fn.c, col)
            for mu, v in enumerate(prod):
                out[mu][nu] = v
        slack = ctx.zero
        if not fn.slack.is_zero() or not self.slack.is_zero():
            slack = (fn.slack * self._trig_sup()
                     + self.slack * fn._coeff_mag()
                     + fn.slack * self.slack)
        return BivKernel(ctx, out, slack=slack)

    def mul_y(self, fn):
        return self.transpose().mul_x(fn).transpose()

    def hilbert_x(self):
        """Apply H to x -> K(x,y) for each y; exact on the trig part."""
        if not self.slack.is_zero():
            raise ValueError("Hilbert transform needs an exact trig part")
        ctx = self.ctx
        rows, cols = self.shape
        out = [[ctx.zero] * cols for _ in range(rows)]
        for n in range(1, (rows - 1) // 2 + 1):
            for nu in range(cols):
                out[2 * n - 1][nu] = -self.c[2 * n][nu]
                out[2 * n][nu] = self.c[2 * n - 1][nu]
        return BivKernel(ctx, out)

    def hilbert_y(self):
        return self.transpose().hilbert_x().transpose()

    def _weights(self, count):
        w = [self.ctx.pi()] * count
        w[0] = self.ctx.pi_times(2)
        return w

    def compose(self, other):
        """Kernel of the operator composition: int self(x,z) other(z,y) dz."""
        ctx = self.ctx
        r1, mid1 = self.shape
        mid2, c2 = other.shape
        mid = min(mid1, mid2)
        w = self._weights(mid)
        out = [[ctx.zero] * c2 for _ in range(r1)]
        for nu in range(mid):
            wn = w[nu]
            for i in range(r1):
                lhs = self.c[i][nu]
                if lhs.is_zero():
                    continue
                lw = lhs * wn
                row = other.c[nu]
                for j in range(c2):
                    if not row[j].is_zero():
                        out[i][j] = out[i][j] + lw * row[j]
        slack = ctx.zero
        if not self.slack.is_zero() or not other.slack.is_zero():
            tp = BivKernel(ctx, self.c)
            to = BivKernel(ctx, other.c)
            slack = (self.slack * to.col_bound()
                     + tp.row_bound() * other.slack
                     + self.slack * other.slack * ctx.pi_times(2))
        return BivKernel(ctx, out, slack=slack)

    def apply(self, fn):
        """The function x -> int K(x,y) fn(y) dy."""
        ctx = self.ctx
        rows, cols = self.shape
        w = self._weights(cols)
        out = [ctx.zero] * rows
        for nu in range(min(cols, len(fn.c))):
            fv = fn.c[nu]
            if fv.is_zero():
                continue
            fw = fv * w[nu]
            for mu in range(rows):
                if not self.c[mu][nu].is_zero():
                    out[mu] = out[mu] + self.c[mu][nu] * fw
        slack = ctx.zero
        if not self.slack.is_zero():
            slack = slack + self.slack * (
                TrigFn(ctx, fn.c).l2().mag() * ctx.pi_times(2).sqrt()
                + fn.slack * ctx.pi_times(2))
        if not fn.slack.is_zero():
            slack = slack + fn.slack * BivKernel(ctx, self.c).row_bound()
        return TrigFn(ctx, out, slack=slack)

    def row_bound(self):
        """Upper bound for max_x int |K(x,y)| dy.

        Uses Cauchy-Schwarz in y and a coefficient bound per y-mode, so
        it is a factor-of-a-few overestimate, never an underestimate.
        """
        ctx = self.ctx
        rows, cols = self.shape
        w = self._weights(cols)
        total = ctx.zero
        for nu in range(cols):
            cb = ctx.zero
            for mu in range(rows):
                cb = cb + self.c[mu][nu].mag()
            total = total + w[nu] * cb * cb
        out = total.sqrt() * ctx.pi_times(2).sqrt()
        if not self.slack.is_zero():
            out = out + ctx.pi_times(2) * self.slack
        return out

    def col_bound(self):
        return self.transpose().row_bound()

    def eval(self, x, y):
        ctx = self.ctx
        rows, cols = self.shape

        def basis(t, idx):
            if idx == 0:
                return ctx.interval(1)
            n = (idx + 1) // 2
            return (t * n).cos() if idx % 2 == 1 else (t * n).sin()

        if not isinstance(x, Interval):
            x = ctx.interval(x)
        if not isinstance(y, Interval):
            y = ctx.interval(y)
        bx = [basis(x, i) for i in range(rows)]
        by = [basis(y, j) for j in range(cols)]
        acc = ctx.zero
        for i in range(rows):
            for j in range(cols):
                if not self.c[i][j].is_zero():
                    acc = acc + self.c[i][j] * bx[i] * by[j]
        if not self.slack.is_zero():
            acc = acc.pad(self.slack)
        return acc

    def eval_float(self, x, y):
        acc = 0.0
        rows, cols = self.shape

        def basis(t, idx):
            if idx == 0:
                return 1.0
            n = (idx + 1) // 2
            return math.cos(n * t) if idx % 2 == 1 else math.sin(n * t)

        for i in range(rows):
            for j in range(cols):
                c = self.c[i][j].mid_float()
                if c != 0.0:
                    acc += c * basis(x, i) * basis(y, j)
        return acc


def commutator_kernel(fn):
    """Kernel of [H, multiplication by fn].

    Equals (1/2pi) cot((x-y)/2) (fn(y) - fn(x)), which for a trig
    polynomial fn collapses to a trig polynomial of the same degree:
    cos n contributes (sin nx + sin ny + 2 sum_p sin(px + (n-p)y))/2pi
    and sin n contributes -(cos nx + cos ny + 2 sum_p cos(px + (n-p)y))/2pi.
    """
    if not fn.slack.is_zero():
        raise ValueError("commutator kernel needs an exact trig part")
    ctx = fn.ctx
    d = fn.degree
    size = 2 * d + 1
    c = [[ctx.zero] * size for _ in range(size)]
    inv2pi = ctx.pi_times(2).recip()
    for n in range(1, d + 1):
        a, b = fn.c[2 * n - 1], fn.c[2 * n]
        if not a.is_zero():
            w = a * inv2pi
            w2 = w * 2
            c[2 * n][0] = c[2 * n][0] + w
            c[0][2 * n] = c[0][2 * n] + w
            for p in range(1, n):
                q = n - p
                # sin(px + qy) = sin px cos qy + cos px sin qy
                c[2 * p][2 * q - 1] = c[2 * p][2 * q - 1] + w2
                c[2 * p - 1][2 * q] = c[2 * p - 1][2 * q] + w2
        if not b.is_zero():
            w = b * inv2pi
            w2 = w * 2
            c[2 * n - 1][0] = c[2 * n - 1][0] - w
            c[0][2 * n - 1] = c[0][2 * n - 1] - w
            for p in range(1, n):
                q = n - p
                # cos(px + qy) = cos px cos qy - sin px sin qy
                c[2 * p - 1][2 * q - 1] = c[2 * p - 1][2 * q - 1] - w2
                c[2 * p][2 * q] = c[2 * p][2 * q] + w2
    return BivKernel(ctx, c)


@dataclass(frozen=True, eq=False)
class SingularOp:
    """S = A + B*H + E with trig-enclosed symbols and kernel."""

    a: TrigFn
    b: TrigFn
    e: BivKernel

    @classmethod
    def identity(cls, ctx):
        return cls(TrigFn.const(ctx, 1), TrigFn.zero(ctx), BivKernel.zero(ctx))

    @property
    def ctx(self):
        return self.a.ctx


@dataclass(frozen=True, eq=False)
class ApproxInverse:
    """Heuristic inverse candidate; only its defect bounds are rigorous.

    mult_defect and hilbert_defect record range enclosures of
    A*Atilde - B*Btilde - 1 and A*Btilde + B*Atilde.
    """

    a_tilde: TrigFn
    b_tilde: TrigFn
    e_tilde: BivKernel
    mult_defect: Interval = field(default=None)
    hilbert_defect: Interval = field(default=None)


@dataclass(frozen=True, eq=False)
class InverseCertificate:
    """Certified bound: some one-sided inverse of S has norm <= inverse_bound."""

    delta: Interval
    stilde_norm: Interval
    inverse_bound: Interval
    side: str

    def __post_init__(self):
        if self.side not in ("right", "left", "two-sided"):
            raise ValueError(f"unknown side {self.side!r}")
        if not self.delta.hi_float() < 1.0:
            raise DeltaTooLarge(
                f"defect bound {self.delta.hi_float():.6g} is not below 1")


# Galerkin solves -----------------------------------------------------------


def _float_coeffs(fn, size):
    out = [0.0] * size
    for i in range(min(size, len(fn.c))):
        out[i] = fn.c[i].mid_float()
    return out


def _weighted_l2_float(vec):
    s = 2.0 * math.pi * vec[0] ** 2
    for v in vec[1:]:
        s += math.pi * v * v
    return math.sqrt(s)


def galerkin_solve(op, f, n0, n1, tol=1e-8):
    """Solve pi1 S pi1 F = pi0 f on trig spaces of frequency 2^n0, 2^n1.

    The solve itself is floating point; the returned residual is a
    rigorous enclosure of ||S F - f|| in L2, which also absorbs the
    projection defect ||(I - pi0) f||.
    """
    if n1 < n0 + 3:
        raise ValueError("need n1 >= n0 + 3 between the two levels")
    ctx = op.a.ctx
    f1, f0 = 2 ** n1, 2 ** n0
    dim = 2 * f1 + 1

    fa = _float_coeffs(op.a, 2 * op.a.degree + 1)
    fb = _float_coeffs(op.b, 2 * op.b.degree + 1)
    erows, ecols = op.e.shape
    emid = [[op.e.c[i][j].mid_float() for j in range(ecols)] for i in range(erows)]

    mat = np.zeros((dim, dim))
    for k in range(dim):
        unit = [0.0] * dim
        unit[k] = 1.0
        col = np.zeros(dim)
        for c_src, vec in ((fa, unit), (fb, _hilbert_floats(unit))):
            if any(c_src):
                prod = _conv_float(c_src, vec)
                col += np.array(prod[:dim] + [0.0] * (dim - min(dim, len(prod))))
        if k < ecols:
            w = 2.0 * math.pi if k == 0 else math.pi
            for mu in range(min(erows, dim)):
                col[mu] += emid[mu][k] * w
        mat[:, k] = col

    rhs = np.array(_float_coeffs(f, dim))
    rhs[2 * f0 + 1:] = 0.0
    sol, *_ = np.linalg.lstsq(mat, rhs, rcond=None)

    scale = max(_weighted_l2_float(_float_coeffs(f, max(dim, len(f.c)))), 1e-300)
    if _weighted_l2_float(list(mat @ sol - rhs)) > tol * scale:
        raise RangeFailure("projected right-hand side is outside the "
                           "reachable range at these levels")

    sol_fn = TrigFn.from_floats(ctx, [float(v) for v in sol]).trim()
    resid = (op.a * sol_fn + op.b * sol_fn.hilbert()
             + op.e.apply(sol_fn) - f)
    return sol_fn, resid.l2()


def _hilbert_floats(c):
    out = [0.0] * len(c)
    for n in range(1, (len(c) - 1) // 2 + 1):
        out[2 * n - 1] = -c[2 * n]
        out[2 * n] = c[2 * n - 1]
    return out


# approximate inverse construction ------------------------------------------


def approx_inverse(op, rank=32, n0=5, n1=8, fit_degree=None, cells=64,
                   tol=1e-8, basis=None):
    """Build Atilde, Btilde from the pointwise symbol inverse and a
    rank-`rank` kernel correction Etilde from Galerkin solves.

    Atilde + i Btilde approximates 1/(A + iB); the construction is
    heuristic, all rigor lives in the later defect bounds.  Raises
    CommonZero when the enclosure of A^2 + B^2 does not stay away
    from zero, and propagates RangeFailure from the basis solves.
    """
    ctx = op.a.ctx
    gap = (op.a * op.a + op.b * op.b).range_bound(cells)
    if not gap.is_positive():
        raise CommonZero("A^2 + B^2 is not bounded away from zero")

    if fit_degree is None:
        fit_degree = max(8, 4 * max(op.a.degree, op.b.degree))
    m = 64
    while m < 4 * (fit_degree + 1):
        m *= 2
    xs = [2.0 * math.pi * k / m for k in range(m)]
    av = np.array([op.a.eval_float(x) for x in xs])
    bv = np.array([op.b.eval_float(x) for x in xs])
    den = av * av + bv * bv
    ta, tb = av / den, -bv / den

    def fit(vals):
        if float(vals.max()) == float(vals.min()):
            return TrigFn.const(ctx, float(vals[0]))
        co = np.fft.rfft(vals) / m
        out = [float(co[0].real)]
        for n in range(1, fit_degree + 1):
            out.append(2.0 * float(co[n].real))
            out.append(-2.0 * float(co[n].imag))
        return TrigFn.from_floats(ctx, out).trim()

    at, bt = fit(ta), fit(tb)

    one = TrigFn.const(ctx, 1)
    mult_defect = (op.a * at - op.b * bt - one).range_bound(cells)
    hilbert_defect = (op.a * bt + op.b * at).range_bound(cells)

    if basis is None:
        basis = [onb(ctx, nu) for nu in range(rank)]
    else:
        basis = list(basis)[:rank]
    et = BivKernel.zero(ctx)
    for phi in basis:
        psi, _ = galerkin_solve(op, phi, n0, n1, tol=tol)
        sharp = psi - at * phi - bt * phi.hilbert()
        et = et.add(BivKernel.rank1(sharp.trim(), phi))
    return ApproxInverse(at, bt, et, mult_defect, hilbert_defect)


# defect composition ---------------------------------------------------------


def _require_finite(parts):
    for iv in parts:
        if not _finite(iv):
            raise KernelOverflow("enclosure blew up to a non-finite bound")


def compose_defect(op, st, side="right", cells=64):
    """Bound delta >= ||S St - I|| (side="right") or ||St S - I|| ("left").

    Expands the product into pointwise, Hilbert and kernel parts.  All
    kernel-form terms are accumulated into one bivariate trig kernel
    E#; the H^2 = -(I - P0) identity contributes the rank-one kernel
    B(x) Btilde(x) / 2pi, which must be kept: dropping it would
    understate the defect on the mean mode.  Slack contributions that
    cannot be written as kernels (slack hit by H) are bounded directly
    in operator norm and added to delta.
    """
    ctx = op.ctx
    at, bt, et = st.a_tilde, st.b_tilde, st.e_tilde
    _require_finite([op.a.sup_bound(), op.b.sup_bound(), op.e.sup_bound(),
                     at.sup_bound(), bt.sup_bound(), et.sup_bound()])

    one = TrigFn.const(ctx, 1)
    p_mult = (op.a * at - op.b * bt - one).sup_bound(cells)
    p_hilb = (op.a * bt + op.b * at).sup_bound(cells)

    inv2pi = ctx.pi_times(2).recip()
    two_pi = ctx.pi_times(2)
    extra = ctx.zero
    kerns = []

    def comm_block(mult, inner, hilbert_after):
        # mult(x) * [H, inner] (optionally composed with H on the right);
        # slack in `inner` is bounded by ||[H, s]|| <= 2 sup|s|
        nonlocal extra
        pure, s = inner.split()
        k = commutator_kernel(pure)
        if hilbert_after:
            k = k.hilbert_y().neg()
        if not s.is_zero():
            extra = extra + mult.sup_bound() * s * 2
        return k.mul_x(mult)

    if side == "right":
        kerns.append(et.mul_x(op.a))                      # A Etilde
        kerns.append(comm_block(op.b, at, False))         # B [H, Atilde]
        kerns.append(comm_block(op.b, bt, True))          # B [H, Btilde] H
        kerns.append(BivKernel.rank1((op.b * bt) * TrigFn.const(ctx, inv2pi),
                                     one))                # B Btilde P0
        etp, set_ = et.split()
        kerns.append(etp.hilbert_x().mul_x(op.b))         # B H Etilde
        if not set_.is_zero():
            extra = extra + op.b.sup_bound() * set_ * two_pi
        kerns.append(op.e.mul_y(at))                      # E Atilde
        g = op.e.mul_y(bt)                                # E Btilde H
        gp, sg = g.split()
        kerns.append(gp.hilbert_y().neg())
        if not sg.is_zero():
            extra = extra + sg * two_pi
        kerns.append(op.e.compose(et))                    # E Etilde
    elif side == "left":
        kerns.append(op.e.mul_x(at))                      # Atilde E
        kerns.append(comm_block(bt, op.a, False))         # Btilde [H, A]
        kerns.append(comm_block(bt, op.b, True))          # Btilde [H, B] H
        kerns.append(BivKernel.rank1((bt * op.b) * TrigFn.const(ctx, inv2pi),
                                     one))                # Btilde B P0
        ep, se = op.e.split()
        kerns.append(ep.hilbert_x().mul_x(bt))            # Btilde H E
        if not se.is_zero():
            extra = extra + bt.sup_bound() * se * two_pi
        kerns.append(et.mul_y(op.a))                      # Etilde A
        g = et.mul_y(op.b)                                # Etilde B H
        gp, sg = g.split()
        kerns.append(gp.hilbert_y().neg())
        if not sg.is_zero():
            extra = extra + sg * two_pi
        kerns.append(et.compose(op.e))                    # Etilde E
    else:
        raise ValueError(f"unknown side {side!r}")

    total = kerns[0]
    for k in kerns[1:]:
        total = total.add(k)
    delta = (p_mult + p_hilb + total.row_bound().max_(total.col_bound())
             + extra)
    _require_finite([delta])
    return total, delta


def certify_inverse(op, st, side="two-sided", cells=64):
    """Issue an InverseCertificate for the requested side(s).

    The two-sided certificate takes the larger defect of the two
    compositions, so its bound covers both one-sided inverses; when
    both compositions certify, the inverses coincide with S^-1.
    """
    ctx = op.ctx
    stn = (st.a_tilde.sup_bound(cells) + st.b_tilde.sup_bound(cells)
           + st.e_tilde.row_bound().max_(st.e_tilde.col_bound()))
    if side == "two-sided":
        _, dr = compose_defect(op, st, side="right", cells=cells)
        _, dl = compose_defect(op, st, side="left", cells=cells)
        delta = dr.max_(dl)
    else:
        _, delta = compose_defect(op, st, side=side, cells=cells)
    one = ctx.interval(1)
    if not delta.certainly_lt(one):
        raise DeltaTooLarge(
            f"defect bound {delta.hi_float():.6g} is not below 1")
    bound = stn / (one - delta)
    return InverseCertificate(delta=delta, stilde_norm=stn,
                              inverse_bound=bound, side=side)


def time_extend(cert, modulus):
    """Extend a certificate at t0 to a window where ||S_t - S_t0|| <= modulus.

    Writes S_t = S_t0 (I + S_t0^-1 (S_t - S_t0)); the window bound is
    bound(t0) / (1 - modulus * bound(t0)).  Raises WindowTooWide when
    the contraction factor reaches 1.
    """
    ctx = cert.delta.ctx
    if not isinstance(modulus, Interval):
        modulus = ctx.interval(modulus)
    q = modulus.mag() * cert.inverse_bound
    one = ctx.interval(1)
    if not q.certainly_lt(one):
        raise WindowTooWide(
            f"modulus times inverse bound reaches {q.hi_float():.6g}")
    bound = cert.inverse_bound / (one - q)
    return InverseCertificate(delta=cert.delta, stilde_norm=cert.stilde_norm,
                              inverse_bound=bound, side=cert.side)


def operator_modulus(op0, op1, cells=64):
    """Upper bound for ||S1 - S0|| on L2 from symbol and kernel deviations."""
    da = (op1.a - op0.a).sup_bound(cells)
    db = (op1.b - op0.b).sup_bound(cells)
    de = op1.e.add(op0.e.neg())
    return da + db + de.row_bound().max_(de.col_bound())
