"""Certified coefficients for the linearized energy inequality.

Kernel classes Theta^{a1..a4}_{b1,b2} act on a chord difference D (b2 >= 0,
with an amplitude factor of order b2 riding along) or on the amplitude
difference d (b2 = -1).  Each class is split into explicit singular heads
plus a bounded remainder kernel,

    K(a,b) = Theta(a,b) - c1(a)/(4 sin^2(u/2)) - c2(a)/(2 tan(u/2)),
    u = a - b,

with c1, c2 the leading Taylor data of Theta about b = a (single head for
b2 = -1, no heads once the chord factors already cancel the singularity).
The remainder is enclosed on a diagonal band by a layered expansion in u
whose heads are, by construction, the same polynomials stored in c1 and c2,
so no cancellation is ever performed in interval arithmetic; off the band
the kernel is evaluated directly.  Kernels are functions on the torus: the
chord always uses the wrapped representative of a - b in (-pi, pi].

The resulting operator pieces T1..T4 receive interval coefficient bounds
(T3/T4 through commutator estimates with H and Lambda = H d/da, T2 through
a generalized Young inequality), and the per-class coefficients assemble
into an interval matrix C with d/dt E_v <= C E_v + delta at linear order.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (ArcChordFailure, BandTooWide, DimensionMismatch,
                     InsufficientSmoothness, MissingTerm, QSingular,
                     UnsupportedOrder)
from .interval import CInterval, Interval
from .meshfn import SpaceSpline
from .poly import IPoly
from .singint import hilbert, lambda_op
from .util import bernoulli

__all__ = ["ENERGY_LAYOUT", "BandedKernel", "CellKernel", "CMatrix", "Curve",
           "ComplexSpline", "EnergyVector", "KernelSplit", "QCorrections",
           "TermBound", "assemble_C", "class_bounds", "q2_along",
           "q2_gradient", "q2_weight", "q_corrections", "split_theta",
           "t_bounds", "young_bound"]

_TCAP = 12  # polynomial degree kept in the local mesh coordinate


def _pzero(p):
    return all(c.is_zero() for c in p.c)


def _tcap(p):
    """Fold coefficients above the degree cap into the constant term.

    The local coordinate lives in [0, 1], so a tail sum(c_k t^k) is
    contained in sum(hull(0, c_k)).
    """
    if p.degree <= _TCAP:
        return p
    ctx = p.ctx
    head = list(p.c[:_TCAP + 1])
    acc = ctx.zero
    for c in p.c[_TCAP + 1:]:
        acc = acc + c.hull(ctx.zero)
    head[0] = head[0] + acc
    return IPoly(ctx, head)


def _recip_tau(ctx, p, what):
    """Enclosure of 1/p as a polynomial on [0, 1], p bounded away from 0."""
    rng = p.range_on(Fraction(0), Fraction(1), pieces=16)
    if rng.contains_zero():
        raise ArcChordFailure(f"{what} enclosure meets zero")
    c = rng.mid()
    cinv = c.recip()
    q = IPoly.const(ctx, ctx.one) - p.scale(cinv)
    qn = q.range_on(Fraction(0), Fraction(1), pieces=16).mag()
    if not qn.certainly_lt(ctx.one):
        raise ArcChordFailure(f"{what} reciprocal series does not contract")
    acc = IPoly.const(ctx, ctx.one)
    term = IPoly.const(ctx, ctx.one)
    for _ in range(14):
        term = _tcap(term * q)
        acc = acc + term
    tail = (qn ** 15 / (ctx.one - qn)).sym_bound()
    acc = acc + IPoly.const(ctx, tail)
    return _tcap(acc).scale(cinv)


class _VJet:
    """F(u, t) in L0(t) + u L1(t) + u^2 L2(t) + u^3 L3(t) on |u| <= rad.

    Pointwise enclosure on the band box; products only ever fold excess
    u-degrees upward into the cubic collector, so the low layers stay
    usable as head polynomials.
    """

    __slots__ = ("ctx", "rad", "layers")

    def __init__(self, ctx, rad, layers):
        self.ctx = ctx
        self.rad = rad
        self.layers = tuple(layers)

    @classmethod
    def zero(cls, ctx, rad):
        z = IPoly.zero(ctx)
        return cls(ctx, rad, (z, z, z, z))

    @classmethod
    def const_poly(cls, ctx, rad, p):
        z = IPoly.zero(ctx)
        return cls(ctx, rad, (p, z, z, z))

    def is_zero(self):
        return all(_pzero(p) for p in self.layers)

    def _sym(self):
        return self.rad.hull(-self.rad)

    def __add__(self, o):
        return _VJet(self.ctx, self.rad,
                     tuple(a + b for a, b in zip(self.layers, o.layers)))

    def __sub__(self, o):
        return _VJet(self.ctx, self.rad,
                     tuple(a - b for a, b in zip(self.layers, o.layers)))

    def __neg__(self):
        return _VJet(self.ctx, self.rad, tuple(-a for a in self.layers))

    def scale(self, s):
        return _VJet(self.ctx, self.rad,
                     tuple(p.scale(s) for p in self.layers))

    def __mul__(self, o):
        ctx = self.ctx
        z = IPoly.zero(ctx)
        out = [z, z, z, z]
        sym = self._sym()
        for i, a in enumerate(self.layers):
            if _pzero(a):
                continue
            for j, b in enumerate(o.layers):
                if _pzero(b):
                    continue
                p = _tcap(a * b)
                g = i + j
                if g <= 3:
                    out[g] = out[g] + p
                else:
                    r = p.range_on(Fraction(0), Fraction(1))
                    out[3] = out[3] + IPoly.const(ctx, r * sym ** (g - 3))
        return _VJet(ctx, self.rad, out)

    def pow(self, n):
        acc = self
        for _ in range(n - 1):
            acc = acc * self
        return acc

    def layer_range(self, k):
        return self.layers[k].range_on(Fraction(0), Fraction(1))

    def range(self):
        sym = self._sym()
        acc = self.layer_range(0)
        for k in range(1, 4):
            acc = acc + self.layer_range(k) * sym ** k
        return acc

    def recip(self, what="chord"):
        ctx = self.ctx
        r0 = _recip_tau(ctx, self.layers[0], what)
        rj = _VJet.const_poly(ctx, self.rad, r0)
        one = _VJet.const_poly(ctx, self.rad, IPoly.const(ctx, ctx.one))
        err = one - self * rj
        en = err.range().mag()
        if not en.certainly_lt(ctx.one):
            raise ArcChordFailure(f"{what} band reciprocal does not contract")
        acc = one
        term = one
        for _ in range(10):
            term = term * err
            acc = acc + term
        tail = (en ** 11 / (ctx.one - en)).sym_bound()
        acc = acc + _VJet.const_poly(ctx, self.rad, IPoly.const(ctx, tail))
        return acc * rj


class _CVJet:
    """Complex layered jet as a pair of real jets."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = re
        self.im = im

    def conj(self):
        return _CVJet(self.re, -self.im)

    def __mul__(self, o):
        return _CVJet(self.re * o.re - self.im * o.im,
                      self.re * o.im + self.im * o.re)

    def mul_real(self, v):
        return _CVJet(self.re * v, self.im * v)

    def pow(self, n):
        acc = self
        for _ in range(n - 1):
            acc = acc * self
        return acc

    def recip(self, what="chord"):
        # 1/G = conj(G) / |G|^2; the product G conj(G) is real, so its
        # imaginary enclosure (a zero-centered rounding artifact) is dropped
        sq = (self * self.conj()).re
        return self.conj().mul_real(sq.recip(what))


def _rho_jets(ctx, rad, terms=8):
    """Head defects as functions of u on |u| <= rad.

    rho1(u) = 1/u^2 - 1/(4 sin^2(u/2)) = sum_{k>=1} (1-2k) b_k u^{2k-2}
    rho2(u) = 1/u   - 1/(2 tan(u/2))   = sum_{k>=1}        b_k u^{2k-1}

    with b_k = |B_{2k}|/(2k)! = 2 zeta(2k) (2pi)^{-2k} <= 4 (2pi)^{-2k};
    the geometric tails need rad < 2pi.
    """
    z = IPoly.zero(ctx)
    sym = rad.hull(-rad)
    lay1 = [z, z, z, z]
    lay2 = [z, z, z, z]

    def put(layers, p, c):
        if p <= 3:
            layers[p] = layers[p] + IPoly.const(ctx, c)
        else:
            layers[3] = layers[3] + IPoly.const(ctx, c * sym ** (p - 3))

    for k in range(1, terms + 1):
        bk = ctx.from_fraction(
            abs(bernoulli(2 * k)) / Fraction(math.factorial(2 * k)))
        put(lay1, 2 * k - 2, bk * ctx.from_fraction(1 - 2 * k))
        put(lay2, 2 * k - 1, bk)
    two_pi = ctx.pi_times(2)
    rho = (rad * two_pi.recip()) ** 2
    if not rho.certainly_lt(ctx.one):
        raise BandTooWide("band radius reaches the head series radius")
    four = ctx.from_fraction(4)
    geo = (ctx.one - rho).recip()
    t1 = four * rho ** terms * two_pi.recip() ** 2 * (
        ctx.from_fraction(2 * terms - 1) * geo + ctx.from_fraction(2) * geo ** 2)
    t2 = four * rho ** terms * (rho * geo) * rad.recip()
    lay1[0] = lay1[0] + IPoly.const(ctx, t1.sym_bound())
    lay2[0] = lay2[0] + IPoly.const(ctx, t2.sym_bound())
    return (_VJet(ctx, rad, lay1), _VJet(ctx, rad, lay2))


class Curve:
    """Closed curve a -> lift*a + x1(a) + i x2(a) on the 2pi torus.

    x1 (and x2, when present) are periodic splines on the full circle in
    "pi" units; lift adds an unwinding linear part for graph-type curves.
    Spline enclosures are assumed to carry derivative enclosures up to
    their continuity class, as produced by the periodic interpolators.
    """

    __slots__ = ("ctx", "x1", "x2", "lift")

    def __init__(self, ctx, x1, x2=None, lift=Fraction(0)):
        if x1.unit != "pi" or not x1.periodic or x1.span != Fraction(2):
            raise DimensionMismatch("curve spline must cover the pi circle")
        if x2 is not None and not x1.same_mesh(x2):
            raise DimensionMismatch("curve components on different meshes")
        self.ctx = ctx
        self.x1 = x1
        self.x2 = x2
        self.lift = Fraction(lift)

    @property
    def n_pieces(self):
        return self.x1.n_pieces

    @property
    def width(self):
        return self.x1.width

    @property
    def left(self):
        return self.x1.left

    def _jet_poly(self, spline, i, k):
        p = spline.pieces[i]
        for _ in range(k):
            p = p.derivative()
        if k:
            p = p.scale(spline.inv_alpha_width() ** k)
        return p

    def jet(self, i, k, lift=True):
        """Local polynomials of d^k x / da^k on piece i (re, im or None)."""
        ctx = self.ctx
        re = self._jet_poly(self.x1, i, k)
        if lift and self.lift:
            if k == 0:
                c0 = ctx.pi_times(self.lift * (self.left + i * self.width))
                c1 = ctx.pi_times(self.lift * self.width)
                re = re + IPoly(ctx, [c0, c1])
            elif k == 1:
                re = re + IPoly.const(ctx, ctx.from_fraction(self.lift))
        im = self._jet_poly(self.x2, i, k) if self.x2 is not None else None
        return re, im

    def cell(self, i, k, lift=True):
        """Range of d^k x over piece i as an interval pair."""
        re, im = self.jet(i, k, lift=lift)
        rr = re.range_on(Fraction(0), Fraction(1))
        ri = im.range_on(Fraction(0), Fraction(1)) if im is not None \
            else self.ctx.zero
        return rr, ri

    def alpha_range(self, i):
        lo = self.ctx.pi_times(self.left + i * self.width)
        hi = self.ctx.pi_times(self.left + (i + 1) * self.width)
        return lo.hull(hi)

    def point(self, i):
        """Enclosure of the curve over piece i as a complex interval."""
        rr, ri = self.cell(i, 0, lift=False)
        if self.lift:
            rr = rr + self.ctx.from_fraction(self.lift) * self.alpha_range(i)
        return CInterval(rr, ri)


class ComplexSpline:
    """Piecewise enclosure of a complex-valued head; im may be absent."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        self.re = re
        self.im = im

    def eval(self, r):
        rv = self.re.eval(r)
        iv = self.im.eval(r) if self.im is not None else self.re.ctx.zero
        return CInterval(rv, iv)

    def piece(self, i):
        rr = self.re.pieces[i].range_on(Fraction(0), Fraction(1))
        ri = self.im.pieces[i].range_on(Fraction(0), Fraction(1)) \
            if self.im is not None else self.re.ctx.zero
        return CInterval(rr, ri)

    def sup(self):
        """Upper enclosure of sup |c| over the circle."""
        ctx = self.re.ctx
        acc = ctx.zero
        for i in range(self.re.n_pieces):
            c = self.piece(i)
            acc = acc.max_(c.abs2())
        return acc.sqrt()


class BandedKernel:
    """Cellwise upper enclosures of |K| on the mesh-pair grid."""

    __slots__ = ("ctx", "width", "mags", "band")

    def __init__(self, ctx, width, mags, band=3):
        self.ctx = ctx
        self.width = Fraction(width)
        self.mags = tuple(tuple(row) for row in mags)
        self.band = band

    @property
    def n(self):
        return len(self.mags)

    @property
    def vals(self):
        return self.mags

    def cell(self, i, j):
        return self.mags[i][j]

    def all_finite(self):
        return all(math.isfinite(c.hi_float())
                   for row in self.mags for c in row)


class CellKernel:
    """Plain cellwise enclosure of a bivariate kernel's values."""

    __slots__ = ("ctx", "width", "vals")

    def __init__(self, ctx, width, vals):
        self.ctx = ctx
        self.width = Fraction(width)
        self.vals = tuple(tuple(row) for row in vals)

    @property
    def n(self):
        return len(self.vals)


@dataclass(frozen=True)
class KernelSplit:
    """Heads plus enclosed remainder for one kernel class."""

    theta: object
    c1: object
    c2: object
    kernel: BandedKernel
    band: int


def _sing_degree(theta):
    return theta.b1 - sum(theta.a)


def _mag_of(re, im):
    return (re ** 2 + im ** 2).sqrt()


def _gjet(curve, i, k, band, rad):
    """Layered jet of (d^k x(a) - d^k x(a-u)) / u about piece i."""
    ctx = curve.ctx
    n = curve.n_pieces
    a_re, a_im = curve.jet(i, k + 1)
    b_re, b_im = curve.jet(i, k + 2)
    c_re, c_im = curve.jet(i, k + 3)
    half = ctx.from_fraction(Fraction(-1, 2))
    sixth = ctx.from_fraction(Fraction(1, 6))
    rem_re = ctx.zero
    rem_im = ctx.zero
    for off in range(-band - 1, band + 2):
        rr, ri = curve.cell((i + off) % n, k + 4)
        rem_re = rem_re.hull(rr)
        rem_im = rem_im.hull(ri)
    w24 = ctx.from_fraction(Fraction(1, 24))
    z = IPoly.zero(ctx)

    def build(a, b, c, rem):
        if a is None:
            return _VJet.zero(ctx, rad)
        lay3 = IPoly.const(ctx, (rem * w24).sym_bound())
        return _VJet(ctx, rad, (a, b.scale(half), c.scale(sixth), lay3))

    re = build(a_re, b_re, c_re, rem_re)
    if a_im is None:
        im = _VJet.zero(ctx, rad)
    else:
        im = build(a_im, b_im, c_im, rem_im)
    return _CVJet(re, im)


def _band_piece(curve, theta, i, band, rad):
    """Layered enclosure of u^s * Theta about piece i."""
    ctx = curve.ctx
    psi = g0 = None
    if theta.b1:
        g0 = _gjet(curve, i, 0, band, rad)
        psi = g0.recip().pow(theta.b1)
    for k, ak in enumerate(theta.a, start=1):
        if ak:
            gk = _gjet(curve, i, k, band, rad).pow(ak)
            psi = gk if psi is None else psi * gk
    if psi is None:
        one = _VJet.const_poly(ctx, rad, IPoly.const(ctx, ctx.one))
        psi = _CVJet(one, _VJet.zero(ctx, rad))
    return psi


def split_theta(theta, curve, band=3):
    """Split a kernel class over a curve into heads and bounded remainder.

    The band enclosure and the head splines come from the same layered
    expansion, so the head subtraction on the band is exact by
    construction; off-band cells evaluate the kernel directly and fail
    with ArcChordFailure when a chord enclosure meets zero.
    """
    ctx = curve.ctx
    n = curve.n_pieces
    if 2 * band + 3 > n:
        raise BandTooWide(f"band {band} needs more than {n} mesh cells")
    s = _sing_degree(theta)
    if s > 2:
        raise UnsupportedOrder(f"singularity degree {s} has no head recipe")
    kmax = max([k for k, ak in enumerate(theta.a, start=1) if ak],
               default=0)
    smooth = curve.x1.smoothness if curve.x2 is None \
        else min(curve.x1.smoothness, curve.x2.smoothness)
    if kmax + 4 > smooth:
        raise InsufficientSmoothness(
            f"chord factors need derivatives up to {kmax + 4}")
    rad = ctx.pi_times((band + 1) * curve.width)
    rho1, rho2 = _rho_jets(ctx, rad)
    r1_rng = rho1.range()
    r2_rng = rho2.range()
    sym = rad.hull(-rad)

    c1_re, c1_im, c2_re, c2_im = [], [], [], []
    band_mag = []
    complex_curve = curve.x2 is not None
    for i in range(n):
        psi = _band_piece(curve, theta, i, band, rad)
        if s == 2:
            c1_re.append(psi.re.layers[0])
            c1_im.append(psi.im.layers[0])
            c2_re.append(psi.re.layers[1])
            c2_im.append(psi.im.layers[1])
            k_re = psi.re.layer_range(2) + psi.re.layer_range(3) * sym \
                + psi.re.layer_range(0) * r1_rng \
                + psi.re.layer_range(1) * r2_rng
            k_im = psi.im.layer_range(2) + psi.im.layer_range(3) * sym \
                + psi.im.layer_range(0) * r1_rng \
                + psi.im.layer_range(1) * r2_rng
        elif s == 1:
            c1_re.append(psi.re.layers[0])
            c1_im.append(psi.im.layers[0])
            k_re = psi.re.layer_range(1) + psi.re.layer_range(2) * sym \
                + psi.re.layer_range(3) * sym ** 2 \
                + psi.re.layer_range(0) * r2_rng
            k_im = psi.im.layer_range(1) + psi.im.layer_range(2) * sym \
                + psi.im.layer_range(3) * sym ** 2 \
                + psi.im.layer_range(0) * r2_rng
        else:
            k_re = psi.re.range() * sym ** (-s) if s else psi.re.range()
            k_im = psi.im.range() * sym ** (-s) if s else psi.im.range()
        band_mag.append(_mag_of(k_re, k_im))

    def head_spline(res, ims):
        re = SpaceSpline(ctx, curve.x1.degree, curve.left, curve.width,
                         res, periodic=True, unit="pi", smoothness=0)
        im = None
        if complex_curve:
            im = SpaceSpline(ctx, curve.x1.degree, curve.left, curve.width,
                             ims, periodic=True, unit="pi", smoothness=0)
        return ComplexSpline(re, im)

    c1 = head_spline(c1_re, c1_im) if s >= 1 else None
    c2 = head_spline(c2_re, c2_im) if s == 2 else None

    # off-band machinery: chord ranges per derivative order and per-offset
    # head values with the wrapped chord representative; offsets straddling
    # the antipodal seam split into a branch near +pi and one near -pi
    orders = [0] + [k for k, ak in enumerate(theta.a, start=1) if ak]
    cells = {}
    for k in orders:
        cells[k] = [curve.cell(i, k, lift=(k != 0)) for i in range(n)]
    lift_iv = ctx.from_fraction(curve.lift) if curve.lift else None
    half = ctx.from_fraction(Fraction(1, 2))
    four = ctx.from_fraction(4)

    branches = {}
    for d0 in range(band + 1, n - band):
        dw = d0 if d0 <= n // 2 else d0 - n
        lo_r = curve.width * (dw - 1)
        hi_r = curve.width * (dw + 1)
        if hi_r > 1:
            spans = [(lo_r, Fraction(1)), (Fraction(-1), hi_r - 2)]
        elif lo_r < -1:
            spans = [(lo_r + 2, Fraction(1)), (Fraction(-1), hi_r)]
        else:
            spans = [(lo_r, hi_r)]
        entries = []
        for a, b in spans:
            u = ctx.pi_times(a).hull(ctx.pi_times(b))
            neg = b <= 0
            ah = (-u * half) if neg else (u * half)
            sn = ah.sin()
            h1 = (sn ** 2 * four).recip()
            h2 = ah.cot() * half
            if neg:
                h2 = -h2
            entries.append((u, h1, h2))
        branches[dw] = entries

    mags = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            d0 = (i - j) % n
            dw = d0 if d0 <= n // 2 else d0 - n
            if abs(dw) <= band:
                mags[i][j] = band_mag[i]
                continue
            dre = cells[0][i][0] - cells[0][j][0]
            dim = cells[0][i][1] - cells[0][j][1]
            base = None
            if theta.b1 == 0:
                base = CInterval(ctx.one, ctx.zero)
            for k in orders[1:]:
                dk = CInterval(cells[k][i][0] - cells[k][j][0],
                               cells[k][i][1] - cells[k][j][1])
                dk = dk.pow_int(theta.a[k - 1])
                base = dk if base is None else base * dk
            acc = None
            for u, h1, h2 in branches[dw]:
                if theta.b1:
                    cre = dre + lift_iv * u if lift_iv is not None else dre
                    dx = CInterval(cre, dim)
                    if dx.abs2().contains_zero():
                        raise ArcChordFailure(
                            f"chord enclosure meets zero between cells "
                            f"{i} and {j}")
                    val = dx.pow_int(-theta.b1)
                    if base is not None:
                        val = val * base
                else:
                    val = base
                if c1 is not None:
                    val = val - c1.piece(i) * (h2 if s == 1 else h1)
                if c2 is not None:
                    val = val - c2.piece(i) * h2
                m = _mag_of(val.re, val.im)
                acc = m if acc is None else acc.hull(m)
            mags[i][j] = acc
    kern = BandedKernel(ctx, curve.width, mags, band=band)
    return KernelSplit(theta, c1, c2, kern, band)


def young_bound(kernel):
    """Certified max of row and column integrals of |kernel|."""
    ctx = kernel.ctx
    wa = ctx.pi_times(kernel.width)
    n = kernel.n
    best = ctx.zero
    col = [ctx.zero] * n
    for i in range(n):
        row = ctx.zero
        for j in range(n):
            v = abs(kernel.vals[i][j])
            row = row + v
            col[j] = col[j] + v
        best = best.max_(row)
    for j in range(n):
        best = best.max_(col[j])
    return best * wa


def _cell_sups(spline):
    return [abs(p.range_on(Fraction(0), Fraction(1))) for p in spline.pieces]


def t_bounds(split, gamma, operand):
    """Interval coefficients for the split pieces of one kernel class.

    For the chord operand ("D") the returned map bounds
      |T1 D| <= t1 |D|,  |T2 D| <= t2 |D|,
      |T3 D| <= t3_l2 |D| + t3_h1 |D_a|,  |T4 D| <= t4 |D|
    in L^2, with the amplitude factor of order b2 folded into gamma.  For
    the amplitude operand ("d") only t1 (Young on |K|) and t2 (half the
    head sup, H being an L^2 contraction) are active.
    """
    theta = split.theta
    kern = split.kernel
    ctx = kern.ctx
    zero = ctx.zero
    out = {"t1": zero, "t2": zero, "t3_l2": zero, "t3_h1": zero, "t4": zero}
    inv2pi = ctx.pi_times(2).recip()
    half = ctx.from_fraction(Fraction(1, 2))

    if operand == "d":
        if theta.b2 != -1:
            raise ValueError("amplitude operand needs a b2 = -1 class")
        out["t1"] = young_bound(kern) * inv2pi
        if split.c1 is not None:
            out["t2"] = split.c1.sup() * half
        return out
    if operand != "D":
        raise ValueError(f"unknown operand tag {operand!r}")
    if theta.b2 < 0:
        raise ValueError("chord operand needs a b2 >= 0 class")

    geff = gamma
    for _ in range(theta.b2):
        geff = geff.derivative()
    n = kern.n
    if geff.n_pieces != n or geff.width != kern.width:
        raise DimensionMismatch("amplitude mesh does not match the kernel")
    wa = ctx.pi_times(kern.width)
    gcell = _cell_sups(geff)

    best = ctx.zero
    for i in range(n):
        row = ctx.zero
        for j in range(n):
            row = row + abs(kern.cell(i, j)) * gcell[j]
        best = best.max_(row)
    out["t1"] = best * wa * inv2pi

    ktilde = [[None] * n for _ in range(n)]
    for j in range(n):
        for ell in range(j, n):
            acc = ctx.zero
            for i in range(n):
                acc = acc + abs(kern.cell(i, j)) * abs(kern.cell(i, ell))
            v = acc * wa * gcell[j] * gcell[ell]
            ktilde[j][ell] = v
            ktilde[ell][j] = v
    c_young = young_bound(CellKernel(ctx, kern.width, ktilde))
    out["t2"] = c_young.sqrt() * inv2pi

    gsup = ctx.zero
    for s in gcell:
        gsup = gsup.max_(s)
    gasup = ctx.zero
    for s in _cell_sups(geff.derivative()):
        gasup = gasup.max_(s)
    lam_sup = lambda_op(geff).linf()
    hil_sup = hilbert(geff).linf()
    if split.c1 is not None:
        c1s = split.c1.sup()
        out["t3_l2"] = half * c1s * (gasup + lam_sup)
        out["t3_h1"] = half * c1s * gsup
    if split.c2 is not None:
        out["t4"] = half * split.c2.sup() * (gsup + hil_sup)
    return out


# conformal weight along the curve

def _require_off_origin(pt):
    a2 = pt.abs2()
    if a2.contains_zero():
        raise QSingular("curve enclosure meets the origin weight pole")
    return a2


def q2_weight(pt):
    """Weight Q^2 = |1 + x^4|^2 / (16 |x|^2) at a complex enclosure."""
    ctx = pt.re.ctx
    a2 = _require_off_origin(pt)
    one = CInterval(ctx.one, ctx.zero)
    num = (one + pt.pow_int(4)).abs2()
    return num * (a2 * ctx.from_fraction(16)).recip()


def q2_gradient(pt):
    """Complex gradient g with  dQ^2 = Re(g * D)  to linear order."""
    ctx = pt.re.ctx
    _require_off_origin(pt)
    one = CInterval(ctx.one, ctx.zero)
    x2 = pt.pow_int(2)
    a = (one + pt.pow_int(4)) * pt.recip()
    b = x2 * ctx.from_fraction(3) - x2.recip()
    return (a.conj() * b) * ctx.from_fraction(Fraction(1, 8))


def q2_along(curve):
    """Per-cell enclosures of Q^2 along the curve."""
    return [q2_weight(curve.point(i)) for i in range(curve.n_pieces)]


@dataclass(frozen=True)
class QCorrections:
    """Coefficient updates when the conformal weight is switched on."""

    base: dict
    scaled: dict
    extra: dict
    linear_coeff: Interval

    def additional(self, label):
        return self.scaled[label] - self.base[label] + self.extra[label]

    def difference_bound(self, dnorm):
        return self.linear_coeff * dnorm


def q_corrections(curve, base, qfactors):
    """Weight-corrected coefficient bounds for previously bounded terms.

    Old bounds are multiplied by the zeroth weight-derivative enclosure
    and gain additive copies for each higher derivative factor; the new
    linear terms carry the sup of the explicit weight gradient along the
    curve.
    """
    ctx = curve.ctx
    f0 = abs(qfactors.get(0, ctx.one))
    fk = ctx.zero
    for k, iv in qfactors.items():
        if k >= 1:
            fk = fk + abs(iv)
    scaled = {label: b * f0 for label, b in base.items()}
    extra = {label: b * fk for label, b in base.items()}
    lin = ctx.zero
    for i in range(curve.n_pieces):
        g = q2_gradient(curve.point(i))
        lin = lin.max_(g.abs2())
    return QCorrections(dict(base), scaled, extra, lin.sqrt())


# energy vector and comparison matrix

ENERGY_LAYOUT = ("D_l2", "D_h1", "D_h2", "D_h3", "D_h4w",
                 "d_l2", "d_h1", "d_h2", "dd_h3h")
# chord difference in L^2..H^3 plus the weighted fourth-derivative term,
# amplitude difference in L^2..H^2, interface-velocity difference scale


@dataclass(frozen=True)
class EnergyVector:
    """Ordered nonnegative norm entries of the vectorized energy."""

    entries: tuple
    layout: tuple = ENERGY_LAYOUT

    def __post_init__(self):
        if len(self.entries) != len(self.layout):
            raise ValueError("energy entries do not match the layout")
        for name, iv in zip(self.layout, self.entries):
            if iv.hi_float() < 0:
                raise ValueError(f"norm entry {name} is certainly negative")


@dataclass(frozen=True)
class TermBound:
    """One certified coefficient: row entry gains coeff * col entry."""

    label: str
    row: str
    col: str
    coeff: object


@dataclass(frozen=True)
class CMatrix:
    """Interval comparison matrix: d/dt E <= C E + delta entrywise.

    The nonlinear remainder is reported separately as a polynomial tail
    coefficient with a symbolic exponent, never folded into the matrix.
    """

    layout: tuple
    entries: tuple
    delta: tuple
    tail: object = None
    tail_exponent: str = "k"

    def rhs(self, ev):
        vec = ev.entries if isinstance(ev, EnergyVector) else tuple(ev)
        out = []
        for row, d in zip(self.entries, self.delta):
            acc = d
            for c, e in zip(row, vec):
                acc = acc + c * e
            out.append(acc)
        return tuple(out)

    def eig_midpoint(self):
        """Largest real eigenvalue part of the midpoint matrix.

        Diagnostic only; the rigorous growth rate is row_sum_bound().
        """
        mid = np.array([[c.mid_float() for c in row] for row in self.entries])
        return float(max(np.real(np.linalg.eigvals(mid))))

    def row_sum_bound(self):
        """Rigorous scalar growth rate: max row sum of entry magnitudes."""
        ctx = self.entries[0][0].ctx
        best = ctx.zero
        for row in self.entries:
            acc = ctx.zero
            for c in row:
                acc = acc + abs(c)
            best = best.max_(acc)
        return best


def _any_interval(bounds, delta, tail):
    for tb in bounds:
        if tb.coeff is not None:
            return tb.coeff
    if delta is not None:
        for d in delta:
            return d
    if tail is not None:
        return tail
    raise ValueError("no interval operand to take a context from")


def assemble_C(bounds, layout=ENERGY_LAYOUT, delta=None, tail=None):
    """Sum certified term bounds into the comparison matrix.

    Every enumerated term must carry a bound; a missing one is a hard
    MissingTerm failure rather than a silent drop.
    """
    bounds = list(bounds)
    idx = {name: i for i, name in enumerate(layout)}
    for tb in bounds:
        if tb.coeff is None:
            raise MissingTerm(f"term {tb.label!r} has no certified bound")
        if tb.row not in idx or tb.col not in idx:
            raise ValueError(f"term {tb.label!r} addresses unknown entries")
    ctx = _any_interval(bounds, delta, tail).ctx
    k = len(layout)
    entries = [[ctx.zero] * k for _ in range(k)]
    for tb in bounds:
        r, c = idx[tb.row], idx[tb.col]
        entries[r][c] = entries[r][c] + tb.coeff
    if delta is None:
        delta = tuple(ctx.zero for _ in layout)
    else:
        delta = tuple(delta)
        if len(delta) != k:
            raise ValueError("inhomogeneity does not match the layout")
    return CMatrix(tuple(layout), tuple(tuple(row) for row in entries),
                   delta, tail)


def class_bounds(specs, curve, band=3, threads=None):
    """Bound kernel classes independently, results in input order.

    specs: iterable of (theta, gamma, operand) triples.  The reduction
    order never depends on the thread count.
    """
    specs = list(specs)
    if threads is None:
        threads = int(os.environ.get("WAVECERT_THREADS", "1"))

    def work(spec):
        theta, gamma, operand = spec
        return t_bounds(split_theta(theta, curve, band=band), gamma, operand)

    if threads <= 1:
        return [work(s) for s in specs]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(work, specs))
