"""Hilbert transform enclosures against spectral and quadrature oracles."""

import cmath
import math
from fractions import Fraction

import mpmath
import pytest

from wavecert.errors import (ArcChordFailure, BandTooWide, DimensionMismatch,
                             DomainViolation, RangeFailure,
                             StructureMismatch)
from wavecert.interval import IntervalContext
from wavecert.meshfn import interpolate_periodic, periodic_sites
from wavecert.singint import TM2, hilbert, lambda_op

F = Fraction

# transfer slack from trig function to its spline interpolant; the
# interpolation defect at degree 10, n = 32 is below 1e-15 in every norm
# that the transform sees
PAD = "1e-8"


@pytest.fixture(scope="module")
def sctx():
    return IntervalContext(192)


def _trig_spline(ctx, n, freq, kind):
    sites = periodic_sites(n)
    if kind == "cos":
        samples = [ctx.pi_times(freq * r).cos() for r in sites]
    else:
        samples = [ctx.pi_times(freq * r).sin() for r in sites]
    return interpolate_periodic(ctx, samples, degree=10)


def _probes(n):
    return [F(2 * k, 3 * n) - 1 for k in range(3 * n)]


@pytest.mark.parametrize("freq", [1, 2, 3])
def test_hilbert_cos_gives_sin(sctx, freq):
    hf = hilbert(_trig_spline(sctx, 32, freq, "cos"))
    assert hf.err_float() < 1e-4
    pad = sctx.interval(PAD)
    for r in _probes(32):
        truth = sctx.pi_times(freq * r).sin()
        assert not hf.eval(r).pad(pad).intersect(truth).is_empty


@pytest.mark.parametrize("freq", [1, 3])
def test_hilbert_sin_gives_minus_cos(sctx, freq):
    hf = hilbert(_trig_spline(sctx, 32, freq, "sin"))
    pad = sctx.interval(PAD)
    for r in _probes(32):
        truth = -(sctx.pi_times(freq * r).cos())
        assert not hf.eval(r).pad(pad).intersect(truth).is_empty


def test_hilbert_annihilates_constants(sctx):
    sp = interpolate_periodic(sctx, [sctx.one] * 32, degree=10)
    hf = hilbert(sp)
    v = hf.eval(F(1, 7))
    assert abs(v.lo_float()) < 1e-8 and abs(v.hi_float()) < 1e-8


def test_lambda_is_modulus_multiplier(sctx):
    # Lambda e_n = |n| e_n; check n = 2 on the cosine line
    lf = lambda_op(_trig_spline(sctx, 32, 2, "cos"))
    pad = sctx.interval(PAD)
    for r in _probes(32)[::5]:
        truth = sctx.pi_times(2 * r).cos() * sctx.interval(2)
        assert not lf.eval(r).pad(pad).intersect(truth).is_empty


def test_error_bound_shrinks_with_resolution(sctx):
    e16 = hilbert(_trig_spline(sctx, 16, 1, "sin")).err_float()
    e32 = hilbert(_trig_spline(sctx, 32, 1, "sin")).err_float()
    assert e32 < e16 / 4


def test_low_degree_input_still_contains(sctx):
    sites = periodic_sites(32)
    samples = [sctx.pi_times(r).sin() for r in sites]
    sp = interpolate_periodic(sctx, samples, degree=3)
    hf = hilbert(sp)
    pad = sctx.interval("1e-2")
    for r in _probes(32)[::7]:
        truth = -(sctx.pi_times(r).cos())
        assert not hf.eval(r).pad(pad).intersect(truth).is_empty


def test_band_wider_than_mesh_rejected(sctx):
    sp = interpolate_periodic(sctx, [sctx.one] * 6, degree=3)
    with pytest.raises(BandTooWide):
        hilbert(sp, k_near=2)


def test_non_angular_spline_rejected(sctx):
    sp = interpolate_periodic(sctx, [sctx.one] * 12, degree=3, unit="plain")
    with pytest.raises(DomainViolation):
        hilbert(sp)


# independent oracle: adaptive quadrature of the principal-value integral
# on the difference form, in plain floating point at high working precision

def _mid_eval(sp, polys, r):
    n = len(polys)
    rel = (r - float(sp.left)) / float(sp.width)
    i = int(math.floor(rel)) % n
    u = rel - math.floor(rel)
    acc = 0.0
    for c in reversed(polys[i]):
        acc = acc * u + c
    return acc


def _quad_hilbert(sp, xr):
    polys = [[c.mid_float() for c in p.c] for p in sp.pieces]
    fx = _mid_eval(sp, polys, xr)

    def integrand(yr):
        yr = float(yr)
        d = xr - yr
        if d == 0.0:
            return mpmath.mpf(0)
        return (fx - _mid_eval(sp, polys, yr)) * mpmath.cot(mpmath.pi * d / 2)

    w = float(sp.width)
    edges = sorted({xr - 1, xr + 1, xr}
                   | {float(sp.left) + k * w for k in range(-len(polys), 2 * len(polys))
                      if xr - 1 < float(sp.left) + k * w < xr + 1})
    with mpmath.workdps(25):
        total = mpmath.quad(integrand, edges)
        return float(-total / 2)


def test_quadrature_oracle_agreement(sctx):
    sp = _trig_spline(sctx, 16, 2, "cos")
    hf = hilbert(sp)
    for xr in (0.13, -0.55, 0.925):
        oracle = _quad_hilbert(sp, xr)
        i, u = sp.locate(F(xr).limit_denominator(10 ** 6))
        enc = hf.eval(F(xr).limit_denominator(10 ** 6))
        assert abs(enc.mid_float() - oracle) < 1e-6 + hf.err_float()


# bivariate Taylor models

def test_tm2_structural_division(sctx):
    # (sigma+v)^3 - sigma^3 = 3 s^2 v + 3 s v^2 + v^3, then divide by v
    m = TM2(sctx, F(1, 4), F(1, 2))
    m.add_term(1, 2, sctx.interval(3))
    m.add_term(2, 1, sctx.interval(3))
    m.add_term(3, 0, sctx.one)
    q = m.div_v()
    # value at v = 1/4, sigma = 1/2 is 3/4 + 3/8 + 1/16
    box = q.range_box()
    assert box.contains(F(3, 4) + F(3, 8) + F(1, 16))


def test_tm2_division_needs_structural_zero(sctx):
    m = TM2.const(sctx, sctx.one, F(1, 4), F(1, 2))
    with pytest.raises(StructureMismatch):
        m.div_v()


def test_tm2_fold_keeps_containment(sctx):
    m = TM2(sctx, F(1, 2), F(1, 2), vcap=2, scap=2)
    m.add_term(5, 0, sctx.one)  # v^5 folded into a symmetric v^2 coefficient
    box = m.range_box()
    assert box.contains(F(1, 32)) and box.contains(F(-1, 32))


def test_tm2_recip_inverts(sctx):
    f = TM2(sctx, F(1, 4), F(1, 4))
    f.add_term(0, 0, sctx.interval(2))
    f.add_term(1, 0, sctx.one)
    f.add_term(0, 1, sctx.one)
    r = f.recip()
    prod = (f * r).range_box()
    assert prod.contains(1)
    assert prod.lo_float() > 0.99 and prod.hi_float() < 1.01


def test_tm2_recip_rejects_zero_crossing(sctx):
    f = TM2(sctx, F(1), F(1))
    f.add_term(0, 0, sctx.interval(1, 2))
    f.add_term(1, 0, sctx.interval(40))
    with pytest.raises(RangeFailure):
        f.recip()


def test_tm2_psi_rewrite_matches(sctx):
    m = TM2(sctx, F(3), F(1, 2))
    m.add_term(2, 1, sctx.interval(5))
    bp = m.to_bpoly_psi(d=2)
    # at psi = 1/4, sigma = -1/4: v = psi - sigma - 2 = -3/2
    psi = sctx.from_fraction(F(1, 4))
    sig = sctx.from_fraction(F(-1, 4))
    want = sctx.interval(5) * sctx.from_fraction(F(9, 4)) * sig
    got = bp.eval_iv(psi, sig)
    assert not got.intersect(want).is_empty
    assert got.wid_float() < 1e-30


# curve kernels
#
# independent oracle: symmetric-midpoint quadrature of the principal-value
# integral (1/pi) PV int f(b) z'(b) k(z(a) - z(b)) db in plain complex
# floats, with Richardson extrapolation to kill the leading h^2 term of
# the pole rule. The nodes a + (j + 1/2) h are symmetric about the pole.

from wavecert.energybound import Curve
from wavecert.singint import CurveKernel, kernel_apply


class _MidCurve:
    """Float evaluator for a Curve built from spline midpoints."""

    def __init__(self, c):
        self.lift = float(c.lift)
        self.w = float(c.width)
        self.left = float(c.left)
        self.re = [[v.mid_float() for v in p.c] for p in c.x1.pieces]
        if c.x2 is not None:
            self.im = [[v.mid_float() for v in p.c] for p in c.x2.pieces]
        else:
            self.im = None
        self.closed = c.lift == 0

    def _piece(self, r):
        n = len(self.re)
        rel = (r - self.left) / self.w
        i = int(math.floor(rel)) % n
        return i, rel - math.floor(rel)

    @staticmethod
    def _horner(cs, u):
        acc = 0.0
        for c in reversed(cs):
            acc = acc * u + c
        return acc

    def z(self, r):
        i, u = self._piece(r)
        v = self._horner(self.re[i], u) + self.lift * math.pi * r
        if self.im is not None:
            v = complex(v, self._horner(self.im[i], u))
        return complex(v)

    def zp(self, r):
        # d/d alpha from the tau-derivative of the local polynomial
        i, u = self._piece(r)
        dre = [k * c for k, c in enumerate(self.re[i])][1:] or [0.0]
        v = self._horner(dre, u) / (self.w * math.pi) + self.lift
        if self.im is not None:
            dim = [k * c for k, c in enumerate(self.im[i])][1:] or [0.0]
            v = complex(v, self._horner(dim, u) / (self.w * math.pi))
        return complex(v)


def _pv_curve_oracle(curve, fsp, r, m=1 << 13):
    mc = _MidCurve(curve)
    fpolys = [[v.mid_float() for v in p.c] for p in fsp.pieces]

    def rule(mm):
        h = 2.0 / mm          # step in pi units
        za = mc.z(r)
        acc = 0j
        for j in range(mm):
            b = r + (j + 0.5) * h
            w = za - mc.z(b)
            if mc.closed:
                kap = 1.0 / w
            else:
                kap = 0.5 / cmath.tan(w / 2.0)
            acc += _mid_eval(fsp, fpolys, b) * mc.zp(b) * kap
        return acc * (h * math.pi) / math.pi

    a1, a2 = rule(m), rule(2 * m)
    return (4.0 * a2 - a1) / 3.0


def _circle(ctx, n):
    sites = periodic_sites(n)
    cs = interpolate_periodic(ctx, [ctx.pi_times(r).cos() for r in sites])
    sn = interpolate_periodic(ctx, [ctx.pi_times(r).sin() for r in sites])
    return Curve(ctx, cs, sn)


def _const_spline(ctx, n, v=1):
    return interpolate_periodic(ctx, [ctx.interval(v)] * n, degree=10)


def test_curve_kernel_circle_constant(sctx):
    # Cauchy kernel of the unit circle applied to 1: the boundary value
    # is the constant -i (rotation symmetry). Checked against the
    # quadrature oracle and the exact constant.
    n = 24
    c = _circle(sctx, n)
    f = _const_spline(sctx, n)
    re, im = kernel_apply(c, f)
    tol = re.err_float() + im.err_float() + 1e-6
    for r in (F(0), F(1, 3), F(-5, 8), F(7, 12)):
        oracle = _pv_curve_oracle(c, f, float(r))
        assert abs(re.eval(r).mid_float() - oracle.real) < tol
        assert abs(im.eval(r).mid_float() - oracle.imag) < tol
        assert re.eval(r).pad(sctx.interval(repr(re.err_float()))).contains(0)
        assert im.eval(r).pad(sctx.interval(repr(im.err_float()))).contains(-1)


def test_curve_kernel_circle_trig(sctx):
    # f = cos on the unit circle maps to sin (half residue of z^1 plus
    # the reflected z^-1 branch)
    n = 24
    c = _circle(sctx, n)
    sites = periodic_sites(n)
    f = interpolate_periodic(sctx, [sctx.pi_times(r).cos() for r in sites])
    re, im = kernel_apply(c, f)
    tol = re.err_float() + im.err_float() + 1e-6
    for r in (F(1, 8), F(-2, 3), F(5, 6)):
        want = sctx.pi_times(r).sin().mid_float()
        oracle = _pv_curve_oracle(c, f, float(r))
        assert abs(oracle.real - want) < 1e-5
        assert abs(re.eval(r).mid_float() - want) < tol
        assert abs(im.eval(r).mid_float() - oracle.imag) < tol


def test_curve_kernel_flat_matches_hilbert(sctx):
    # flat lifted curve x(a) = a: the periodized Cauchy kernel reduces
    # to the tangent head, i.e. the periodic Hilbert transform
    n = 32
    zero = interpolate_periodic(sctx, [sctx.zero] * n, degree=10)
    c = Curve(sctx, zero, None, lift=1)
    f = _trig_spline(sctx, n, 2, "cos")
    ka = kernel_apply(c, f)
    hf = hilbert(f)
    tol = ka.err_float() + hf.err_float() + 1e-12
    for r in (F(0), F(1, 4), F(-3, 8), F(2, 3)):
        assert abs(ka.eval(r).mid_float() - hf.eval(r).mid_float()) < tol


def test_curve_kernel_lifted_bump_oracle(sctx):
    # graph curve a + i h(a) with a smooth bump, against the periodized
    # quadrature oracle
    n = 32
    sites = periodic_sites(n)
    zero = interpolate_periodic(sctx, [sctx.zero] * n, degree=10)
    h = interpolate_periodic(
        sctx, [(sctx.pi_times(r).cos() * sctx.interval(1) / sctx.interval(10))
               for r in sites])
    c = Curve(sctx, zero, h, lift=1)
    f = _trig_spline(sctx, n, 1, "sin")
    re, im = kernel_apply(c, f)
    tol = re.err_float() + im.err_float() + 1e-5
    for r in (F(1, 16), F(-1, 2)):
        oracle = _pv_curve_oracle(c, f, float(r))
        assert abs(re.eval(r).mid_float() - oracle.real) < tol
        assert abs(im.eval(r).mid_float() - oracle.imag) < tol


def test_curve_kernel_self_intersecting_rejected(sctx):
    # figure-eight: z(0) = z(pi) = 0, so some chord vanishes
    n = 24
    sites = periodic_sites(n)
    x1 = interpolate_periodic(sctx, [sctx.pi_times(2 * r).sin() for r in sites])
    x2 = interpolate_periodic(sctx, [sctx.pi_times(r).sin() for r in sites])
    with pytest.raises(ArcChordFailure):
        CurveKernel(Curve(sctx, x1, x2))


def test_curve_kernel_mesh_mismatch(sctx):
    c = _circle(sctx, 24)
    f = _const_spline(sctx, 16)
    with pytest.raises(DimensionMismatch):
        kernel_apply(c, f)
