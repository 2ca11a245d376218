"""Certified interpolation, spline norms, time tracks, splash coupling."""

import math
import random
from fractions import Fraction

import pytest

from wavecert.errors import (DimensionMismatch, Infeasible, UnsupportedOrder)
from wavecert.interval import IntervalContext
from wavecert.meshfn import (SpaceSpline, TimeTrack, greville_sites,
                             interpolate_clamped, interpolate_periodic,
                             periodic_sites, splash_hull)

F = Fraction


@pytest.fixture(scope="module")
def sin_spline(ctx):
    sites = periodic_sites(32)
    samples = [ctx.pi_times(r).sin() for r in sites]
    return interpolate_periodic(ctx, samples, degree=10)


def test_periodic_sites_layout():
    s = periodic_sites(4)
    assert s == [F(-1), F(-1, 2), F(0), F(1, 2)]


@pytest.mark.parametrize("degree", [3, 4, 9, 10])
def test_interpolation_hits_samples(ctx, degree):
    sites = periodic_sites(24)
    samples = [ctx.pi_times(r).sin() + ctx.pi_times(3 * r).cos()
               for r in sites]
    sp = interpolate_periodic(ctx, samples, degree=degree)
    for r, s in zip(sites, samples):
        v = sp.eval(r)
        # both enclose the same exact value, so they must overlap
        assert not v.intersect(s).is_empty
        assert v.wid_float() < 1e-60


def test_interpolant_widths_hit_floor(sin_spline):
    worst = max(sin_spline.eval(r).wid_float() for r in periodic_sites(32))
    assert worst < 1e-65


def test_offsite_accuracy_degree_ten(ctx, sin_spline):
    for rq in (F(1, 7), F(3, 11), F(-5, 13)):
        v = sin_spline.eval(rq)
        exact = ctx.pi_times(rq).sin()
        assert abs(v.mid_float() - exact.mid_float()) < 1e-12
        assert not v.intersect(exact.pad(ctx.interval("1e-11"))).is_empty


def test_derivative_tracks_cosine(ctx, sin_spline):
    d = sin_spline.derivative()
    v = d.eval(F(1, 7))
    exact = ctx.pi_times(F(1, 7)).cos()
    assert abs(v.mid_float() - exact.mid_float()) < 1e-10


def test_even_degree_pieces_are_centered(ctx, sin_spline):
    # degree 10 piece boundaries sit halfway between sites
    assert sin_spline.left == F(-1) - sin_spline.width / 2


def test_clamped_polynomial_reproduction(ctx):
    rng = random.Random(11)
    coef = [F(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(11)]

    def pval(x):
        acc = F(0)
        for c in reversed(coef):
            acc = acc * x + c
        return acc

    gs = greville_sites(10, 8)
    samples = [ctx.from_fraction(pval(s)) for s in gs]
    sp = interpolate_clamped(ctx, samples, degree=10, n_pieces=8)
    for _ in range(25):
        x = F(rng.randint(-999, 999), 1000)
        v = sp.eval(x)
        assert v.contains(pval(x))
        assert v.wid_float() < 1e-60


def test_clamped_rejects_wrong_sample_count(ctx):
    with pytest.raises(DimensionMismatch):
        interpolate_clamped(ctx, [ctx.one] * 5, degree=10, n_pieces=8)


def test_degree_out_of_range_rejected(ctx):
    with pytest.raises(UnsupportedOrder):
        interpolate_periodic(ctx, [ctx.one] * 32, degree=0)
    with pytest.raises(UnsupportedOrder):
        interpolate_periodic(ctx, [ctx.one] * 32, degree=13)


def test_too_few_samples_rejected(ctx):
    with pytest.raises(DimensionMismatch):
        interpolate_periodic(ctx, [ctx.one] * 8, degree=10)


def test_linf_bounds_unit_sup(sin_spline):
    li = sin_spline.linf(subdiv=16)
    assert li.hi_float() >= 1.0
    assert li.hi_float() < 1.0001


def test_l2_and_h1_of_sine(ctx, sin_spline):
    l2 = sin_spline.l2sq()
    assert abs(l2.mid_float() - math.pi) < 1e-10
    h1 = sin_spline.hk_sq(1)
    assert abs(h1.mid_float() - 2 * math.pi) < 1e-8


def test_fourier_coefficients_of_sine(ctx, sin_spline):
    c1 = sin_spline.fourier(1)
    assert abs(c1.re.mid_float()) < 1e-12
    assert abs(c1.im.mid_float() + 0.5) < 1e-12
    cm1 = sin_spline.fourier(-1)
    assert abs(cm1.im.mid_float() - 0.5) < 1e-12
    c2 = sin_spline.fourier(2)
    assert abs(c2.re.mid_float()) < 1e-10 and abs(c2.im.mid_float()) < 1e-10


def test_half_sobolev_fourier_route(ctx, sin_spline):
    hh = sin_spline.h_half_sq(0, n_freq=8)
    assert abs(hh.mid_float() - math.pi * math.sqrt(2)) < 1e-6
    # interpolation-bound route is an upper bound for the same quantity
    hh2 = sin_spline.h_half_sq(0)
    assert hh2.hi_float() >= hh.lo_float() - 1e-12


def test_spline_serialization_roundtrip(ctx, sin_spline):
    d = sin_spline.serialize()
    sp2 = SpaceSpline.deserialize(ctx, d)
    assert sp2.eval(F(1, 7)) == sin_spline.eval(F(1, 7))


def test_eval_jet_matches_scaled_derivatives(sin_spline):
    jet = sin_spline.eval_jet(F(1, 7), 5)
    for k in range(5):
        direct = sin_spline.eval(F(1, 7), deriv=k)
        assert abs(jet[k].mid_float() * math.factorial(k)
                   - direct.mid_float()) < 1e-12


def test_spline_algebra_same_mesh_only(ctx, sin_spline):
    sites = periodic_sites(16)
    other = interpolate_periodic(
        ctx, [ctx.pi_times(r).cos() for r in sites], degree=10)
    with pytest.raises(DimensionMismatch):
        sin_spline + other
    twice = sin_spline + sin_spline
    assert abs(twice.eval(F(1, 9)).mid_float()
               - 2 * sin_spline.eval(F(1, 9)).mid_float()) < 1e-30


def test_hermite_track_reproduces_cubic_time_law(ctx_fast):
    ctx = ctx_fast
    sites = periodic_sites(16)
    base = interpolate_periodic(
        ctx, [ctx.pi_times(r).sin() for r in sites], degree=4)
    times = [F(0), F(1, 2), F(1)]
    values = [base.scale(ctx.from_fraction(1 + t * t)) for t in times]
    slopes = [base.scale(ctx.from_fraction(2 * t)) for t in times]
    tr = TimeTrack.hermite(ctx, times, values, slopes)
    t, x = F(1, 3), F(3, 7)
    want = base.scale(ctx.from_fraction(1 + t * t)).eval(x)
    assert not tr.at_time(t).eval(x).intersect(want).is_empty
    wantd = base.scale(ctx.from_fraction(2 * t)).eval(x)
    assert not tr.at_time(t, deriv=1).eval(x).intersect(wantd).is_empty


def test_window_hull_contains_interior_times(ctx_fast):
    ctx = ctx_fast
    sites = periodic_sites(16)
    base = interpolate_periodic(
        ctx, [ctx.pi_times(r).sin() for r in sites], degree=4)
    times = [F(0), F(1)]
    values = [base, base.scale(ctx.interval(2))]
    slopes = [base.scale(ctx.zero), base.scale(ctx.zero)]
    tr = TimeTrack.hermite(ctx, times, values, slopes)
    w = tr.window(F(1, 4), F(3, 4))
    x = F(2, 5)
    for t in (F(1, 4), F(2, 5), F(3, 4)):
        assert not w.eval(x).intersect(tr.at_time(t).eval(x)).is_empty


def test_hermite_rejects_bad_grids(ctx_fast):
    ctx = ctx_fast
    sites = periodic_sites(16)
    base = interpolate_periodic(
        ctx, [ctx.pi_times(r).sin() for r in sites], degree=4)
    with pytest.raises(DimensionMismatch):
        TimeTrack.hermite(ctx, [F(0), F(0)], [base, base], [base, base])
    with pytest.raises(DimensionMismatch):
        TimeTrack.hermite(ctx, [F(0)], [base], [base])


def test_splash_hull_forces_equality(ctx_fast):
    ctx = ctx_fast
    cols = [[ctx.interval(i, i + 1) for i in range(6)],
            [ctx.interval(-i, 1 - i) for i in range(6)]]
    out = splash_hull(cols, 1, 4)
    for c_old, c_new in zip(cols, out):
        assert c_new[1] == c_new[4]
        assert c_new[1].contains(c_old[1]) and c_new[1].contains(c_old[4])
        # untouched sites unchanged
        assert c_new[0] == c_old[0] and c_new[5] == c_old[5]


def test_splash_same_site_infeasible(ctx_fast):
    cols = [[ctx_fast.one] * 4]
    with pytest.raises(Infeasible):
        splash_hull(cols, 2, 2)


def test_splash_bad_index(ctx_fast):
    cols = [[ctx_fast.one] * 4]
    with pytest.raises(DimensionMismatch):
        splash_hull(cols, 0, 9)
