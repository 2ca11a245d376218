"""Containment, rounding direction, and algebra of the interval layer."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavecert.errors import (DivisionByZeroInterval, DomainViolation,
                             EmptyOperand, PrecisionMismatch)
from wavecert.interval import CInterval, Interval, IntervalContext, IVec2

fracs = st.fractions(min_value=-100, max_value=100, max_denominator=997)


def make_iv(ctx, a, b):
    return ctx.from_fraction(min(a, b), max(a, b))


# containment against the exact rational oracle

@given(a=fracs, b=fracs, c=fracs, d=fracs)
def test_add_sub_contain_endpoint_combinations(ctx_fast, a, b, c, d):
    A = make_iv(ctx_fast, a, b)
    B = make_iv(ctx_fast, c, d)
    lo_a, hi_a, lo_b, hi_b = min(a, b), max(a, b), min(c, d), max(c, d)
    S = A + B
    assert S.contains(lo_a + lo_b) and S.contains(hi_a + hi_b)
    D = A - B
    assert D.contains(lo_a - hi_b) and D.contains(hi_a - lo_b)


@given(a=fracs, b=fracs, c=fracs, d=fracs)
def test_mul_contains_all_corner_products(ctx_fast, a, b, c, d):
    A = make_iv(ctx_fast, a, b)
    B = make_iv(ctx_fast, c, d)
    corners = [p * q for p in (min(a, b), max(a, b)) for q in (min(c, d), max(c, d))]
    P = A * B
    assert P.contains(min(corners))
    assert P.contains(max(corners))


@given(a=fracs, b=fracs, c=fracs, d=fracs)
def test_div_contains_all_corner_quotients(ctx_fast, a, b, c, d):
    lo_b, hi_b = min(c, d), max(c, d)
    if lo_b <= 0 <= hi_b:
        return
    A = make_iv(ctx_fast, a, b)
    B = make_iv(ctx_fast, c, d)
    corners = [p / q for p in (min(a, b), max(a, b)) for q in (lo_b, hi_b)]
    Q = A / B
    assert Q.contains(min(corners))
    assert Q.contains(max(corners))


@given(a=fracs, b=fracs, n=st.integers(min_value=0, max_value=7))
def test_pow_contains_endpoint_powers_and_zero(ctx_fast, a, b, n):
    A = make_iv(ctx_fast, a, b)
    P = A ** n
    assert P.contains(min(a, b) ** n)
    assert P.contains(max(a, b) ** n)
    if min(a, b) <= 0 <= max(a, b) and n > 0:
        assert P.contains(0)


@given(a=fracs, b=fracs)
def test_abs_and_neg_are_exact_on_endpoints(ctx_fast, a, b):
    A = make_iv(ctx_fast, a, b)
    assert abs(A).contains(abs(a)) and abs(A).contains(abs(b))
    assert (-A).contains(-a) and (-A).contains(-b)
    if min(a, b) <= 0 <= max(a, b):
        assert abs(A).contains(0)


def test_division_by_interval_containing_zero_raises(ctx_fast):
    with pytest.raises(DivisionByZeroInterval):
        ctx_fast.one / ctx_fast.interval(-1, 1)


# rounding direction

def test_irrational_fraction_rounds_outward(ctx_fast):
    third = ctx_fast.from_fraction(Fraction(1, 3))
    assert third.lo_float() < third.hi_float()
    assert third.contains(Fraction(1, 3))


def test_dyadic_fraction_is_exact(ctx_fast):
    x = ctx_fast.from_fraction(Fraction(3, 8))
    assert x.wid_float() == 0.0
    assert x.contains(Fraction(3, 8))


def test_decimal_string_parses_exactly(ctx_fast):
    x = ctx_fast.interval("0.1")
    assert x.contains(Fraction(1, 10))
    assert x.wid_float() < 1e-37
    y = ctx_fast.interval("1.5e-3")
    assert y.contains(Fraction(3, 2000))


def test_precision_refinement_tightens(ctx_fast):
    wide = IntervalContext(64)
    x64 = wide.from_fraction(Fraction(1, 3)) * wide.pi()
    x128 = ctx_fast.from_fraction(Fraction(1, 3)) * ctx_fast.pi()
    assert wide.convert(x128).strictly_inside(x64) or x64.contains(wide.convert(x128))
    assert x128.wid_float() < x64.wid_float()


@given(a=fracs, b=fracs, c=fracs, d=fracs, e=fracs, f=fracs)
def test_inclusion_monotonicity_of_mul(ctx_fast, a, b, c, d, e, f):
    pts = sorted([a, b, c])
    A_small = make_iv(ctx_fast, pts[1], pts[1])
    A_big = make_iv(ctx_fast, pts[0], pts[2])
    B = make_iv(ctx_fast, min(d, e), max(d, e))
    assert A_big.contains(A_small)
    assert (A_big * B).contains(A_small * B)


# constants and elementary functions

def test_pi_enclosure_brackets_float_pi(ctx_fast):
    pi = ctx_fast.pi()
    assert pi.lo_float() <= math.pi <= pi.hi_float()
    assert pi.wid_float() < 1e-37


def test_pi_times_handles_signs(ctx_fast):
    m = ctx_fast.pi_times(Fraction(-3, 7))
    assert m.lo_float() <= -3 * math.pi / 7 <= m.hi_float()
    assert m.wid_float() < 1e-36


def test_sin_captures_interior_maximum(ctx_fast):
    s = ctx_fast.interval(1, 2).sin()
    assert s.hi_float() == 1.0
    assert abs(s.lo_float() - math.sin(1)) < 1e-15


def test_cos_captures_interior_minimum(ctx_fast):
    c = ctx_fast.interval(3, 4).cos()
    assert c.lo_float() == -1.0
    assert abs(c.hi_float() - math.cos(4)) < 1e-15


def test_sin_on_monotone_piece_is_tight(ctx_fast):
    s = ctx_fast.interval("0.1", "0.2").sin()
    assert abs(s.lo_float() - math.sin(0.1)) < 1e-15
    assert abs(s.hi_float() - math.sin(0.2)) < 1e-15


def test_sin_at_pi_straddles_zero_tightly(ctx_fast):
    s = ctx_fast.pi().sin()
    assert s.contains(0)
    assert s.wid_float() < 1e-35


def test_trig_identity_encloses_one(ctx_fast):
    x = ctx_fast.from_fraction(Fraction(7, 13))
    v = x.sin() ** 2 + x.cos() ** 2
    assert v.contains(1)
    assert v.wid_float() < 1e-35


def test_cot_of_quarter_pi_encloses_one(ctx_fast):
    c = ctx_fast.pi_times(Fraction(1, 4)).cot()
    assert c.contains(1)


def test_cot_near_pole_raises(ctx_fast):
    with pytest.raises(DomainViolation):
        ctx_fast.interval("-0.25", "0.25").cot()


def test_tan_near_pole_raises(ctx_fast):
    with pytest.raises(DomainViolation):
        ctx_fast.pi_times(Fraction(1, 2)).tan()


def test_sqrt_log_domain_violations(ctx_fast):
    with pytest.raises(DomainViolation):
        ctx_fast.interval(-1, 1).sqrt()
    with pytest.raises(DomainViolation):
        ctx_fast.interval(0, 1).log()


def test_exp_log_roundtrip_contains_input(ctx_fast):
    x = ctx_fast.from_fraction(Fraction(5, 7))
    y = x.exp().log()
    assert y.contains(Fraction(5, 7))


@given(q=st.fractions(min_value=-4, max_value=4, max_denominator=64))
@settings(max_examples=60)
def test_sin_cos_contain_high_precision_reference(ctx_fast, q):
    # reference from a much higher-precision context
    ref = IntervalContext(512)
    x = ctx_fast.from_fraction(q)
    xr = ref.from_fraction(q)
    assert x.sin().contains(ctx_fast.convert(xr.sin()))
    assert x.cos().contains(ctx_fast.convert(xr.cos()))


# set operations and the empty interval

def test_empty_interval_semantics(ctx_fast):
    E = ctx_fast.empty()
    x = ctx_fast.interval(1, 2)
    assert E.is_empty
    assert E.hull(x) == x and x.hull(E) == x
    assert x.intersect(E).is_empty and E.intersect(x).is_empty
    assert x.contains(E)
    assert not E.contains(x)
    assert E.width() == ctx_fast.zero
    with pytest.raises(EmptyOperand):
        E + x
    with pytest.raises(EmptyOperand):
        E.sqrt()
    with pytest.raises(EmptyOperand):
        E.mid()


def test_disjoint_intersection_is_empty(ctx_fast):
    assert ctx_fast.interval(0, 1).intersect(ctx_fast.interval(2, 3)).is_empty


def test_overlap_intersection_and_hull(ctx_fast):
    a = ctx_fast.interval(0, 2)
    b = ctx_fast.interval(1, 3)
    m = a.intersect(b)
    assert m.contains(Fraction(3, 2)) and not m.contains(Fraction(1, 2))
    h = a.hull(b)
    assert h.contains(0) and h.contains(3)


def test_mid_stays_inside(ctx_fast):
    x = ctx_fast.from_fraction(Fraction(1, 3), Fraction(2, 3))
    m = x.mid()
    assert x.contains(m)
    assert m.wid_float() == 0.0


def test_mag_mig_sym_bound(ctx_fast):
    x = ctx_fast.interval(-2, 1)
    assert x.mag().contains(2)
    assert x.mig() == ctx_fast.zero
    y = ctx_fast.interval(1, 3)
    assert y.mig().contains(1)
    s = x.sym_bound()
    assert s.contains(-2) and s.contains(2) and s.contains(x)


def test_pad_widens_both_sides(ctx_fast):
    x = ctx_fast.interval(1, 2).pad(ctx_fast.interval("0.5"))
    assert x.contains(Fraction(1, 2)) and x.contains(Fraction(5, 2))


# precision discipline and serialization

def test_mixed_precision_raises(ctx_fast):
    other = IntervalContext(256)
    with pytest.raises(PrecisionMismatch):
        ctx_fast.one + other.one


def test_serialize_roundtrip_is_identity(ctx_fast):
    x = ctx_fast.from_fraction(Fraction(-22, 7)) * ctx_fast.pi()
    s = x.serialize()
    assert ctx_fast.deserialize(s) == x
    assert all(isinstance(part, str) for part in s)


def test_serialized_endpoints_are_normalized(ctx_fast):
    # dyadic value: both endpoints equal, minimal mantissa
    s = ctx_fast.interval(6).serialize()
    assert s[0] == s[1] == "3p1"


def test_convert_across_precision_is_outward(ctx_fast):
    hi = IntervalContext(512)
    x = hi.from_fraction(Fraction(1, 3))
    y = ctx_fast.convert(x)
    assert y.contains(Fraction(1, 3))


# complex rectangles and plane vectors

def test_cinterval_square_and_reciprocal(ctx_fast):
    z = CInterval(ctx_fast.one, ctx_fast.one)
    w = z * z
    assert w.re.contains(0) and w.im.contains(2)
    r = z.recip()
    assert r.re.contains(Fraction(1, 2)) and r.im.contains(Fraction(-1, 2))
    assert (z / z).re.contains(1) and (z / z).im.contains(0)


def test_cinterval_pow_matches_repeated_mul(ctx_fast):
    z = CInterval(ctx_fast.interval("0.3"), ctx_fast.interval("-0.7"))
    assert z.pow_int(3).re.contains((z * z * z).re.mid())
    assert z.pow_int(3).im.contains((z * z * z).im.mid())


def test_ivec2_norm_dot_perp(ctx_fast):
    v = IVec2(ctx_fast.interval(3), ctx_fast.interval(4))
    assert v.norm().contains(5)
    assert v.perp().dot(v).contains(0)
    assert v.dot(v).contains(25)
    w = v.perp()
    assert w.x.contains(-4) and w.y.contains(3)


def test_certain_order_predicates(ctx_fast):
    a = ctx_fast.interval(0, 1)
    b = ctx_fast.interval(2, 3)
    assert a.certainly_lt(b)
    assert not b.certainly_lt(a)
    assert b.certainly_gt(a)
    assert not a.certainly_lt(ctx_fast.interval(1, 2))
