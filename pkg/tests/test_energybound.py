"""Kernel splitting and energy-matrix assembly against float oracles.

Oracles used here, all independent of the interval code paths:
  - dense near-diagonal sampling of Theta minus its analytic heads (circle)
  - FFT evaluation of the commutator pieces T3/T4 on trigonometric inputs
  - midpoint-rule quadrature matrices for the T1/T2 integral pieces
  - closed-form integrals for the Young bound (int |cos| = 4)
  - central finite differences for the conformal-weight gradient
  - RK4 time stepping for the Gronwall comparison system
"""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from wavecert.energybound import (ENERGY_LAYOUT, BandedKernel, CellKernel,
                                  CMatrix, Curve, EnergyVector, KernelSplit,
                                  TermBound, assemble_C, class_bounds,
                                  q2_along, q2_gradient, q2_weight,
                                  q_corrections, split_theta, t_bounds,
                                  young_bound)
from wavecert.errors import (ArcChordFailure, MissingTerm, QSingular,
                             UnsupportedOrder)
from wavecert.interval import CInterval, Interval, IntervalContext
from wavecert.meshfn import interpolate_periodic, periodic_sites
from wavecert.termgen import Theta

EPS = 0.05  # amplitude of the perturbed-flat test curve


@pytest.fixture(scope="module")
def ectx():
    return IntervalContext(128)


def _trig_spline(ctx, n, freq, kind, amp=F(1)):
    sites = periodic_sites(n)
    if kind == "cos":
        samples = [ctx.pi_times(freq * r).cos() for r in sites]
    else:
        samples = [ctx.pi_times(freq * r).sin() for r in sites]
    amp_iv = ctx.from_fraction(amp)
    return interpolate_periodic(ctx, [amp_iv * s for s in samples], degree=10)


def _zero_spline(ctx, n):
    return interpolate_periodic(ctx, [ctx.zero] * n, degree=10)


def flat_curve(ctx, n):
    return Curve(ctx, _zero_spline(ctx, n), lift=F(1))


def bump_curve(ctx, n, amp=F(5, 100)):
    """x(alpha) = alpha + amp*cos(alpha), a real graph-type curve."""
    return Curve(ctx, _trig_spline(ctx, n, 1, "cos", amp), lift=F(1))


def circle_curve(ctx, n):
    return Curve(ctx, _trig_spline(ctx, n, 1, "cos"),
                 _trig_spline(ctx, n, 1, "sin"))


THETA20 = Theta((0, 0, 0, 0), 2, 0)
THETA30 = Theta((1, 0, 0, 0), 3, 0)
THETA1M = Theta((0, 0, 0, 0), 1, -1)
THETA2M = Theta((0, 1, 0, 0), 2, -1)


# float-side model of the bump curve and its kernels

def _bump(a):
    return a + EPS * math.cos(a)


def _bump_d(a, k):
    # k-th derivative of the bump curve
    if k == 0:
        return _bump(a)
    base = 1.0 if k == 1 else 0.0
    return base + EPS * math.cos(a + k * math.pi / 2)


def _wrap(u):
    return math.remainder(u, 2 * math.pi)


def _theta_num(a, b, spec):
    """Float Theta kernel of the bump curve at (a, b), wrapped chord."""
    u = _wrap(a - b)
    dx = u + EPS * (math.cos(a) - math.cos(b))
    val = dx ** (-spec.b1)
    for k, ak in enumerate(spec.a, start=1):
        if ak:
            val *= (_bump_d(a, k) - _bump_d(b, k)) ** ak
    return val


def _knum(a, b, spec, c1f, c2f):
    u = _wrap(a - b)
    val = _theta_num(a, b, spec) - c1f(a) / (4 * math.sin(u / 2) ** 2)
    if c2f is not None:
        val -= c2f(a) / (2 * math.tan(u / 2))
    return val


def _knum_d(a, b, spec, c1f):
    u = _wrap(a - b)
    return _theta_num(a, b, spec) - c1f(a) / (2 * math.tan(u / 2))


def _spline_mid(fn, grid_r):
    return np.array([fn.eval(r).re.mid_float() for r in grid_r])


def _grid(m):
    rs = [F(2 * i + 1, m) - 1 for i in range(m)]
    return rs, np.array([math.pi * float(r) for r in rs])


# spectral helpers: exact on band-limited data up to rounding

def _deriv(vals):
    fr = np.fft.rfft(vals, axis=-1)
    k = np.arange(fr.shape[-1])
    return np.fft.irfft(fr * (1j * k), n=vals.shape[-1], axis=-1)


def _hil(vals):
    fr = np.fft.rfft(vals, axis=-1)
    mult = np.full(fr.shape[-1], -1j)
    mult[0] = 0.0
    return np.fft.irfft(fr * mult, n=vals.shape[-1], axis=-1)


def _lam(vals):
    fr = np.fft.rfft(vals, axis=-1)
    k = np.arange(fr.shape[-1], dtype=float)
    return np.fft.irfft(fr * k, n=vals.shape[-1], axis=-1)


def _l2(vals, h):
    return np.sqrt(h * np.sum(vals * vals, axis=-1))


def _rand_trig(rng, trials, grid, modes=8):
    ns = np.arange(1, modes + 1)
    cosm = np.cos(np.outer(ns, grid))
    sinm = np.sin(np.outer(ns, grid))
    ca = rng.standard_normal((trials, modes))
    cb = rng.standard_normal((trials, modes))
    c0 = rng.standard_normal((trials, 1))
    return c0 + ca @ cosm + cb @ sinm


# split_theta: heads and kernel enclosures

def test_flat_curve_heads(ectx):
    sp = split_theta(THETA20, flat_curve(ectx, 16))
    for r in [F(-1), F(-1, 3), F(0), F(5, 8)]:
        c1 = sp.c1.eval(r)
        assert abs(c1.re.mid_float() - 1.0) < 1e-25
        assert c1.re.wid_float() < 1e-20
        assert abs(c1.im.mid_float()) < 1e-25
        c2 = sp.c2.eval(r)
        assert abs(c2.re.mid_float()) < 1e-20 and abs(c2.im.mid_float()) < 1e-20


def test_circle_heads_match_curve_formula(ectx):
    # c1 = 1/x_a^2 = -e^{-2ia}, c2 = x_aa/x_a^3 = -i e^{-2ia} on the circle
    sp = split_theta(THETA20, circle_curve(ectx, 32))
    for r in [F(0), F(1, 4), F(-2, 3), F(7, 8)]:
        two_a = ectx.pi_times(2 * r)
        c1 = sp.c1.eval(r)
        assert not c1.re.intersect(-two_a.cos()).is_empty
        assert not c1.im.intersect(two_a.sin()).is_empty
        assert c1.re.wid_float() < 1e-7
        c2 = sp.c2.eval(r)
        assert not c2.re.intersect(-two_a.sin()).is_empty
        assert not c2.im.intersect(-two_a.cos()).is_empty
        assert c2.im.wid_float() < 1e-5


def test_circle_kernel_bounded_dense_oracle(ectx):
    # |K| on the unit circle against dense sampling of Theta minus the
    # analytic heads; every cell enclosure must be finite and dominate.
    n = 64
    sp = split_theta(THETA20, circle_curve(ectx, n))
    kern = sp.kernel
    assert kern.all_finite()
    h = 2 * math.pi / n
    offs = [1e-3, 0.01, 0.4 * h, h, 2.2 * h, 3.4 * h, 0.5, 1.5, math.pi - 0.1]
    for i in range(0, n, 7):
        a = -math.pi + (i + 0.3) * h
        for off in offs:
            for u in (off, -off):
                b = a - u
                za, zb = complex(math.cos(a), math.sin(a)), complex(
                    math.cos(b), math.sin(b))
                c1 = -complex(math.cos(2 * a), -math.sin(2 * a))
                kv = 1 / (za - zb) ** 2 - c1 / (4 * math.sin(u / 2) ** 2) \
                    - (-1j * complex(math.cos(2 * a), -math.sin(2 * a))) \
                    / (2 * math.tan(u / 2))
                j = int((b + math.pi) // h) % n
                assert abs(kv) <= kern.cell(i, j).hi_float() + 1e-7


def test_flat_kernel_is_cot_defect(ectx):
    # flat curve: K(a,b) = 1/u^2 - 1/(4 sin^2(u/2)), sup |K| near 1/12
    sp = split_theta(THETA20, flat_curve(ectx, 16))
    assert sp.kernel.all_finite()
    for u in [1e-3, 0.05, 0.3, 1.0, 2.0, 3.0]:
        kv = 1 / u ** 2 - 1 / (4 * math.sin(u / 2) ** 2)
        a = 0.41
        j = int((_wrap(a - u) + math.pi) // (2 * math.pi / 16)) % 16
        i = int((a + math.pi) // (2 * math.pi / 16)) % 16
        assert abs(kv) <= sp.kernel.cell(i, j).hi_float() + 1e-9
    diag = max(sp.kernel.cell(i, i).hi_float() for i in range(16))
    assert diag < 0.2


def test_split_arc_chord_failure(ectx):
    # a segment traced back and forth: chords vanish off the diagonal
    degenerate = Curve(ectx, _trig_spline(ectx, 16, 1, "cos"))
    with pytest.raises(ArcChordFailure):
        split_theta(THETA20, degenerate)


def test_singularity_degree_zero_has_no_heads(ectx):
    sp = split_theta(Theta((2, 0, 0, 0), 2, 0), bump_curve(ectx, 16))
    assert sp.c1 is None and sp.c2 is None
    assert sp.kernel.all_finite()


def test_unsupported_singularity_degree(ectx):
    with pytest.raises(UnsupportedOrder):
        split_theta(Theta((0, 0, 0, 0), 3, 0), bump_curve(ectx, 16))


def test_d_kernel_single_head(ectx):
    sp = split_theta(THETA1M, bump_curve(ectx, 16))
    assert sp.c2 is None
    for r in [F(0), F(1, 2)]:
        a = math.pi * float(r)
        want = 1.0 / _bump_d(a, 1)
        assert abs(sp.c1.eval(r).re.mid_float() - want) < 1e-6


# young_bound

def test_young_constant_one_encloses_2pi(ectx):
    n = 16
    one = ectx.one
    kern = CellKernel(ectx, F(2, n), [[one] * n for _ in range(n)])
    c = young_bound(kern)
    two_pi = ectx.pi_times(2)
    assert c.contains(two_pi)
    assert c.wid_float() < 1e-25


def test_young_zero(ectx):
    n = 8
    kern = CellKernel(ectx, F(2, n), [[ectx.zero] * n for _ in range(n)])
    c = young_bound(kern)
    assert c.contains(ectx.zero) and c.mag().hi_float() < 1e-30


def test_young_cos_difference_encloses_4(ectx):
    # closed form: int_0^{2pi} |cos| = 4
    n = 64
    w = F(2, n)
    cells = []
    for j in range(n):
        lo = ectx.pi_times(F(-1) + j * w)
        hi = ectx.pi_times(F(-1) + (j + 1) * w)
        cells.append(lo.hull(hi))
    vals = [[(cells[j] - cells[sig]).cos() for sig in range(n)]
            for j in range(n)]
    c = young_bound(CellKernel(ectx, w, vals))
    assert c.lo_float() <= 4.0 <= c.hi_float()
    assert c.hi_float() < 4.0 + 2 * math.pi * (2 * math.pi / n)


# t_bounds coefficients

def test_t_bounds_zero_gamma(ectx):
    sp = split_theta(THETA20, bump_curve(ectx, 16))
    tb = t_bounds(sp, _zero_spline(ectx, 16), "D")
    for key in ("t1", "t2", "t3_l2", "t3_h1", "t4"):
        assert tb[key].contains(ectx.zero)
        assert tb[key].mag().hi_float() < 1e-12


def test_t_bounds_flat_t4_zero(ectx):
    sp = split_theta(THETA20, flat_curve(ectx, 16))
    tb = t_bounds(sp, _trig_spline(ectx, 16, 1, "cos"), "D")
    assert tb["t4"].contains(ectx.zero)
    assert tb["t4"].mag().hi_float() < 1e-12


def test_t3_flat_within_2x_of_dense_norm(ectx):
    # dense discretization oracle: FFT evaluation of
    #   T3(D) = (1/2) c1 [Lam(D g) - D Lam(g)]
    # maximizing |T3 D| / (t3_l2 |D| + t3_h1 |D_a|); the certified pair is
    # sound if the ratio stays <= 1 and within 2x if it reaches 1/2.
    n = 32
    sp = split_theta(THETA20, flat_curve(ectx, n))
    tb = t_bounds(sp, _trig_spline(ectx, n, 1, "cos"), "D")
    s1, s2 = tb["t3_l2"].hi_float(), tb["t3_h1"].hi_float()
    m = 256
    _, grid = _grid(m)
    h = 2 * math.pi / m
    g = np.cos(grid)
    best = 0.0
    rng = np.random.default_rng(20260815)
    trials = [np.cos(k * grid) for k in range(1, 17)]
    trials += [np.sin(k * grid) for k in range(1, 17)]
    trials += list(_rand_trig(rng, 24, grid, modes=16))
    for dv in trials:
        t3 = 0.5 * (_lam(dv * g) - dv * _lam(g))
        denom = s1 * _l2(dv, h) + s2 * _l2(_deriv(dv), h)
        best = max(best, _l2(t3, h) / denom)
    assert best <= 1.0 + 1e-6
    assert best >= 0.5


def _mc_check_D(ectx, spec, n=16, trials=1000, seed=7):
    curve = bump_curve(ectx, n)
    sp = split_theta(spec, curve)
    gam = _trig_spline(ectx, n, 1, "cos")
    tb = t_bounds(sp, gam, "D")
    m = 256
    rs, grid = _grid(m)
    h = 2 * math.pi / m
    g = np.cos(grid)
    c1m = _spline_mid(sp.c1, rs) + 1j * np.array(
        [sp.c1.eval(r).im.mid_float() for r in rs])
    c2m = _spline_mid(sp.c2, rs) + 1j * np.array(
        [sp.c2.eval(r).im.mid_float() for r in rs])
    kmat = np.zeros((m, m))
    for i, a in enumerate(grid):
        for j, b in enumerate(grid):
            if i != j:
                kmat[i, j] = _knum(a, b, spec, lambda t: c1m[
                    int((t + math.pi) // (2 * math.pi / m)) % m].real,
                    lambda t: c2m[
                    int((t + math.pi) // (2 * math.pi / m)) % m].real)
    supk = np.max(np.abs(kmat))
    quad = 3 * h * supk / (2 * math.pi)  # midpoint-rule slack, documented
    rng = np.random.default_rng(seed)
    dv = _rand_trig(rng, trials, grid)
    nd = _l2(dv, h)
    nda = _l2(_deriv(dv), h)
    w = (kmat * g) @ np.ones(m) * h  # int K(a,b) g(b) db
    t1 = np.abs(dv * w).max(axis=1) * 0 + _l2(dv * w, h) / (2 * math.pi)
    assert np.all(t1 <= (tb["t1"].hi_float() + quad) * nd + 1e-9)
    t2 = _l2((dv * g) @ kmat.T * h / (2 * math.pi), h)
    assert np.all(t2 <= (tb["t2"].hi_float() + quad) * nd + 1e-9)
    t3 = _l2(0.5 * np.real(c1m) * (_lam(dv * g) - dv * _lam(g)), h)
    # imaginary parts of the heads vanish for a real curve
    assert np.max(np.abs(np.imag(c1m))) < 1e-9
    bound3 = tb["t3_l2"].hi_float() * nd + tb["t3_h1"].hi_float() * nda
    assert np.all(t3 <= bound3 * (1 + 1e-6) + 1e-9)
    t4 = _l2(0.5 * np.real(c2m) * (_hil(dv * g) - dv * _hil(g)), h)
    assert np.all(t4 <= tb["t4"].hi_float() * nd * (1 + 1e-6) + 1e-9)


def _mc_check_d(ectx, spec, n=16, trials=1000, seed=11):
    curve = bump_curve(ectx, n)
    sp = split_theta(spec, curve)
    tb = t_bounds(sp, None, "d")
    m = 256
    rs, grid = _grid(m)
    h = 2 * math.pi / m
    c1m = _spline_mid(sp.c1, rs)
    kmat = np.zeros((m, m))
    for i, a in enumerate(grid):
        for j, b in enumerate(grid):
            if i != j:
                kmat[i, j] = _knum_d(a, b, spec, lambda t: c1m[
                    int((t + math.pi) // (2 * math.pi / m)) % m])
    supk = np.max(np.abs(kmat))
    quad = 3 * h * supk / (2 * math.pi)
    rng = np.random.default_rng(seed)
    dvals = _rand_trig(rng, trials, grid)
    ndv = _l2(dvals, h)
    t1 = _l2(dvals @ kmat.T * h / (2 * math.pi), h)
    assert np.all(t1 <= (tb["t1"].hi_float() + quad) * ndv + 1e-9)
    t2 = _l2(0.5 * c1m * _hil(dvals), h)
    assert np.all(t2 <= tb["t2"].hi_float() * ndv * (1 + 1e-6) + 1e-9)


def test_mc_soundness_theta_2_0(ectx):
    _mc_check_D(ectx, THETA20, seed=101)


def test_mc_soundness_theta_3_0_chord(ectx):
    _mc_check_D(ectx, THETA30, seed=102)


def test_mc_soundness_theta_1_m1(ectx):
    _mc_check_d(ectx, THETA1M, seed=103)


def test_mc_soundness_theta_2_m1(ectx):
    _mc_check_d(ectx, THETA2M, seed=104)


def test_widening_gamma_never_shrinks_bounds(ectx):
    sp = split_theta(THETA20, bump_curve(ectx, 16))
    gam = _trig_spline(ectx, 16, 1, "cos")
    pad = ectx.interval("-0.125", "0.125")
    wide_samples = [ectx.pi_times(r).cos() + pad for r in periodic_sites(16)]
    gam_w = interpolate_periodic(ectx, wide_samples, degree=10)
    tb = t_bounds(sp, gam, "D")
    tb_w = t_bounds(sp, gam_w, "D")
    for key in tb:
        assert tb_w[key].hi_float() >= tb[key].hi_float() - 1e-18


def test_widening_kernel_never_shrinks_bounds(ectx):
    sp = split_theta(THETA1M, bump_curve(ectx, 16))
    grown = BandedKernel(ectx, sp.kernel.width,
                         [[sp.kernel.cell(i, j) + ectx.interval(0, 1)
                           for j in range(16)] for i in range(16)],
                         band=sp.kernel.band)
    sp_w = KernelSplit(sp.theta, sp.c1, sp.c2, grown, sp.band)
    tb = t_bounds(sp, None, "d")
    tb_w = t_bounds(sp_w, None, "d")
    assert tb_w["t1"].hi_float() >= tb["t1"].hi_float()


def test_operand_tag_mismatch(ectx):
    sp = split_theta(THETA20, bump_curve(ectx, 16))
    with pytest.raises(ValueError):
        t_bounds(sp, None, "d")


# conformal weight corrections

def _q2_float(z):
    return abs(1 + z ** 4) ** 2 / (16 * abs(z) ** 2)


def _cpoint(ctx, z):
    return CInterval(ctx.interval(repr(z.real)), ctx.interval(repr(z.imag)))


def test_q2_weight_circle_closed_form(ectx):
    # on |x| = 1: Q^2 = |1+e^{4ia}|^2/16 = cos^2(2a)/4
    for a in [0.3, 1.1, 2.9]:
        z = complex(math.cos(a), math.sin(a))
        q = q2_weight(_cpoint(ectx, z))
        assert abs(q.mid_float() - math.cos(2 * a) ** 2 / 4) < 1e-12


def test_q2_gradient_fd_oracle(ectx):
    # central differences of the explicit weight along three directions
    for z in [complex(math.cos(0.62), math.sin(0.62)), 1.3 * complex(
            math.cos(-0.45), math.sin(-0.45))]:
        g = q2_gradient(_cpoint(ectx, z))
        gm = complex(g.re.mid_float(), g.im.mid_float())
        for e in [1 + 0j, 1j, complex(math.cos(0.45), math.sin(0.45))]:
            eps = 1e-6
            fd = (_q2_float(z + eps * e) - _q2_float(z - eps * e)) / (2 * eps)
            assert abs((gm * e).real - fd) < 1e-6


def test_q2_singular_at_origin(ectx):
    with pytest.raises(QSingular):
        q2_gradient(CInterval(ectx.interval(-1, 1), ectx.interval(-1, 1)))
    with pytest.raises(QSingular):
        q2_along(flat_curve(ectx, 16))


def test_q2_along_circle(ectx):
    # true range on the circle is [0, 1/4]; cells are rectangle hulls of
    # arcs, so their corners leave the circle and allow a modest overshoot
    n = 32
    vals = q2_along(circle_curve(ectx, n))
    assert len(vals) == n
    for i, iv in enumerate(vals):
        assert iv.hi_float() <= 0.25 + 0.15 and iv.lo_float() >= -1e-12
        a = math.pi * (-1 + (i + 0.5) * 2 / n)
        want = math.cos(2 * a) ** 2 / 4
        assert iv.lo_float() - 1e-12 <= want <= iv.hi_float() + 1e-12
    assert max(iv.hi_float() for iv in vals) >= 0.25 - 1e-9
    assert min(iv.lo_float() for iv in vals) <= 1e-9


def test_q_corrections_identity_weight(ectx):
    base = {"theta20": ectx.interval("0.75")}
    qf = {0: ectx.one, 1: ectx.zero, 2: ectx.zero}
    qc = q_corrections(circle_curve(ectx, 16), base, qf)
    add = qc.additional("theta20")
    assert add.contains(ectx.zero) and add.mag().hi_float() < 1e-20


def test_q_corrections_zero_difference(ectx):
    qc = q_corrections(circle_curve(ectx, 16), {}, {0: ectx.one})
    d0 = qc.difference_bound(ectx.zero)
    assert d0.contains(ectx.zero) and d0.mag().hi_float() == 0.0


def test_q_corrections_bookkeeping(ectx):
    base = {"t": ectx.interval(2)}
    qf = {0: ectx.interval(3), 1: ectx.interval("0.5")}
    qc = q_corrections(circle_curve(ectx, 16), base, qf)
    assert qc.scaled["t"].contains(ectx.interval(6))
    assert qc.extra["t"].contains(ectx.one)
    assert abs(qc.additional("t").mid_float() - 5.0) < 1e-20


def test_q_corrections_linear_coeff_positive(ectx):
    qc = q_corrections(circle_curve(ectx, 16), {}, {0: ectx.one})
    assert qc.linear_coeff.hi_float() > 0
    assert math.isfinite(qc.linear_coeff.hi_float())


# energy vector and matrix assembly

def test_energy_vector_validation(ectx):
    ev = EnergyVector(tuple(ectx.one for _ in ENERGY_LAYOUT))
    assert len(ev.entries) == len(ENERGY_LAYOUT) == 9
    with pytest.raises(ValueError):
        EnergyVector(tuple([ectx.interval(-2, -1)] + [ectx.one] * 8))
    with pytest.raises(ValueError):
        EnergyVector((ectx.one,))


def test_assemble_zero_and_delta_law(ectx):
    bounds = [TermBound("z", "D_l2", "d_l2", ectx.zero)]
    delta = tuple(ectx.interval(k) for k in range(9))
    cm = assemble_C(bounds, delta=delta)
    zero_ev = EnergyVector(tuple(ectx.zero for _ in ENERGY_LAYOUT))
    rhs = cm.rhs(zero_ev)
    for got, want in zip(rhs, delta):
        assert got == want


def test_assemble_single_entry(ectx):
    c = ectx.interval("0.375")
    cm = assemble_C([TermBound("t4 term", "D_h1", "D_l2", c)])
    i, j = ENERGY_LAYOUT.index("D_h1"), ENERGY_LAYOUT.index("D_l2")
    assert cm.entries[i][j] == c
    flat = [cm.entries[r][s] for r in range(9) for s in range(9)
            if (r, s) != (i, j)]
    assert all(e.is_zero() for e in flat)


def test_assemble_missing_term(ectx):
    with pytest.raises(MissingTerm):
        assemble_C([TermBound("orphan", "D_l2", "D_l2", None)])


def test_assemble_unknown_row(ectx):
    with pytest.raises(ValueError):
        assemble_C([TermBound("x", "bogus", "D_l2", ectx.one)])


def test_gronwall_within_2x_of_ode_oracle(ectx):
    # assemble a toy two-class flat-curve system, then compare the rigorous
    # row-sum growth rate against RK4 integration of the midpoint system
    n = 16
    gam = _trig_spline(ectx, n, 1, "cos")
    tb = t_bounds(split_theta(THETA20, flat_curve(ectx, n)), gam, "D")
    td = t_bounds(split_theta(THETA1M, flat_curve(ectx, n)), None, "d")
    bounds = [
        TermBound("a", "D_l2", "D_l2", tb["t1"] + tb["t2"] + tb["t3_l2"]),
        TermBound("b", "D_l2", "D_h1", tb["t3_h1"]),
        TermBound("c", "D_h1", "D_l2", tb["t3_h1"]),
        TermBound("d", "D_h1", "D_h1", tb["t1"] + tb["t2"] + tb["t3_l2"]),
        TermBound("e", "d_l2", "d_l2", td["t1"] + td["t2"]),
    ]
    cm = assemble_C(bounds)
    rate = cm.row_sum_bound()
    mid = np.array([[e.mid_float() for e in row] for row in cm.entries])
    lam = max(np.real(np.linalg.eigvals(mid)))
    horizon = min(1.0, math.log(1.8) / max(rate.hi_float() - lam, 0.05))
    steps = 2000
    dt = horizon / steps
    e = np.ones(len(ENERGY_LAYOUT))
    for _ in range(steps):
        k1 = mid @ e
        k2 = mid @ (e + 0.5 * dt * k1)
        k3 = mid @ (e + 0.5 * dt * k2)
        k4 = mid @ (e + dt * k3)
        e = e + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    oracle = max(e)
    certified = math.exp(rate.hi_float() * horizon)
    assert certified >= oracle * (1 - 1e-9)
    assert certified <= 2 * oracle


def test_eig_diagnostic_below_row_bound(ectx):
    c = ectx.interval("0.25")
    cm = assemble_C([
        TermBound("p", "D_l2", "D_h1", c),
        TermBound("q", "D_h1", "D_l2", c),
    ])
    assert cm.eig_midpoint() <= cm.row_sum_bound().hi_float() + 1e-12


def test_nonlinear_tail_reported(ectx):
    cm = assemble_C([], tail=ectx.interval(3))
    assert cm.tail.contains(ectx.interval(3))
    assert cm.tail_exponent == "k"


def test_class_bounds_order_determinism(ectx):
    curve = bump_curve(ectx, 16)
    gam = _trig_spline(ectx, 16, 1, "cos")
    specs = [(THETA20, gam, "D"), (THETA1M, None, "d")]
    one = class_bounds(specs, curve, threads=1)
    four = class_bounds(specs, curve, threads=4)
    assert len(one) == 2
    for b1, b4 in zip(one, four):
        assert sorted(b1) == sorted(b4)
        for key in b1:
            assert b1[key].serialize() == b4[key].serialize()
