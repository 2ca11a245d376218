"""Rigorous enclosures for the periodic Hilbert transform and relatives.

Convention: H f(x) = (1/2pi) PV int cot((x-y)/2) f(y) dy on the 2pi torus,
so H(cos nx) = sin nx and H(sin nx) = -cos nx. Everything is computed from
the difference form H f(x) = -(1/2pi) PV int (f(x)-f(y)) cot((x-y)/2) dy,
which removes the pole and keeps every estimate local.

Cell scheme on the spline mesh (piece width h = 2pi/N, unit-box coordinates
psi, sigma in [-1/2, 1/2], wrapped offset d = source - target, and
v = psi - sigma - d so that x - y = h v):

* far cells (|d| > k_near): cot((x-y)/2) is expanded in two stages, first
  in the source variable about the source center, then in the target
  variable about the target center. Each stage converges with ratio about
  1/(2|d|-1), much better than the joint two-variable expansion, and each
  stage carries an explicit derivative-sup remainder. Working with the
  moment vectors int q(sigma) sigma^k dsigma turns the per-offset work into
  a shift-and-scale over all targets at once, and the target-side factor
  f(x) int cot dy uses one polynomial shared by every target.

* near cells (|d| <= k_near): cot(u/2) = (2/u) w(u) with
  w(u) = 1 - sum_k |B_2k|/(2k)! u^2k (exact Bernoulli coefficients and a
  geometric tail bound). The diagonal d = 0 divides f(x)-f(y) by x-y
  exactly in the polynomial ring; d != 0 uses the order-T' source jet with
  an integral-form Taylor remainder, valid because the spline has T'
  continuous derivatives. Both reduce to cached linear maps from source
  piece coefficients to target polynomial coefficients.

The result is a polynomial part on the input mesh plus a sup-norm error
bound collecting every remainder.
"""

import math
from fractions import Fraction
from functools import lru_cache

from .errors import (BandTooWide, DomainViolation, InsufficientSmoothness,
                     RangeFailure, StructureMismatch)
from .meshfn import SpaceSpline
from .poly import BPoly, IPoly
from .util import bernoulli

__all__ = ["CurveKernel", "EnclosedFunction", "hilbert", "kernel_apply",
           "lambda_op", "TM2"]


class EnclosedFunction:
    """A spline polynomial part plus a rigorous sup-norm error bound."""

    __slots__ = ("fn", "err")

    def __init__(self, fn, err):
        self.fn = fn
        self.err = err

    def eval(self, r, deriv=0):
        if deriv:
            raise InsufficientSmoothness(
                "enclosed functions carry no derivative error bounds")
        return self.fn.eval(r).pad(self.err)

    def resample(self, sites):
        return [self.eval(s) for s in sites]

    def linf(self, subdiv=4):
        return self.fn.linf(subdiv=subdiv) + self.err

    def err_float(self):
        return self.err.hi_float()

    def __add__(self, o):
        if isinstance(o, EnclosedFunction):
            return EnclosedFunction(self.fn + o.fn, self.err + o.err)
        return EnclosedFunction(self.fn + o, self.err)

    def __sub__(self, o):
        if isinstance(o, EnclosedFunction):
            return EnclosedFunction(self.fn - o.fn, self.err + o.err)
        return EnclosedFunction(self.fn - o, self.err)

    def __neg__(self):
        return EnclosedFunction(-self.fn, self.err)

    def scale(self, s):
        return EnclosedFunction(self.fn.scale(s), (self.err * s).mag())

    def __mul__(self, o):
        if isinstance(o, EnclosedFunction):
            err = (self.fn.linf() * o.err + o.fn.linf() * self.err
                   + self.err * o.err).mag()
            return EnclosedFunction(self.fn * o.fn, err)
        return EnclosedFunction(self.fn * o, (o.linf() * self.err).mag())


# exact helper tables

@lru_cache(maxsize=None)
def _cot_deriv_poly(m):
    """C^(m)(u) as a polynomial in X = cot(u/2), where C(u) = cot(u/2)."""
    if m == 0:
        return (Fraction(0), Fraction(1))
    prev = _cot_deriv_poly(m - 1)
    dprev = tuple(prev[i] * i for i in range(1, len(prev)))
    # multiply by dX/du = -(1 + X^2)/2
    out = [Fraction(0)] * (len(dprev) + 2)
    for i, c in enumerate(dprev):
        out[i] += -c / 2
        out[i + 2] += -c / 2
    return tuple(out)


@lru_cache(maxsize=None)
def _sym_moment(k):
    """int_{-1/2}^{1/2} sigma^k dsigma."""
    if k % 2 == 1:
        return Fraction(0)
    return Fraction(1, (k + 1) * 2 ** k)


@lru_cache(maxsize=None)
def _stage2_sum(t):
    """sum_k 1/((k+1) k! (t-k+1)!) pooling the second-stage remainders."""
    return sum(Fraction(1, (k + 1) * math.factorial(k) * math.factorial(t - k + 1))
               for k in range(t + 1))


@lru_cache(maxsize=None)
def _far_order(d, qbits):
    """Smallest T >= 4 with (2|d|-1)^(T+1) >= 2^qbits."""
    base = 2 * abs(d) - 1
    t = 4
    while base ** (t + 1) < 2 ** qbits:
        t += 1
    return t


@lru_cache(maxsize=None)
def _w_coeff(k):
    """w(u) = (u/2) cot(u/2) = 1 - sum_k w_k u^(2k); returns w_k > 0."""
    return abs(bernoulli(2 * k)) / Fraction(math.factorial(2 * k))


def _cot_eval(ctx, coeffs, x_iv):
    acc = ctx.from_fraction(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * x_iv + (ctx.from_fraction(c) if c else ctx.zero)
    return acc


def _angle_cot(ctx, r_lo, r_hi):
    """cot(pi r) over an exact rational range of r."""
    ang = ctx.pi_times(r_lo).hull(ctx.pi_times(r_hi))
    return ang.cot()


# table construction, cached per context

def _cache(ctx):
    c = getattr(ctx, "_singint_cache", None)
    if c is None:
        c = {}
        ctx._singint_cache = c
    return c


def _wrapped_offsets(n):
    """Offsets d in (-n/2, n/2], each source piece counted once."""
    half = n // 2
    lo = -(half - 1) if n % 2 == 0 else -half
    return range(lo, half + 1)


def _hilbert_tables(ctx, n, k_near, t_prime, s_terms, qbits, max_src_len):
    key = ("hilbert", n, k_near, t_prime, s_terms, qbits, max_src_len)
    cache = _cache(ctx)
    got = cache.get(key)
    if got is not None:
        return got

    h_r = Fraction(2, n)  # piece width in r-units; angle width is pi*h_r
    h = ctx.pi_times(h_r)
    max_ord = max(_far_order(k_near + 1, qbits) + 2, 2 * s_terms + 2,
                  t_prime + 2)
    h_pows = [ctx.one]
    for _ in range(max_ord + 1):
        h_pows.append(h_pows[-1] * h)

    far = []
    max_t = 0
    for d in _wrapped_offsets(n):
        if abs(d) <= k_near:
            continue
        t = _far_order(d, qbits)
        max_t = max(max_t, t)
        # ctil[m] = h^m C^(m)(-d h)/m! via cot polynomials at the exact angle
        x0 = _angle_cot(ctx, Fraction(-d, n), Fraction(-d, n))
        ctil = []
        for m in range(t + 1):
            val = _cot_eval(ctx, _cot_deriv_poly(m), x0)
            ctil.append(val * h_pows[m]
                        * ctx.from_fraction(Fraction(1, math.factorial(m))))
        # sups of |h^(T+1) C^(T+1)| over |v + d| <= 1 and |v + d| <= 1/2
        xa = _angle_cot(ctx, Fraction(-d - 1, n), Fraction(-d + 1, n))
        xb = _angle_cot(ctx, Fraction(-2 * d - 1, 2 * n),
                        Fraction(-2 * d + 1, 2 * n))
        c_t1 = _cot_deriv_poly(t + 1)
        sup_wide = (_cot_eval(ctx, c_t1, xa) * h_pows[t + 1]).mag()
        sup_half = (_cot_eval(ctx, c_t1, xb) * h_pows[t + 1]).mag()
        e1 = sup_wide * ctx.from_fraction(
            Fraction(1, math.factorial(t + 1) * 2 ** (t + 1) * (t + 2)))
        e2 = sup_half * ctx.from_fraction(_stage2_sum(t) / 2 ** (t + 1))
        far.append((d, t, ctil, (e1 + e2).mag()))

    # shared target-side polynomial W(psi) = sum_d int_cell c(psi-d-sigma)
    w_coeffs = [ctx.zero] * (max_t + 1)
    w_err = ctx.zero
    for d, t, ctil, ecell in far:
        for k in range(0, t + 1, 2):
            mk = _sym_moment(k)
            for q in range(t - k + 1):
                sc = ctil[k + q] * ctx.from_fraction(mk * math.comb(k + q, k))
                w_coeffs[q] = w_coeffs[q] + sc
        w_err = w_err + ecell
    w_poly = IPoly(ctx, w_coeffs)

    wtr = _w_trunc_coeffs(ctx, s_terms, h_pows)
    near = {}
    for d in range(-k_near, k_near + 1):
        mat = _near_matrix(ctx, d, t_prime, wtr, max_src_len)
        q_d = Fraction(abs(d) + 1, n) ** 2
        tail = ctx.from_fraction(4 * q_d ** (s_terms + 1) / (1 - q_d))
        wsup = _series_sup(ctx, wtr, abs(d) + 1) + tail
        near[d] = (mat, tail.mag(), wsup.mag())

    out = {"far": far, "w_poly": w_poly, "w_err": w_err.mag(),
           "near": near, "max_t": max_t}
    cache[key] = out
    return out


def _w_trunc_coeffs(ctx, s_terms, h_pows):
    """Truncated w as interval coefficients on v^j, v = u/h."""
    coeffs = [ctx.zero] * (2 * s_terms + 1)
    coeffs[0] = ctx.one
    for k in range(1, s_terms + 1):
        coeffs[2 * k] = -(ctx.from_fraction(_w_coeff(k)) * h_pows[2 * k])
    return coeffs


def _series_sup(ctx, coeffs, vmax):
    acc = ctx.zero
    for j, c in enumerate(coeffs):
        if not c.is_zero():
            acc = acc + c.mag() * ctx.interval(vmax ** j)
    return acc


def _expand_v_power(bp, j, d, scale):
    """Add scale * (psi - sigma - d)^j to a BPoly in (psi, sigma)."""
    ctx = bp.ctx
    for a in range(j + 1):
        rem = j - a
        for b in range(rem + 1):
            coef = (math.comb(j, a) * math.comb(rem, b)
                    * (-1) ** b * (-d) ** (rem - b))
            if coef:
                bp.add_term(a, b, scale * ctx.interval(coef))


def _near_matrix(ctx, d, t_prime, wtr, max_src_len):
    """Columns - (1/pi) int ((basis diff)/v) w_trunc dsigma as psi-polys."""
    neg_inv_pi = -(ctx.pi().recip())
    w_b = BPoly(ctx)
    for j, c in enumerate(wtr):
        if not c.is_zero():
            _expand_v_power(w_b, j, d, c)
    cols = []
    for t in range(max_src_len):
        ratio = BPoly(ctx)
        if d == 0:
            for r in range(t):
                ratio.add_term(r, t - 1 - r, ctx.one)
        else:
            for m in range(1, min(t_prime, t) + 1):
                sc = ctx.interval(math.comb(t, m))
                part = BPoly(ctx)
                _expand_v_power(part, m - 1, d, sc)
                for (a, b), v in part.m.items():
                    ratio.add_term(a, b + t - m, v)
        if not ratio.m:
            cols.append(IPoly.zero(ctx))
            continue
        prod = ratio * w_b
        col = prod.integrate_y(Fraction(-1, 2), Fraction(1, 2))
        cols.append(col.scale(neg_inv_pi))
    return cols


# the transform itself

def hilbert(f, k_near=2, taylor_order=9, w_terms=6, quality_bits=44):
    """Enclosure of the periodic Hilbert transform of a spline.

    The input must be a full-period pi-unit periodic spline enclosing a
    function with f.smoothness continuous derivatives; the near-field
    Taylor order is capped accordingly.
    """
    ctx = f.ctx
    if f.unit != "pi" or not f.periodic or f.span != 2:
        raise DomainViolation("hilbert needs a full-period pi-unit spline")
    n = f.n_pieces
    if n < 2 * k_near + 4:
        raise BandTooWide(f"near band {k_near} too wide for {n} pieces")
    t_prime = max(0, min(taylor_order, f.smoothness))
    max_src_len = max(len(p.c) for p in f.pieces)
    tb = _hilbert_tables(ctx, n, k_near, t_prime, w_terms, quality_bits,
                         max_src_len)
    inv_n = ctx.from_fraction(Fraction(1, n))
    neg_inv_n = -inv_n
    inv_pi = ctx.pi().recip()

    # centered source polynomials, their sups, and remainder derivatives
    half_fr = Fraction(1, 2)
    q = [p.compose_linear(half_fr, 1) for p in f.pieces]
    sup_q = [p.range_on(0, 1, pieces=2).mag() for p in f.pieces]
    sup_dq = []
    hi_deriv = []
    for qq in q:
        sup_dq.append(qq.derivative().range_on(-half_fr, half_fr,
                                               pieces=2).mag())
        g = qq
        for _ in range(t_prime + 1):
            g = g.derivative()
        hi_deriv.append(g.range_on(-half_fr, half_fr, pieces=2).mag())

    max_t = tb["max_t"]
    moments = _moments(ctx, q, max_t)

    # far field J-part, vectorized over targets per (d, k, q)
    acc_far = [[ctx.zero] * (max_t + 1) for _ in range(n)]
    sup_q_max = ctx.zero
    for s in sup_q:
        sup_q_max = sup_q_max.max_(s)
    far_err_scalar = ctx.zero
    for d, t, ctil, ecell in tb["far"]:
        far_err_scalar = far_err_scalar + ecell
        for k in range(t + 1):
            rot = moments[k][d % n:] + moments[k][:d % n]
            sign = -1 if k % 2 == 1 else 1
            for qi in range(t - k + 1):
                sc = ctil[k + qi] * ctx.interval(sign * math.comb(k + qi, k))
                for i in range(n):
                    acc_far[i][qi] = acc_far[i][qi] + sc * rot[i]
    far_err = (far_err_scalar * sup_q_max * inv_n).mag()

    w_poly, w_err = tb["w_poly"], tb["w_err"]
    near = tb["near"]
    near_len = max((len(c.c) for mat, _, _ in near.values() for c in mat),
                   default=1)

    pieces_out = []
    err_total = ctx.zero
    rho_fact = ctx.from_fraction(Fraction(1, math.factorial(t_prime + 1)))
    for i in range(n):
        err_i = (w_err * sup_q[i] * inv_n).mag() + far_err

        # near cells: cached linear maps plus windowed remainder sups
        near_acc = [ctx.zero] * near_len
        for d, (mat, tail, wsup) in near.items():
            src = q[(i + d) % n]
            for t, ct in enumerate(src.c):
                if ct.is_zero():
                    continue
                for idx, cc in enumerate(mat[t].c):
                    if not cc.is_zero():
                        near_acc[idx] = near_acc[idx] + cc * ct
            lo, hi = (0, d) if d >= 0 else (d, 0)
            hull_dq = ctx.zero
            hull_hd = ctx.zero
            for off in range(lo, hi + 1):
                jj = (i + off) % n
                hull_dq = hull_dq.max_(sup_dq[jj])
                hull_hd = hull_hd.max_(hi_deriv[jj])
            err_i = err_i + (inv_pi * tail * hull_dq).mag()
            if d != 0:
                rho = (inv_pi * hull_hd * wsup * rho_fact
                       * ctx.interval((abs(d) + 1) ** t_prime))
                err_i = err_i + rho.mag()

        total = IPoly(ctx, acc_far[i]).scale(inv_n)
        total = total + q[i].scale(neg_inv_n) * w_poly
        total = total + IPoly(ctx, near_acc)
        pieces_out.append(total.compose_linear(-half_fr, 1))
        err_total = err_total.max_(err_i)

    out = SpaceSpline(ctx, f.degree, f.left, f.width, pieces_out,
                      periodic=True, unit="pi", sites=f.sites, smoothness=0)
    return EnclosedFunction(out, err_total.mag())


def _moments(ctx, q, max_t):
    """moments[k][j] = int q_j(sigma) sigma^k dsigma."""
    out = []
    for k in range(max_t + 1):
        row = []
        for qq in q:
            accv = ctx.zero
            for m, c in enumerate(qq.c):
                w = _sym_moment(m + k)
                if w:
                    accv = accv + c * ctx.from_fraction(w)
            row.append(accv)
        out.append(row)
    return out


def lambda_op(f, **kw):
    """Enclosure of Lambda f = H(f'), the first-order smoothing-order-one symbol."""
    return hilbert(f.derivative(), **kw)


class TM2:
    """Bivariate Taylor model on a cell box, variables (v, sigma).

    Monomials c_ab v^a sigma^b with interval coefficients over the box
    |v| <= vmax, |sigma| <= smax. Degrees above the caps are folded into
    symmetric coefficients at the cap order, which is pointwise sound:
    c v^a = v^vcap (c v^(a-vcap)) and |v^(a-vcap)| <= vmax^(a-vcap).

    Absent keys are structural zeros; div_v requires every (0, b)
    coefficient to be structurally absent, so exact-cancellation algebra
    must be arranged symbolically by the caller.
    """

    __slots__ = ("ctx", "m", "vmax", "smax", "vcap", "scap", "_folds")

    def __init__(self, ctx, vmax, smax, vcap=12, scap=12, mono=None):
        self.ctx = ctx
        self.vmax = Fraction(vmax)
        self.smax = Fraction(smax)
        self.vcap = vcap
        self.scap = scap
        self.m = {}
        self._folds = {}
        if mono:
            for (a, b), c in mono.items():
                self.add_term(a, b, c)

    def _like(self):
        out = TM2(self.ctx, self.vmax, self.smax, self.vcap, self.scap)
        out._folds = self._folds
        return out

    def _fold_factor(self, base, k):
        got = self._folds.get((base, k))
        if got is None:
            got = self.ctx.interval(Fraction(base) ** k)
            self._folds[(base, k)] = got
        return got

    def _compat(self, o):
        if (self.vmax != o.vmax or self.smax != o.smax
                or self.vcap != o.vcap or self.scap != o.scap):
            raise StructureMismatch("mismatched Taylor model boxes")

    @classmethod
    def const(cls, ctx, c, vmax, smax, vcap=12, scap=12):
        out = cls(ctx, vmax, smax, vcap, scap)
        out.add_term(0, 0, c)
        return out

    def add_term(self, a, b, c):
        if c.is_zero():
            return
        if a > self.vcap:
            c = (c * self._fold_factor(self.vmax, a - self.vcap)).sym_bound()
            a = self.vcap
        if b > self.scap:
            c = (c * self._fold_factor(self.smax, b - self.scap)).sym_bound()
            b = self.scap
        key = (a, b)
        got = self.m.get(key)
        self.m[key] = c if got is None else got + c

    def __add__(self, o):
        self._compat(o)
        out = self._like()
        out.m = dict(self.m)
        m = out.m
        for key, c in o.m.items():
            got = m.get(key)
            m[key] = c if got is None else got + c
        return out

    def __neg__(self):
        out = self._like()
        for (a, b), c in self.m.items():
            out.m[(a, b)] = -c
        return out

    def __sub__(self, o):
        return self + (-o)

    def scale(self, s):
        out = self._like()
        for (a, b), c in self.m.items():
            out.add_term(a, b, c * s)
        return out

    def __mul__(self, o):
        self._compat(o)
        out = self._like()
        acc = {}
        get = acc.get
        for (a1, b1), c1 in self.m.items():
            for (a2, b2), c2 in o.m.items():
                key = (a1 + a2, b1 + b2)
                p = c1 * c2
                got = get(key)
                acc[key] = p if got is None else got + p
        for (a, b), c in acc.items():
            out.add_term(a, b, c)
        return out

    def compress(self, tol):
        """Absorb terms whose box contribution is below tol into a
        symmetric constant; sound on the box, shrinks the key set."""
        ctx = self.ctx
        out = self._like()
        junk = None
        for (a, b), c in self.m.items():
            w = c.mag()
            if a:
                w = w * self._fold_factor(self.vmax, a)
            if b:
                w = w * self._fold_factor(self.smax, b)
            if (a, b) != (0, 0) and w.hi_float() < tol:
                junk = w if junk is None else junk + w
            else:
                out.m[(a, b)] = c
        if junk is not None:
            out.add_term(0, 0, junk.sym_bound())
        return out

    def pow_int(self, k):
        out = TM2.const(self.ctx, self.ctx.one, self.vmax, self.smax,
                        self.vcap, self.scap)
        for _ in range(k):
            out = out * self
        return out

    def div_v(self):
        """Structural division by v; the v^0 layer must be absent."""
        out = self._like()
        for (a, b), c in self.m.items():
            if a == 0:
                raise StructureMismatch("model is not structurally divisible by v")
            out.m[(a - 1, b)] = c
        return out

    def range_box(self):
        """Enclosure of the model over its box."""
        ctx = self.ctx
        v_iv = ctx.from_fraction(-self.vmax, self.vmax)
        s_iv = ctx.from_fraction(-self.smax, self.smax)
        acc = ctx.zero
        for (a, b), c in sorted(self.m.items()):
            term = c
            if a:
                term = term * v_iv ** a
            if b:
                term = term * s_iv ** b
            acc = acc + term
        return acc

    def recip(self, order=None, compress_tol=None):
        """Geometric-series reciprocal with a folded tail bound."""
        ctx = self.ctx
        c00 = self.m.get((0, 0))
        if c00 is None or c00.contains_zero():
            raise RangeFailure("reciprocal of a model straddling zero")
        inv = c00.recip()
        g = self.scale(inv)
        g.add_term(0, 0, -ctx.one)
        rho = g.range_box().mag()
        if not rho.certainly_lt(ctx.one):
            raise RangeFailure("reciprocal series does not contract")
        if order is None:
            order = max(self.vcap, self.scap) + 4
        acc = TM2.const(ctx, ctx.one, self.vmax, self.smax, self.vcap, self.scap)
        term = TM2.const(ctx, ctx.one, self.vmax, self.smax, self.vcap, self.scap)
        for _ in range(order):
            term = term * (-g)
            if compress_tol is not None:
                term = term.compress(compress_tol)
            acc = acc + term
        tail = (rho ** (order + 1) / (ctx.one - rho)).sym_bound()
        acc.add_term(0, 0, tail)
        return acc.scale(inv)

    def to_bpoly_psi(self, d):
        """Rewrite in (psi, sigma) via v = psi - sigma - d."""
        bp = BPoly(self.ctx)
        for (a, b), c in sorted(self.m.items()):
            part = BPoly(self.ctx)
            _expand_v_power(part, a, d, c)
            for (i, j), vv in part.m.items():
                bp.add_term(i, j + b, vv)
        return bp


# ---------------------------------------------------------------------------
# curve kernels
#
# (K f)(x) = (1/pi) PV int f(y) x'(y) k(x(x) - x(y)) dy along a spline curve
# x = x1 + i x2 + lift*alpha, with k(w) = 1/w for closed curves (lift = 0)
# and the periodized branch k(w) = cot(w/2)/2 = 1/w - rho(w) otherwise,
# rho(w) = sum_k |B_2k|/(2k)! w^(2k-1). The complex line element makes a
# flat curve reproduce the periodic Hilbert transform exactly and gives the
# classical Cauchy kernel on closed curves.
#
# Far cells expand k about the cell center chord in powers of
# eta = delta_i(tau) - e_j(sigma); the source side collapses into moments
# int s(sigma) e^m dsigma, so per-target work is a short scalar series per
# cell. Near cells write x(x) - x(y) = v*G(theta, v) with a Taylor-model
# reciprocal; the principal value reduces to PV int v^(m-1) S dv, which is
# precomputed per piece as polynomials H_m(theta), so applying the kernel
# is a short polynomial combination of the source jet.
#
# Every per-cell series carries a verified contraction check; a failed
# check means the chord enclosure cannot be separated from zero (or the
# periodized branch leaves |w| < 2 pi) and raises ArcChordFailure. The
# union of these checks over all cells is the arc-chord certificate.

from .errors import ArcChordFailure, DimensionMismatch
from .interval import CInterval

_CK_TCAP = 12      # local polynomial degree cap
_CK_KMAX = 26      # sigma-power count kept in the moment tensors
_CK_PCAP = 36      # far series order cap
_CK_RHO_K = 16     # kept terms of the periodization series


def _ck_compose_half(p):
    """Tight basis move p(theta) -> (q(tau), dev) with theta = tau - 1/2.

    Composing an interval polynomial directly amplifies balanced
    coefficient widths through the binomial recombination.  Instead the
    midpoint polynomial is composed exactly and the coefficient
    deviations are range-bounded once on |theta| <= 1/2; the enclosure
    is q(tau) +- dev.
    """
    ctx = p.ctx
    half = ctx.from_fraction(Fraction(1, 2))
    mids = []
    dev = ctx.zero
    w = ctx.one
    for c in p.c:
        m = ctx.interval(c.mid_float())
        mids.append(m)
        dev = dev + (c - m).mag() * w
        w = w * half
    q = IPoly(ctx, mids).compose_linear(ctx.from_fraction(-Fraction(1, 2)),
                                        ctx.one)
    return q, dev.mag()


def _ck_fold01(p, cap=_CK_TCAP):
    """Fold degrees above cap into the constant; sound for t in [0, 1]."""
    if p.degree <= cap:
        return p
    ctx = p.ctx
    head = list(p.c[:cap + 1])
    acc = ctx.zero
    for c in p.c[cap + 1:]:
        acc = acc + c.hull(ctx.zero)
    head[0] = head[0] + acc
    return IPoly(ctx, head)


def _ck_folds(p, cap=_CK_TCAP):
    """Fold for a symmetric variable theta in [-1/2, 1/2]."""
    if p.degree <= cap:
        return p
    ctx = p.ctx
    head = list(p.c[:cap + 1])
    acc = ctx.zero
    half = ctx.from_fraction(Fraction(1, 2))
    fac = half ** (cap + 1)
    for c in p.c[cap + 1:]:
        acc = acc + (c * fac).sym_bound()
        fac = fac * half
    head[0] = head[0] + acc
    return IPoly(ctx, head)


# complex polynomial pairs (re, im); im None means exactly real

def _cp_add(a, b):
    re = a[0] + b[0]
    if a[1] is None and b[1] is None:
        return (re, None)
    if a[1] is None:
        return (re, b[1])
    if b[1] is None:
        return (re, a[1])
    return (re, a[1] + b[1])


def _cp_neg(a):
    return (-a[0], None if a[1] is None else -a[1])


def _cp_sub(a, b):
    return _cp_add(a, _cp_neg(b))


def _cp_mul(a, b, fold=_ck_fold01):
    ar, ai = a
    br, bi = b
    re = ar * br
    im = None
    if ai is not None and bi is not None:
        re = re - ai * bi
        im = ar * bi + ai * br
    elif ai is not None:
        im = ai * br
    elif bi is not None:
        im = ar * bi
    return (fold(re), None if im is None else fold(im))


def _cp_cscale(a, c, fold=_ck_fold01):
    """Scale a polynomial pair by a CInterval."""
    ar, ai = a
    re = ar.scale(c.re)
    im = ar.scale(c.im)
    if ai is not None:
        re = re - ai.scale(c.im)
        im = im + ai.scale(c.re)
    return (fold(re), fold(im))


def _cp_eval(a, ctx, fr):
    re = a[0].eval_fr(fr)
    im = a[1].eval_fr(fr) if a[1] is not None else ctx.zero
    return CInterval(re, im)


def _cp_sup(a, ctx, lo=Fraction(0), hi=Fraction(1)):
    """Upper bound on |a| over [lo, hi]."""
    m = a[0].range_on(lo, hi).mag()
    if a[1] is not None:
        m2 = a[1].range_on(lo, hi).mag()
        m = (m * m + m2 * m2).sqrt()
    return m.mag()


def _ck_pascal(nmax):
    rows = [[1]]
    for k in range(nmax):
        prev = rows[-1]
        rows.append([1] + [prev[i] + prev[i + 1]
                           for i in range(len(prev) - 1)] + [1])
    return rows


def _ck_rho_tail(ctx, vbar, kfrom, p):
    """Bound sum_{k >= kfrom} 4 (2pi)^(-2k) (2k)^p vbar^(2k-1-p).

    Valid whenever the certified term ratio q (1 + 1/kfrom)^p stays
    below one, q = (vbar / 2pi)^2.
    """
    two_pi = ctx.pi_times(2)
    q = (vbar / two_pi)
    q = (q * q).mag()
    grow = (ctx.one + ctx.one / ctx.interval(kfrom)) ** p
    ratio = (q * grow).mag()
    if not ratio.certainly_lt(ctx.one):
        raise ArcChordFailure("periodization series tail does not contract")
    lead = (ctx.interval(4) * ctx.interval(2 * kfrom) ** p
            * vbar ** (2 * kfrom - 1 - p) / two_pi ** (2 * kfrom))
    return (lead / (ctx.one - ratio)).mag()


def _ck_rho_derivs(ctx, w, pmax, vbar):
    """rho^(p)(w)/p! for p <= pmax plus the |rho^(pmax+1)|/(pmax+1)! sup
    over |v| <= vbar, for rho(w) = 1/w - cot(w/2)/2."""
    out = []
    wpow = {}

    def cpow(k):
        if k not in wpow:
            wpow[k] = w.pow_int(k) if k else CInterval(ctx.one, ctx.zero)
        return wpow[k]

    for p in range(pmax + 1):
        acc = CInterval(ctx.zero, ctx.zero)
        for k in range(1, _CK_RHO_K + 1):
            e = 2 * k - 1 - p
            if e < 0:
                continue
            coef = Fraction(_w_coeff(k))
            fall = 1
            for t in range(p):
                fall *= (2 * k - 1 - t)
            coef = coef * Fraction(fall, math.factorial(p))
            acc = acc + cpow(e) * CInterval(ctx.from_fraction(coef), ctx.zero)
        tail = _ck_rho_tail(ctx, vbar, _CK_RHO_K + 1, p) \
            / ctx.from_fraction(Fraction(math.factorial(p)))
        acc = CInterval(acc.re.pad(tail.mag()), acc.im.pad(tail.mag()))
        out.append(acc)
    sup = ctx.zero
    p = pmax + 1
    for k in range(1, _CK_RHO_K + 1):
        e = 2 * k - 1 - p
        if e < 0:
            continue
        fall = 1
        for t in range(p):
            fall *= (2 * k - 1 - t)
        sup = sup + (ctx.from_fraction(Fraction(_w_coeff(k))
                                       * Fraction(fall, math.factorial(p)))
                     * vbar ** e).mag()
    sup = sup + _ck_rho_tail(ctx, vbar, _CK_RHO_K + 1, p) \
        / ctx.from_fraction(Fraction(math.factorial(p)))
    return out, sup.mag()


class CurveKernel:
    """Precomputed tables for the Cauchy kernel along a spline curve.

    curve is any object carrying ctx, x1, x2 (None for a real curve) and
    lift (rational slope of the non-periodic part). Construction verifies
    a per-cell arc-chord certificate and raises ArcChordFailure when the
    curve enclosure admits a vanishing chord.
    """

    def __init__(self, curve, k_near=1, taylor_order=9, quality_bits=36):
        ctx = curve.ctx
        x1, x2 = curve.x1, curve.x2
        if x1.unit != "pi" or not x1.periodic:
            raise DomainViolation("curve splines must be periodic in pi units")
        if x2 is not None and (x2.n_pieces != x1.n_pieces
                               or x2.left != x1.left or x2.width != x1.width):
            raise DimensionMismatch("curve components live on different meshes")
        if k_near not in (1, 2):
            raise BandTooWide("near band must be one or two pieces wide")
        n = x1.n_pieces
        if n < 2 * k_near + 4:
            raise BandTooWide(f"mesh with {n} pieces cannot hold the near band")
        s = x1.smoothness if x2 is None else min(x1.smoothness, x2.smoothness)
        T = min(taylor_order, s)
        if T < 3:
            raise InsufficientSmoothness(
                "curve must have at least three continuous derivatives")

        self.ctx = ctx
        self.lift = Fraction(curve.lift)
        self.n = n
        self.left = Fraction(x1.left)
        self.w = Fraction(x1.width)
        self.wa = ctx.pi_times(self.w)
        self.B = k_near
        self.T = T
        self.qbits = quality_bits
        self.sites = x1.sites
        self.complex_curve = (x2 is not None) or False
        self.inv_pi = ctx.one / ctx.pi_times(1)
        self._binom = _ck_pascal(_CK_PCAP + 2)

        lw = ctx.pi_times(self.lift * self.w) if self.lift else None
        self._q = []
        self._zp = []
        self._pos = []
        for j in range(n):
            re = x1.pieces[j]
            im = x2.pieces[j] if x2 is not None else None
            self._q.append((re, im))
            dre = re.derivative()
            if self.lift:
                dre = dre + IPoly.const(ctx, lw)
            self._zp.append((dre, im.derivative() if im is not None else None))
            pre = re
            if self.lift:
                c0 = ctx.pi_times(self.lift * (self.left + j * self.w))
                pre = pre + IPoly(ctx, [c0, lw])
            self._pos.append((pre, im))

        # center offsets are kept in the symmetric variable t = sigma - 1/2,
        # where powers have no binomial cancellation and degree folds only
        # cost 2^-k; tau-basis powers of (sigma - 1/2)^m are numerically
        # catastrophic under coefficient-wise folding.
        half = Fraction(1, 2)
        self._ctr = [_cp_eval(self._pos[j], ctx, half) for j in range(n)]
        self._e = []
        self._esup = []
        for j in range(n):
            pr, pi = self._pos[j]
            er = pr.compose_linear(ctx.from_fraction(half), ctx.one)
            er = er - IPoly.const(ctx, self._ctr[j].re)
            ei = None
            if pi is not None:
                ei = pi.compose_linear(ctx.from_fraction(half), ctx.one)
                ei = ei - IPoly.const(ctx, self._ctr[j].im)
            elif not self._ctr[j].im.is_zero():
                ei = IPoly.const(ctx, -self._ctr[j].im)
            self._e.append((er, ei))
            self._esup.append(_cp_sup((er, ei), ctx, -half, half))

        self._build_far()
        self._build_near()
        self._tband = [None] * n

    # far tables -----------------------------------------------------

    def _wrap_d(self, i, j):
        d = (j - i) % self.n
        if d > self.n // 2:
            d -= self.n
        return d

    def _build_far(self):
        ctx = self.ctx
        n, B = self.n, self.B
        two_pi = ctx.pi_times(2)
        branch_cap = two_pi * ctx.interval("0.9")
        ln2 = math.log(2.0)
        self._far = [[] for _ in range(n)]
        emax = [2] * n
        for i in range(n):
            for j in range(n):
                d = self._wrap_d(i, j)
                if abs(d) <= B:
                    continue
                kw = (i + d - j) // n
                w0 = self._ctr[i] - self._ctr[j]
                if self.lift and kw:
                    w0 = w0 - CInterval(ctx.pi_times(2 * kw * self.lift),
                                        ctx.zero)
                dabs = w0.abs2().sqrt()
                osc = (self._esup[i] + self._esup[j]).mag()
                ratio = (osc / dabs).mag()
                rf = ratio.hi_float()
                if not (rf < 0.8):
                    raise ArcChordFailure(
                        f"chord between pieces {i} and {j} not separated")
                P = min(_CK_PCAP, max(6, int(self.qbits * ln2
                                             / -math.log(rf + 1e-300)) + 2))
                inv = w0.recip()
                kps = []
                acc = inv
                for p in range(P + 1):
                    kps.append(acc if p % 2 == 0 else -acc)
                    acc = acc * inv
                rem = (ratio ** (P + 1) / (dabs * (ctx.one - ratio))).mag()
                if self.lift:
                    vbar = (dabs.mag() + osc).mag()
                    if not vbar.certainly_lt(branch_cap):
                        raise ArcChordFailure(
                            "periodized branch leaves |w| < 2 pi")
                    P2 = min(8, P)
                    rd, rsup = _ck_rho_derivs(ctx, w0, P2, vbar)
                    for p in range(P2 + 1):
                        kps[p] = kps[p] - rd[p]
                    rem = rem + rsup * osc ** (P2 + 1)
                spread = ctx.zero
                om = ctx.one
                for p in range(1, P + 1):
                    om = (om * osc).mag()
                    spread = spread + (kps[p].re.mag()
                                       + kps[p].im.mag()) * om
                spread = (spread + rem).mag()
                self._far[i].append((j, kps, rem, spread, dabs))
                emax[j] = max(emax[j], P)
                emax[i] = max(emax[i], P)
        # exact moment tensor R[k][l] = int_0^1 sigma^k (sigma - 1/2)^l
        half = Fraction(1, 2)
        rr = []
        for k in range(_CK_KMAX):
            row = []
            for l in range(_CK_TCAP + 1):
                v = Fraction(0)
                for t in range(l + 1):
                    v += (self._binom[l][t] * (-half) ** (l - t)
                          * Fraction(1, k + t + 1))
                row.append(ctx.from_fraction(v))
            rr.append(row)
        self._epow = []
        self._M = []
        one = (IPoly.const(ctx, ctx.one), None)
        for j in range(self.n):
            pows = [one]
            for _ in range(emax[j]):
                pows.append(_cp_mul(pows[-1], self._e[j], fold=_ck_folds))
            self._epow.append(pows)
            mom = []
            for m in range(emax[j] + 1):
                er, ei = pows[m]
                row = []
                for k in range(_CK_KMAX):
                    rs = ctx.zero
                    is_ = ctx.zero
                    for l, c in enumerate(er.c):
                        rs = rs + c * rr[k][l]
                    if ei is not None:
                        for l, c in enumerate(ei.c):
                            is_ = is_ + c * rr[k][l]
                    row.append(CInterval(rs, is_))
                mom.append(row)
            self._M.append(mom)

    # near tables ----------------------------------------------------

    def _window(self, i):
        return [(i + d) % self.n for d in range(-self.B - 1, self.B + 2)]

    def _wsup_deriv(self, polys, order):
        """Hull of |p^(order)| over a list of polynomial pairs."""
        ctx = self.ctx
        acc = ctx.zero
        for pr, pi in polys:
            dr = pr
            di = pi
            for _ in range(order):
                dr = dr.derivative()
                di = di.derivative() if di is not None else None
            acc = acc.hull(_cp_sup((dr, di), ctx))
        return acc.mag()

    def _build_near(self):
        ctx = self.ctx
        n, B, T = self.n, self.B, self.T
        vmax = Fraction(B + 1)
        smax = Fraction(1, 2)
        cB = Fraction(2 * B + 1, 2)
        half = Fraction(1, 2)
        two_pi = ctx.pi_times(2)
        lw = ctx.pi_times(self.lift * self.w) if self.lift else None

        # shared (theta +- cB)^k tables and the log head
        kcap = _CK_TCAP + T + 3
        powp = [IPoly.const(ctx, ctx.one)]
        powm = [IPoly.const(ctx, ctx.one)]
        linp = IPoly(ctx, [ctx.from_fraction(cB), ctx.one])
        linm = IPoly(ctx, [ctx.from_fraction(-cB), ctx.one])
        for _ in range(kcap):
            powp.append(powp[-1] * linp)
            powm.append(powm[-1] * linm)
        self._dif = [None]
        for k in range(1, kcap + 1):
            self._dif.append(_ck_folds(
                (powp[k] - powm[k]).scale(ctx.one / ctx.interval(k))))
        # L(theta) = ln((cB + theta)/(cB - theta)) = 2 atanh(theta/cB),
        # odd series in theta/cB = theta * 2/(2B+1), |theta/cB| <= 1/(2B+1)
        xm = Fraction(1, 2 * B + 1)
        lcs = [ctx.zero] * 20
        for k in range(1, 20, 2):
            lcs[k] = ctx.from_fraction(2 * Fraction(1, k)
                                       * Fraction(2, 2 * B + 1) ** k)
        ltail = (ctx.interval(2) * ctx.from_fraction(xm) ** 21
                 / (ctx.interval(21)
                    * (ctx.one - ctx.from_fraction(xm * xm))))
        lpoly = IPoly(ctx, lcs)
        lpoly.c[0] = lpoly.c[0] + ltail.mag().sym_bound()
        self._L = lpoly

        self._near = []
        for i in range(n):
            wins = self._window(i)
            qwin = [self._q[j] for j in wins]
            mz_r = self._wsup_deriv([(self._q[j][0], None) for j in wins],
                                    T + 1)
            mz_i = (self._wsup_deriv([(self._q[j][1], None) for j in wins],
                                     T + 1)
                    if self.complex_curve else None)
            fac = ctx.from_fraction(Fraction(1, math.factorial(T + 1)))

            gre = TM2(ctx, vmax, smax, vcap=10, scap=10)
            gim = TM2(ctx, vmax, smax, vcap=10, scap=10) \
                if self.complex_curve else None
            d2re = TM2(ctx, vmax, smax, vcap=10, scap=10)
            d2im = TM2(ctx, vmax, smax, vcap=10, scap=10) \
                if self.complex_curve else None
            qr, qi = self._q[i]
            dr, di = qr, qi
            for m in range(1, T + 1):
                dr = dr.derivative()
                di = di.derivative() if di is not None else None
                cf = ctx.from_fraction(Fraction((-1) ** (m + 1),
                                                math.factorial(m)))
                pr = dr.compose_linear(ctx.from_fraction(half), ctx.one)
                for b, c in enumerate(pr.scale(cf).c):
                    gre.add_term(m - 1, b, c)
                    if m >= 2:
                        d2re.add_term(m - 2, b, -c)
                if di is not None:
                    pi_ = di.compose_linear(ctx.from_fraction(half), ctx.one)
                    for b, c in enumerate(pi_.scale(cf).c):
                        gim.add_term(m - 1, b, c)
                        if m >= 2:
                            d2im.add_term(m - 2, b, -c)
            if self.lift:
                gre.add_term(0, 0, lw)
            gre.add_term(T, 0, (mz_r * fac).sym_bound())
            d2re.add_term(T - 1, 0, (mz_r * fac).sym_bound())
            if gim is not None:
                gim.add_term(T, 0, (mz_i * fac).sym_bound())
                d2im.add_term(T - 1, 0, (mz_i * fac).sym_bound())

            dd = gre * gre
            if gim is not None:
                dd = dd + gim * gim
            c00 = dd.m.get((0, 0))
            if c00 is None or c00.contains_zero():
                raise ArcChordFailure(f"near chord on piece {i} meets zero")
            gg = dd.scale(c00.recip())
            gg.add_term(0, 0, -ctx.one)
            rho = gg.range_box().mag().hi_float()
            if not (rho < 0.85):
                raise ArcChordFailure(
                    f"near reciprocal on piece {i} does not contract")
            order = min(100, max(10, int(self.qbits * math.log(2.0)
                                         / -math.log(rho + 1e-300)) + 4))
            ctol = 2.0 ** (-(self.qbits + 16))
            try:
                dinv = dd.recip(order, compress_tol=ctol)
            except RangeFailure as exc:
                raise ArcChordFailure(str(exc)) from None
            sre = gre * dinv
            s00 = sre.m.get((0, 0))
            stol = ctol * (s00.mag().hi_float() if s00 is not None else 1.0)
            sre = sre.compress(stol)
            sim = ((-gim) * dinv).compress(stol) if gim is not None else None

            s0re = self._layer0(sre)
            s0im = self._layer0(sim) if sim is not None else None
            hs = self._h_table(sre, sim, s0re, s0im, cB)

            rho2 = None
            h2s = None
            r2sup = ctx.zero
            if self.lift:
                gabs = dd.range_box().sqrt()
                rng = (ctx.from_fraction(vmax) * gabs.mag()).mag()
                if not rng.certainly_lt(two_pi * ctx.interval("0.9")):
                    raise ArcChordFailure(
                        "periodized branch leaves |w| < 2 pi on the band")
                rho2 = self._rho_band(gre, gim, rng)
                h2s = self._h_table(rho2[0], rho2[1], None, None, cB,
                                    pv=False)
                r2sup = (self._box_sup(rho2[0])
                         + (self._box_sup(rho2[1])
                            if rho2[1] is not None else ctx.zero)).mag()

            ds = self._div_sup(sre, s0re)
            if sim is not None:
                ds = (ds + self._div_sup(sim, s0im)).mag()
            s0sup = _cp_sup((s0re, s0im), ctx, -half, half)
            s0l = _cp_sup((_ck_folds(s0re * self._L),
                           _ck_folds(s0im * self._L)
                           if s0im is not None else None), ctx, -half, half)
            gabs_rng = dd.range_box().sqrt()
            self._near.append({
                "S": (sre, sim), "S0": (s0re, s0im), "H": hs, "H2": h2s,
                "D2": (d2re, d2im), "DS": ds, "S0SUP": s0sup, "S0L": s0l,
                "R2SUP": r2sup, "R2": rho2, "GABS": gabs_rng, "WIN": wins,
            })

    def _layer0(self, t):
        ctx = self.ctx
        cs = {}
        for (a, b), c in t.m.items():
            if a == 0:
                cs[b] = c
        deg = max(cs) if cs else 0
        return IPoly(ctx, [cs.get(b, ctx.zero) for b in range(deg + 1)])

    def _box_sup(self, t):
        return t.range_box().mag()

    def _div_sup(self, t, l0):
        """Range bound of (t - layer0)/v over the box."""
        out = t._like()
        for (a, b), c in t.m.items():
            if a >= 1:
                out.m[(a - 1, b)] = c
        return out.range_box().mag()

    def _rho_band(self, gre, gim, rng):
        """Taylor model of rho(v G) on the band box."""
        ctx = self.ctx
        two_pi = ctx.pi_times(2)
        w1re = gre._like()
        for (a, b), c in gre.m.items():
            w1re.add_term(a + 1, b, c)
        w1im = None
        if gim is not None:
            w1im = gim._like()
            for (a, b), c in gim.m.items():
                w1im.add_term(a + 1, b, c)
        w2re = w1re * w1re
        if w1im is not None:
            w2re = w2re - w1im * w1im
            w2im = w1re * w1im
            w2im = w2im + w2im
        else:
            w2im = None
        accre = gre._like()
        accim = gim._like() if gim is not None else None
        curre, curim = w1re, w1im
        kr = 8
        for k in range(1, kr + 1):
            bk = ctx.from_fraction(Fraction(_w_coeff(k)))
            accre = accre + curre.scale(bk)
            if curim is not None:
                accim = accim + curim.scale(bk)
            if k < kr:
                nre = curre * w2re
                if curim is not None and w2im is not None:
                    nre = nre - curim * w2im
                    nim = curre * w2im + curim * w2re
                else:
                    nim = None
                curre, curim = nre, nim
        q = (rng / two_pi)
        q = (q * q).mag()
        tail = (ctx.interval(4) * rng ** (2 * kr + 1)
                / (two_pi ** (2 * kr + 2) * (ctx.one - q))).mag()
        accre.add_term(0, 0, tail.sym_bound())
        if accim is not None:
            accim.add_term(0, 0, tail.sym_bound())
        return (accre, accim)

    def _h_table(self, sre, sim, s0re, s0im, cB, pv=True):
        """H_m(theta) = (PV) int v^(m-1) S dv over [theta-cB, theta+cB].

        For pv=True the m = 0 entry is the principal value, split into
        the log head S0(theta) L(theta) plus the structurally divided
        rest; m >= 1 entries are plain integrals. With pv=False the
        integrand is v^m S instead (the periodization correction has no
        1/v factor). cB = B + 1/2.
        """
        ctx = self.ctx
        mtop = self.T + 3
        off = 0 if pv else 1
        out = []
        for m in range(mtop):
            hre = IPoly.zero(ctx)
            him = IPoly.zero(ctx) if sim is not None else None
            for comp, acc_idx in ((sre, 0), (sim, 1)):
                if comp is None:
                    continue
                acc = IPoly.zero(ctx)
                for (a, b), c in sorted(comp.m.items()):
                    k = a + m + off
                    if pv and m == 0:
                        if a == 0:
                            continue       # handled by the log head
                        k = a              # int v^(a-1) dv
                    term = self._dif[k].scale(c)
                    acc = _ck_folds(acc + _ck_folds(term.shift_degree(b)))
                if pv and m == 0:
                    s0 = s0re if acc_idx == 0 else s0im
                    acc = _ck_folds(acc + _ck_folds(s0 * self._L))
                if acc_idx == 0:
                    hre = acc
                else:
                    him = acc
            out.append((hre, him))
        return out

    # application ----------------------------------------------------

    def _check_mesh(self, f):
        if (f.n_pieces != self.n or Fraction(f.left) != self.left
                or Fraction(f.width) != self.w or not f.periodic
                or f.unit != "pi"):
            raise DimensionMismatch("input spline mesh does not match curve")

    def apply(self, f_re, f_im=None):
        """Apply the kernel to f = f_re + i f_im.

        Returns (re, im) EnclosedFunctions; im is None when both the
        curve and the input are real and the lift keeps the kernel real.
        """
        ctx = self.ctx
        self._check_mesh(f_re)
        if f_im is not None:
            self._check_mesh(f_im)
        n = self.n
        fs = f_re.smoothness if f_im is None \
            else min(f_re.smoothness, f_im.smoothness)
        tp = max(0, min(self.T - 1, fs))

        s = []
        ssup = []
        for j in range(n):
            fj = (f_re.pieces[j], f_im.pieces[j] if f_im is not None else None)
            sj = _cp_mul(fj, self._zp[j], fold=lambda p: p)
            s.append(sj)
            ssup.append(_cp_sup(sj, ctx))

        mu = []
        for j in range(n):
            mom = self._M[j]
            row = []
            for m in range(len(mom)):
                acc_r = ctx.zero
                acc_i = ctx.zero
                sr, si = s[j]
                for k, c in enumerate(sr.c):
                    acc_r = acc_r + c * mom[m][k].re
                    acc_i = acc_i + c * mom[m][k].im
                if si is not None:
                    for k, c in enumerate(si.c):
                        acc_r = acc_r - c * mom[m][k].im
                        acc_i = acc_i + c * mom[m][k].re
                row.append(CInterval(acc_r, acc_i))
            mu.append(row)

        half = Fraction(1, 2)
        out_re = []
        out_im = []
        err = ctx.zero
        complex_out = self.complex_curve or (f_im is not None)
        for i in range(n):
            acc = (IPoly.zero(ctx), IPoly.zero(ctx) if complex_out else None)
            err_i = ctx.zero
            for (j, kps, rem, _spread, _dabs) in self._far[i]:
                P = len(kps) - 1
                muj = mu[j]
                for a in range(P + 1):
                    ca = CInterval(ctx.zero, ctx.zero)
                    for m in range(P - a + 1):
                        c = kps[a + m] * muj[m]
                        scale = ctx.interval(self._binom[a + m][a])
                        if m % 2:
                            c = -c
                        ca = ca + CInterval(c.re * scale, c.im * scale)
                    term = _cp_cscale(self._epow[i][a], ca)
                    if not complex_out:
                        term = (term[0], None)
                    acc = _cp_add(acc, term)
                err_i = err_i + rem * ssup[j]

            nd = self._near[i]
            jets = []
            sr, si = s[i]
            dr, di = sr, si
            for m in range(tp + 1):
                if m:
                    dr = dr.derivative()
                    di = di.derivative() if di is not None else None
                cf = ctx.from_fraction(Fraction((-1) ** m, math.factorial(m)))
                jr = _ck_folds(dr.compose_linear(ctx.from_fraction(half),
                                                 ctx.one).scale(cf))
                ji = None
                if di is not None:
                    ji = _ck_folds(di.compose_linear(ctx.from_fraction(half),
                                                     ctx.one).scale(cf))
                jets.append((jr, ji))
            wr = self._wsup_deriv([(s[j][0], None) for j in nd["WIN"]], tp + 1)
            fac = ctx.from_fraction(Fraction(1, math.factorial(tp + 1)))
            jrem_r = (wr * fac).sym_bound()
            jets.append((IPoly.const(ctx, jrem_r), None))
            if si is not None or any(s[j][1] is not None for j in nd["WIN"]):
                wi = self._wsup_deriv(
                    [(s[j][1], None) for j in nd["WIN"]
                     if s[j][1] is not None], tp + 1)
                jets[-1] = (jets[-1][0],
                            IPoly.const(ctx, (wi * fac).sym_bound()))

            near = (IPoly.zero(ctx), IPoly.zero(ctx) if complex_out else None)
            for m, jm in enumerate(jets):
                hm = nd["H"][m]
                term = _cp_mul(jm, hm, fold=_ck_folds)
                if nd["H2"] is not None:
                    term = _cp_sub(term, _cp_mul(jm, nd["H2"][m],
                                                 fold=_ck_folds))
                if not complex_out:
                    term = (term[0], None)
                near = _cp_add(near, term)
            # far and near both live on t = tau - 1/2; compose back once
            tot = _cp_add(acc, near)
            tre, dev = _ck_compose_half(tot[0])
            out_re.append(_ck_fold01(tre.scale(self.inv_pi)))
            if complex_out:
                tim = (tot[1] if tot[1] is not None else IPoly.zero(ctx))
                tim, dev_i = _ck_compose_half(tim)
                dev = dev.max_(dev_i)
                out_im.append(_ck_fold01(tim.scale(self.inv_pi)))
            err = err.hull(((err_i + dev) * self.inv_pi).mag())

        err = err.mag()
        mk = lambda pieces: SpaceSpline(
            ctx, 12, self.left, self.w, pieces, periodic=True, unit="pi",
            sites=f_re.sites, smoothness=0)
        ef_re = EnclosedFunction(mk(out_re), err)
        if not complex_out:
            return ef_re, None
        return ef_re, EnclosedFunction(mk(out_im), err)

    # bounds for jet error propagation --------------------------------

    def op_bound(self):
        """(c0, c1) with |K h| <= c0 sup|h| + c1 sup|h'| for C^1 h."""
        ctx = self.ctx
        c0 = ctx.zero
        c1 = ctx.zero
        two_cb = ctx.from_fraction(Fraction(2 * self.B + 1))
        for i in range(self.n):
            z0 = ctx.zero
            z1 = ctx.zero
            for j in self._near[i]["WIN"]:
                z0 = z0.hull(_cp_sup(self._zp[j], ctx))
                zd = (self._zp[j][0].derivative(),
                      self._zp[j][1].derivative()
                      if self._zp[j][1] is not None else None)
                z1 = z1.hull(_cp_sup(zd, ctx))
            far = ctx.zero
            for (j, kps, rem, spread, _dabs) in self._far[i]:
                kmax = (kps[0].re.mag() + kps[0].im.mag() + spread).mag()
                far = far + _cp_sup(self._zp[j], ctx) * kmax
            nd = self._near[i]
            r2 = nd["R2SUP"] if nd["H2"] is not None else ctx.zero
            ci0 = far + z0.mag() * ((nd["DS"] + r2) * two_cb + nd["S0L"]) \
                + z1.mag() * nd["S0SUP"] * two_cb
            ci1 = z0.mag() * nd["S0SUP"] * two_cb * self.wa
            c0 = c0.hull((ci0 * self.inv_pi).mag())
            c1 = c1.hull((ci1 * self.inv_pi).mag())
        return c0.mag(), c1.mag()

    def t_band_range(self, i):
        """Range of Im(x'(x) kappa(x(x)-x(y)))/pi over the near band of
        piece i, i.e. the bounded tangential kernel; the flat 1/(x-y)
        head is real and drops out."""
        if self._tband[i] is None:
            ctx = self.ctx
            nd = self._near[i]
            d2re, d2im = nd["D2"]
            sre, sim = nd["S"]
            imt = d2re * sim if sim is not None else None
            if imt is not None and d2im is not None:
                imt = imt + d2im * sre
            elif d2im is not None:
                imt = d2im * sre
            rng = imt.range_box() if imt is not None else ctx.zero
            if nd["H2"] is not None:
                # lifted kernel: subtract Im(x' rho(x-y)) for the
                # periodization correction kappa = 1/w - rho(w)
                r2re, r2im = nd["R2"]
                zre = self._zp[i][0].range_on(Fraction(0), Fraction(1))
                zim = (self._zp[i][1].range_on(Fraction(0), Fraction(1))
                       if self._zp[i][1] is not None else ctx.zero)
                ire = r2re.range_box()
                iim = r2im.range_box() if r2im is not None else ctx.zero
                rng = rng - (zre * iim + zim * ire)
            self._tband[i] = rng * self.inv_pi / self.wa
        return self._tband[i]

    def far_cell(self, i, idx):
        """(j, k0, spread, dmin) of the idx-th far cell of target i."""
        j, kps, _rem, spread, dabs = self._far[i][idx]
        return j, kps[0], spread, dabs

    def far_count(self, i):
        return len(self._far[i])


def kernel_apply(curve, f, k_near=1, taylor_order=9, quality_bits=36):
    """Cauchy-kernel principal value of f along the curve.

    Returns one EnclosedFunction for a real curve with real input, else
    the (re, im) pair. One-shot wrapper over CurveKernel; build the
    kernel object once when applying it repeatedly.
    """
    ck = CurveKernel(curve, k_near=k_near, taylor_order=taylor_order,
                     quality_bits=quality_bits)
    re, im = ck.apply(f)
    if im is None:
        return re
    return re, im
