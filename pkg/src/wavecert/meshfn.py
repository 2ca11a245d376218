"""Certified spline enclosures of periodic and clamped mesh functions.

Space splines live on a uniform mesh in exact angle coordinates: a site or
breakpoint is a Fraction r, meaning the angle r*pi when the unit is "pi"
(the periodic case, period 2pi) or plainly r when the unit is "plain". All
mesh geometry therefore stays rational; pi only enters through interval
scaling of derivatives and integrals.

Interpolation solves the exact rational collocation system with a float
preconditioner and a contraction bound: with G an approximate inverse and
H = I - G M (exact), kappa = ||H|| < 1 certifies solvability, gives the a
priori bound ||e|| <= ||G r|| / (1 - kappa) on the correction e to the float
solution, and each sweep e <- G r + H e shrinks the enclosure by kappa.

Even spline degrees interpolate at piece centers (breakpoints sit halfway
between sites); odd degrees interpolate at breakpoints. Collocating an even
degree at its own breakpoints is singular for even site counts, the center
layout is not.
"""

import math
from fractions import Fraction
from functools import lru_cache

from .errors import (DimensionMismatch, Infeasible, NotContracting,
                     UnsupportedOrder)
from .interval import CInterval, Interval
from .poly import IPoly
from .util import cardinal_bspline_pieces, cardinal_bspline_value

__all__ = ["SpaceSpline", "TimeTrack", "interpolate_periodic",
           "interpolate_clamped", "periodic_sites", "greville_sites",
           "splash_hull"]


# mesh geometry helpers

def periodic_sites(n, left=Fraction(-1), span=Fraction(2)):
    """Sample sites r_i = left + i*span/n, i = 0..n-1."""
    left, span = Fraction(left), Fraction(span)
    w = span / n
    return [left + i * w for i in range(n)]


def greville_sites(degree, n_pieces, lo=Fraction(-1), hi=Fraction(1)):
    knots = _clamped_knots(degree, n_pieces, Fraction(lo), Fraction(hi))
    nb = len(knots) - degree - 1
    return [sum(knots[i + 1:i + degree + 1], Fraction(0)) / degree
            for i in range(nb)]


def _clamped_knots(degree, n_pieces, lo, hi):
    w = (hi - lo) / n_pieces
    inner = [lo + w * j for j in range(1, n_pieces)]
    return [lo] * (degree + 1) + inner + [hi] * (degree + 1)


class SpaceSpline:
    """Piecewise polynomial enclosure on a uniform mesh.

    Piece i covers r in [left + i*width, left + (i+1)*width] and stores an
    IPoly in the local variable u = (r - r_left_i)/width, u in [0, 1].
    """

    __slots__ = ("ctx", "degree", "unit", "periodic", "left", "width",
                 "pieces", "sites", "smoothness", "_wa", "_inv_wa")

    def __init__(self, ctx, degree, left, width, pieces, periodic=True,
                 unit="pi", sites=None, smoothness=None):
        self.ctx = ctx
        self.degree = degree
        self.unit = unit
        self.periodic = periodic
        self.left = Fraction(left)
        self.width = Fraction(width)
        self.pieces = list(pieces)
        self.sites = sites
        # continuity class of the enclosed function across breakpoints;
        # degree is a mesh-layout marker and piece polynomials may exceed it
        self.smoothness = (degree - 1) if smoothness is None else smoothness
        self._wa = None
        self._inv_wa = None

    @property
    def n_pieces(self):
        return len(self.pieces)

    @property
    def span(self):
        return self.width * self.n_pieces

    def alpha_width(self):
        """Piece width as an angle interval."""
        if self._wa is None:
            if self.unit == "pi":
                self._wa = self.ctx.pi_times(self.width)
            else:
                self._wa = self.ctx.from_fraction(self.width)
        return self._wa

    def inv_alpha_width(self):
        if self._inv_wa is None:
            self._inv_wa = self.alpha_width().recip()
        return self._inv_wa

    def same_mesh(self, other):
        return (self.degree == other.degree and self.left == other.left
                and self.width == other.width
                and self.n_pieces == other.n_pieces
                and self.unit == other.unit
                and self.periodic == other.periodic)

    def _require_mesh(self, other):
        if not self.same_mesh(other):
            raise DimensionMismatch("mesh mismatch between splines")

    # pointwise evaluation at exact abscissae

    def locate(self, r):
        """Piece index and local coordinate for an exact abscissa."""
        r = Fraction(r)
        rel = (r - self.left) / self.width
        if self.periodic:
            n = self.n_pieces
            i = math.floor(rel)
            u = rel - i
            return i % n, u
        if rel < 0 or rel > self.n_pieces:
            raise DimensionMismatch("abscissa outside the clamped domain")
        i = min(int(math.floor(rel)), self.n_pieces - 1)
        return i, rel - i

    def eval(self, r, deriv=0):
        i, u = self.locate(r)
        p = self.pieces[i]
        for _ in range(deriv):
            p = p.derivative()
        v = p.eval_fr(u)
        if deriv:
            v = v * self.inv_alpha_width() ** deriv
        return v

    def eval_jet(self, r, length):
        """Taylor coefficients f^(k)(alpha)/k! at an exact abscissa."""
        i, u = self.locate(r)
        shifted = self.pieces[i].compose_linear(
            self.ctx.from_fraction(u), self.ctx.one)
        inv = self.inv_alpha_width()
        out = []
        scale = self.ctx.one
        for k in range(length):
            c = shifted.c[k] if k < len(shifted.c) else self.ctx.zero
            out.append(c * scale)
            scale = scale * inv
        return out

    def piece_range(self, i, deriv=0, subdiv=4):
        p = self.pieces[i]
        for _ in range(deriv):
            p = p.derivative()
        v = p.range_on(0, 1, pieces=subdiv)
        if deriv:
            v = v * self.inv_alpha_width() ** deriv
        return v

    def resample(self, sites, deriv=0):
        return [self.eval(s, deriv) for s in sites]

    # calculus and algebra

    def derivative(self):
        inv = self.inv_alpha_width()
        return SpaceSpline(self.ctx, self.degree, self.left, self.width,
                           [p.derivative().scale(inv) for p in self.pieces],
                           self.periodic, self.unit, self.sites,
                           smoothness=max(self.smoothness - 1, 0))

    def __add__(self, o):
        self._require_mesh(o)
        return SpaceSpline(self.ctx, self.degree, self.left, self.width,
                           [a + b for a, b in zip(self.pieces, o.pieces)],
                           self.periodic, self.unit, self.sites,
                           smoothness=min(self.smoothness, o.smoothness))

    def __sub__(self, o):
        self._require_mesh(o)
        return SpaceSpline(self.ctx, self.degree, self.left, self.width,
                           [a - b for a, b in zip(self.pieces, o.pieces)],
                           self.periodic, self.unit, self.sites,
                           smoothness=min(self.smoothness, o.smoothness))

    def __mul__(self, o):
        self._require_mesh(o)
        return SpaceSpline(self.ctx, self.degree, self.left, self.width,
                           [a * b for a, b in zip(self.pieces, o.pieces)],
                           self.periodic, self.unit, self.sites,
                           smoothness=min(self.smoothness, o.smoothness))

    def __neg__(self):
        return SpaceSpline(self.ctx, self.degree, self.left, self.width,
                           [-p for p in self.pieces],
                           self.periodic, self.unit, self.sites,
                           smoothness=self.smoothness)

    def scale(self, s):
        return SpaceSpline(self.ctx, self.degree, self.left, self.width,
                           [p.scale(s) for p in self.pieces],
                           self.periodic, self.unit, self.sites,
                           smoothness=self.smoothness)

    def hull_with(self, o):
        self._require_mesh(o)
        out = []
        for a, b in zip(self.pieces, o.pieces):
            ca, cb = list(a.c), list(b.c)
            while len(ca) < len(cb):
                ca.append(self.ctx.zero)
            while len(cb) < len(ca):
                cb.append(self.ctx.zero)
            out.append(IPoly(self.ctx, [x.hull(y) for x, y in zip(ca, cb)]))
        return SpaceSpline(self.ctx, self.degree, self.left, self.width,
                           out, self.periodic, self.unit, self.sites,
                           smoothness=min(self.smoothness, o.smoothness))

    # norms (Sobolev spaces use the Fourier symbol (1+n^2)^(s/2))

    def linf(self, subdiv=4):
        out = None
        for i in range(self.n_pieces):
            m = self.piece_range(i, subdiv=subdiv).mag()
            out = m if out is None else out.max_(m)
        return out

    def l2sq_pieces(self, deriv=0):
        """Per-piece integrals of f^(deriv)^2 in the angle variable."""
        inv = self.inv_alpha_width()
        wa = self.alpha_width()
        out = []
        for p in self.pieces:
            q = p
            for _ in range(deriv):
                q = q.derivative()
            v = (q * q).definite_integral(0, 1) * wa
            if deriv:
                v = v * (inv ** (2 * deriv))
            out.append(v)
        return out

    def l2sq(self, deriv=0):
        acc = self.ctx.zero
        for v in self.l2sq_pieces(deriv):
            acc = acc + v
        return acc

    def hk_sq(self, k):
        """Squared H^k norm, sum_j binom(k,j) ||f^(j)||_L2^2 (exact symbol)."""
        acc = self.ctx.zero
        for j in range(k + 1):
            acc = acc + self.l2sq(j) * self.ctx.interval(math.comb(k, j))
        return acc

    def hk_homog_sq(self, k):
        return self.l2sq(k)

    def fourier(self, n):
        """Interval enclosure of (1/2pi) int f(a) e^{-i n a} da (unit "pi")."""
        if self.unit != "pi" or not self.periodic or self.span != 2:
            raise UnsupportedOrder("fourier coefficients need a 2pi-periodic pi-unit spline")
        ctx = self.ctx
        if n == 0:
            acc_r = ctx.zero
            for p in self.pieces:
                acc_r = acc_r + p.definite_integral(0, 1)
            w = ctx.from_fraction(self.width / self.span)
            return CInterval(acc_r * w, ctx.zero)
        deg = max(len(p.c) for p in self.pieces)
        ivals = _fourier_cell_integrals(ctx, n * self.width, deg)
        acc = CInterval(ctx.zero, ctx.zero)
        for i, p in enumerate(self.pieces):
            a_i = Fraction(-n) * (self.left + i * self.width)
            ph = _unit_phase(ctx, a_i)
            cell = CInterval(ctx.zero, ctx.zero)
            for m, cm in enumerate(p.c):
                cell = cell + ivals[m] * cm
            acc = acc + cell * ph
        w = ctx.from_fraction(self.width / self.span)
        return acc * w

    def h_half_sq(self, k, n_freq=None):
        """Squared H^(k+1/2) norm bound.

        Without n_freq this is the interpolation bound
        ||f||_{H^{k+1/2}}^2 <= ||f||_{H^k} ||f||_{H^{k+1}}. With n_freq it is
        the rigorous Fourier head plus the tail bound
        (1+n_freq^2)^(-1/2) (||f||_{H^{k+1}}^2 - head_{k+1}).
        """
        ctx = self.ctx
        hk1 = self.hk_sq(k + 1)
        if n_freq is None:
            hk = self.hk_sq(k)
            return (hk * hk1).sqrt()
        two_pi = ctx.pi_times(2)
        head_s = ctx.zero
        head_k1 = ctx.zero
        for n in range(-n_freq, n_freq + 1):
            a2 = self.fourier(n).abs2()
            sym = ctx.interval(1 + n * n)
            head_s = head_s + a2 * (sym ** k) * sym.sqrt()
            head_k1 = head_k1 + a2 * (sym ** (k + 1))
        tail = (hk1 - head_k1 * two_pi).max_(ctx.zero)
        decay = (ctx.interval(1 + n_freq * n_freq)).sqrt().recip()
        return head_s * two_pi + tail * decay

    def serialize(self):
        return {
            "degree": self.degree,
            "unit": self.unit,
            "periodic": self.periodic,
            "left": str(self.left),
            "width": str(self.width),
            "smoothness": self.smoothness,
            "pieces": [[c.serialize() for c in p.c] for p in self.pieces],
        }

    @classmethod
    def deserialize(cls, ctx, d):
        pieces = [IPoly(ctx, [ctx.deserialize(c) for c in pc])
                  for pc in d["pieces"]]
        return cls(ctx, d["degree"], Fraction(d["left"]), Fraction(d["width"]),
                   pieces, d["periodic"], d["unit"],
                   smoothness=d.get("smoothness"))


def _unit_phase(ctx, r):
    """e^{i pi r} for exact rational r, reduced mod 2."""
    r = Fraction(r) % 2
    ang = ctx.pi_times(r)
    return CInterval(ang.cos(), ang.sin())


def _fourier_cell_integrals(ctx, theta, length):
    """I_m = int_0^1 u^m e^{-i pi theta u} du for exact rational theta."""
    c = ctx.pi_times(theta)
    E = _unit_phase(ctx, -theta)
    inv_ic = CInterval(ctx.zero, -(c.recip()))
    one = CInterval(ctx.one, ctx.zero)
    out = [(one - E) * inv_ic]
    for m in range(1, length):
        out.append((out[m - 1] * ctx.interval(m) - E) * inv_ic)
    return out


# periodic interpolation

@lru_cache(maxsize=None)
def _periodic_band(degree):
    """Collocation band rho(d) = B_degree(d + (degree+1)/2), exact."""
    s0 = Fraction(degree + 1, 2)
    offs = []
    vals = []
    half = degree // 2
    lo = -half if degree % 2 == 0 else -(degree - 1) // 2
    hi = half if degree % 2 == 0 else (degree - 1) // 2
    for d in range(lo, hi + 1):
        v = cardinal_bspline_value(degree, d + s0)
        if v != 0:
            offs.append(d)
            vals.append(v)
    return tuple(offs), tuple(vals)


def _band_apply_fr(offs, vals, vec, n):
    # (M v)_i = sum_d rho_d v_{(i-d) mod n}, exact Fractions
    return [sum(vals[t] * vec[(i - offs[t]) % n] for t in range(len(offs)))
            for i in range(n)]


def _cyc_apply_iv(col, vec, n):
    out = []
    for i in range(n):
        acc = col[i] * vec[0]
        for j in range(1, n):
            acc = acc + col[(i - j) % n] * vec[j]
        out.append(acc)
    return out


def interpolate_periodic(ctx, samples, degree=10, left=Fraction(-1),
                         span=Fraction(2), unit="pi", target_width=None,
                         max_sweeps=200):
    """Certified periodic spline interpolant of interval samples.

    Samples sit at r_i = left + i*span/n. Returns a SpaceSpline whose
    enclosure contains every continuous interpolant realization, i.e. the
    exact spline through any selection of point values from the sample
    intervals.
    """
    import numpy as np

    if degree < 1 or degree > 12:
        raise UnsupportedOrder(f"spline degree {degree} outside 1..12")
    n = len(samples)
    if n <= degree + 1:
        raise DimensionMismatch("more samples than degree+1 required")
    samples = [s if isinstance(s, Interval) else ctx.interval(s)
               for s in samples]
    left, span = Fraction(left), Fraction(span)
    width = span / n

    offs, vals = _periodic_band(degree)
    col_m = np.zeros(n)
    for d, v in zip(offs, vals):
        col_m[d % n] += float(v)
    fft_m = np.fft.fft(col_m)
    if np.min(np.abs(fft_m)) < 1e-9:
        raise NotContracting("collocation symbol nearly singular")
    g_col_f = np.real(np.fft.ifft(1.0 / fft_m))

    f_mid = np.array([s.mid_float() for s in samples])
    c_tilde_f = np.real(np.fft.ifft(np.fft.fft(f_mid) / fft_m))
    c_tilde = [Fraction(float(x)) for x in c_tilde_f]

    # residual r = f - M c~ with the band product exact
    mc = _band_apply_fr(offs, vals, c_tilde, n)
    resid = [samples[i] - ctx.from_fraction(mc[i]) for i in range(n)]

    # contraction data: h = delta - g (*) m, kappa = ||h||_1 (exact)
    g_fr = [Fraction(float(x)) for x in g_col_f]
    gm = _band_apply_fr(offs, vals, g_fr, n)
    h_fr = [-v for v in gm]
    h_fr[0] += 1
    kappa = sum(abs(v) for v in h_fr)
    if kappa >= 1:
        raise NotContracting(f"preconditioned defect norm {float(kappa):.3g} >= 1")

    g_iv = [ctx.from_fraction(v) for v in g_fr]
    gr = _cyc_apply_iv(g_iv, resid, n)

    e = _contract_correction(ctx, gr, h_fr, kappa, n, target_width, max_sweeps)

    coeffs = [ctx.from_fraction(c_tilde[i]) + e[i] for i in range(n)]
    sites = periodic_sites(n, left, span)
    piece_left = left if degree % 2 == 1 else left - width / 2
    pieces = _pieces_from_coeffs(ctx, coeffs, degree, n)
    return SpaceSpline(ctx, degree, piece_left, width, pieces, True, unit, sites)


def _contract_correction(ctx, gr, h_fr, kappa, n, target_width, max_sweeps):
    sup = None
    for v in gr:
        m = v.mag()
        sup = m if sup is None else sup.max_(m)
    kap = ctx.from_fraction(kappa)
    beta = sup / (ctx.one - kap)
    slack = (kap * beta).sym_bound()
    e = [v + slack for v in gr]

    h_iv = [ctx.from_fraction(v) for v in h_fr]
    prev = max(v.wid_float() for v in e)
    goal = target_width if target_width is not None else 0.0
    for _ in range(max_sweeps):
        if prev <= goal:
            break
        he = _cyc_apply_iv(h_iv, e, n)
        e = [(gr[i] + he[i]).intersect(e[i]) for i in range(n)]
        cur = max(v.wid_float() for v in e)
        if cur > prev * 0.5:
            break
        prev = cur
    return e


@lru_cache(maxsize=None)
def _piece_mix_table(degree):
    """P_m(u) coefficient tables and the site alignment offset."""
    pieces = cardinal_bspline_pieces(degree)
    off = (degree + 1) // 2 if degree % 2 == 1 else degree // 2
    return pieces, off


def _pieces_from_coeffs(ctx, coeffs, degree, n):
    tables, off = _piece_mix_table(degree)
    fr_tables = _interval_tables(ctx, degree)
    out = []
    for j in range(n):
        acc = [ctx.zero] * (degree + 1)
        for m in range(degree + 1):
            c = coeffs[(j + off - m) % n]
            row = fr_tables[m]
            for d in range(degree + 1):
                t = row[d]
                if t is not None:
                    acc[d] = acc[d] + c * t
        out.append(IPoly(ctx, acc))
    return out


def _interval_tables(ctx, degree):
    cache = getattr(ctx, "_bspline_tables", None)
    if cache is None:
        cache = {}
        ctx._bspline_tables = cache
    got = cache.get(degree)
    if got is not None:
        return got
    tables, _ = _piece_mix_table(degree)
    rows = []
    for m in range(degree + 1):
        row = []
        for d in range(degree + 1):
            v = tables[m][d] if d < len(tables[m]) else Fraction(0)
            row.append(None if v == 0 else ctx.from_fraction(v))
        rows.append(row)
    cache[degree] = rows
    return rows


# clamped interpolation (for reproduction checks and non-periodic data)

@lru_cache(maxsize=None)
def _clamped_basis(degree, n_pieces, lo, hi):
    """Per-piece exact u-polynomials of the active basis functions."""
    knots = _clamped_knots(degree, n_pieces, Fraction(lo), Fraction(hi))
    p = degree
    w = (Fraction(hi) - Fraction(lo)) / n_pieces
    per_piece = []
    for l in range(n_pieces):
        span = p + l
        t_l = knots[span]
        polys = {span: (Fraction(1),)}
        for q in range(1, p + 1):
            new = {}
            for i in range(span - q, span + 1):
                acc = [Fraction(0)] * (q + 1)
                lowr = polys.get(i)
                if lowr is not None:
                    den = knots[i + q] - knots[i]
                    if den != 0:
                        a0 = (t_l - knots[i]) / den
                        a1 = w / den
                        _axpy_lin(acc, lowr, a0, a1)
                upr = polys.get(i + 1)
                if upr is not None:
                    den = knots[i + q + 1] - knots[i + 1]
                    if den != 0:
                        b0 = (knots[i + q + 1] - t_l) / den
                        b1 = -w / den
                        _axpy_lin(acc, upr, b0, b1)
                new[i] = tuple(acc)
            polys = new
        per_piece.append({i - p: v for i, v in polys.items()})
    return tuple(per_piece)


def _axpy_lin(acc, poly, a0, a1):
    # acc += (a0 + a1 u) * poly
    for i, c in enumerate(poly):
        if c == 0:
            continue
        acc[i] += a0 * c
        acc[i + 1] += a1 * c


@lru_cache(maxsize=None)
def _clamped_solver(degree, n_pieces, lo, hi):
    """Exact collocation matrix at Greville sites plus contraction data."""
    import numpy as np

    lo, hi = Fraction(lo), Fraction(hi)
    basis = _clamped_basis(degree, n_pieces, lo, hi)
    sites = greville_sites(degree, n_pieces, lo, hi)
    nb = len(sites)
    w = (hi - lo) / n_pieces

    rows = []
    for s in sites:
        rel = (s - lo) / w
        l = min(int(math.floor(rel)), n_pieces - 1)
        u = rel - l
        row = {}
        for bi, poly in basis[l].items():
            acc = Fraction(0)
            for c in reversed(poly):
                acc = acc * u + c
            if acc != 0:
                row[bi] = acc
        rows.append(row)

    m_f = np.zeros((nb, nb))
    for i, row in enumerate(rows):
        for j, v in row.items():
            m_f[i, j] = float(v)
    g_f = np.linalg.inv(m_f)
    g_fr = [[Fraction(float(g_f[i, j])) for j in range(nb)] for i in range(nb)]

    # H = I - G M exact; kappa = max row sum
    h = [[Fraction(0)] * nb for _ in range(nb)]
    for i in range(nb):
        gi = g_fr[i]
        hi_row = h[i]
        for k in range(nb):
            gik = gi[k]
            if gik == 0:
                continue
            for j, v in rows[k].items():
                hi_row[j] -= gik * v
        hi_row[i] += 1
    kappa = max(sum(abs(v) for v in row) for row in h)
    return rows, g_fr, h, kappa, sites


def interpolate_clamped(ctx, samples, degree=10, n_pieces=16,
                        lo=Fraction(-1), hi=Fraction(1), unit="plain",
                        target_width=None, max_sweeps=200):
    """Certified clamped-spline interpolant at Greville sites."""
    import numpy as np

    if degree < 1 or degree > 12:
        raise UnsupportedOrder(f"spline degree {degree} outside 1..12")
    lo, hi = Fraction(lo), Fraction(hi)
    rows, g_fr, h, kappa, sites = _clamped_solver(degree, n_pieces, lo, hi)
    nb = len(sites)
    if len(samples) != nb:
        raise DimensionMismatch(f"expected {nb} samples at greville sites")
    if kappa >= 1:
        raise NotContracting(f"preconditioned defect norm {float(kappa):.3g} >= 1")
    samples = [s if isinstance(s, Interval) else ctx.interval(s)
               for s in samples]

    m_f = np.zeros((nb, nb))
    for i, row in enumerate(rows):
        for j, v in row.items():
            m_f[i, j] = float(v)
    f_mid = np.array([s.mid_float() for s in samples])
    c_tilde_f = np.linalg.solve(m_f, f_mid)
    c_tilde = [Fraction(float(x)) for x in c_tilde_f]

    resid = []
    for i, row in enumerate(rows):
        acc = Fraction(0)
        for j, v in row.items():
            acc += v * c_tilde[j]
        resid.append(samples[i] - ctx.from_fraction(acc))

    g_iv = [[ctx.from_fraction(v) for v in row] for row in g_fr]
    gr = [_dot_iv(ctx, g_iv[i], resid) for i in range(nb)]

    sup = None
    for v in gr:
        m = v.mag()
        sup = m if sup is None else sup.max_(m)
    kap = ctx.from_fraction(kappa)
    beta = sup / (ctx.one - kap)
    slack = (kap * beta).sym_bound()
    e = [v + slack for v in gr]

    h_iv = [[ctx.from_fraction(v) for v in row] for row in h]
    prev = max(v.wid_float() for v in e)
    goal = target_width if target_width is not None else 0.0
    for _ in range(max_sweeps):
        if prev <= goal:
            break
        e_new = []
        for i in range(nb):
            acc = _dot_iv(ctx, h_iv[i], e)
            e_new.append((gr[i] + acc).intersect(e[i]))
        e = e_new
        cur = max(v.wid_float() for v in e)
        if cur > prev * 0.5:
            break
        prev = cur

    coeffs = [ctx.from_fraction(c_tilde[i]) + e[i] for i in range(nb)]
    basis = _clamped_basis(degree, n_pieces, lo, hi)
    width = (hi - lo) / n_pieces
    pieces = []
    for l in range(n_pieces):
        acc = [ctx.zero] * (degree + 1)
        for bi, poly in basis[l].items():
            c = coeffs[bi]
            for d, v in enumerate(poly):
                if v != 0:
                    acc[d] = acc[d] + c * ctx.from_fraction(v)
        pieces.append(IPoly(ctx, acc))
    return SpaceSpline(ctx, degree, lo, width, pieces, False, unit, sites)


def _dot_iv(ctx, row, vec):
    acc = ctx.zero
    for a, b in zip(row, vec):
        acc = acc + a * b
    return acc


# splash coupling

def splash_hull(columns, i1, i2):
    """Force exact sample equality between two sites by hulling.

    columns is a list of per-component sample lists. Returns new columns
    where both sites carry the hull of the two original enclosures, so the
    family certainly contains a configuration with an exact touch.
    """
    if i1 == i2:
        raise Infeasible("a splash needs two distinct abscissae")
    out = []
    for col in columns:
        if not (0 <= i1 < len(col) and 0 <= i2 < len(col)):
            raise DimensionMismatch("splash index outside the sample range")
        v = col[i1].hull(col[i2])
        new = list(col)
        new[i1] = v
        new[i2] = v
        out.append(new)
    return out


# time interpolation

class TimeTrack:
    """Cubic Hermite track of splines over a rational time grid."""

    __slots__ = ("ctx", "times", "cells")

    def __init__(self, ctx, times, cells):
        self.ctx = ctx
        self.times = [Fraction(t) for t in times]
        self.cells = cells

    @classmethod
    def hermite(cls, ctx, times, values, slopes):
        """Build from spline values and time-derivative splines at knots."""
        times = [Fraction(t) for t in times]
        if not (len(times) == len(values) == len(slopes)):
            raise DimensionMismatch("times, values and slopes must align")
        if len(times) < 2:
            raise DimensionMismatch("at least two time samples required")
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise DimensionMismatch("time grid must increase strictly")
        cells = []
        for j in range(len(times) - 1):
            tau = times[j + 1] - times[j]
            v0, v1 = values[j], values[j + 1]
            d0, d1 = slopes[j], slopes[j + 1]
            tau_iv = ctx.from_fraction(tau)
            dv = v1 - v0
            c0 = v0
            c1 = d0
            c2 = (dv.scale(ctx.interval(3)) - (d0.scale(ctx.interval(2)) + d1).scale(tau_iv)).scale(
                ctx.from_fraction(1 / tau ** 2))
            c3 = ((v0 - v1).scale(ctx.interval(2)) + (d0 + d1).scale(tau_iv)).scale(
                ctx.from_fraction(1 / tau ** 3))
            cells.append((c0, c1, c2, c3))
        return cls(ctx, times, cells)

    def _cell_index(self, t):
        t = Fraction(t)
        if t < self.times[0] or t > self.times[-1]:
            raise DimensionMismatch("time outside the track")
        for j in range(len(self.cells)):
            if t <= self.times[j + 1]:
                return j
        return len(self.cells) - 1

    def at_time(self, t, deriv=0):
        """Spline at an exact time (deriv = time-derivative order <= 2)."""
        t = Fraction(t)
        j = self._cell_index(t)
        tau = self.ctx.from_fraction(t - self.times[j])
        return self._eval_cell(j, tau, deriv)

    def window(self, t0, t1, deriv=0):
        """Coefficient hull over a time window [t0, t1]."""
        t0, t1 = Fraction(t0), Fraction(t1)
        if t1 < t0:
            raise DimensionMismatch("window endpoints out of order")
        j0 = self._cell_index(t0)
        j1 = self._cell_index(t1)
        out = None
        for j in range(j0, j1 + 1):
            a = max(t0, self.times[j]) - self.times[j]
            b = min(t1, self.times[j + 1]) - self.times[j]
            tau = self.ctx.from_fraction(a, b)
            v = self._eval_cell(j, tau, deriv)
            out = v if out is None else out.hull_with(v)
        return out

    def _eval_cell(self, j, tau, deriv):
        c0, c1, c2, c3 = self.cells[j]
        ctx = self.ctx
        if deriv == 0:
            return c0 + (c1 + (c2 + c3.scale(tau)).scale(tau)).scale(tau)
        if deriv == 1:
            return c1 + (c2.scale(ctx.interval(2))
                         + c3.scale(ctx.interval(3) * tau)).scale(tau)
        if deriv == 2:
            return c2.scale(ctx.interval(2)) + c3.scale(ctx.interval(6) * tau)
        raise UnsupportedOrder("hermite cells support time derivatives 0..2")
