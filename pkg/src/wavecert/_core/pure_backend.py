"""Pure-Python endpoint arithmetic on top of mpmath.libmp.

Mirrors mpfr_backend's surface. libmp guarantees correct directed rounding
for field operations, sqrt, and rational conversion; transcendental results
are computed at guard precision and widened by an explicit slop before the
final directed rounding, so an off-by-a-few-ulp result inside libmp cannot
break containment.
"""

import mpmath.libmp as _L

NAME = "pure"

_RND = {"d": "f", "u": "c", "n": "n"}

_GUARD = 24
_SLOP_BITS = 3


def _widened(x, prec, rnd):
    # x was computed at prec + _GUARD with error < 2**_SLOP_BITS ulps
    if rnd == "n":
        return _L.mpf_add(x, _L.fzero, prec, "n")
    man = x[1]
    w = prec + _GUARD
    mag_e = (x[2] + x[3]) if man else -w
    t = _L.from_man_exp(1, mag_e - w + _SLOP_BITS)
    if rnd == "d":
        return _L.mpf_sub(x, t, prec, "f")
    return _L.mpf_add(x, t, prec, "c")


def _trans(fn, a, prec, rnd):
    return _widened(fn(a, prec + _GUARD, "n"), prec, rnd)


def from_int(n, prec, rnd):
    return _L.from_int(n, prec, _RND[rnd])


def from_fraction(p, q, prec, rnd):
    return _L.from_rational(p, q, prec, _RND[rnd])


def from_man_exp(m, e, prec):
    return _L.from_man_exp(m, e, max(prec, max(m.bit_length(), 1)), "n")


def add(a, b, prec, rnd):
    return _L.mpf_add(a, b, prec, _RND[rnd])


def sub(a, b, prec, rnd):
    return _L.mpf_sub(a, b, prec, _RND[rnd])


def mul(a, b, prec, rnd):
    return _L.mpf_mul(a, b, prec, _RND[rnd])


def div(a, b, prec, rnd):
    return _L.mpf_div(a, b, prec, _RND[rnd])


def fma(a, b, c, prec, rnd):
    return _L.mpf_add(_L.mpf_mul(a, b), c, prec, _RND[rnd])


def sqrt(a, prec, rnd):
    return _L.mpf_sqrt(a, prec, _RND[rnd])


def exp(a, prec, rnd):
    return _trans(_L.mpf_exp, a, prec, rnd)


def log(a, prec, rnd):
    return _trans(_L.mpf_log, a, prec, rnd)


def sin(a, prec, rnd):
    return _trans(_L.mpf_sin, a, prec, rnd)


def cos(a, prec, rnd):
    return _trans(_L.mpf_cos, a, prec, rnd)


def tan(a, prec, rnd):
    return _trans(_L.mpf_tan, a, prec, rnd)


def cot(a, prec, rnd):
    w = prec + _GUARD
    q = _L.mpf_div(_L.mpf_cos(a, w + 10, "n"), _L.mpf_sin(a, w + 10, "n"), w, "n")
    return _widened(q, prec, rnd)


def atan(a, prec, rnd):
    return _trans(_L.mpf_atan, a, prec, rnd)


def pow_int(a, n, prec, rnd):
    if n >= 0 and n <= 2:
        if n == 0:
            return _L.fone
        if n == 1:
            return _L.mpf_add(a, _L.fzero, prec, _RND[rnd])
        return _L.mpf_mul(a, a, prec, _RND[rnd])
    return _widened(_L.mpf_pow_int(a, n, prec + _GUARD, "n"), prec, rnd)


def pi(prec, rnd):
    return _L.mpf_pi(prec, _RND[rnd])


def neg(a):
    return _L.mpf_neg(a)


def abs_(a):
    return _L.mpf_abs(a)


def cmp(a, b):
    return _L.mpf_cmp(a, b)


def sign(a):
    return _L.mpf_cmp(a, _L.fzero)


def is_finite(a):
    return a[1] != 0 or a == _L.fzero


def floor_int(a):
    return int(_L.to_int(a, "f"))


def man_exp(a):
    sgn, m, e, _ = a
    if m == 0:
        return (0, 0)
    return (-m if sgn else m, e)


def to_float(a, rnd):
    return _L.to_float(a, rnd=_RND[rnd])


def to_str(a):
    return _L.to_str(a, 20)
