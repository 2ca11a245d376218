"""Endpoint arithmetic on top of gmpy2 (MPFR).

Every function takes an explicit precision and rounding mode ('d' toward
-inf, 'u' toward +inf, 'n' nearest) and returns a correctly rounded mpfr.
Rounding state is confined to per-call gmpy2 contexts, never global.
"""

from functools import lru_cache

import gmpy2

NAME = "mpfr"

_ROUND = {"d": gmpy2.RoundDown, "u": gmpy2.RoundUp, "n": gmpy2.RoundToNearest}


@lru_cache(maxsize=None)
def _ctx(prec, rnd):
    return gmpy2.context(precision=prec, round=_ROUND[rnd])


_ZERO = gmpy2.mpfr(0)


def from_int(n, prec, rnd):
    return _ctx(prec, rnd).add(_ZERO, gmpy2.mpz(n))


def from_fraction(p, q, prec, rnd):
    return _ctx(prec, rnd).add(_ZERO, gmpy2.mpq(p, q))


def from_man_exp(m, e, prec):
    # exact provided m fits in prec bits
    c = _ctx(max(prec, max(m.bit_length(), 1)), "n")
    x = c.add(_ZERO, gmpy2.mpz(m))
    return c.mul_2exp(x, e) if e >= 0 else c.div_2exp(x, -e)


def add(a, b, prec, rnd):
    return _ctx(prec, rnd).add(a, b)


def sub(a, b, prec, rnd):
    return _ctx(prec, rnd).sub(a, b)


def mul(a, b, prec, rnd):
    return _ctx(prec, rnd).mul(a, b)


def div(a, b, prec, rnd):
    return _ctx(prec, rnd).div(a, b)


def fma(a, b, c, prec, rnd):
    return _ctx(prec, rnd).fma(a, b, c)


def sqrt(a, prec, rnd):
    return _ctx(prec, rnd).sqrt(a)


def exp(a, prec, rnd):
    return _ctx(prec, rnd).exp(a)


def log(a, prec, rnd):
    return _ctx(prec, rnd).log(a)


def sin(a, prec, rnd):
    return _ctx(prec, rnd).sin(a)


def cos(a, prec, rnd):
    return _ctx(prec, rnd).cos(a)


def tan(a, prec, rnd):
    return _ctx(prec, rnd).tan(a)


def cot(a, prec, rnd):
    return _ctx(prec, rnd).cot(a)


def atan(a, prec, rnd):
    return _ctx(prec, rnd).atan(a)


def pow_int(a, n, prec, rnd):
    return _ctx(prec, rnd).pow(a, n)


def pi(prec, rnd):
    return _ctx(prec, rnd).const_pi()


def neg(a):
    # exact only at the operand's own precision, never the thread default
    return _ctx(a.precision, "n").minus(a)


def abs_(a):
    return neg(a) if a < 0 else a


def cmp(a, b):
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


def sign(a):
    return cmp(a, _ZERO)


def is_finite(a):
    return gmpy2.is_finite(a)


def floor_int(a):
    m, e = a.as_mantissa_exp()
    m, e = int(m), int(e)
    if e >= 0:
        return m << e
    return m >> -e


def man_exp(a):
    if a == 0:
        return (0, 0)
    m, e = a.as_mantissa_exp()
    m, e = int(m), int(e)
    tz = (m & -m).bit_length() - 1
    return (m >> tz, e + tz)


def to_float(a, rnd):
    return float(_ctx(53, rnd).add(_ZERO, a))


def to_str(a):
    return repr(a)
