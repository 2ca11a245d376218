"""Truncated Taylor series with interval coefficients (jets).

A jet of length L is a list [c_0, ..., c_{L-1}] of intervals with c_k
enclosing f^(k)(x)/k! simultaneously for every x ranged over by the inputs.
The recurrences below hold pointwise, so inclusion monotonicity of interval
arithmetic makes the composite jets valid derivative enclosures. Division,
sqrt and log require the constant term to avoid the singular point.
"""

from .errors import DomainViolation
from .interval import CInterval

__all__ = ["jet_const", "jet_var", "jet_add", "jet_sub", "jet_neg",
           "jet_scale", "jet_mul", "jet_recip", "jet_div", "jet_sqrt",
           "jet_log", "jet_exp", "jet_pow_int", "jet_derivative",
           "cjet_mul", "cjet_recip", "cjet_div", "jet_atan"]


def jet_const(ctx, v, L):
    out = [ctx.zero] * L
    out[0] = v
    return out


def jet_var(ctx, v, L):
    """Jet of the identity map evaluated on v."""
    out = [ctx.zero] * L
    out[0] = v
    if L > 1:
        out[1] = ctx.one
    return out


def jet_add(a, b):
    return [x + y for x, y in zip(a, b)]


def jet_sub(a, b):
    return [x - y for x, y in zip(a, b)]


def jet_neg(a):
    return [-x for x in a]


def jet_scale(a, c):
    return [x * c for x in a]


def jet_mul(a, b):
    L = min(len(a), len(b))
    out = []
    for k in range(L):
        acc = a[0] * b[k]
        for j in range(1, k + 1):
            acc = acc + a[j] * b[k - j]
        out.append(acc)
    return out


def jet_recip(a):
    if a[0].contains_zero():
        raise DomainViolation("reciprocal of a jet whose value straddles zero")
    L = len(a)
    r0 = a[0].recip()
    out = [r0]
    for k in range(1, L):
        acc = a[1] * out[k - 1]
        for j in range(2, k + 1):
            acc = acc + a[j] * out[k - j]
        out.append(-(r0 * acc))
    return out


def jet_div(a, b):
    return jet_mul(a, jet_recip(b))


def jet_sqrt(a):
    if not a[0].is_positive():
        raise DomainViolation("sqrt of a jet whose value is not strictly positive")
    L = len(a)
    c0 = a[0].sqrt()
    out = [c0]
    twice = c0 + c0
    for k in range(1, L):
        acc = a[k]
        for j in range(1, k):
            acc = acc - out[j] * out[k - j]
        out.append(acc / twice)
    return out


def jet_log(a):
    if not a[0].is_positive():
        raise DomainViolation("log of a jet whose value is not strictly positive")
    L = len(a)
    r = jet_recip(a)
    da = jet_derivative(a)
    dlog = jet_mul(da, r)
    out = [a[0].log()]
    for k in range(1, L):
        out.append(dlog[k - 1] / k)
    return out


def jet_exp(a):
    L = len(a)
    out = [a[0].exp()]
    for k in range(1, L):
        acc = None
        for j in range(1, k + 1):
            t = (a[j] * j) * out[k - j]
            acc = t if acc is None else acc + t
        out.append(acc / k)
    return out


def jet_atan(a):
    L = len(a)
    one = a[0].ctx.one
    denom = jet_add(jet_const(a[0].ctx, one, L), jet_mul(a, a))
    datan = jet_mul(jet_derivative(a), jet_recip(denom))
    out = [a[0].atan()]
    for k in range(1, L):
        out.append(datan[k - 1] / k)
    return out


def jet_pow_int(a, n):
    if n == 0:
        raise ValueError("power zero: use a constant jet instead")
    if n < 0:
        return jet_recip(jet_pow_int(a, -n))
    out = None
    base = a
    while n:
        if n & 1:
            out = base if out is None else jet_mul(out, base)
        n >>= 1
        if n:
            base = jet_mul(base, base)
    return out


def jet_derivative(a):
    """Jet of f' (one order shorter)."""
    return [a[k] * k for k in range(1, len(a))]


# complex-coefficient jets for holomorphic composites

def cjet_mul(a, b):
    L = min(len(a), len(b))
    out = []
    for k in range(L):
        acc = a[0] * b[k]
        for j in range(1, k + 1):
            acc = acc + a[j] * b[k - j]
        out.append(acc)
    return out


def cjet_recip(a):
    if a[0].abs2().contains_zero():
        raise DomainViolation("reciprocal of a complex jet whose value may vanish")
    L = len(a)
    r0 = a[0].recip()
    out = [r0]
    for k in range(1, L):
        acc = a[1] * out[k - 1]
        for j in range(2, k + 1):
            acc = acc + a[j] * out[k - j]
        out.append(-(r0 * acc))
    return out


def cjet_div(a, b):
    return cjet_mul(a, cjet_recip(b))
