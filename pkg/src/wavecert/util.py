"""Exact rational helpers shared across the rigorous modules.

Everything here is Fraction arithmetic: Bernoulli numbers, uniform cardinal
B-spline piece polynomials, and small combinatorial utilities. No rounding
happens in this module; interval enclosures are built later from these exact
values.
"""

import math
from fractions import Fraction
from functools import lru_cache

__all__ = ["bernoulli", "binom", "cardinal_bspline_pieces",
           "cardinal_bspline_value", "poly_eval_fr", "poly_derivative_fr",
           "poly_antiderivative_fr"]


@lru_cache(maxsize=None)
def _bernoulli_list(n):
    # B_0..B_n with B_1 = -1/2, via sum_{j<=m} C(m+1, j) B_j = 0
    out = [Fraction(1)]
    for m in range(1, n + 1):
        acc = Fraction(0)
        for j in range(m):
            acc += math.comb(m + 1, j) * out[j]
        out.append(-acc / (m + 1))
    return tuple(out)


def bernoulli(k):
    """Exact Bernoulli number B_k (B_1 = -1/2)."""
    return _bernoulli_list(k)[k]


def binom(n, k):
    return math.comb(n, k)


@lru_cache(maxsize=None)
def cardinal_bspline_pieces(degree):
    """Piece polynomials of the uniform cardinal B-spline of a given degree.

    Returns a tuple of degree+1 coefficient tuples (Fractions, low order
    first). Piece j is the restriction to [j, j+1] written in the local
    variable u = t - j, so the spline is supported on [0, degree+1] and
    integrates to one. Built by repeated convolution with the unit box:
    P_j^{k}(u) = int_0^u P_j^{k-1} + int_u^1 P_{j-1}^{k-1}.
    """
    pieces = [(Fraction(1),)]
    for _ in range(degree):
        nxt = []
        for j in range(len(pieces) + 1):
            acc = [Fraction(0)] * (len(pieces[0]) + 1)
            if j < len(pieces):
                anti = _antider(pieces[j])
                for i, c in enumerate(anti):
                    acc[i] += c
            if j > 0:
                anti = _antider(pieces[j - 1])
                full = poly_eval_fr(anti, Fraction(1))
                acc[0] += full
                for i, c in enumerate(anti):
                    acc[i] -= c
            nxt.append(tuple(acc))
        pieces = nxt
    return tuple(pieces)


def _antider(coeffs):
    return tuple([Fraction(0)] + [c / (i + 1) for i, c in enumerate(coeffs)])


def cardinal_bspline_value(degree, t, deriv=0):
    """Exact value of the order-deriv derivative of the cardinal B-spline."""
    t = Fraction(t)
    if t < 0 or t > degree + 1:
        return Fraction(0)
    j = min(int(t), degree)
    coeffs = cardinal_bspline_pieces(degree)[j]
    for _ in range(deriv):
        coeffs = poly_derivative_fr(coeffs)
    return poly_eval_fr(coeffs, t - j)


def poly_eval_fr(coeffs, x):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_derivative_fr(coeffs):
    if len(coeffs) <= 1:
        return (Fraction(0),)
    return tuple(c * i for i, c in enumerate(coeffs) if i >= 1)


def poly_antiderivative_fr(coeffs):
    return _antider(tuple(Fraction(c) for c in coeffs))
