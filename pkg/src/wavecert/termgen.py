"""Symbolic expansion of evolved-minus-reference products into canonical terms.

Two families of unknowns describe the same moving interface: an evolved one
(curve z, amplitude omega, transport scalar phi) and a reference one
(curve x, amplitude gamma, transport scalar psi).  Their mismatches are
first-class atoms:

    D = z - x,        d = omega - gamma,        calD = phi - psi.

Integrands are products of a small catalog of factor shapes: differences of
curve derivatives between the target point alpha and the source point
alpha - beta ("chords"), reciprocal powers of a chord (scalar form or
squared-modulus form), dot products of chords, a 90-degree rotation on a
vector factor, amplitudes evaluated at the source point, and point values at
the target.  Differentiation follows the offset convention: d/dalpha applied
to a chord produces the chord of the next derivative, applied to a source
amplitude it raises the amplitude order.

difference_expand rewrites (evolved product) - (reference product) as a sum
over slot assignments: every factor independently either keeps its reference
version or contributes its difference version, each argument of a dot product
counts as its own slot, and a reciprocal power in difference position stays a
single factor.  The all-reference assignment cancels in the subtraction, so a
product of a distinct factors yields exactly 2^a - 1 terms.

Canonical form: factors are sorted by a fixed key, dot arguments are sorted,
reciprocal powers of the same family merge, and terms with equal factor
sequences merge by adding their rational coefficients.  Term order inside a
TermSum is the lexicographic order of the canonical factor sequences.  Every
count reported by this module refers to that convention.
"""

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import (
    NotComplexifiable,
    StructureMismatch,
    Unclassifiable,
    UnknownExpression,
)

__all__ = [
    "Atom", "Deriv", "BetaDiff", "Perp", "DotProd", "RecipPow", "Prod",
    "Sum", "Pow", "PVIntegral", "Const",
    "CurveDiff", "Amp", "Point", "Recip", "Dot", "Term", "TermSum", "Theta",
    "chord", "amp", "br_integrand", "br_difference", "reference_counterpart",
    "differentiate", "difference_expand", "complex_form", "classify",
    "diff_degree", "emit", "parse_terms",
    "TrigPoly", "random_surface_env", "eval_expr", "eval_terms",
]

_CURVE_VARS = ("x", "z", "D")
_AMP_SWAP = {"omega": "gamma", "phi": "psi"}
_Z_WORLD = {"z", "omega", "phi"}
_X_WORLD = {"x", "gamma", "psi"}
_DIFF_OF = {"z": "D", "omega": "d", "phi": "calD"}
_SWAP = {"z": "x", "omega": "gamma", "phi": "psi"}
_VAR_RANK = {
    "x": 0, "z": 1, "D": 2,
    "gamma": 3, "omega": 4, "d": 5, "psi": 6, "phi": 7, "calD": 8, "Q2": 9,
}


# ---------------------------------------------------------------------------
# canonical factors


@dataclass(frozen=True)
class CurveDiff:
    """Chord of a curve derivative, optionally rotated 90 degrees."""

    var: str
    order: int
    perp: bool = False


@dataclass(frozen=True)
class Amp:
    """Derivative of a scalar amplitude evaluated at the source point."""

    var: str
    order: int


@dataclass(frozen=True)
class Point:
    """Derivative of a variable evaluated at the target point."""

    var: str
    order: int


@dataclass(frozen=True)
class Recip:
    """Reciprocal power of a chord.

    form "plain" is 1/(v(alpha)-v(beta))^power; form "abs2" is
    1/|v(alpha)-v(beta)|^(2*power).  state is the family the factor belongs
    to: "z", "x", or "diff" for the z-version minus the x-version kept as a
    single small factor.
    """

    form: str
    power: int
    state: str


@dataclass(frozen=True)
class Dot:
    """Euclidean product of two chords; arguments are kept sorted."""

    a: tuple
    b: tuple


def _arg_key(arg):
    var, order = arg
    return (order, _VAR_RANK[var])


def _dot(a, b):
    if _arg_key(b) < _arg_key(a):
        a, b = b, a
    return Dot(a, b)


def _factor_key(f):
    if isinstance(f, Recip):
        return (0, f.form, f.power, f.state)
    if isinstance(f, CurveDiff):
        return (1, f.order, _VAR_RANK[f.var], f.perp)
    if isinstance(f, Dot):
        return (2,) + _arg_key(f.a) + _arg_key(f.b)
    if isinstance(f, Amp):
        return (3, f.order, _VAR_RANK[f.var])
    if isinstance(f, Point):
        return (4, f.order, _VAR_RANK[f.var])
    raise UnknownExpression(f"not a factor: {f!r}")


def _canon(factors):
    """Sort factors and merge reciprocal powers of the same family."""
    powers = {}
    rest = []
    for f in factors:
        if isinstance(f, Recip) and f.state != "diff":
            k = (f.form, f.state)
            powers[k] = powers.get(k, 0) + f.power
        else:
            rest.append(f)
    rest.extend(Recip(form, p, state) for (form, state), p in powers.items())
    return tuple(sorted(rest, key=_factor_key))


def _seq_key(factors):
    return tuple(_factor_key(f) for f in factors)


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Term:
    """One canonical monomial: rational coefficient times sorted factors."""

    coeff: Fraction
    factors: tuple

    def plain(self):
        bits = [str(self.coeff)]
        for f in self.factors:
            if isinstance(f, CurveDiff):
                tag = "chord(%s,%d)" % (f.var, f.order)
                bits.append(tag + "^perp" if f.perp else tag)
            elif isinstance(f, Amp):
                bits.append("amp(%s,%d)" % (f.var, f.order))
            elif isinstance(f, Point):
                bits.append("point(%s,%d)" % (f.var, f.order))
            elif isinstance(f, Recip):
                bits.append("recip(%s,%d,%s)" % (f.form, f.power, f.state))
            else:
                bits.append("dot(%s%d,%s%d)" % (f.a[0], f.a[1], f.b[0], f.b[1]))
        return " * ".join(bits)

    def __str__(self):
        return self.plain()


class TermSum:
    """Merged, canonically ordered sum of terms."""

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        self.terms = tuple(terms)

    @classmethod
    def from_pairs(cls, pairs):
        acc = {}
        for c, factors in pairs:
            key = _canon(factors)
            acc[key] = acc.get(key, Fraction(0)) + Fraction(c)
        kept = [Term(c, f) for f, c in acc.items() if c != 0]
        kept.sort(key=lambda t: _seq_key(t.factors))
        return cls(tuple(kept))

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    def __eq__(self, other):
        return isinstance(other, TermSum) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        return f"TermSum({len(self.terms)} terms)"


def diff_degree(term):
    """Total multiplicity of difference atoms (D, d, calD) in a term."""
    n = 0
    for f in term.factors:
        if isinstance(f, CurveDiff):
            n += f.var == "D"
        elif isinstance(f, (Amp, Point)):
            n += f.var in ("d", "calD", "D")
        elif isinstance(f, Recip):
            n += f.state == "diff"
        elif isinstance(f, Dot):
            n += (f.a[0] == "D") + (f.b[0] == "D")
    return n


# ---------------------------------------------------------------------------
# expression trees


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Atom:
    """A bare variable; where is "alpha", "beta" (offset source) or "free"."""

    var: str
    where: str = "beta"


@dataclass(frozen=True)
class Deriv:
    base: Atom
    order: int


@dataclass(frozen=True)
class BetaDiff:
    """Value at the target point minus value at the source point."""

    inner: object


@dataclass(frozen=True)
class Perp:
    inner: object


@dataclass(frozen=True)
class DotProd:
    left: object
    right: object


@dataclass(frozen=True)
class RecipPow:
    """Reciprocal chord power.  offset=False freezes the source point, so a
    target derivative then hits only the alpha argument."""

    var: str
    form: str = "plain"
    power: int = 1
    offset: bool = True


@dataclass(frozen=True)
class Prod:
    factors: tuple


@dataclass(frozen=True)
class Sum:
    parts: tuple  # of (Fraction, Expr) pairs


@dataclass(frozen=True)
class Pow:
    base: object
    n: int


@dataclass(frozen=True)
class PVIntegral:
    """Principal-value integral over the source point; transparent to both
    normalization and pointwise evaluation."""

    integrand: object


def chord(var, order=0, perp=False):
    inner = Atom(var) if order == 0 else Deriv(Atom(var), order)
    e = BetaDiff(inner)
    return Perp(e) if perp else e


def amp(var, order=0):
    return Atom(var) if order == 0 else Deriv(Atom(var), order)


def br_integrand(form="vector", evolved=True):
    """Integrand of the chord-kernel velocity integral, before the 1/(2 pi)."""
    curve = "z" if evolved else "x"
    dens = "omega" if evolved else "gamma"
    if form == "complex":
        return Prod((RecipPow(curve, "plain", 1), Atom(dens)))
    if form == "vector":
        return Prod((Perp(BetaDiff(Atom(curve))),
                     RecipPow(curve, "abs2", 1),
                     Atom(dens)))
    raise ValueError(f"unknown form {form!r}")


# ---------------------------------------------------------------------------
# differentiation


def _zero():
    return Sum(())


def _one_part(e):
    return Sum(((Fraction(1), e),))


def _concat(sums):
    parts = []
    for s in sums:
        parts.extend(s.parts)
    return Sum(tuple(parts))


def _scaled(c, s):
    return Sum(tuple((c * q, e) for q, e in s.parts))


def _flat_prod(factors):
    out = []
    for f in factors:
        if isinstance(f, Prod):
            out.extend(f.factors)
        else:
            out.append(f)
    return Prod(tuple(out))


def _d1(e):
    """One target derivative, returned as a Sum of coefficient/expr pairs."""
    if isinstance(e, Const):
        return _zero()
    if isinstance(e, Atom):
        if e.where == "free":
            return _zero()
        return _one_part(Deriv(e, 1))
    if isinstance(e, Deriv):
        if e.base.where == "free":
            return _zero()
        return _one_part(Deriv(e.base, e.order + 1))
    if isinstance(e, BetaDiff):
        return Sum(tuple((c, BetaDiff(t)) for c, t in _d1(e.inner).parts))
    if isinstance(e, Perp):
        return Sum(tuple((c, Perp(t)) for c, t in _d1(e.inner).parts))
    if isinstance(e, DotProd):
        left = tuple((c, DotProd(t, e.right)) for c, t in _d1(e.left).parts)
        right = tuple((c, DotProd(e.left, t)) for c, t in _d1(e.right).parts)
        return Sum(left + right)
    if isinstance(e, RecipPow):
        lifted = RecipPow(e.var, e.form, e.power + 1, e.offset)
        if not e.offset:
            if e.form != "plain":
                raise UnknownExpression(
                    "frozen-source derivative only supported for plain form")
            grad = Deriv(Atom(e.var, "alpha"), 1)
            return Sum(((Fraction(-e.power), _flat_prod((lifted, grad))),))
        if e.form == "plain":
            grad = chord(e.var, 1)
            return Sum(((Fraction(-e.power), _flat_prod((lifted, grad))),))
        grad = DotProd(chord(e.var, 0), chord(e.var, 1))
        return Sum(((Fraction(-2 * e.power), _flat_prod((lifted, grad))),))
    if isinstance(e, Prod):
        parts = []
        for i, f in enumerate(e.factors):
            for c, t in _d1(f).parts:
                rebuilt = e.factors[:i] + (t,) + e.factors[i + 1:]
                parts.append((c, _flat_prod(rebuilt)))
        return Sum(tuple(parts))
    if isinstance(e, Sum):
        return _concat([_scaled(c, _d1(t)) for c, t in e.parts])
    if isinstance(e, Pow):
        parts = []
        for c, t in _d1(e.base).parts:
            parts.append((Fraction(e.n) * c,
                          _flat_prod((Pow(e.base, e.n - 1), t))))
        return Sum(tuple(parts))
    if isinstance(e, PVIntegral):
        return Sum(tuple((c, PVIntegral(t)) for c, t in _d1(e.integrand).parts))
    raise UnknownExpression(f"cannot differentiate {e!r}")


def differentiate(e, k):
    """k target derivatives of e; k = 0 returns e unchanged."""
    if k < 0:
        raise ValueError("derivative order must be >= 0")
    for _ in range(k):
        e = _d1(e)
    return e


# ---------------------------------------------------------------------------
# normalization to monomials


def _atom_factor(var, order, where):
    if where == "alpha":
        return Point(var, order)
    return Amp(var, order)


def _single_chord(e, what):
    """Normalize e and require a lone un-rotated chord factor per monomial."""
    out = []
    for c, fac in _monomials(e):
        if len(fac) != 1 or not isinstance(fac[0], CurveDiff) or fac[0].perp:
            raise UnknownExpression(f"{what} must be a plain chord: {e!r}")
        out.append((c, fac[0]))
    return out


def _monomials(e):
    """Flatten e into (coefficient, factor tuple) pairs; not yet merged."""
    if isinstance(e, Const):
        return [(e.value, ())]
    if isinstance(e, Atom):
        return [(Fraction(1), (_atom_factor(e.var, 0, e.where),))]
    if isinstance(e, Deriv):
        b = e.base
        return [(Fraction(1), (_atom_factor(b.var, e.order, b.where),))]
    if isinstance(e, BetaDiff):
        out = []
        for c, f in _mono_single_eval(e.inner):
            if f.var not in _CURVE_VARS:
                raise UnknownExpression(
                    f"chord of a non-curve variable {f.var!r}")
            out.append((c, (CurveDiff(f.var, f.order),)))
        return out
    if isinstance(e, Perp):
        out = []
        for c, fac in _monomials(e.inner):
            if len(fac) != 1 or not isinstance(fac[0], CurveDiff) or fac[0].perp:
                raise UnknownExpression("rotation applies to a single chord")
            g = fac[0]
            out.append((c, (CurveDiff(g.var, g.order, perp=True),)))
        return out
    if isinstance(e, DotProd):
        lm = _single_chord(e.left, "dot argument")
        rm = _single_chord(e.right, "dot argument")
        return [(cl * cr, (_dot((gl.var, gl.order), (gr.var, gr.order)),))
                for cl, gl in lm for cr, gr in rm]
    if isinstance(e, RecipPow):
        if e.var not in ("z", "x"):
            raise UnknownExpression(
                f"reciprocal chord attaches to a curve family, not {e.var!r}")
        return [(Fraction(1), (Recip(e.form, e.power, e.var),))]
    if isinstance(e, Prod):
        acc = [(Fraction(1), ())]
        for f in e.factors:
            fm = _monomials(f)
            acc = [(c * cf, fac + ff) for c, fac in acc for cf, ff in fm]
        return acc
    if isinstance(e, Sum):
        out = []
        for c, t in e.parts:
            out.extend((c * ct, fac) for ct, fac in _monomials(t))
        return out
    if isinstance(e, Pow):
        if e.n < 0:
            raise UnknownExpression("negative powers only via RecipPow")
        acc = [(Fraction(1), ())]
        base = _monomials(e.base)
        for _ in range(e.n):
            acc = [(c * cb, fac + fb) for c, fac in acc for cb, fb in base]
        return acc
    if isinstance(e, PVIntegral):
        return _monomials(e.integrand)
    raise UnknownExpression(f"cannot normalize {e!r}")


def _mono_single_eval(e):
    """Monomials of e that are single Amp/Point factors (for chord interiors)."""
    out = []
    for c, fac in _monomials(e):
        if len(fac) != 1 or not isinstance(fac[0], (Amp, Point)):
            raise UnknownExpression(f"chord interior too complex: {e!r}")
        out.append((c, fac[0]))
    return out


def _monomial_map(e):
    acc = {}
    for c, fac in _monomials(e):
        key = _canon(fac)
        acc[key] = acc.get(key, Fraction(0)) + c
    return {k: v for k, v in acc.items() if v != 0}


# ---------------------------------------------------------------------------
# world checks and the difference expansion


def _factor_vars(f):
    if isinstance(f, (CurveDiff, Amp, Point)):
        return (f.var,)
    if isinstance(f, Recip):
        return (f.state,) if f.state != "diff" else ("D",)
    return (f.a[0], f.b[0])


def _world_violation(fmap, allowed, label):
    for fac in fmap:
        for f in fac:
            for v in _factor_vars(f):
                if v not in allowed:
                    raise StructureMismatch(
                        f"{label} side contains {v!r}; expected only "
                        f"{sorted(allowed)}")


def _swap_factor(f):
    if isinstance(f, CurveDiff):
        return CurveDiff("x", f.order, f.perp)
    if isinstance(f, Amp):
        return Amp(_SWAP[f.var], f.order)
    if isinstance(f, Point):
        return Point(_SWAP[f.var], f.order)
    if isinstance(f, Recip):
        return Recip(f.form, f.power, "x")
    return _dot(("x", f.a[1]), ("x", f.b[1]))


def _slot_options(f):
    """Options (factor, difference multiplicity) for one evolved factor."""
    if isinstance(f, CurveDiff):
        return [(CurveDiff("x", f.order, f.perp), 0),
                (CurveDiff("D", f.order, f.perp), 1)]
    if isinstance(f, Amp):
        return [(Amp(_SWAP[f.var], f.order), 0),
                (Amp(_DIFF_OF[f.var], f.order), 1)]
    if isinstance(f, Point):
        return [(Point(_SWAP[f.var], f.order), 0),
                (Point(_DIFF_OF[f.var], f.order), 1)]
    if isinstance(f, Recip):
        return [(Recip(f.form, f.power, "x"), 0),
                (Recip(f.form, f.power, "diff"), 1)]
    opts = []
    for va, na in ((("x", f.a[1]), 0), (("D", f.a[1]), 1)):
        for vb, nb in ((("x", f.b[1]), 0), (("D", f.b[1]), 1)):
            opts.append((_dot(va, vb), na + nb))
    return opts


def difference_expand(ez, ex):
    """Expand (evolved expression) - (reference counterpart) canonically.

    ez must use only evolved atoms (z, omega, phi), ex only reference atoms
    (x, gamma, psi), and the two must agree monomial-by-monomial under the
    variable swap; otherwise StructureMismatch.  The weight atom Q2 is
    rejected here because its mismatch is not one of the difference atoms;
    split it off before expanding.
    """
    mz = _monomial_map(ez)
    mx = _monomial_map(ex)
    for fmap, label in ((mz, "evolved"), (mx, "reference")):
        for fac in fmap:
            for f in fac:
                if "Q2" in _factor_vars(f):
                    raise StructureMismatch(
                        "Q2 has no difference atom; factor the weight out "
                        "before expanding")
    _world_violation(mz, _Z_WORLD, "evolved")
    _world_violation(mx, _X_WORLD, "reference")
    swapped = {}
    for fac, c in mz.items():
        key = _canon(tuple(_swap_factor(f) for f in fac))
        swapped[key] = swapped.get(key, Fraction(0)) + c
    if swapped != mx:
        raise StructureMismatch(
            "sides are not identical up to the variable swap")

    acc = {}
    for fac, c in mz.items():
        slots = [_slot_options(f) for f in fac]
        for combo in itertools.product(*slots):
            ndiff = sum(n for _, n in combo)
            if ndiff == 0:
                continue
            key = _canon(tuple(f for f, _ in combo))
            acc[key] = acc.get(key, Fraction(0)) + c
    return TermSum.from_pairs((c, fac) for fac, c in acc.items())


def reference_counterpart(e):
    """Rewrite an evolved-family expression in the reference variables."""
    if isinstance(e, (Const,)):
        return e
    if isinstance(e, Atom):
        return Atom(_SWAP.get(e.var, e.var), e.where)
    if isinstance(e, Deriv):
        return Deriv(reference_counterpart(e.base), e.order)
    if isinstance(e, BetaDiff):
        return BetaDiff(reference_counterpart(e.inner))
    if isinstance(e, Perp):
        return Perp(reference_counterpart(e.inner))
    if isinstance(e, DotProd):
        return DotProd(reference_counterpart(e.left),
                       reference_counterpart(e.right))
    if isinstance(e, RecipPow):
        return RecipPow(_SWAP.get(e.var, e.var), e.form, e.power, e.offset)
    if isinstance(e, Prod):
        return _flat_prod(tuple(reference_counterpart(f) for f in e.factors))
    if isinstance(e, Sum):
        return Sum(tuple((c, reference_counterpart(t)) for c, t in e.parts))
    if isinstance(e, Pow):
        return Pow(reference_counterpart(e.base), e.n)
    if isinstance(e, PVIntegral):
        return PVIntegral(reference_counterpart(e.integrand))
    raise UnknownExpression(f"cannot swap {e!r}")


# ---------------------------------------------------------------------------
# complex form


def _complexify(e):
    if isinstance(e, (Const, Atom, Deriv, BetaDiff, RecipPow)):
        if isinstance(e, RecipPow) and e.form == "abs2":
            raise NotComplexifiable(
                "squared-modulus reciprocal without a paired rotated chord")
        return e
    if isinstance(e, (Perp, DotProd)):
        raise NotComplexifiable(f"{type(e).__name__} outside a product")
    if isinstance(e, Sum):
        return Sum(tuple((c, _complexify(t)) for c, t in e.parts))
    if isinstance(e, PVIntegral):
        return PVIntegral(_complexify(e.integrand))
    if isinstance(e, Pow):
        return Pow(_complexify(e.base), e.n)
    if isinstance(e, Prod):
        perp_vars = []
        rest = []
        for f in e.factors:
            if (isinstance(f, Perp) and isinstance(f.inner, BetaDiff)
                    and isinstance(f.inner.inner, Atom)):
                perp_vars.append(f.inner.inner.var)
            elif isinstance(f, DotProd):
                raise NotComplexifiable("dot products have no scalar form")
            else:
                rest.append(f)
        if not perp_vars:
            return _flat_prod(tuple(_complexify(f) for f in rest))
        if len(perp_vars) > 1:
            raise NotComplexifiable("more than one rotated chord")
        v = perp_vars[0]
        out = []
        matched = False
        for f in rest:
            if (not matched and isinstance(f, RecipPow) and f.var == v
                    and f.form == "abs2" and f.power == 1):
                out.append(RecipPow(v, "plain", 1, f.offset))
                matched = True
            else:
                out.append(_complexify(f))
        if not matched:
            raise NotComplexifiable(
                "rotated chord lacks a unit squared-modulus reciprocal")
        return _flat_prod(tuple(out))
    raise UnknownExpression(f"cannot complexify {e!r}")


def complex_form(e, k=0):
    """Difference expansion of the scalar complex form of e.

    e is an evolved-family integrand, either already scalar or a vector
    product whose rotated chord pairs with a unit squared-modulus reciprocal
    of the same curve (the pair collapses to a plain reciprocal chord, with
    the constant rotation absorbed by convention).  The reference counterpart
    is generated by the variable swap, both sides take k target derivatives,
    and the difference is expanded canonically.
    """
    ec = _complexify(e)
    ez = differentiate(ec, k)
    ex = differentiate(reference_counterpart(ec), k)
    return difference_expand(ez, ex)


def br_difference(form="vector", k=0):
    """Canonical expansion of the k-th derivative of the velocity mismatch."""
    ez = differentiate(br_integrand(form, evolved=True), k)
    ex = differentiate(br_integrand(form, evolved=False), k)
    return difference_expand(ez, ex)


# ---------------------------------------------------------------------------
# kernel classification


@dataclass(frozen=True)
class Theta:
    """Kernel label: chord-difference exponents a, reciprocal power b1, and
    amplitude derivative order b2 (-1 when the kernel acts on d)."""

    a: tuple
    b1: int
    b2: int

    def __str__(self):
        a = ",".join(str(n) for n in self.a)
        return f"Theta^({a})_({self.b1},{self.b2})"


def classify(term):
    """Theta label of a canonical term, or Unclassifiable with the term
    reported verbatim.

    The taxonomy covers scalar-kernel terms that are linear in the
    difference atoms: reference chord factors of orders 1..4, one plain
    reference reciprocal, and either (a) one D-chord operand plus one
    amplitude gamma factor whose order is b2, or (b) one amplitude d operand
    and no gamma factor, labelled b2 = -1.
    """
    a = [0, 0, 0, 0]
    b1 = 0
    gamma_orders = []
    operands = []

    def reject(why):
        raise Unclassifiable(f"{why}: {term.plain()}")

    for f in term.factors:
        if isinstance(f, Recip):
            if f.form != "plain" or f.state != "x":
                reject("kernel reciprocal must be a plain reference power")
            b1 += f.power
        elif isinstance(f, CurveDiff):
            if f.perp:
                reject("rotated chord outside the taxonomy")
            if f.var == "x":
                if not 1 <= f.order <= 4:
                    reject("reference chord order outside 1..4")
                a[f.order - 1] += 1
            elif f.var == "D":
                operands.append(("D", f.order))
            else:
                reject("evolved atom survived expansion")
        elif isinstance(f, Amp):
            if f.var == "gamma":
                gamma_orders.append(f.order)
            elif f.var == "d":
                operands.append(("d", f.order))
            else:
                reject(f"amplitude {f.var!r} outside the taxonomy")
        else:
            reject(f"factor {type(f).__name__} outside the taxonomy")

    if b1 == 0:
        reject("no reciprocal kernel factor")
    if len(operands) != 1:
        reject("kernel must act on exactly one difference factor")
    var, _ = operands[0]
    if var == "D":
        if len(gamma_orders) != 1:
            reject("D operand needs exactly one amplitude factor")
        b2 = gamma_orders[0]
    else:
        if gamma_orders:
            reject("d operand excludes amplitude factors")
        b2 = -1
    return Theta(tuple(a), b1, b2)


# ---------------------------------------------------------------------------
# emission


_TEX_VAR = {
    "x": "x", "z": "z", "D": "D",
    "gamma": r"\gamma", "omega": r"\omega", "d": "d",
    "psi": r"\psi", "phi": r"\varphi", "calD": r"\mathcal{D}",
    "Q2": "Q^{2}",
}


def _tex_deriv(var, order, at):
    name = f"{_TEX_VAR[var]}({at})"
    if order == 0:
        return name
    if order == 1:
        return r"\partial_{\alpha} " + name
    return r"\partial_{\alpha}^{%d} " % order + name


def _tex_chord_body(var, order):
    return (_tex_deriv(var, order, r"\alpha") + "-"
            + _tex_deriv(var, order, r"\beta"))


def _tex_recip_one(form, power, evolved):
    chord_tex = "x(\\alpha)-x(\\beta)"
    if evolved:
        chord_tex += "+D(\\alpha)-D(\\beta)"
    if form == "plain":
        if power == 1:
            return r"\frac{1}{%s}" % chord_tex
        return r"\frac{1}{\left(%s\right)^{%d}}" % (chord_tex, power)
    return r"\frac{1}{\left|%s\right|^{%d}}" % (chord_tex, 2 * power)


def _tex_factor(f):
    if isinstance(f, CurveDiff):
        body = r"\left(%s\right)" % _tex_chord_body(f.var, f.order)
        return body + (r"^{\perp}" if f.perp else "")
    if isinstance(f, Amp):
        return _tex_deriv(f.var, f.order, r"\beta")
    if isinstance(f, Point):
        return _tex_deriv(f.var, f.order, r"\alpha")
    if isinstance(f, Recip):
        if f.state == "diff":
            return (r"\left(%s-%s\right)"
                    % (_tex_recip_one(f.form, f.power, True),
                       _tex_recip_one(f.form, f.power, False)))
        return _tex_recip_one(f.form, f.power, False)
    left = r"\left(%s\right)" % _tex_chord_body(f.a[0], f.a[1])
    right = r"\left(%s\right)" % _tex_chord_body(f.b[0], f.b[1])
    return left + r"\cdot" + right


def _tex_coeff(c, has_factors):
    sign = "-" if c < 0 else "+"
    mag = abs(c)
    if mag == 1 and has_factors:
        return sign
    if mag.denominator == 1:
        return f"{sign}{mag.numerator}"
    return sign + r"\frac{%d}{%d}" % (mag.numerator, mag.denominator)


def _needs_integral(factors):
    return any(not isinstance(f, Point) for f in factors)


def _tex_term(t):
    body = "".join(_tex_factor(f) for f in t.factors)
    coeff = _tex_coeff(t.coeff, bool(t.factors))
    if _needs_integral(t.factors):
        return coeff + r"\int " + body + r"\,d\beta"
    return coeff + body if body else coeff + ("1" if abs(t.coeff) == 1 else "")


_FACTOR_TAGS = {CurveDiff: "chord", Amp: "amp", Point: "point",
                Recip: "recip", Dot: "dot"}


def _factor_to_obj(f):
    if isinstance(f, CurveDiff):
        return {"k": "chord", "var": f.var, "order": f.order, "perp": f.perp}
    if isinstance(f, Amp):
        return {"k": "amp", "var": f.var, "order": f.order}
    if isinstance(f, Point):
        return {"k": "point", "var": f.var, "order": f.order}
    if isinstance(f, Recip):
        return {"k": "recip", "form": f.form, "power": f.power,
                "state": f.state}
    return {"k": "dot", "a": list(f.a), "b": list(f.b)}


def _factor_from_obj(o):
    kind = o.get("k")
    if kind == "chord":
        return CurveDiff(o["var"], o["order"], o["perp"])
    if kind == "amp":
        return Amp(o["var"], o["order"])
    if kind == "point":
        return Point(o["var"], o["order"])
    if kind == "recip":
        return Recip(o["form"], o["power"], o["state"])
    if kind == "dot":
        return _dot(tuple(o["a"]), tuple(o["b"]))
    raise UnknownExpression(f"unknown factor tag {kind!r}")


def emit(ts, fmt="tex"):
    """Render a TermSum as a standalone TeX document or as JSON text.

    Both renderings follow the canonical term order, so equal TermSums emit
    byte-identical documents.
    """
    if fmt == "json":
        obj = {
            "schema": "wavecert-termsum-1",
            "terms": [{"c": str(t.coeff),
                       "f": [_factor_to_obj(f) for f in t.factors]}
                      for t in ts],
        }
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))
    if fmt == "tex":
        lines = [r"\documentclass{article}",
                 r"\usepackage{amsmath}",
                 r"\allowdisplaybreaks",
                 r"\begin{document}"]
        if len(ts) == 0:
            lines.append("% empty term sum")
        else:
            lines.append(r"\begin{align*}")
            rows = ["& " + _tex_term(t) for t in ts]
            lines.append(" \\\\\n".join(rows))
            lines.append(r"\end{align*}")
        lines.append(r"\end{document}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_terms(doc):
    """Inverse of emit(ts, "json")."""
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise UnknownExpression(f"not a term document: {exc}") from None
    if not isinstance(obj, dict) or obj.get("schema") != "wavecert-termsum-1":
        raise UnknownExpression("not a wavecert term document")
    pairs = []
    for t in obj["terms"]:
        factors = tuple(_factor_from_obj(o) for o in t["f"])
        pairs.append((Fraction(t["c"]), factors))
    return TermSum.from_pairs(pairs)


# ---------------------------------------------------------------------------
# numeric evaluation (independent check route)


class TrigPoly:
    """Trigonometric polynomial with closed-form derivative jets."""

    __slots__ = ("pairs",)

    def __init__(self, pairs):
        self.pairs = tuple((int(f), complex(a)) for f, a in pairs)

    def eval(self, t, order=0):
        total = mpmath.mpc(0)
        for f, a in self.pairs:
            rot = mpmath.mpc(0, f) ** order if order else 1
            total += mpmath.mpc(a) * rot * mpmath.expjpi(
                mpmath.mpf(f) * t / mpmath.pi)
        return total


def _real_trig(rng, modes, scale):
    pairs = [(0, complex(scale * (2 * rng.random() - 1), 0))]
    for f in range(1, modes + 1):
        c = complex(scale * (2 * rng.random() - 1),
                    scale * (2 * rng.random() - 1)) / 2
        pairs.append((f, c))
        pairs.append((-f, c.conjugate()))
    return TrigPoly(pairs)


def random_surface_env(rng, curve_scale=0.03, diff_scale=0.01):
    """Random smooth substitution: near-circular reference curve, order-one
    amplitude, and small difference atoms."""
    x = TrigPoly([(1, 1.0)] + list(_real_trig(rng, 3, curve_scale).pairs)
                 + [(2, complex(0, curve_scale * rng.random()))])
    env = {
        "x": x,
        "D": _real_trig(rng, 3, diff_scale),
        "gamma": TrigPoly([(0, 1.0)] + list(_real_trig(rng, 3, 0.2).pairs)),
        "d": _real_trig(rng, 3, diff_scale),
        "psi": _real_trig(rng, 2, 0.3),
        "calD": _real_trig(rng, 2, diff_scale),
    }
    return env


def _var_eval(env, var, t, order):
    if var == "z":
        return env["x"].eval(t, order) + env["D"].eval(t, order)
    if var == "omega":
        return env["gamma"].eval(t, order) + env["d"].eval(t, order)
    if var == "phi":
        return env["psi"].eval(t, order) + env["calD"].eval(t, order)
    return env[var].eval(t, order)


def _chord_eval(env, var, a, b, order=0):
    return _var_eval(env, var, a, order) - _var_eval(env, var, b, order)


def _recip_eval(env, f, a, b):
    def one(var):
        g = _chord_eval(env, var, a, b)
        if f.form == "plain":
            return g ** (-f.power)
        return (g * mpmath.conj(g)).real ** (-f.power)
    if f.state == "diff":
        return one("z") - one("x")
    return one(f.state)


def _factor_eval(f, env, a, b):
    if isinstance(f, CurveDiff):
        v = _chord_eval(env, f.var, a, b, f.order)
        return mpmath.mpc(0, 1) * v if f.perp else v
    if isinstance(f, Amp):
        return _var_eval(env, f.var, b, f.order)
    if isinstance(f, Point):
        return _var_eval(env, f.var, a, f.order)
    if isinstance(f, Recip):
        return _recip_eval(env, f, a, b)
    u = _chord_eval(env, f.a[0], a, b, f.a[1])
    v = _chord_eval(env, f.b[0], a, b, f.b[1])
    return (u * mpmath.conj(v)).real


def eval_terms(ts, env, a, b):
    """Pointwise value of a TermSum at target a, source b."""
    total = mpmath.mpc(0)
    for t in ts:
        val = mpmath.mpc(t.coeff.numerator) / t.coeff.denominator
        for f in t.factors:
            val = val * _factor_eval(f, env, a, b)
        total += val
    return total


def eval_expr(e, env, a, b):
    """Pointwise value of an expression tree; the source point is a - b in
    spirit but entered directly as b."""
    if isinstance(e, Const):
        return mpmath.mpf(e.value.numerator) / e.value.denominator
    if isinstance(e, Atom):
        return _var_eval(env, e.var, a if e.where == "alpha" else b, 0)
    if isinstance(e, Deriv):
        at = a if e.base.where == "alpha" else b
        return _var_eval(env, e.base.var, at, e.order)
    if isinstance(e, BetaDiff):
        return (_eval_at(e.inner, env, a) - _eval_at(e.inner, env, b))
    if isinstance(e, Perp):
        return mpmath.mpc(0, 1) * eval_expr(e.inner, env, a, b)
    if isinstance(e, DotProd):
        u = eval_expr(e.left, env, a, b)
        v = eval_expr(e.right, env, a, b)
        return (u * mpmath.conj(v)).real
    if isinstance(e, RecipPow):
        g = _chord_eval(env, e.var, a, b)
        if e.form == "plain":
            return g ** (-e.power)
        return (g * mpmath.conj(g)).real ** (-e.power)
    if isinstance(e, Prod):
        val = mpmath.mpc(1)
        for f in e.factors:
            val = val * eval_expr(f, env, a, b)
        return val
    if isinstance(e, Sum):
        total = mpmath.mpc(0)
        for c, t in e.parts:
            total += (mpmath.mpf(c.numerator) / c.denominator
                      ) * eval_expr(t, env, a, b)
        return total
    if isinstance(e, Pow):
        return eval_expr(e.base, env, a, b) ** e.n
    if isinstance(e, PVIntegral):
        return eval_expr(e.integrand, env, a, b)
    raise UnknownExpression(f"cannot evaluate {e!r}")


def _eval_at(e, env, t):
    if isinstance(e, Atom):
        return _var_eval(env, e.var, t, 0)
    if isinstance(e, Deriv):
        return _var_eval(env, e.base.var, t, e.order)
    if isinstance(e, Sum):
        total = mpmath.mpc(0)
        for c, part in e.parts:
            total += (mpmath.mpf(c.numerator) / c.denominator
                      ) * _eval_at(part, env, t)
        return total
    raise UnknownExpression(f"cannot evaluate chord interior {e!r}")
