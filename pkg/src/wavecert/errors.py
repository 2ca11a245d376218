"""Exception taxonomy for the certification pipeline.

Every failure of a rigorous operation maps to a distinct class so callers
(and the CLI) can tell an infeasible certificate apart from bad input.
"""


class RigorError(Exception):
    """Base class for all failures raised by wavecert."""


# interval layer

class DivisionByZeroInterval(RigorError):
    """Divisor interval contains zero."""


class EmptyOperand(RigorError):
    """Arithmetic attempted on the empty interval sentinel."""


class DomainViolation(RigorError):
    """Argument interval leaves the domain of an elementary function."""


class PrecisionMismatch(RigorError):
    """Operands built under different working precisions."""


# mesh / interpolation layer

class NotContracting(RigorError):
    """Certified linear solve failed to contract within the sweep cap."""


class DimensionMismatch(RigorError):
    """Sample count does not match the mesh."""


class Infeasible(RigorError):
    """Constrained interpolation has no admissible solution."""


class UnsupportedOrder(RigorError):
    """Requested derivative or norm order exceeds what is stored."""


# singular integral layer

class InsufficientSmoothness(RigorError):
    """Input spline continuity cannot support the requested expansion order."""


class BandTooWide(RigorError):
    """Near band would cover the whole circle (or exceed series radius)."""


class ArcChordFailure(RigorError):
    """Arc-chord constant for the curve could not be bounded away from zero."""


# operator certificates

class RangeFailure(RigorError):
    """Galerkin system was not solvable to the requested residual."""


class CommonZero(RigorError):
    """A(x) + iB(x) passes through zero; no approximate inverse exists."""


class KernelOverflow(RigorError):
    """Composed defect kernel left the representable bivariate format."""


class DeltaTooLarge(RigorError):
    """Defect bound is >= 1; Neumann certificate cannot close."""


class WindowTooWide(RigorError):
    """Time-window modulus eats the whole inverse margin."""


class InversionUncertified(RigorError):
    """No operator-inverse certificate covers the requested time."""


# symbolic terms

class StructureMismatch(RigorError):
    """Expressions are not identical up to the exact/approximate swap."""


class NotComplexifiable(RigorError):
    """Vector expression has no complex-variable counterpart."""


class Unclassifiable(RigorError):
    """Term falls outside the kernel taxonomy; reported verbatim."""


class UnknownExpression(RigorError):
    """Expression tree uses an atom or node outside the catalog."""


class MissingTerm(RigorError):
    """An enumerated linear term has no certified bound; assembly must fail."""


# model assembly

class QSingular(RigorError):
    """Curve enclosure meets a singular point of the conformal weight."""


class SignUndetermined(RigorError):
    """Sign condition cannot be decided at the working precision."""


# i/o

class ParseError(RigorError):
    """Malformed cloud, config, or archive input."""
