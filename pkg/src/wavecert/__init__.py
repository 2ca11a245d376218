"""Validated numerics for splash-singularity certificates.

Interval arithmetic with outward rounding, certified spline enclosures of
space-time curves, rigorous bounds for the periodic singular integrals that
drive vortex-sheet evolution, certified operator-inverse norms, symbolic
difference-term generation, and energy-inequality coefficient bounds.
"""

from ._core import NAME as backend_name
from .energybound import (
    ENERGY_LAYOUT,
    BandedKernel,
    CellKernel,
    CMatrix,
    ComplexSpline,
    Curve,
    EnergyVector,
    KernelSplit,
    QCorrections,
    TermBound,
    assemble_C,
    class_bounds,
    q2_along,
    q2_gradient,
    q2_weight,
    q_corrections,
    split_theta,
    t_bounds,
    young_bound,
)
from .errors import *  # noqa: F401,F403
from .interval import CInterval, Interval, IntervalContext, IVec2
from .meshfn import (SpaceSpline, TimeTrack, interpolate_clamped,
                     interpolate_periodic, periodic_sites, splash_hull)
from .opnorm import (
    ApproxInverse,
    BivKernel,
    InverseCertificate,
    SingularOp,
    TrigFn,
    approx_inverse,
    certify_inverse,
    commutator_kernel,
    compose_defect,
    galerkin_solve,
    onb,
    operator_modulus,
    time_extend,
)
from .singint import EnclosedFunction, hilbert, lambda_op
from .termgen import (
    TermSum,
    Theta,
    br_difference,
    classify,
    complex_form,
    difference_expand,
    differentiate,
    emit,
    parse_terms,
)

__version__ = "0.1.0"

__all__ = ["IntervalContext", "Interval", "IVec2", "CInterval",
           "SpaceSpline", "TimeTrack", "interpolate_periodic",
           "interpolate_clamped", "periodic_sites", "splash_hull",
           "EnclosedFunction", "hilbert", "lambda_op",
           "TrigFn", "BivKernel", "SingularOp", "ApproxInverse",
           "InverseCertificate", "onb", "commutator_kernel", "galerkin_solve",
           "approx_inverse", "compose_defect", "certify_inverse",
           "time_extend", "operator_modulus",
           "TermSum", "Theta", "br_difference", "classify", "complex_form",
           "difference_expand", "differentiate", "emit", "parse_terms",
           "ENERGY_LAYOUT", "BandedKernel", "CellKernel", "CMatrix",
           "ComplexSpline", "Curve", "EnergyVector", "KernelSplit",
           "QCorrections", "TermBound", "assemble_C", "class_bounds",
           "q2_along", "q2_gradient", "q2_weight", "q_corrections",
           "split_theta", "t_bounds", "young_bound",
           "backend_name", "__version__"]
