"""Certify Hermite-Hadamard (Jensen) domains among convex polytopes."""

__version__ = "0.1.0"

from .bodies import BodySpec, generate, is_centrally_symmetric
from .certifier import (
    CertificateReport,
    candidate_check,
    certify,
    chebyshev_center,
    cone_distance,
    cone_distances,
    h_max,
    optimal_translate,
    shell_certify,
)
from .errors import (
    DegenerateInput,
    DimensionMismatch,
    InvalidSpec,
    JensenCertError,
    LPFailure,
    NonExtremeVertex,
    OriginNotInterior,
    TooLarge,
)
from .geometry import ConvexBody, Facet, Simplex, build_body, facet_enumeration, simplex_measure
from .integrate import (
    Affine,
    IntegralEstimate,
    MaxAffine,
    Quadratic,
    eval_convex,
    hh_gap,
    integrate_body,
    integrate_boundary,
    lemma_check,
    radial_sample,
    supporting_affine_at_origin,
)
