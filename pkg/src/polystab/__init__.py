"""Numerical tools around the isoperimetric deficit of n-gons.

polystab computes the deficit and the side/radial variances of a polygon,
convexifies simple polygons by pocket flips, builds the circulant matrices
behind the second-order analysis at the regular n-gon and checks their
identities, and estimates the stability constant on the angular/radial chart.
"""
from .errors import *  # noqa: F401,F403
from .polygon import (
    Polygon,
    PolygonMetrics,
    deficit_coefficient,
    from_angular_radial,
    is_convex,
    is_simple,
    metrics,
    random_corpus,
    read_polygon,
    regular_polygon,
    to_angular_radial,
    validate,
)
from .convexify import FlipTrace, find_pockets, flip
from .circulant import CirculantMatrix, real_symmetric_eigenbasis
from .spectral import build_bundle, verify_identities, check_U_le_V, min_rayleigh_U_on_Htilde
from .manifold import (
    AngularRadial,
    RatioEstimate,
    StabilityConstants,
    combine_constants,
    estimate_ratio_sup,
    f_eval,
    g_eval,
    project_to_M,
    z_star,
)

__version__ = "0.1.0"
