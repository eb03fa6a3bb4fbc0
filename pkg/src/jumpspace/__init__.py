"""Exact-arithmetic laboratory for a non-doubling approximate differentiability space.

The space is ``M x [0,1]``: ``M`` is the ultrametric sequence space with
coordinates ``a_i in {1..i}`` and island measure ``1/k!``; the pseudometric
``d_p`` allows horizontal jumps inside level-``k`` islands at heights in the
dyadic grid ``I_k``.
"""
from .base import (
    DEFAULT_DEPTH,
    Island,
    PointM,
    agreement_depth,
    d_M,
    enumerate_points,
    nu,
    random_point,
    random_point_in_annulus,
)
from .errors import DomainError, PreconditionError
from .jump import (
    BallDecomposition,
    BallSampler,
    CoverResult,
    FinitePointSet,
    JumpLevel,
    Rectangle,
    SpacePoint,
    admissible_radius,
    ball_decompose,
    ball_measure,
    ball_measure_restricted,
    cover_admissibility,
    d_infty,
    d_p,
    distance_to_set,
    rectangle_cover,
    resolving_depth,
    sample_ball,
)
from .numeric import (
    Dyadic,
    IntervalUnion,
    as_dyadic,
    as_rational,
    grid_distance,
    grid_window,
    interval_union_length,
)
from .report import ScanReport

__version__ = "0.1.0"
