"""Doubling, porosity and differentiability experiments on the jump space."""
from .differentiability import (
    DefectEstimate,
    LambdaEstimate,
    NoVerticalDerivative,
    approx_diff_defect,
    chart_uniqueness_lambda,
    vertical_derivative,
)
from .doubling import doubling_ratio, is_in_Ek, non_doubling_lower_bound, non_doubling_scan
from .fields import (
    AffineCombination,
    Cone,
    Constant,
    DistanceToPoint,
    Height,
    LipschitzField,
    SupCones,
    cone_value,
    lipschitz_violations,
    sup_cones,
)
from .porosity import (
    GammaResult,
    WitnessCertificate,
    measure_porosity_gamma,
    nondiff_score,
    porosity_scan,
    porosity_search,
)
