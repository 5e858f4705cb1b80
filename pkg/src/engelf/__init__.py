"""Exact arithmetic for Engel-series digit streams and the functions f built on them."""

from .engel import Cylinder, DigitStream, digits_of, e_rational, value_of
from .family import (
    Custom,
    Dyadic,
    DyadicZeroInterleaved,
    Family,
    InsertionRule,
    SignedExample4,
    Sylvester,
    TwoScale,
    builtin_families,
    family_from_config,
    family_from_name,
    insert_zeros,
    validate,
)
from .function import (
    classify_extremum,
    cylinder_change,
    cylinder_value_range,
    enumerate_extrema,
    eval_exact,
    eval_f,
    functional_eq_check,
    level_set_probe,
    monotonicity_witness,
    range_bracket,
)
from .measure import (
    SamplerState,
    derivative_ratio_diagnostic,
    empirical_cdf_distance,
    integral_enclosure,
    mean_identity_check,
    paper_integral_bound,
    sample_xi,
)
from .rational import RationalInterval

__all__ = [name for name in dir() if not name.startswith("_")]
