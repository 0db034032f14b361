"""Theta lifts, Vogan varieties and ABV-packets for GL_n."""
from .params import (
    ONE,
    ArthurDecomposition,
    ArthurRectangle,
    CuspidalLabel,
    InfinitesimalParameter,
    Multisegment,
    ParseError,
    Segment,
    adams_threshold_ok,
    contragredient,
    format_parameter,
    infinitesimal,
    is_arthur_type,
    m_beta,
    parse_lambda,
    parse_parameter,
    seg,
    segment_from_ends,
    theta_lift_param,
    theta_lift_rep,
    trivial_exponents,
)
from .duality import DualResult, check_dual_sum_identity, zelevinsky_dual

__version__ = "0.1.0"
