"""Cylinder combinatorics and quantitative recurrence for conformal IFS."""

from .errors import BracketError, BudgetError, ConfrecError, ValidationError
from .intervals import Interval
from .words import EMPTY_WORD, Word
from .ifs import (
    Box2,
    CylinderData,
    IFSSpec,
    Moebius1D,
    Similarity1D,
    Similarity2D,
    attractor_hull,
    build_ifs,
    compose_word,
    compute_hull,
    cylinder_data,
    derivative_norm_bounds,
    eval_pi,
    fixed_point,
    load_ifs,
    parse_ifs,
)
from .dimension import GammaResult, PressureEstimate, moran_gamma, partition_sum_check, pressure_estimate, solve_gamma
from .rates import GeometricRate, LogCorrectedRate, PowerRate, RateFunction, TableRate, parse_rate
from .dynamics import (
    CodingSample,
    DichotomyData,
    HitVerdict,
    OrbitResult,
    classify_recurrence_event,
    orbit_hits,
    recurrence_mc,
    sample_codings,
    shift,
)
from .ensets import (
    CertificateReport,
    EnFamily,
    InnerCylinder,
    SecondMomentReport,
    SystemConstants,
    build_En,
    chung_erdos_lower,
    covering_tail,
    covering_terms,
    en_series,
    find_inner_cylinder,
    mc_family_indicators,
    nu_cylinder,
    pairwise_intersection,
    second_moment_report,
    second_moment_series,
    series_ratio,
    system_constants,
    verify_recurrence_certificates,
)

__version__ = "0.1.0"
