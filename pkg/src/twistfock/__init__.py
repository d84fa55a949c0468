"""Exact star products with separation of variables and twisted Fock algebras."""

from .core import (
    EXACT,
    ChartError,
    DegenerateMetricError,
    DomainError,
    HbarPoly,
    InvariantViolation,
    PoleError,
    PrecisionError,
    RepresentationError,
    StructureError,
    TwistFockError,
)
from .kahler import KahlerData, KahlerPotential, builtin_potential, compute_H, invert_H, normalize_potential
from .series import HbarSeries, SeriesMatrix, TruncatedSeries, matrix_inverse, series_exp, series_log
from .starprod import build_left_operator, build_right_operator, star_closed_Cn, star_closed_CPn_CHn, star_formal
from .fock import FockMatrix, Generator, WeightedElement, apply_generator, fock_mul, from_fock, to_fock, word_to_fock
from .charts import AnalyticTransition, cpn_transition_finite, shifted_operators, transition_matrix
from .trace import TraceSpec, quad_trace_Cn, quad_trace_CHn, sp_trace

__version__ = "0.1.0"
