"""Simple pole approximation of stable discrete-time transfer functions.

A strictly proper, real, stable transfer function in partial-fraction form
is approximated by a sum of first-order terms over a chosen set of simple
poles, typically the Archimedes spiral selection, with a-priori H2 and
H-infinity error certificates.
"""
from ._kernels import backend as _backend
from .errors import (AssumptionViolation, DimensionMismatch, EvaluationAtPole, IllConditioned,
                     InvalidCount, InvariantError, NotEnoughPoles, NotReal, RepeatedPole,
                     SchemaError, SpaError, TooManyPoles, TruncationOverflow, UnstablePole)
from .norms import h2_distance, h2_norm, hinf_distance, hinf_norm, hinf_norm_toeplitz
from .oracles import g_function, lemma_first_check, lemma_second_check, random_system
from .poleselect import (AssignmentTable, AssumptionAudit, PoleSelection, augment,
                         check_assumptions, coverage_distance, disk_coverage, nearest_poles,
                         spiral_geometry_check, spiral_poles, spiral_sequence, winding_constant)
from .spa import (Approximant, ErrorCertificate, approximate, convergence_sweep,
                  error_certificate, fir_approximant, simple_pole_coefficients,
                  siso_term_approx, spiral_rate_bound, write_sweep_csv)
from .tfcore import (ImpulseTruncation, PoleTerm, RationalSystem, check_realness, deserialize,
                     dumps, evaluate, impulse_response, loads, serialize)

__version__ = "0.1.0"

BACKEND = _backend.NAME

__all__ = [
    "BACKEND",
    "Approximant",
    "AssignmentTable",
    "AssumptionAudit",
    "AssumptionViolation",
    "DimensionMismatch",
    "ErrorCertificate",
    "EvaluationAtPole",
    "IllConditioned",
    "ImpulseTruncation",
    "InvalidCount",
    "InvariantError",
    "NotEnoughPoles",
    "NotReal",
    "PoleSelection",
    "PoleTerm",
    "RationalSystem",
    "RepeatedPole",
    "SchemaError",
    "SpaError",
    "TooManyPoles",
    "TruncationOverflow",
    "UnstablePole",
    "approximate",
    "augment",
    "check_assumptions",
    "check_realness",
    "convergence_sweep",
    "coverage_distance",
    "deserialize",
    "disk_coverage",
    "dumps",
    "error_certificate",
    "evaluate",
    "fir_approximant",
    "g_function",
    "h2_distance",
    "h2_norm",
    "hinf_distance",
    "hinf_norm",
    "hinf_norm_toeplitz",
    "impulse_response",
    "lemma_first_check",
    "lemma_second_check",
    "loads",
    "nearest_poles",
    "random_system",
    "serialize",
    "simple_pole_coefficients",
    "siso_term_approx",
    "spiral_geometry_check",
    "spiral_poles",
    "spiral_rate_bound",
    "spiral_sequence",
    "winding_constant",
    "write_sweep_csv",
]
