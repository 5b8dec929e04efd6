"""Numerical toolkit for general monotone coefficient sequences and the L1
convergence of the trigonometric series they generate."""

from .beta import BetaSpec, beta, beta_array, beta_series_tail
from .classes import ClassSpec, MembershipReport, block_variation, membership_scan, tail_variation
from .lnorm import NormReport, QuadratureSpec, cauchy_gap, l1_norm, sn_f_gap, theorem4_bound, vn_sn_gap
from .sequences import CoefficientSequence, SeriesKind, make_generator
from .summation import BlockSumRequest, abel_block_sum, direct_block_sum, partial_sum, vallee_poussin

__version__ = "0.1.0"

__all__ = [
    "BetaSpec", "beta", "beta_array", "beta_series_tail",
    "ClassSpec", "MembershipReport", "block_variation", "membership_scan", "tail_variation",
    "NormReport", "QuadratureSpec", "cauchy_gap", "l1_norm", "sn_f_gap", "theorem4_bound", "vn_sn_gap",
    "CoefficientSequence", "SeriesKind", "make_generator",
    "BlockSumRequest", "abel_block_sum", "direct_block_sum", "partial_sum", "vallee_poussin",
]
