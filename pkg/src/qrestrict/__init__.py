"""Numerical operator algebra of quantum Euclidean spaces and Fourier
restriction experiments."""

from ._kernels import BACKEND as kernel_backend
from .fock import (TruncatedOperator, TruncationConfig, convergence_report,
                   displacement_elem, displacement_matrix, load_operator,
                   nc_lp_norm, quantize, quantize_measure, save_operator,
                   schatten_norm)
from .harness import ExperimentConfig, ScalingReport, emit_report, run_all
from .restriction import (DyadicPiece, SectorAnnulus, annulus_cutoff,
                          bilinear_sup, c_exponent, dsigma_check,
                          dyadic_ft_sup, extend, knapp_symbol,
                          multiplier_apply, overlap_count, restrict_norm,
                          sector_cutoff)
from .symbols import (Grid, SampledSymbol, SphereRule, classical_ft,
                      grid_convolve, interpolate_at, lp_norm, lq_sphere_norm,
                      sphere_rule)
from .weyl import (Theta, WeylElement, adjoint_symbol, qft, trace,
                   transform_psi, twisted_convolve)

__version__ = "0.1.0"

__all__ = [
    "Grid", "SampledSymbol", "SphereRule", "Theta", "WeylElement",
    "TruncatedOperator", "TruncationConfig",
    "classical_ft", "grid_convolve", "interpolate_at", "lp_norm",
    "lq_sphere_norm", "sphere_rule",
    "adjoint_symbol", "qft", "trace", "transform_psi", "twisted_convolve",
    "convergence_report", "displacement_elem", "displacement_matrix",
    "load_operator", "nc_lp_norm", "quantize", "quantize_measure",
    "save_operator", "schatten_norm",
    "SectorAnnulus", "DyadicPiece", "annulus_cutoff", "sector_cutoff",
    "knapp_symbol", "restrict_norm", "extend", "multiplier_apply",
    "bilinear_sup", "overlap_count", "dsigma_check", "dyadic_ft_sup",
    "c_exponent",
    "ExperimentConfig", "ScalingReport", "emit_report", "run_all",
    "kernel_backend",
]
