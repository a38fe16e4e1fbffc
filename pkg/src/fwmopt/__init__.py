"""Phase-mismatched four-wave-mixing conversion and detuning-waveform optimisation."""

from .analytic import ce_closed_form, ce_matched_max, eigen_exponents, mixing_matrix, optimal_constants, zeta
from .core import MediumParams, MismatchSpec, mode_basis, validate_params
from .optimizer import AverageOverGrid, CostSpec, GAConfig, GenomeSpec, SingleKappa, evaluate_cost, run_ga
from .propagation import Backend, SolverOptions, ce_sweep, conversion_efficiency, propagate
from .waveforms import (
    FIG3_FOURIER,
    FIG4_BERNSTEIN,
    FIG4_FOURIER,
    BernsteinDetuning,
    ConstantAmplitudes,
    ConstantDetuning,
    ConstantRatio,
    FourierDetuning,
    LinearRamp,
)

__version__ = "0.1.0"
