"""Quenched limit theorems for Fourier sums of stationary sequences.

Simulation of stationary models (linear processes, finite Markov chains,
iterated random functions, long-memory Gaussian sequences), exact spectral
quantities, martingale approximations of ``S_n(t) = sum_k exp(ikt) X_k``,
sufficient-condition checks and seeded quenched Monte Carlo experiments.
"""
from importlib import metadata as _metadata

try:
    __version__ = _metadata.version("artifact")
except _metadata.PackageNotFoundError:  # pragma: no cover
    __version__ = "0.1.0"

from .fourier import FourierSample, FrequencyGrid, dft, dft_many, fourier_batch, periodogram
from .models import (
    Coefficients,
    FiniteMarkovFn,
    GaussianLRD,
    GaussianPast,
    InnovationDist,
    IRFStart,
    IteratedRandomFn,
    LinearPast,
    LinearProcess,
    MarkovStart,
    ReversibleMarkovFn,
    SpecError,
    draw_origin,
    sample_quenched,
    sample_stationary,
    simulate_paths,
    spec_from_dict,
    spec_hash,
    spec_to_dict,
)
from .spectral import (
    SpectralEstimate,
    exact_variance_S,
    spectral_density,
    spectral_density_linear,
    spectral_density_markov,
)
from .martingale import (
    conditional_mean_S,
    lemma1_gap,
    martingale_difference,
    martingale_kernel,
    projection_linear,
    resolvent,
    telescoping_decomposition,
)
from .conditions import (
    ConditionReport,
    check_cond14,
    check_condMW,
    check_flin,
    check_irf,
    check_mixing,
    check_sufcond,
)
from .quenched import ExperimentConfig, TestReport, centering_decay, raikov_diagnostics, run_quenched

__all__ = [
    "__version__",
    "FourierSample",
    "FrequencyGrid",
    "dft",
    "dft_many",
    "fourier_batch",
    "periodogram",
    "Coefficients",
    "FiniteMarkovFn",
    "GaussianLRD",
    "GaussianPast",
    "InnovationDist",
    "IRFStart",
    "IteratedRandomFn",
    "LinearPast",
    "LinearProcess",
    "MarkovStart",
    "ReversibleMarkovFn",
    "SpecError",
    "draw_origin",
    "sample_quenched",
    "sample_stationary",
    "simulate_paths",
    "spec_from_dict",
    "spec_hash",
    "spec_to_dict",
    "SpectralEstimate",
    "exact_variance_S",
    "spectral_density",
    "spectral_density_linear",
    "spectral_density_markov",
    "conditional_mean_S",
    "lemma1_gap",
    "martingale_difference",
    "martingale_kernel",
    "projection_linear",
    "resolvent",
    "telescoping_decomposition",
    "ConditionReport",
    "check_cond14",
    "check_condMW",
    "check_flin",
    "check_irf",
    "check_mixing",
    "check_sufcond",
    "ExperimentConfig",
    "TestReport",
    "centering_decay",
    "raikov_diagnostics",
    "run_quenched",
]
