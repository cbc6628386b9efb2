"""Beamforming estimation from limited PMI/CQI feedback.

Estimates downlink beamforming vectors for an FDD base station from the
scalar codebook feedback (PMI index plus CQI value) reported by the user
over successive pilot rounds, instead of from explicit channel state.
Includes the alternating-minimization estimator, an evidence-based
auto-tuner for its ridge weight, a sequential multi-beam extension,
reference baselines and a seeded Monte-Carlo experiment harness.
"""

from .am import (AmProblem, AmState, AmTrace, assemble_normal_matrix,
                 assemble_rhs, backend_name, objective, phase_update,
                 resolve_rows, run_am, w_update)
from .baseline import (Accumulator, accumulate, baseline_beams,
                       baseline_pilots, codeword_beam)
from .bayes import (EvidenceProblem, HyperParams, TunedLambda, TunerConfig,
                    build_design, fixed_point, log_evidence, posterior_mean,
                    tune_lambda)
from .channel import (Dccm, EigenPair, PilotMatrix, dft_pilot, effective_gram,
                      hermitian_eig, make_dccm, pilot_for_round,
                      random_semiunitary)
from .codebook import Codebook, build_multi_layer, build_single_layer
from .errors import ConfigError, NumericalError
from .feedback import (CqiPartition, FeedbackRecord, compute_cqi,
                       make_feedback, partition_cqi, quantize_cqi, select_pmi)
from .harness import (BetaCheckReport, ExperimentConfig, PrecisionCurve,
                      beam_precision, empirical_beta_check, load_config,
                      run_experiment, run_trial, write_csv)
from .multistream import (BeamMatrix, NullBasis, null_basis, run_multistream,
                          solve_subproblem_k)

__version__ = "0.1.0"

__all__ = [
    "AmProblem", "AmState", "AmTrace", "assemble_normal_matrix",
    "assemble_rhs", "backend_name", "objective", "phase_update",
    "resolve_rows", "run_am", "w_update",
    "Accumulator", "accumulate", "baseline_beams", "baseline_pilots",
    "codeword_beam",
    "EvidenceProblem", "HyperParams", "TunedLambda", "TunerConfig",
    "build_design", "fixed_point", "log_evidence", "posterior_mean",
    "tune_lambda",
    "Dccm", "EigenPair", "PilotMatrix", "dft_pilot", "effective_gram",
    "hermitian_eig", "make_dccm", "pilot_for_round", "random_semiunitary",
    "Codebook", "build_multi_layer", "build_single_layer",
    "ConfigError", "NumericalError",
    "CqiPartition", "FeedbackRecord", "compute_cqi", "make_feedback",
    "partition_cqi", "quantize_cqi", "select_pmi",
    "BetaCheckReport", "ExperimentConfig", "PrecisionCurve",
    "beam_precision", "empirical_beta_check", "load_config",
    "run_experiment", "run_trial", "write_csv",
    "BeamMatrix", "NullBasis", "null_basis", "run_multistream",
    "solve_subproblem_k",
    "__version__",
]
