"""Probabilistic fatigue failure-time prognosis under stochastic loading.

Workflow: synthesize bounded stochastic stress signals with known material
parameters (signal_gen), compute ground-truth failure times by rainflow
counting and linear damage accumulation (fatigue), stream signals into
feature vectors (features), fit a small network plus a 1-D Gaussian process
on its embedding (ann, gpr), gate the resulting Gaussian belief by survival
to the measurement time (posterior), and orchestrate dataset-scale training
and evaluation (pipeline). Set FATPROG_DISABLE_NUMBA=1 to run the pure
Python/numpy kernel fallbacks.
"""

from ._kernels import NUMBA_ENABLED, backend
from .ann import AnnModel, AnnParams, TrainConfig, ann_forward, ann_init, ann_loss_and_gradient, ann_train
from .errors import FatprogError
from .fatigue import (
    CountedCycle,
    DamageState,
    FailureTime,
    MaterialParams,
    cumulative_damage,
    cycles_to_failure,
    failure_time,
    rainflow_count,
    turning_points,
)
from .features import (
    FeatureRanges,
    FeatureVector,
    SpectralSummary,
    StreamState,
    WelchConfig,
    build_features,
    percentile_amplitude,
    theoretical_percentile,
    update_stream,
    welch_moments,
)
from .gpr import GprHyper, GprModel, gpr_fit, gpr_predict, log_marginal_likelihood_and_gradient, rbf_kernel
from .pipeline import (
    Dataset,
    DatasetSample,
    EvalConfig,
    EvalReport,
    GenerationConfig,
    HybridModel,
    aggregate_metrics,
    evaluate_dataset,
    evaluate_success,
    generate_dataset,
    split_dataset,
    stream_predict,
    train_hybrid,
    tune_rho,
)
from .posterior import Prediction, TruncatedGaussian, posterior_pdf, predict_and_interval
from .signal_gen import (
    PsdSpec,
    Signal,
    SignalRecipe,
    Table1Ranges,
    gaussian_psd_value,
    import_peak_valley,
    sample_recipe,
    synthesize_signal,
)

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "backend",
    "AnnModel",
    "AnnParams",
    "TrainConfig",
    "ann_forward",
    "ann_init",
    "ann_loss_and_gradient",
    "ann_train",
    "FatprogError",
    "CountedCycle",
    "DamageState",
    "FailureTime",
    "MaterialParams",
    "cumulative_damage",
    "cycles_to_failure",
    "failure_time",
    "rainflow_count",
    "turning_points",
    "FeatureRanges",
    "FeatureVector",
    "SpectralSummary",
    "StreamState",
    "WelchConfig",
    "build_features",
    "percentile_amplitude",
    "theoretical_percentile",
    "update_stream",
    "welch_moments",
    "GprHyper",
    "GprModel",
    "gpr_fit",
    "gpr_predict",
    "log_marginal_likelihood_and_gradient",
    "rbf_kernel",
    "Dataset",
    "DatasetSample",
    "EvalConfig",
    "EvalReport",
    "GenerationConfig",
    "HybridModel",
    "aggregate_metrics",
    "evaluate_dataset",
    "evaluate_success",
    "generate_dataset",
    "split_dataset",
    "stream_predict",
    "train_hybrid",
    "tune_rho",
    "Prediction",
    "TruncatedGaussian",
    "posterior_pdf",
    "predict_and_interval",
    "PsdSpec",
    "Signal",
    "SignalRecipe",
    "Table1Ranges",
    "gaussian_psd_value",
    "import_peak_valley",
    "sample_recipe",
    "synthesize_signal",
]
