"""Context-sensitive diagnosis toolkit for transient machinery data.

Pipeline: landmark extraction from transient curves, normalization of the
landmark features against healthy baselines (optionally conditioned on
ambient context), and classification of the normalized vectors. Includes a
regime-swap evaluation protocol, a factorial experiment runner, and a
synthetic data generator for desk-scale experiments.
"""

from .data import (
    ContextVector,
    FeatureVector,
    LabeledDataset,
    NormalizedFeatureVector,
    Observation,
    Schema,
    filter_by_severity,
    load_dataset,
    save_dataset,
    split_by_regime,
)
from .evaluate import (
    ConfusionMatrix,
    ExperimentResult,
    GridSpec,
    PipelineConfig,
    adjusted_score,
    chance_baselines,
    combine_observations,
    factorial_experiment,
    ratio_ttest,
    raw_score,
    swap_evaluate,
)
from .normalize import NormalizerParams, fit_normalizer, similarity

__all__ = [
    "ContextVector",
    "FeatureVector",
    "LabeledDataset",
    "NormalizedFeatureVector",
    "Observation",
    "Schema",
    "filter_by_severity",
    "load_dataset",
    "save_dataset",
    "split_by_regime",
    "ConfusionMatrix",
    "ExperimentResult",
    "GridSpec",
    "PipelineConfig",
    "adjusted_score",
    "chance_baselines",
    "combine_observations",
    "factorial_experiment",
    "ratio_ttest",
    "raw_score",
    "swap_evaluate",
    "NormalizerParams",
    "fit_normalizer",
    "similarity",
]

__version__ = "0.1.0"
