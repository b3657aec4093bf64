"""Synthetic OFDM channel-sensing pipeline for hydration-state classification.

Simulate a transceiver over a body-perturbed multipath channel, estimate the
per-subcarrier channel response, turn it into windowed features, and compare
a catalog of classifiers under grouped cross-validation.
"""

__version__ = "0.1.0"

from .channel import ChannelScenario, simulate_campaign, simulate_session
from .estimation import CfrBlock, CfrSnapshot, cfr_stream, estimate_cfr
from .labels import Label, ScenarioKind
from .metrics import ConfusionMatrix, accuracy, cross_validate, kfold_split
from .ofdm import OfdmConfig
from .pipeline import build_dataset
from .preprocess import Dataset, FilterSpec, featurize

__all__ = [
    "ChannelScenario",
    "CfrBlock",
    "CfrSnapshot",
    "ConfusionMatrix",
    "Dataset",
    "FilterSpec",
    "Label",
    "OfdmConfig",
    "ScenarioKind",
    "accuracy",
    "build_dataset",
    "cfr_stream",
    "cross_validate",
    "estimate_cfr",
    "featurize",
    "kfold_split",
    "simulate_campaign",
    "simulate_session",
]
