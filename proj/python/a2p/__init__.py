"""Backdoor detection by staged adversarial probing."""

from a2p._core import (
    Classifier,
    FormatError,
    InputError,
    auroc,
    detect,
    load_dataset,
    load_registry_model,
    mad_anomaly,
    masked_pgd,
    stage_plan,
    synth_dataset,
    train,
)

__all__ = [
    "Classifier",
    "FormatError",
    "InputError",
    "auroc",
    "detect",
    "load_dataset",
    "load_registry_model",
    "mad_anomaly",
    "masked_pgd",
    "stage_plan",
    "synth_dataset",
    "train",
]
