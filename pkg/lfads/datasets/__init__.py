from ._base import DataModule
from .batching import batch_indices, batches
from .constants import DATASET_MAGIC, HELD_IN, HELD_OUT, SPLITS
from .data import LorenzConfig, TrialBatch, TrialDataset
from .datamodule import FileDataModule, InMemoryDataModule, SyntheticLorenzDataModule
from .loader import dataset_arrays, load_dataset, save_dataset
from .lorenz import (
    calibrate_scale,
    generate_lorenz,
    integrate_lorenz,
    lorenz_derivative,
    rk4_step,
    simulate_lorenz,
    standardize,
)

__all__ = [
    "DataModule",
    "FileDataModule",
    "InMemoryDataModule",
    "SyntheticLorenzDataModule",

    "LorenzConfig",
    "TrialBatch",
    "TrialDataset",

    "DATASET_MAGIC",
    "HELD_IN",
    "HELD_OUT",
    "SPLITS",

    "batch_indices",
    "batches",
    "calibrate_scale",
    "dataset_arrays",
    "generate_lorenz",
    "integrate_lorenz",
    "load_dataset",
    "lorenz_derivative",
    "rk4_step",
    "save_dataset",
    "simulate_lorenz",
    "standardize",
]
