from pathlib import Path
from typing import Dict, Union

import numpy as np

from .constants import DATASET_MAGIC, ENCOD_KEY, RECON_KEY, SPLITS, TRUTH_KEY
from .data import TrialDataset
from ..exceptions import DatasetError, MissingArrayError
from ..utils.container import read_container, write_container
from ..utils.logger import logger


def load_dataset(path: Union[str, Path]) -> TrialDataset:
    """
    Load a dataset container.

    The file must hold ``train_encod_data``, ``valid_encod_data``,
    ``train_recon_data`` and ``valid_recon_data``; ``train_truth`` and
    ``valid_truth`` are optional but must appear together. Train trials come
    first in the returned dataset.

    :param path: Path to an ``LFDS0001`` container.
    :return: The validated dataset.
    """
    path = Path(path)
    arrays = read_container(path, DATASET_MAGIC)

    for split in SPLITS:
        for key in (ENCOD_KEY, RECON_KEY):
            name = key.format(split=split)
            if name not in arrays:
                raise MissingArrayError(name, str(path))

    has_truth = [TRUTH_KEY.format(split=s) in arrays for s in SPLITS]
    if any(has_truth) and not all(has_truth):
        present = TRUTH_KEY.format(split=SPLITS[has_truth.index(True)])
        missing = TRUTH_KEY.format(split=SPLITS[has_truth.index(False)])
        raise DatasetError(f"'{present}' is present in '{path}' but '{missing}' is not.")

    for split in SPLITS:
        encod = arrays[ENCOD_KEY.format(split=split)]
        recon = arrays[RECON_KEY.format(split=split)]
        if encod.ndim != 3 or recon.ndim != 3 or encod.shape[0] != recon.shape[0]:
            raise DatasetError(
                f"{split} arrays have inconsistent shapes: encod {encod.shape}, recon {recon.shape}."
            )

    encod = np.concatenate([arrays[ENCOD_KEY.format(split=s)] for s in SPLITS], axis=0)
    recon = np.concatenate([arrays[RECON_KEY.format(split=s)] for s in SPLITS], axis=0)
    split = np.concatenate([
        np.full(arrays[ENCOD_KEY.format(split=s)].shape[0], s) for s in SPLITS
    ])
    truth = None
    if all(has_truth):
        truth = np.concatenate([arrays[TRUTH_KEY.format(split=s)] for s in SPLITS], axis=0)

    dataset = TrialDataset(encod, recon, split, truth=truth, name=path.stem)
    dataset.check()
    logger.info(
        f"Loaded dataset '{dataset.name}': {dataset.n_trials} trials, "
        f"T_enc={dataset.encod_steps}, T_recon={dataset.recon_steps}, "
        f"held-in={dataset.n_heldin}, held-out={dataset.n_heldout}"
    )
    return dataset


def dataset_arrays(dataset: TrialDataset) -> Dict[str, np.ndarray]:
    """
    The container mapping for a dataset, keyed per split.

    :param dataset: The dataset to flatten.
    :return: Mapping from container key to array.
    """
    arrays: Dict[str, np.ndarray] = {}
    for split in SPLITS:
        idx = dataset.indices(split)
        arrays[ENCOD_KEY.format(split=split)] = dataset.encod_data[idx]
        arrays[RECON_KEY.format(split=split)] = dataset.recon_data[idx]
        if dataset.truth is not None:
            arrays[TRUTH_KEY.format(split=split)] = dataset.truth[idx]
    return arrays


def save_dataset(dataset: TrialDataset, path: Union[str, Path]) -> None:
    """
    Write a dataset container.

    :param dataset: The dataset to write.
    :param path: Destination path.
    """
    write_container(path, dataset_arrays(dataset), DATASET_MAGIC)
    logger.info(f"Saved dataset '{dataset.name}' ({dataset.n_trials} trials) to {path}")
