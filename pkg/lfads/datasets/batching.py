from typing import Iterator, List, Optional

import numpy as np

from .data import TrialBatch, TrialDataset
from ..exceptions import DatasetError, EmptySplitError


def batch_indices(
        indices: np.ndarray,
        batch_size: int,
        shuffle: bool = False,
        rng: Optional[np.random.Generator] = None,
) -> List[np.ndarray]:
    """
    Partition trial indices into consecutive batches.

    :param indices: Trial indices of one split.
    :param batch_size: Maximum batch size; the last batch may be short.
    :param shuffle: Permute the indices with ``rng`` first.
    :param rng: Generator used when shuffling.
    :return: List of index arrays covering every trial exactly once.
    """
    if batch_size < 1:
        raise DatasetError(f"batch_size must be at least 1, got {batch_size}.")
    indices = np.asarray(indices, dtype=np.int64)
    if shuffle:
        if rng is None:
            raise DatasetError("Shuffling requires a random generator.")
        indices = indices[rng.permutation(indices.size)]
    return [indices[i:i + batch_size] for i in range(0, indices.size, batch_size)]


def batches(
        dataset: TrialDataset,
        split: str,
        batch_size: int,
        shuffle: bool = False,
        rng: Optional[np.random.Generator] = None,
) -> Iterator[TrialBatch]:
    """
    Iterate over one epoch of a split.

    The permutation is drawn eagerly, so the generator state advances by the
    same amount whether or not the iterator is consumed.

    :param dataset: The source dataset.
    :param split: "train" or "valid".
    :param batch_size: Maximum number of trials per batch.
    :param shuffle: Shuffle trial order.
    :param rng: Generator used when shuffling.
    :return: Iterator of batches.
    """
    indices = dataset.indices(split)
    if indices.size == 0:
        raise EmptySplitError(split)
    groups = batch_indices(indices, batch_size, shuffle=shuffle, rng=rng)
    return (TrialBatch.from_dataset(dataset, group) for group in groups)
