from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Dict, Iterator, Optional

import numpy as np

from .batching import batches
from .data import TrialBatch, TrialDataset


class DataModule(ABC):
    """
    Abstract source of a :class:`TrialDataset` together with its batching policy.

    Subclasses only decide where the dataset comes from; ``setup`` loads it
    once and caches it.
    """

    def __init__(self, batch_size: int = 100, **kwargs: Any) -> None:
        self.batch_size = batch_size
        self._dataset: Optional[TrialDataset] = None

    @abstractmethod
    def build(self) -> TrialDataset:
        """
        Produce the dataset.

        :return: A validated dataset.
        """

    def setup(self) -> TrialDataset:
        if self._dataset is None:
            self._dataset = self.build()
        return self._dataset

    @property
    def dataset(self) -> TrialDataset:
        return self.setup()

    def dims(self) -> Dict[str, int]:
        """
        Data dimensions the model is wired against.

        :return: Mapping with encod_steps, recon_steps, n_heldin and n_recon.
        """
        dataset = self.dataset
        return {
            "encod_steps": dataset.encod_steps,
            "recon_steps": dataset.recon_steps,
            "n_heldin": dataset.n_heldin,
            "n_recon": dataset.n_recon,
        }

    def train_batches(self, rng: np.random.Generator) -> Iterator[TrialBatch]:
        return batches(self.dataset, "train", self.batch_size, shuffle=True, rng=rng)

    def valid_batches(self) -> Iterator[TrialBatch]:
        return batches(self.dataset, "valid", self.batch_size, shuffle=False)

    def split_batch(self, split: str) -> TrialBatch:
        """
        One batch holding every trial of a split, in index order.

        :param split: "train" or "valid".
        :return: The batch.
        """
        return TrialBatch.from_dataset(self.dataset, self.dataset.indices(split))
