from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from .constants import HELD_IN, HELD_OUT, SPLITS
from ..exceptions import DatasetError, EmptySplitError
from ..utils.logger import logger


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class TrialDataset:
    """
    Trials of encoder input and reconstruction targets.

    ``recon_data`` may extend ``encod_data`` with trailing timesteps (forward
    prediction) and trailing neurons (held-out neurons for co-smoothing). The
    held-in neurons are the first ``n_heldin`` recon channels.
    """
    encod_data: np.ndarray
    recon_data: np.ndarray
    split: np.ndarray
    truth: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self) -> None:
        encod, recon = np.asarray(self.encod_data), np.asarray(self.recon_data)
        split = np.asarray(self.split).astype(str)

        if encod.ndim != 3 or recon.ndim != 3:
            raise DatasetError(
                f"encod_data and recon_data must be [trials x time x neurons], "
                f"got {encod.shape} and {recon.shape}."
            )
        if encod.shape[0] != recon.shape[0] or split.shape != (encod.shape[0],):
            raise DatasetError(
                f"Trial counts disagree: encod {encod.shape}, recon {recon.shape}, split {split.shape}."
            )
        if recon.shape[1] < encod.shape[1] or recon.shape[2] < encod.shape[2]:
            raise DatasetError(
                f"recon_data {recon.shape} must cover encod_data {encod.shape} in time and neurons."
            )
        unknown = set(np.unique(split)) - set(SPLITS)
        if unknown:
            raise DatasetError(f"Unknown split labels {sorted(unknown)}; expected {SPLITS}.")
        if self.truth is not None and np.shape(self.truth) != recon.shape:
            raise DatasetError(f"truth shape {np.shape(self.truth)} must equal recon shape {recon.shape}.")

        object.__setattr__(self, "encod_data", _frozen(encod))
        object.__setattr__(self, "recon_data", _frozen(recon))
        object.__setattr__(self, "split", _frozen(split))
        if self.truth is not None:
            object.__setattr__(self, "truth", _frozen(self.truth))

    @property
    def n_trials(self) -> int:
        return self.encod_data.shape[0]

    @property
    def encod_steps(self) -> int:
        return self.encod_data.shape[1]

    @property
    def recon_steps(self) -> int:
        return self.recon_data.shape[1]

    @property
    def fp_steps(self) -> int:
        return self.recon_steps - self.encod_steps

    @property
    def n_heldin(self) -> int:
        return self.encod_data.shape[2]

    @property
    def n_recon(self) -> int:
        return self.recon_data.shape[2]

    @property
    def n_heldout(self) -> int:
        return self.n_recon - self.n_heldin

    @property
    def neuron_roles(self) -> np.ndarray:
        return np.array([HELD_IN] * self.n_heldin + [HELD_OUT] * self.n_heldout)

    @property
    def is_count_data(self) -> bool:
        recon = self.recon_data
        return bool(np.all(recon >= 0) and np.all(np.mod(recon, 1) == 0))

    @property
    def slab_matches(self) -> bool:
        """
        Whether encod_data equals the held-in, first-T_enc slab of recon_data.
        """
        slab = self.recon_data[:, :self.encod_steps, :self.n_heldin]
        return bool(np.array_equal(slab, self.encod_data))

    def indices(self, split: str) -> np.ndarray:
        """
        Trial indices belonging to a split.

        :param split: "train" or "valid".
        :return: Sorted integer indices.
        """
        if split not in SPLITS:
            raise DatasetError(f"Unknown split '{split}'; expected one of {SPLITS}.")
        return np.flatnonzero(self.split == split)

    def split_arrays(self, split: str) -> Dict[str, np.ndarray]:
        """
        The arrays of one split.

        :param split: "train" or "valid".
        :return: Mapping with encod_data, recon_data and (if present) truth.
        """
        idx = self.indices(split)
        if idx.size == 0:
            raise EmptySplitError(split)
        arrays = {
            "encod_data": self.encod_data[idx],
            "recon_data": self.recon_data[idx],
        }
        if self.truth is not None:
            arrays["truth"] = self.truth[idx]
        return arrays

    def check(self) -> None:
        """
        Log non-fatal deviations from the usual dataset conventions.
        """
        if not self.slab_matches:
            logger.warning(
                f"Dataset '{self.name}': encod_data differs from the held-in slab of recon_data; "
                f"treating them as separate modalities."
            )
        if not self.is_count_data:
            logger.warning(
                f"Dataset '{self.name}': recon_data is not non-negative integer counts; "
                f"count-based observation models will treat values as real-valued."
            )


@dataclass
class TrialBatch:
    """
    A batch of trials flowing through augmentation, model and loss.

    ``sample_mask`` weights each reconstruction element in the loss and
    defaults to all ones.
    """
    encod_data: np.ndarray
    recon_data: np.ndarray
    sample_mask: Optional[np.ndarray] = None
    indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    truth: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.encod_data = np.asarray(self.encod_data, dtype=np.float64)
        self.recon_data = np.asarray(self.recon_data, dtype=np.float64)
        if self.sample_mask is None:
            self.sample_mask = np.ones_like(self.recon_data)
        if self.sample_mask.shape != self.recon_data.shape:
            raise DatasetError(
                f"sample_mask shape {self.sample_mask.shape} must equal recon shape {self.recon_data.shape}."
            )
        if self.indices.size == 0 and self.encod_data.shape[0]:
            self.indices = np.arange(self.encod_data.shape[0])

    @property
    def size(self) -> int:
        return self.encod_data.shape[0]

    @classmethod
    def from_dataset(cls, dataset: TrialDataset, indices: np.ndarray) -> TrialBatch:
        """
        Copy the given trials of a dataset into a batch.

        :param dataset: The parent dataset.
        :param indices: Trial indices into the dataset.
        :return: A new batch.
        """
        indices = np.asarray(indices, dtype=np.int64)
        return cls(
            encod_data=dataset.encod_data[indices].astype(np.float64),
            recon_data=dataset.recon_data[indices].astype(np.float64),
            indices=indices,
            truth=None if dataset.truth is None else dataset.truth[indices].astype(np.float64),
        )

    def replace(self, **changes: Any) -> TrialBatch:
        return dataclasses.replace(self, **changes)


@dataclass
class LorenzConfig:
    """
    Parameters of the synthetic Lorenz spiking dataset.

    ``n_neurons`` counts held-in neurons; ``n_heldout`` extra neurons appear
    only in recon_data, as do ``fp_steps`` extra bins. A neuron whose latent
    drive is zero fires at ``floor_fraction * base_rate``.
    """
    n_trials: int = 1000
    n_bins: int = 50
    dt: float = 0.01
    n_neurons: int = 30
    n_heldout: int = 0
    fp_steps: int = 0
    base_rate: float = 0.3
    seed: int = 0
    burn_in: int = 1000
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    valid_fraction: float = 0.2
    floor_fraction: float = 0.5
    steps_per_bin: int = 1

    def __post_init__(self) -> None:
        positive = {
            "n_trials": self.n_trials, "n_bins": self.n_bins, "dt": self.dt,
            "base_rate": self.base_rate, "burn_in": self.burn_in, "sigma": self.sigma,
            "rho": self.rho, "beta": self.beta, "steps_per_bin": self.steps_per_bin,
        }
        for key, value in positive.items():
            if not value > 0:
                raise DatasetError(f"LorenzConfig.{key} must be positive, got {value!r}.")
        if self.n_neurons < 3:
            raise DatasetError(f"LorenzConfig.n_neurons must be at least 3, got {self.n_neurons}.")
        if self.n_heldout < 0 or self.fp_steps < 0:
            raise DatasetError("LorenzConfig.n_heldout and fp_steps must be non-negative.")
        if not 0.0 < self.valid_fraction < 1.0:
            raise DatasetError(f"LorenzConfig.valid_fraction must lie in (0, 1), got {self.valid_fraction}.")
        if not 0.0 < self.floor_fraction < 1.0:
            raise DatasetError(f"LorenzConfig.floor_fraction must lie in (0, 1), got {self.floor_fraction}.")
