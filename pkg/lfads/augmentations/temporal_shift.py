from typing import Optional, Tuple

import numpy as np

from ._base import Augmentation
from ..datasets.data import TrialBatch
from ..exceptions import AugmentationError


def shift_time(data: np.ndarray, shifts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Delay each trial (or trial and neuron) by an integer number of bins.

    ``out[:, t, n] = data[:, t - s, n]`` where ``0 <= t - s < T`` and zero
    elsewhere.

    :param data: Array [trials x T x N].
    :param shifts: Integer shifts [trials x N].
    :return: The shifted array and the boolean mask of defined entries.
    """
    n_steps = data.shape[1]
    source = np.arange(n_steps)[None, :, None] - shifts[:, None, :]
    defined = (source >= 0) & (source < n_steps)
    gathered = np.take_along_axis(data, np.clip(source, 0, n_steps - 1), axis=1)
    return np.where(defined, gathered, 0.0), defined


class TemporalShift(Augmentation):
    """
    Jitter trials in time by a uniform integer shift in ``[-max_shift, max_shift]``.

    By default encoder input and reconstruction target move together and the
    vacated target bins are masked out of the loss. With ``relative`` only the
    encoder input moves. With ``per_neuron`` every neuron draws its own shift.
    """
    touches_batch = True
    touches_loss = True

    def __init__(self, max_shift: int = 2, per_neuron: bool = False, relative: bool = False) -> None:
        if max_shift < 0:
            raise AugmentationError(f"max_shift must be non-negative, got {max_shift}.")
        self.max_shift = int(max_shift)
        self.per_neuron = per_neuron
        self.relative = relative
        self._shifts: Optional[np.ndarray] = None
        self._defined: Optional[np.ndarray] = None

    @property
    def shifts(self) -> Optional[np.ndarray]:
        return self._shifts

    def process_batch(self, batch: TrialBatch, rng: np.random.Generator) -> TrialBatch:
        n_trials, _, n_recon = batch.recon_data.shape
        n_enc = batch.encod_data.shape[2]

        if self.per_neuron:
            shifts = rng.integers(-self.max_shift, self.max_shift + 1, size=(n_trials, n_recon))
        else:
            drawn = rng.integers(-self.max_shift, self.max_shift + 1, size=n_trials)
            shifts = np.repeat(drawn[:, None], n_recon, axis=1)
        self._shifts = shifts

        encod, _ = shift_time(batch.encod_data, shifts[:, :n_enc])
        if self.relative:
            self._defined = None
            return batch.replace(encod_data=encod)

        recon, self._defined = shift_time(batch.recon_data, shifts)
        truth = None if batch.truth is None else shift_time(batch.truth, shifts)[0]
        return batch.replace(encod_data=encod, recon_data=recon, truth=truth)

    def loss_mask(self, batch: TrialBatch) -> Optional[np.ndarray]:
        if self._defined is None:
            return None
        return self._defined.astype(np.float64)

    def reset(self) -> None:
        self._shifts = None
        self._defined = None
