from typing import Optional, Sequence

import numpy as np

from ._base import Augmentation
from ..datasets.data import TrialBatch
from ..exceptions import AugmentationError


class SelectiveBackpropThruTime(Augmentation):
    """
    Train only on observed timesteps.

    The observed set is either every ``keep_every``-th bin starting at
    ``offset`` or an explicit list of bin indices. Unobserved bins are zeroed
    in ``encod_data`` and masked out of the reconstruction loss.
    """
    touches_batch = True
    touches_loss = True

    def __init__(
            self,
            keep_every: Optional[int] = None,
            observed_steps: Optional[Sequence[int]] = None,
            offset: int = 0,
    ) -> None:
        if (keep_every is None) == (observed_steps is None):
            raise AugmentationError("Give exactly one of keep_every or observed_steps.")
        if keep_every is not None and keep_every < 1:
            raise AugmentationError(f"keep_every must be at least 1, got {keep_every}.")
        self.keep_every = keep_every
        self.observed_steps = None if observed_steps is None else sorted(int(t) for t in observed_steps)
        self.offset = offset

    def observed(self, n_steps: int) -> np.ndarray:
        """
        :param n_steps: Length of the time axis.
        :return: Boolean array marking observed bins.
        """
        steps = np.arange(n_steps)
        if self.keep_every is not None:
            return (steps - self.offset) % self.keep_every == 0
        return np.isin(steps, self.observed_steps)

    def process_batch(self, batch: TrialBatch, rng: np.random.Generator) -> TrialBatch:
        observed = self.observed(batch.encod_data.shape[1])
        encod = batch.encod_data * observed[None, :, None]
        return batch.replace(encod_data=encod)

    def loss_mask(self, batch: TrialBatch) -> np.ndarray:
        observed = self.observed(batch.recon_data.shape[1]).astype(np.float64)
        return np.broadcast_to(observed[None, :, None], batch.recon_data.shape).copy()
