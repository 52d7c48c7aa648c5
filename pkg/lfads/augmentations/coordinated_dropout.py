from typing import Optional

import numpy as np

from ._base import Augmentation
from ..datasets.data import TrialBatch
from ..exceptions import AugmentationError
from ..utils.logger import logger


class CoordinatedDropout(Augmentation):
    """
    Drop encoder inputs and train the reconstruction only on what was dropped.

    Each step draws an i.i.d. Bernoulli(``rate``) drop mask over ``encod_data``.
    Dropped inputs are zeroed; the loss mask is the drop mask on the
    held-in, first-T_enc slab of the reconstruction and 1 everywhere else, so
    ``keep_mask + grad_mask == 1`` on that slab. ``rate == 0`` is the identity.
    """
    touches_batch = True
    touches_loss = True

    def __init__(self, rate: float = 0.3, rescale: bool = False) -> None:
        """
        :param rate: Drop probability in [0, 1).
        :param rescale: Divide the kept inputs by ``1 - rate``.
        """
        if not 0.0 <= rate < 1.0:
            raise AugmentationError(f"CoordinatedDropout rate must lie in [0, 1), got {rate}.")
        self.rate = float(rate)
        self.rescale = rescale
        self._keep: Optional[np.ndarray] = None

    @property
    def keep_mask(self) -> Optional[np.ndarray]:
        return self._keep

    @property
    def drop_mask(self) -> Optional[np.ndarray]:
        return None if self._keep is None else ~self._keep

    def grad_mask(self, recon_shape) -> np.ndarray:
        """
        The loss mask for this step's drop pattern.

        :param recon_shape: Shape of the reconstruction data.
        :return: Float mask of ``recon_shape``.
        """
        mask = np.ones(recon_shape, dtype=np.float64)
        if self.rate == 0.0 or self._keep is None:
            return mask
        _, t_enc, n_enc = self._keep.shape
        mask[:, :t_enc, :n_enc] = (~self._keep).astype(np.float64)
        return mask

    def process_batch(self, batch: TrialBatch, rng: np.random.Generator) -> TrialBatch:
        if self.rate == 0.0:
            self._keep = np.ones(batch.encod_data.shape, dtype=bool)
            return batch

        self._keep = rng.random(batch.encod_data.shape) >= self.rate
        encod = np.where(self._keep, batch.encod_data, 0.0)
        if self.rescale:
            encod = encod / (1.0 - self.rate)
        logger.debug(f"CoordinatedDropout dropped {1.0 - self._keep.mean():.4f} of the inputs")
        return batch.replace(encod_data=encod)

    def loss_mask(self, batch: TrialBatch) -> np.ndarray:
        return self.grad_mask(batch.recon_data.shape)

    def reset(self) -> None:
        self._keep = None
