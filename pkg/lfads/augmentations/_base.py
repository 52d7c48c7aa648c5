from __future__ import annotations

from abc import ABC
from typing import List, Optional, Sequence

import numpy as np

from ..datasets.data import TrialBatch
from ..exceptions import AugmentationError, ShapeError
from ..tensor import Tensor, mul
from ..utils.logger import logger


class Augmentation(ABC):
    """
    Base class for data transformations applied around the forward pass.

    A transform may act on the batch before the forward pass
    (:meth:`process_batch`), on the per-element reconstruction loss after the
    likelihood is evaluated (:meth:`loss_mask`), or both. State saved during
    the batch phase is available to the loss phase of the same step and is
    dropped by :meth:`reset`.
    """
    touches_batch = False
    touches_loss = False

    def process_batch(self, batch: TrialBatch, rng: np.random.Generator) -> TrialBatch:
        """
        Transform the batch before the forward pass.

        :param batch: The current batch.
        :param rng: The run's random generator.
        :return: The transformed batch.
        """
        return batch

    def loss_mask(self, batch: TrialBatch) -> Optional[np.ndarray]:
        """
        Weights for the per-element reconstruction loss.

        :param batch: The batch produced by the batch phase of this step.
        :return: Array shaped like ``batch.recon_data``, or None for no masking.
        """
        return None

    def reset(self) -> None:
        """
        Forget per-step state.
        """

    def __repr__(self) -> str:
        fields = ", ".join(f"{k}={v!r}" for k, v in vars(self).items() if not k.startswith("_"))
        return f"{self.__class__.__name__}({fields})"


class AugmentationStack:
    """
    An ordered collection of augmentations.

    ``batch_order`` and ``loss_order`` list transform indices in the order
    each phase should run them; by default both follow ``transforms``.
    """

    def __init__(
            self,
            transforms: Optional[Sequence[Augmentation]] = None,
            batch_order: Optional[Sequence[int]] = None,
            loss_order: Optional[Sequence[int]] = None,
    ) -> None:
        self.transforms: List[Augmentation] = list(transforms or [])
        n = len(self.transforms)
        self.batch_order = self._check_order(batch_order, n, "batch_order")
        self.loss_order = self._check_order(loss_order, n, "loss_order")

    @staticmethod
    def _check_order(order: Optional[Sequence[int]], n: int, name: str) -> List[int]:
        if order is None:
            return list(range(n))
        order = [int(i) for i in order]
        if any(not 0 <= i < n for i in order) or len(set(order)) != len(order):
            raise AugmentationError(f"{name} {order} is not a selection of transform indices 0..{n - 1}.")
        return order

    def __len__(self) -> int:
        return len(self.transforms)

    def __repr__(self) -> str:
        return f"AugmentationStack({self.transforms!r})"

    def apply_batch(self, batch: TrialBatch, rng: np.random.Generator) -> TrialBatch:
        """
        Run the batch phase of every transform in ``batch_order``.

        :param batch: The batch to transform.
        :param rng: The run's random generator.
        :return: The transformed batch; the input batch when the stack is empty.
        """
        for i in self.batch_order:
            transform = self.transforms[i]
            if transform.touches_batch:
                batch = transform.process_batch(batch, rng)
        return batch

    def combined_mask(self, batch: TrialBatch) -> Optional[np.ndarray]:
        """
        Elementwise product of the loss-phase masks.

        :param batch: The batch the masks refer to.
        :return: The composed mask, or None when no transform masks the loss.
        """
        mask: Optional[np.ndarray] = None
        for i in self.loss_order:
            transform = self.transforms[i]
            if not transform.touches_loss:
                continue
            part = transform.loss_mask(batch)
            if part is None:
                continue
            if part.shape != batch.recon_data.shape:
                raise ShapeError("loss_mask", part.shape, batch.recon_data.shape)
            mask = part if mask is None else mask * part
        return mask

    def apply_loss(self, loss_elements: Tensor, batch: TrialBatch) -> Tensor:
        """
        Weight the per-element reconstruction loss by the composed mask.

        :param loss_elements: Loss of shape ``batch.recon_data.shape``.
        :param batch: The batch of this step.
        :return: The masked loss; the input tensor when nothing masks it.
        """
        if loss_elements.shape != batch.recon_data.shape:
            raise ShapeError("apply_loss", loss_elements.shape, batch.recon_data.shape)
        mask = self.combined_mask(batch)
        if mask is None:
            return loss_elements
        logger.debug(f"Loss mask keeps {mask.mean():.4f} of {mask.size} elements")
        return mul(loss_elements, Tensor(mask))

    def reset(self) -> None:
        for transform in self.transforms:
            transform.reset()
