from typing import Dict

import numpy as np

from ._base import LOG_2PI, Prior, sum_per_trial
from ..tensor import Tensor, exp, square


class MultivariateNormal(Prior):
    """
    Diagonal Gaussian prior, shared across time when applied to a sequence.
    """

    def __init__(
            self,
            mean: float = 0.0,
            variance: float = 0.1,
            trainable_mean: bool = False,
            trainable_variance: bool = True,
    ) -> None:
        """
        :param mean: Initial value of every mean entry.
        :param variance: Initial value of every variance entry, must be positive.
        """
        super().__init__()
        if variance <= 0:
            raise ValueError(f"variance must be positive, got {variance}.")
        self.init_mean = float(mean)
        self.init_variance = float(variance)
        self.trainable = {"mean": trainable_mean, "logvar": trainable_variance}

    def _create(self, dim: int) -> Dict[str, Tensor]:
        return {
            "mean": Tensor(np.full(dim, self.init_mean)),
            "logvar": Tensor(np.full(dim, np.log(self.init_variance))),
        }

    def _log_prob(self, x: Tensor) -> Tensor:
        mean = self._expanded("mean", x.shape)
        logvar = self._expanded("logvar", x.shape)
        dev = square(x - mean) / exp(logvar)
        return sum_per_trial((dev + logvar + LOG_2PI) * -0.5)

    def mean(self) -> Tensor:
        self._require_built()
        return self.tensors["mean"]
