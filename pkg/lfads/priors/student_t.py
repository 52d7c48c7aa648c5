from typing import Dict

import numpy as np

from ._base import Prior, sum_per_trial
from ..tensor import Tensor, exp, lgamma, log, square


class MultivariateStudentT(Prior):
    """
    Product of independent univariate Student-T densities.

    Heavy tails let the inferred inputs be sparse and occasionally large.
    """

    def __init__(
            self,
            df: float = 5.0,
            loc: float = 0.0,
            scale: float = 1.0,
            trainable_df: bool = False,
            trainable_loc: bool = False,
            trainable_scale: bool = True,
    ) -> None:
        super().__init__()
        if df <= 0 or scale <= 0:
            raise ValueError(f"df and scale must be positive, got {df} and {scale}.")
        self.init_df = float(df)
        self.init_loc = float(loc)
        self.init_scale = float(scale)
        self.trainable = {"logdf": trainable_df, "loc": trainable_loc, "logscale": trainable_scale}

    def _create(self, dim: int) -> Dict[str, Tensor]:
        return {
            "logdf": Tensor(np.log(self.init_df)),
            "loc": Tensor(np.full(dim, self.init_loc)),
            "logscale": Tensor(np.full(dim, np.log(self.init_scale))),
        }

    @property
    def df(self) -> float:
        self._require_built()
        return float(np.exp(self.tensors["logdf"].data))

    def _log_prob(self, x: Tensor) -> Tensor:
        nu = exp(self.tensors["logdf"])
        loc = self._expanded("loc", x.shape)
        logscale = self._expanded("logscale", x.shape)

        z = (x - loc) / exp(logscale)
        kernel = log(square(z) / nu + 1.0) * ((nu + 1.0) * -0.5)
        norm = lgamma((nu + 1.0) * 0.5) - lgamma(nu * 0.5) - log(nu * np.pi) * 0.5
        per_trial_count = x.size // x.shape[0]
        return sum_per_trial(kernel - logscale) + norm * float(per_trial_count)

    def mean(self) -> Tensor:
        self._require_built()
        return self.tensors["loc"]
