import numpy as np
from scipy import special

from ._base import Reconstruction
from ..tensor import Tensor, exp


class Poisson(Reconstruction):
    """
    Poisson counts with a log-rate readout.

    Non-integer targets are accepted; the normalizer uses ``lgamma(k + 1)``.
    """
    name = "Poisson"
    n_params = 1
    expected = "non-negative counts"

    def in_support(self, data: np.ndarray) -> np.ndarray:
        return np.isfinite(data) & (data >= 0)

    def _nll(self, raw: Tensor, data: np.ndarray) -> Tensor:
        return exp(raw) - raw * Tensor(data) + Tensor(special.gammaln(data + 1.0))

    def mean(self, raw: Tensor) -> Tensor:
        return exp(raw)

    def sample(self, raw: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return rng.poisson(np.exp(raw)).astype(np.float64)
