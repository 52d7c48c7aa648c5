from typing import Optional

import numpy as np

from ._base import Reconstruction
from ..tensor import Tensor, exp, square
from ..priors._base import LOG_2PI


class Gaussian(Reconstruction):
    """
    Gaussian observations.

    By default the readout emits a mean and a log-variance per neuron. With
    ``tied_variance`` the readout emits only the mean and each neuron has one
    learned log-variance shared across trials and time.
    """
    name = "Gaussian"
    expected = "finite values"

    def __init__(self, tied_variance: bool = False, init_logvar: float = 0.0) -> None:
        super().__init__()
        self.tied_variance = tied_variance
        self.init_logvar = init_logvar
        self.n_params = 1 if tied_variance else 2

    def setup(self, n_neurons: int) -> "Gaussian":
        super().setup(n_neurons)
        if self.tied_variance and "logvar" not in self.tensors:
            self.tensors["logvar"] = Tensor(
                np.full(n_neurons, self.init_logvar), requires_grad=True, name="logvar",
            )
        return self

    def _logvar(self, raw: Tensor, parts) -> Tensor:
        if self.tied_variance:
            return self.tensors["logvar"].expand(parts[0].shape)
        return parts[1]

    def _nll(self, raw: Tensor, data: np.ndarray) -> Tensor:
        parts = self.split(raw)
        mean, logvar = parts[0], self._logvar(raw, parts)
        return (square(Tensor(data) - mean) / exp(logvar) + logvar + LOG_2PI) * 0.5

    def mean(self, raw: Tensor) -> Tensor:
        return self.split(raw)[0]

    def sample(self, raw: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        parts = [p.data for p in self.split(Tensor(raw))]
        if self.tied_variance:
            logvar: Optional[np.ndarray] = np.broadcast_to(self.tensors["logvar"].data, parts[0].shape)
        else:
            logvar = parts[1]
        return rng.normal(parts[0], np.exp(0.5 * logvar))
