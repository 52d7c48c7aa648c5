from typing import Dict

import numpy as np

from ._base import LOG_2PI, Prior, sum_per_trial
from ..exceptions import PriorError
from ..tensor import Tensor, exp, getitem, log, neg, square


class AutoregressiveMultivariateNormal(Prior):
    """
    Independent stationary AR(1) processes, one per latent dimension.

    Each process has autocorrelation ``phi = exp(-1 / tau)`` and marginal
    variance ``process_variance``; the innovation variance is
    ``process_variance * (1 - phi ** 2)``.
    """
    time_series = True
    event_ndim = 2

    def __init__(
            self,
            tau: float = 10.0,
            variance: float = 0.1,
            trainable_tau: bool = True,
            trainable_variance: bool = True,
    ) -> None:
        super().__init__()
        if tau <= 0 or variance <= 0:
            raise ValueError(f"tau and variance must be positive, got {tau} and {variance}.")
        self.init_tau = float(tau)
        self.init_variance = float(variance)
        self.trainable = {"logtau": trainable_tau, "logvar": trainable_variance}

    def _create(self, dim: int) -> Dict[str, Tensor]:
        return {
            "logtau": Tensor(np.full(dim, np.log(self.init_tau))),
            "logvar": Tensor(np.full(dim, np.log(self.init_variance))),
        }

    def phi(self) -> Tensor:
        self._require_built()
        return exp(neg(exp(neg(self.tensors["logtau"]))))

    def _log_prob(self, x: Tensor) -> Tensor:
        if x.ndim != 3:
            raise PriorError(f"The autoregressive prior needs a [batch x T x dim] latent, got {x.shape}.")

        first = getitem(x, (slice(None), slice(0, 1), slice(None)))
        p_logvar = self._expanded("logvar", first.shape)
        total = sum_per_trial((square(first) / exp(p_logvar) + p_logvar + LOG_2PI) * -0.5)
        if x.shape[1] == 1:
            return total

        current = getitem(x, (slice(None), slice(1, None), slice(None)))
        previous = getitem(x, (slice(None), slice(0, -1), slice(None)))
        phi = self.phi()
        e_logvar = self.tensors["logvar"] + log(1.0 - square(phi))
        e_logvar = e_logvar.expand(current.shape)
        resid = current - phi.expand(current.shape) * previous
        steps = (square(resid) / exp(e_logvar) + e_logvar + LOG_2PI) * -0.5
        return total + sum_per_trial(steps)

    def mean(self) -> Tensor:
        self._require_built()
        return Tensor(np.zeros(self.dim))
