import numpy as np
from scipy import special

from ._base import Reconstruction
from .gamma import gamma_nll
from ..tensor import Tensor, exp, sigmoid, softplus


class ZeroInflatedGamma(Reconstruction):
    """
    Mixture of an exact zero and a Gamma-distributed positive value.

    The readout emits the logit of ``q = P(nonzero)``, the log-shape and the
    log-rate. With a ``loc`` offset the nonzero component is ``loc + Gamma``
    and nonzero observations must exceed ``loc``.
    """
    name = "ZeroInflatedGamma"
    n_params = 3
    safe_value = 0.0

    def __init__(self, loc: float = 0.0) -> None:
        super().__init__()
        if loc < 0:
            raise ValueError(f"loc must be non-negative, got {loc}.")
        self.loc = float(loc)

    @property
    def expected(self) -> str:
        if self.loc:
            return f"zero or values above {self.loc}"
        return "non-negative values"

    def in_support(self, data: np.ndarray) -> np.ndarray:
        return np.isfinite(data) & ((data == 0) | (data > self.loc))

    def _nll(self, raw: Tensor, data: np.ndarray) -> Tensor:
        logit_q, log_alpha, log_beta = self.split(raw)
        nonzero = data != 0
        shifted = np.where(nonzero, data - self.loc, 1.0)

        zero_nll = softplus(logit_q)
        value_nll = softplus(-logit_q) + gamma_nll(log_alpha, log_beta, shifted)
        return zero_nll * Tensor(~nonzero * 1.0) + value_nll * Tensor(nonzero * 1.0)

    def mean(self, raw: Tensor) -> Tensor:
        logit_q, log_alpha, log_beta = self.split(raw)
        q = sigmoid(logit_q)
        return q * (exp(log_alpha - log_beta) + self.loc)

    def sample(self, raw: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        logit_q, log_alpha, log_beta = (p.data for p in self.split(Tensor(raw)))
        nonzero = rng.random(logit_q.shape) < special.expit(logit_q)
        values = self.loc + rng.gamma(np.exp(log_alpha), np.exp(-log_beta))
        return np.where(nonzero, values, 0.0)
