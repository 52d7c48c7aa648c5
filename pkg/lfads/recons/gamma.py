import numpy as np

from ._base import Reconstruction
from ..tensor import Tensor, exp, lgamma


def gamma_nll(log_alpha: Tensor, log_beta: Tensor, data: np.ndarray) -> Tensor:
    """
    Elementwise Gamma negative log-likelihood under the rate parameterization.

    :param log_alpha: Log shape.
    :param log_beta: Log rate.
    :param data: Positive observations.
    :return: ``-a ln b - (a - 1) ln x + b x + lgamma(a)``.
    """
    alpha, beta = exp(log_alpha), exp(log_beta)
    x = Tensor(data)
    log_x = Tensor(np.log(data))
    return lgamma(alpha) - alpha * log_beta - (alpha - 1.0) * log_x + beta * x


class Gamma(Reconstruction):
    """
    Gamma observations with log-shape and log-rate readouts.
    """
    name = "Gamma"
    n_params = 2
    expected = "positive values"
    safe_value = 1.0

    def in_support(self, data: np.ndarray) -> np.ndarray:
        return np.isfinite(data) & (data > 0)

    def _nll(self, raw: Tensor, data: np.ndarray) -> Tensor:
        log_alpha, log_beta = self.split(raw)
        return gamma_nll(log_alpha, log_beta, data)

    def mean(self, raw: Tensor) -> Tensor:
        log_alpha, log_beta = self.split(raw)
        return exp(log_alpha - log_beta)

    def sample(self, raw: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        log_alpha, log_beta = (p.data for p in self.split(Tensor(raw)))
        return rng.gamma(np.exp(log_alpha), np.exp(-log_beta))
