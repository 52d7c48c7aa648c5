from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..exceptions import PosteriorWidthError, PriorError, ShapeError
from ..tensor import Tensor, exp, expand, getitem, reduce_sum, reshape, square
from ..tensor.ops import clip

LOGVAR_LIMIT = 16.0
LOG_2PI = float(np.log(2.0 * np.pi))


def sum_per_trial(x: Tensor) -> Tensor:
    """
    Sum every axis but the leading (trial) axis.

    :param x: Tensor [batch x ...].
    :return: Tensor [batch].
    """
    if x.ndim == 1:
        return x
    return reduce_sum(x, axis=tuple(range(1, x.ndim)))


def check_finite(x: Tensor, where: str) -> None:
    if not np.all(np.isfinite(x.data)):
        raise PriorError(f"{where} received non-finite values.")


@dataclass
class GaussianPosterior:
    """
    Diagonal Gaussian posterior over a latent, parameterized by mean and log-variance.
    """
    mean: Tensor
    logvar: Tensor

    def __post_init__(self) -> None:
        if self.mean.shape != self.logvar.shape:
            raise ShapeError("posterior", self.mean.shape, self.logvar.shape)

    @property
    def dim(self) -> int:
        return self.mean.shape[-1]

    @property
    def variance(self) -> Tensor:
        return exp(self.logvar)

    def log_prob(self, z: Tensor) -> Tensor:
        """
        Log-density of ``z`` under the posterior, summed per trial.

        :param z: Tensor shaped like the mean.
        :return: Tensor [batch].
        """
        if z.shape != self.mean.shape:
            raise ShapeError("posterior.log_prob", z.shape, self.mean.shape)
        dev = square(z - self.mean) / exp(self.logvar)
        return sum_per_trial((dev + self.logvar + LOG_2PI) * -0.5)


def make_posterior(raw: Tensor) -> GaussianPosterior:
    """
    Split raw encoder output into a Gaussian posterior.

    The last axis holds the mean followed by the log-variance; the
    log-variance is clamped to ``[-16, 16]``.

    :param raw: Tensor [..., 2 * dim].
    :return: The posterior.
    """
    width = raw.shape[-1]
    if width % 2:
        raise PosteriorWidthError(width)
    dim = width // 2
    lead = (slice(None),) * (raw.ndim - 1)
    mean = getitem(raw, lead + (slice(0, dim),))
    logvar = clip(getitem(raw, lead + (slice(dim, width),)), -LOGVAR_LIMIT, LOGVAR_LIMIT)
    return GaussianPosterior(mean, logvar)


def sample(
        posterior: GaussianPosterior,
        rng: Optional[np.random.Generator] = None,
        deterministic: bool = False,
) -> Tensor:
    """
    Draw a reparameterized sample ``mean + exp(logvar / 2) * eps``.

    :param posterior: The posterior to sample.
    :param rng: Source of ``eps``; required unless deterministic.
    :param deterministic: Return the posterior mean itself.
    :return: Tensor shaped like the mean.
    """
    if deterministic:
        return posterior.mean
    if rng is None:
        raise PriorError("Stochastic sampling needs a random generator.")
    eps = Tensor(rng.standard_normal(posterior.mean.shape))
    return posterior.mean + exp(posterior.logvar * 0.5) * eps


class Prior(ABC):
    """
    Base class for priors over the initial condition and inferred inputs.

    Priors are built lazily: the model calls :meth:`build` with the latent
    dimension before first use. Subclasses create their parameter tensors in
    :meth:`_create` and list the trainable ones in ``self.trainable``.
    """
    time_series = False
    event_ndim = 1

    def __init__(self) -> None:
        self.dim: Optional[int] = None
        self.tensors: Dict[str, Tensor] = {}
        self.trainable: Dict[str, bool] = {}

    def build(self, dim: int) -> Prior:
        """
        Create the parameters for a latent of size ``dim``.

        :param dim: Latent dimension.
        :return: This prior.
        """
        if dim < 1:
            raise PriorError(f"Prior dimension must be positive, got {dim}.")
        if self.dim is not None:
            if self.dim != dim:
                raise PriorError(f"{self.__class__.__name__} was built for dim {self.dim}, not {dim}.")
            return self
        self.dim = dim
        self.tensors = self._create(dim)
        for name, tensor in self.tensors.items():
            tensor.requires_grad = self.trainable.get(name, False)
            tensor.name = name
        return self

    def _require_built(self) -> None:
        if self.dim is None:
            raise PriorError(f"{self.__class__.__name__} has not been built; call build(dim) first.")

    @abstractmethod
    def _create(self, dim: int) -> Dict[str, Tensor]:
        """
        :param dim: Latent dimension.
        :return: All parameter tensors by name.
        """

    def make_posterior(self, raw: Tensor) -> GaussianPosterior:
        """
        Turn raw encoder output into the posterior paired with this prior.

        Override to change how the encoder output is read; the default is
        :func:`make_posterior`.

        :param raw: Tensor [..., 2 * dim].
        :return: The posterior.
        """
        return make_posterior(raw)

    def log_prob(self, x: Tensor) -> Tensor:
        """
        Log-density of a latent, summed per trial.

        An unbatched latent, ``[dim]`` or ``[T x dim]`` for time series, gives
        a scalar.

        :param x: Tensor [batch x dim], or [batch x T x dim] for time series.
        :return: Tensor [batch], or a scalar for an unbatched latent.
        """
        self._require_built()
        check_finite(x, f"{self.__class__.__name__}.log_prob")
        if x.ndim == self.event_ndim:
            return reduce_sum(self._log_prob(reshape(x, (1,) + x.shape)))
        return self._log_prob(x)

    @abstractmethod
    def _log_prob(self, x: Tensor) -> Tensor:
        """
        :param x: Batched latent, already checked to be finite.
        :return: Tensor [batch].
        """

    @abstractmethod
    def mean(self) -> Tensor:
        """
        :return: The prior mean, Tensor [dim].
        """

    def parameters(self) -> Dict[str, Tensor]:
        """
        :return: The trainable parameter tensors by name.
        """
        self._require_built()
        return {name: t for name, t in self.tensors.items() if t.requires_grad}

    def _expanded(self, name: str, shape) -> Tensor:
        return expand(self.tensors[name], shape)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(dim={self.dim})"


def kl_gaussian_diag(posterior: GaussianPosterior, prior: Prior) -> Tensor:
    """
    Analytic KL divergence from a diagonal Gaussian prior, summed per trial.

    :param posterior: Posterior with mean [batch x ... x dim].
    :param prior: A built :class:`MultivariateNormal`.
    :return: Tensor [batch].
    """
    from .normal import MultivariateNormal

    if not isinstance(prior, MultivariateNormal):
        raise PriorError(f"Analytic KL needs a MultivariateNormal prior, got {prior.__class__.__name__}.")
    prior._require_built()
    if posterior.dim != prior.dim:
        raise ShapeError("kl_gaussian_diag", posterior.mean.shape, (prior.dim,))

    shape = posterior.mean.shape
    p_mean = prior._expanded("mean", shape)
    p_logvar = prior._expanded("logvar", shape)
    ratio = exp(posterior.logvar - p_logvar)
    dev = square(posterior.mean - p_mean) / exp(p_logvar)
    return sum_per_trial((ratio + dev - 1.0 + p_logvar - posterior.logvar) * 0.5)


def kl_sampled(posterior: GaussianPosterior, prior: Prior, z: Tensor) -> Tensor:
    """
    Single-sample KL estimate ``log q(z) - log p(z)`` per trial.

    :param posterior: The posterior ``z`` was drawn from.
    :param prior: A built prior.
    :param z: The sample used in the forward pass.
    :return: Tensor [batch].
    """
    return posterior.log_prob(z) - prior.log_prob(z)
