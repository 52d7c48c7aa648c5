from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Dict, List, Optional

import numpy as np

from ..exceptions import ObservationSupportError, ShapeError
from ..tensor import Tensor, getitem


class Reconstruction(ABC):
    """
    Abstract observation model for the reconstructed data.

    The output readout produces ``n_params`` channels per observed neuron,
    laid out parameter-major: channel ``k * N + n`` holds parameter ``k`` of
    neuron ``n``. Link functions map these unconstrained values to valid
    distribution parameters.
    """
    name = "reconstruction"
    n_params = 1
    expected = "finite values"
    safe_value = 0.0

    def __init__(self) -> None:
        self.n_neurons: Optional[int] = None
        self.tensors: Dict[str, Tensor] = {}

    def setup(self, n_neurons: int) -> Reconstruction:
        """
        Bind the model to a number of observed neurons.

        :param n_neurons: Width of the reconstruction data.
        :return: This model.
        """
        self.n_neurons = n_neurons
        return self

    def parameters(self) -> Dict[str, Tensor]:
        return {name: t for name, t in self.tensors.items() if t.requires_grad}

    def split(self, raw: Tensor) -> List[Tensor]:
        """
        Separate raw outputs into one tensor per distribution parameter.

        :param raw: Tensor [..., N * n_params].
        :return: ``n_params`` tensors of shape [..., N].
        """
        width = raw.shape[-1]
        if width % self.n_params:
            raise ShapeError(
                f"{self.name}.split", raw.shape,
                reason=f"Last axis must be a multiple of {self.n_params}.",
            )
        n = width // self.n_params
        lead = (slice(None),) * (raw.ndim - 1)
        return [getitem(raw, lead + (slice(k * n, (k + 1) * n),)) for k in range(self.n_params)]

    def in_support(self, data: np.ndarray) -> np.ndarray:
        """
        :param data: Observations.
        :return: Boolean array marking entries inside the support.
        """
        return np.isfinite(data)

    def check_support(self, data: np.ndarray, mask: Optional[np.ndarray] = None) -> None:
        """
        Raise for the first observation outside the support.

        :param data: Observations.
        :param mask: Entries with zero weight are not checked.
        """
        bad = ~self.in_support(data)
        if mask is not None:
            bad &= mask != 0
        if bad.any():
            index = np.unravel_index(int(np.flatnonzero(bad)[0]), data.shape)
            raise ObservationSupportError(self.name, index, float(data[index]), self.expected)

    def prepare(self, raw: Tensor, data: np.ndarray, mask: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Validate shapes and support, substituting a safe value at masked entries.

        :return: The observations ready for :meth:`_nll`.
        """
        data = np.asarray(data, dtype=np.float64)
        if raw.shape[:-1] != data.shape[:-1] or raw.shape[-1] != data.shape[-1] * self.n_params:
            raise ShapeError(f"{self.name}.nll", raw.shape, data.shape)
        self.check_support(data, mask)
        if mask is not None:
            data = np.where(mask != 0, data, self.safe_value)
        return data

    def nll(self, raw: Tensor, data: np.ndarray, mask: Optional[np.ndarray] = None) -> Tensor:
        """
        Elementwise negative log-likelihood.

        :param raw: Raw output parameters [..., N * n_params].
        :param data: Observations [..., N].
        :param mask: Optional loss weights; zero-weight entries skip the support check.
        :return: Tensor shaped like ``data``.
        """
        return self._nll(raw, self.prepare(raw, data, mask))

    @abstractmethod
    def _nll(self, raw: Tensor, data: np.ndarray) -> Tensor:
        """
        :param raw: Raw output parameters.
        :param data: In-support observations.
        :return: Elementwise negative log-likelihood.
        """

    @abstractmethod
    def mean(self, raw: Tensor) -> Tensor:
        """
        :param raw: Raw output parameters.
        :return: The distribution mean per neuron.
        """

    @abstractmethod
    def sample(self, raw: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """
        Draw observations from the distribution defined by raw outputs.

        :param raw: Raw output parameters as an array.
        :param rng: Random generator.
        :return: Array [..., N].
        """

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(n_neurons={self.n_neurons})"
