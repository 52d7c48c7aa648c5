from __future__ import annotations

from collections import OrderedDict
from typing import Dict, Iterator, List, Mapping, Tuple

import numpy as np

from .config import LFADSConfig
from .gru import init_gru, normal_kernel
from ..exceptions import CheckpointError
from ..tensor import Tensor

RENORM_TOLERANCE = 1e-12


def _normalize_rows(weight: np.ndarray) -> np.ndarray:
    return weight / np.linalg.norm(weight, axis=1, keepdims=True)


class LFADSParams:
    """
    Named parameter tensors of an LFADS model.

    Names are dotted: ``ic_enc.fwd.h_rz``, ``readout.w``, ``co_prior.logvar``
    and so on. Iteration order is the registration order and is stable for a
    given configuration.
    """

    def __init__(self, tensors: Mapping[str, Tensor]) -> None:
        self.tensors: "OrderedDict[str, Tensor]" = OrderedDict(tensors)

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: object) -> bool:
        return name in self.tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def items(self) -> List[Tuple[str, Tensor]]:
        return list(self.tensors.items())

    def names(self) -> List[str]:
        return list(self.tensors)

    def register(self, prefix: str, tensors: Mapping[str, Tensor]) -> None:
        """
        Add externally owned tensors (prior or observation-model parameters).

        :param prefix: Name prefix, e.g. ``"ic_prior"``.
        :param tensors: Tensors to add; they are shared, not copied.
        """
        for name, tensor in tensors.items():
            tensor.requires_grad = True
            self.tensors[f"{prefix}.{name}"] = tensor

    def with_prefix(self, prefix: str) -> Dict[str, Tensor]:
        return {k: v for k, v in self.tensors.items() if k.startswith(prefix + ".")}

    def arrays(self) -> Dict[str, np.ndarray]:
        """
        :return: Copies of every parameter value.
        """
        return {name: t.data.copy() for name, t in self.tensors.items()}

    def load(self, arrays: Mapping[str, np.ndarray]) -> None:
        """
        Overwrite parameter values in place.

        :param arrays: Values keyed by parameter name; must match names and shapes exactly.
        """
        missing = set(self.tensors) - set(arrays)
        extra = set(arrays) - set(self.tensors)
        if missing or extra:
            raise CheckpointError(
                f"Parameter names differ: missing {sorted(missing)}, unexpected {sorted(extra)}."
            )
        for name, tensor in self.tensors.items():
            value = np.asarray(arrays[name], dtype=np.float64)
            if value.shape != tensor.shape:
                raise CheckpointError(f"Parameter '{name}' has shape {value.shape}, expected {tensor.shape}.")
            tensor.data = value.copy()

    def zero_grad(self) -> None:
        for tensor in self.tensors.values():
            tensor.zero_grad()

    def grads(self) -> Dict[str, np.ndarray]:
        """
        :return: Gradient per parameter, zeros where none was accumulated.
        """
        return {
            name: t.grad if t.grad is not None else np.zeros_like(t.data)
            for name, t in self.tensors.items()
        }

    def normalize_factor_rows(self) -> None:
        """
        Rescale the factor readout rows to unit L2 norm.

        Rows already within 1e-12 of unit norm are left untouched, so a step
        that does not move the weights leaves them bitwise unchanged.
        """
        weight = self.tensors["factors.w"].data
        norms = np.linalg.norm(weight, axis=1)
        if np.any(np.abs(norms - 1.0) > RENORM_TOLERANCE):
            self.tensors["factors.w"].data = _normalize_rows(weight)

    def recurrent_weights(self, prefix: str) -> List[Tensor]:
        return [self.tensors[f"{prefix}.{key}"] for key in ("h_rz", "h_n") if f"{prefix}.{key}" in self.tensors]

    @property
    def n_values(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    @classmethod
    def initialize(cls, config: LFADSConfig, n_params: int, rng: np.random.Generator) -> LFADSParams:
        """
        Draw initial weights for a configuration.

        :param config: Model configuration.
        :param n_params: Readout channels per reconstructed neuron.
        :param rng: Random generator; consumed in a fixed order.
        :return: Freshly initialized parameters.
        """
        arrays: "OrderedDict[str, np.ndarray]" = OrderedDict()

        def add_gru(prefix: str, input_size: int, hidden_size: int, learned_h0: bool = True) -> None:
            for key, value in init_gru(rng, input_size, hidden_size).items():
                arrays[f"{prefix}.{key}"] = value
            if learned_h0:
                arrays[f"{prefix}.h0"] = np.zeros(hidden_size)

        def add_linear(prefix: str, fan_in: int, fan_out: int) -> None:
            arrays[f"{prefix}.w"] = normal_kernel(rng, fan_in, fan_out)
            arrays[f"{prefix}.b"] = np.zeros(fan_out)

        add_gru("ic_enc.fwd", config.n_heldin, config.encod_dim)
        add_gru("ic_enc.bwd", config.n_heldin, config.encod_dim)
        add_linear("ic_to_post", 2 * config.encod_dim, 2 * config.ic_dim)
        add_linear("ic_to_g0", config.ic_dim, config.gen_dim)

        if config.has_controller:
            add_gru("ci_enc.fwd", config.n_heldin, config.ci_enc_dim)
            add_gru("ci_enc.bwd", config.n_heldin, config.ci_enc_dim)
            add_gru("con", 2 * config.ci_enc_dim + config.fac_dim, config.con_dim)
            add_linear("con_to_post", config.con_dim, 2 * config.co_dim)

        add_gru("gen", config.co_dim, config.gen_dim, learned_h0=False)
        arrays["factors.w"] = _normalize_rows(normal_kernel(rng, config.fac_dim, config.gen_dim))
        add_linear("readout", config.fac_dim, config.n_recon * n_params)

        return cls({name: Tensor(value, requires_grad=True, name=name) for name, value in arrays.items()})
