from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from ..tensor import Tensor, add, clip, expand, matmul, mul, sigmoid, tanh
from ..tensor.ops import getitem

GRU_KEYS = ("x_rz", "h_rz", "b_rz", "x_n", "h_n", "b_n")


def normal_kernel(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    """
    Kernel with entries drawn from ``N(0, 1 / fan_in)``.
    """
    return rng.standard_normal((fan_in, fan_out)) / np.sqrt(max(fan_in, 1))


def orthogonal(rng: np.random.Generator, size: int) -> np.ndarray:
    """
    Random orthogonal matrix from the QR decomposition of a Gaussian matrix.
    """
    q, r = np.linalg.qr(rng.standard_normal((size, size)))
    return q * np.sign(np.diag(r))


def init_gru(rng: np.random.Generator, input_size: int, hidden_size: int) -> Dict[str, np.ndarray]:
    """
    Initial GRU weights.

    Gate kernels are stored as ``[r | z]`` blocks. Input kernels are Gaussian
    with variance ``1 / input_size``, recurrent kernels are orthogonal per
    gate, and the update-gate bias starts at +1. A zero ``input_size`` yields
    no input kernels.

    :param rng: Random generator.
    :param input_size: Width of the input.
    :param hidden_size: Width of the state.
    :return: Arrays keyed by ``x_rz``, ``h_rz``, ``b_rz``, ``x_n``, ``h_n``, ``b_n``.
    """
    h = hidden_size
    arrays = {}
    if input_size:
        arrays["x_rz"] = normal_kernel(rng, input_size, 2 * h)
    arrays["h_rz"] = np.concatenate([orthogonal(rng, h), orthogonal(rng, h)], axis=1)
    arrays["b_rz"] = np.concatenate([np.zeros(h), np.ones(h)])
    if input_size:
        arrays["x_n"] = normal_kernel(rng, input_size, h)
    arrays["h_n"] = orthogonal(rng, h)
    arrays["b_n"] = np.zeros(h)
    return arrays


@dataclass
class GRUParams:
    """
    Weights of one GRU cell. ``x_rz`` and ``x_n`` are None for an input-free cell.
    """
    h_rz: Tensor
    b_rz: Tensor
    h_n: Tensor
    b_n: Tensor
    x_rz: Optional[Tensor] = None
    x_n: Optional[Tensor] = None

    @classmethod
    def from_params(cls, params: Mapping[str, Tensor], prefix: str) -> "GRUParams":
        return cls(**{key: params[f"{prefix}.{key}"] for key in GRU_KEYS if f"{prefix}.{key}" in params})

    @property
    def hidden_size(self) -> int:
        return self.h_n.shape[0]

    @property
    def recurrent(self) -> List[Tensor]:
        return [self.h_rz, self.h_n]


def gru_cell(
        params: GRUParams,
        x: Optional[Tensor],
        h: Tensor,
        cell_clip: Optional[float] = None,
) -> Tensor:
    """
    One GRU step.

    ``r, z = sigmoid(x W_x + h W_h + b)``, ``n = tanh(x W_xn + (r * h) W_hn + b_n)``
    and ``h' = (1 - z) * n + z * h``, optionally clipped to ``[-cell_clip, cell_clip]``.

    :param params: Cell weights.
    :param x: Input [batch x in], or None for an input-free cell.
    :param h: State [batch x hidden].
    :param cell_clip: Clip bound for the new state; None or 0 disables clipping.
    :return: The new state [batch x hidden].
    """
    size = params.hidden_size
    batch = h.shape[0]

    gates = matmul(h, params.h_rz)
    if x is not None and params.x_rz is not None:
        gates = gates + matmul(x, params.x_rz)
    gates = sigmoid(gates + expand(params.b_rz, gates.shape))
    r = getitem(gates, (slice(None), slice(0, size)))
    z = getitem(gates, (slice(None), slice(size, 2 * size)))

    candidate = matmul(mul(r, h), params.h_n)
    if x is not None and params.x_n is not None:
        candidate = candidate + matmul(x, params.x_n)
    n = tanh(add(candidate, expand(params.b_n, (batch, size))))

    new_h = (1.0 - z) * n + z * h
    if cell_clip:
        new_h = clip(new_h, -cell_clip, cell_clip)
    return new_h


def run_gru(
        params: GRUParams,
        inputs: Sequence[Optional[Tensor]],
        h0: Tensor,
        cell_clip: Optional[float] = None,
        reverse: bool = False,
) -> List[Tensor]:
    """
    Unroll a GRU over a sequence.

    :param params: Cell weights.
    :param inputs: One input per step.
    :param h0: Initial state [batch x hidden].
    :param cell_clip: Clip bound passed to every step.
    :param reverse: Consume the sequence from the last step.
    :return: States aligned with ``inputs``: entry t is the state after consuming step t.
    """
    order = range(len(inputs) - 1, -1, -1) if reverse else range(len(inputs))
    states: List[Optional[Tensor]] = [None] * len(inputs)
    h = h0
    for t in order:
        h = gru_cell(params, inputs[t], h, cell_clip)
        states[t] = h
    return states


def initial_state(h0: Tensor, batch: int) -> Tensor:
    """
    Expand a learned initial state [hidden] over the batch.
    """
    return expand(h0, (batch, h0.shape[0]))
