from typing import Dict, Mapping, Tuple

import numpy as np

from ..model.params import LFADSParams


def adam_step(
        param: np.ndarray,
        grad: np.ndarray,
        m: np.ndarray,
        v: np.ndarray,
        lr: float,
        beta1: float,
        beta2: float,
        eps: float,
        step: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    One bias-corrected Adam update.

    :param param: Current value.
    :param grad: Gradient at the current value.
    :param m: First-moment estimate before the update.
    :param v: Second-moment estimate before the update.
    :param step: 1-based index of this update.
    :return: Updated value, first moment and second moment.
    """
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** step)
    v_hat = v / (1.0 - beta2 ** step)
    return param - lr * m_hat / (np.sqrt(v_hat) + eps), m, v


def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_grad_norm(grads: Dict[str, np.ndarray], max_norm: float) -> float:
    """
    Rescale gradients in place so their global L2 norm is at most ``max_norm``.

    :param grads: Gradients by parameter name.
    :param max_norm: Norm bound.
    :return: The norm before clipping.
    """
    norm = global_norm(grads)
    if norm > max_norm:
        scale = max_norm / norm
        for name in grads:
            grads[name] = grads[name] * scale
    return norm


class Adam:
    """
    Adam over the named tensors of an :class:`LFADSParams`.
    """

    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}

    def step(self, params: LFADSParams, grads: Mapping[str, np.ndarray], lr: float) -> None:
        """
        Update every parameter in place.

        :param params: The parameters to update.
        :param grads: Gradients by parameter name.
        :param lr: Learning rate of this step.
        """
        self.t += 1
        for name, tensor in params.items():
            m = self.m.get(name)
            v = self.v.get(name)
            if m is None:
                m = np.zeros_like(tensor.data)
                v = np.zeros_like(tensor.data)
            tensor.data, self.m[name], self.v[name] = adam_step(
                tensor.data, grads[name], m, v, lr, self.beta1, self.beta2, self.eps, self.t,
            )

    def state_arrays(self) -> Dict[str, Dict[str, np.ndarray]]:
        return {"m": {k: a.copy() for k, a in self.m.items()}, "v": {k: a.copy() for k, a in self.v.items()}}

    def load_state(self, t: int, m: Mapping[str, np.ndarray], v: Mapping[str, np.ndarray]) -> None:
        self.t = int(t)
        self.m = {k: np.array(a, dtype=np.float64) for k, a in m.items()}
        self.v = {k: np.array(a, dtype=np.float64) for k, a in v.items()}
