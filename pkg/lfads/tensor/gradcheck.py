from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np

from ._base import Tensor, backward


def finite_difference_grad(
        f: Callable[[np.ndarray], float],
        theta: Sequence[float],
        eps: float = 1e-5,
        indices: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """
    Central-difference gradient of a scalar function of a flat parameter vector.

    :param f: Deterministic scalar function of the parameter vector.
    :param theta: The point at which to differentiate.
    :param eps: Step size, must be positive.
    :param indices: Optional subset of coordinates; others are left at zero.
    :return: Array shaped like ``theta`` holding the estimated partial derivatives.
    """
    if eps <= 0:
        raise ValueError("eps must be positive.")

    theta = np.array(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    coords = range(theta.size) if indices is None else indices

    for i in coords:
        original = theta[i]
        theta[i] = original + eps
        f_plus = f(theta)
        theta[i] = original - eps
        f_minus = f(theta)
        theta[i] = original
        grad[i] = (f_plus - f_minus) / (2.0 * eps)

    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-4) -> float:
    """
    Maximum elementwise relative error between two gradient arrays.

    :param analytic: Gradient from backward().
    :param numeric: Gradient from finite differences.
    :param floor: Lower bound on the denominator so near-zero entries compare absolutely.
    :return: The maximum relative error.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


@dataclass
class GradientReport:
    errors: Dict[str, float] = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    def worst(self) -> str:
        return max(self.errors, key=self.errors.get) if self.errors else ""


def check_gradients(
        loss_fn: Callable[[], Tensor],
        params: Mapping[str, Tensor],
        eps: float = 1e-5,
        max_coords: Optional[int] = 8,
        floor: float = 1e-4,
        rng: Optional[np.random.Generator] = None,
) -> GradientReport:
    """
    Compare backward() gradients with central differences for every parameter tensor.

    ``loss_fn`` must rebuild the loss from the current parameter values on each
    call and be deterministic.

    :param loss_fn: Builds the scalar loss from the parameters.
    :param params: Named parameter tensors to check.
    :param eps: Finite difference step.
    :param max_coords: Coordinates sampled per tensor; None checks all of them.
    :param floor: Denominator floor for the relative error.
    :param rng: Generator used to sample coordinates.
    :return: Per-tensor maximum relative errors.
    """
    rng = rng or np.random.default_rng(0)

    for tensor in params.values():
        tensor.zero_grad()
    backward(loss_fn())
    analytic = {
        name: (t.grad if t.grad is not None else np.zeros_like(t.data)).reshape(-1).copy()
        for name, t in params.items()
    }

    report = GradientReport()
    for name, tensor in params.items():
        flat = tensor.data.reshape(-1)
        if max_coords is None or flat.size <= max_coords:
            coords = np.arange(flat.size)
        else:
            coords = np.sort(rng.choice(flat.size, size=max_coords, replace=False))

        original = tensor.data.copy()

        def f(theta: np.ndarray) -> float:
            tensor.data = theta.reshape(original.shape)
            return loss_fn().item()

        numeric = finite_difference_grad(f, flat, eps=eps, indices=coords)
        tensor.data = original
        report.errors[name] = relative_error(analytic[name][coords], numeric[coords], floor=floor)

    return report
