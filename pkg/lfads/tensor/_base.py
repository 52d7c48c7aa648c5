from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import NotScalarError

ArrayLike = Union[np.ndarray, float, int, Sequence[Any]]


class Function(ABC):
    """
    Base class for differentiable operations.

    A subclass implements ``forward`` on raw arrays and ``backward``, which maps
    the gradient of the output to one gradient per input (``None`` for inputs
    that receive no gradient). ``apply`` runs the forward pass and links the
    result into the graph when any input requires a gradient.
    """
    name = "function"

    def __init__(self, *inputs: Tensor) -> None:
        self.inputs: Tuple[Tensor, ...] = inputs

    @abstractmethod
    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        """
        Compute the output array.

        :param arrays: The data arrays of the input tensors.
        :param kwargs: Non-differentiable arguments of the operation.
        :return: The output array.
        """

    @abstractmethod
    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        """
        Propagate the output gradient to the inputs.

        :param grad: Gradient of the loss with respect to this operation's output.
        :return: One gradient per input, each shaped like that input.
        """

    @classmethod
    def apply(cls, *inputs: Tensor, **kwargs: Any) -> Tensor:
        fn = cls(*inputs)
        out = fn.forward(*(t.data for t in inputs), **kwargs)
        requires_grad = any(t.requires_grad for t in inputs)
        return Tensor(out, requires_grad=requires_grad, creator=fn if requires_grad else None)


class Tensor:
    """
    Dense float64 array that records the operations producing it.

    Leaves created by the user carry ``requires_grad``; ``grad`` is populated
    (and accumulated) on leaves by :func:`backward`.
    """
    __slots__ = ("data", "requires_grad", "grad", "creator", "name")

    def __init__(
            self,
            data: ArrayLike,
            requires_grad: bool = False,
            creator: Optional[Function] = None,
            name: Optional[str] = None,
    ) -> None:
        """
        :param data: Values of the tensor, converted to a float64 array.
        :param requires_grad: Whether gradients should flow into this tensor.
        :param creator: The operation that produced this tensor, None for leaves.
        :param name: Optional label used in reprs and parameter tables.
        """
        self.data: np.ndarray = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.creator = creator
        self.name = name

    def __repr__(self) -> str:
        label = f", name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def values(self) -> np.ndarray:
        """
        Row-major flat view of the tensor values.
        """
        return self.data.reshape(-1)

    @property
    def is_leaf(self) -> bool:
        return self.creator is None

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> Tensor:
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64, copy=True)
        else:
            self.grad = self.grad + grad

    def backward(self) -> None:
        backward(self)

    # Operator wrappers
    def __add__(self, other: Union[Tensor, float]) -> Tensor:
        from .ops import add
        return add(self, other)

    def __radd__(self, other: Union[Tensor, float]) -> Tensor:
        from .ops import add
        return add(other, self)

    def __sub__(self, other: Union[Tensor, float]) -> Tensor:
        from .ops import sub
        return sub(self, other)

    def __rsub__(self, other: Union[Tensor, float]) -> Tensor:
        from .ops import sub
        return sub(other, self)

    def __mul__(self, other: Union[Tensor, float]) -> Tensor:
        from .ops import mul
        return mul(self, other)

    def __rmul__(self, other: Union[Tensor, float]) -> Tensor:
        from .ops import mul
        return mul(other, self)

    def __truediv__(self, other: Union[Tensor, float]) -> Tensor:
        from .ops import div
        return div(self, other)

    def __rtruediv__(self, other: Union[Tensor, float]) -> Tensor:
        from .ops import div
        return div(other, self)

    def __neg__(self) -> Tensor:
        from .ops import neg
        return neg(self)

    def __pow__(self, exponent: float) -> Tensor:
        from .ops import pow_scalar
        return pow_scalar(self, exponent)

    def __matmul__(self, other: Tensor) -> Tensor:
        from .ops import matmul
        return matmul(self, other)

    def __getitem__(self, index: Any) -> Tensor:
        from .ops import getitem
        return getitem(self, index)

    def exp(self) -> Tensor:
        from .ops import exp
        return exp(self)

    def log(self) -> Tensor:
        from .ops import log
        return log(self)

    def tanh(self) -> Tensor:
        from .ops import tanh
        return tanh(self)

    def sigmoid(self) -> Tensor:
        from .ops import sigmoid
        return sigmoid(self)

    def softplus(self) -> Tensor:
        from .ops import softplus
        return softplus(self)

    def lgamma(self) -> Tensor:
        from .ops import lgamma
        return lgamma(self)

    def square(self) -> Tensor:
        from .ops import pow_scalar
        return pow_scalar(self, 2.0)

    def sum(self, axis: Optional[Union[int, Sequence[int]]] = None, keepdims: bool = False) -> Tensor:
        from .ops import reduce_sum
        return reduce_sum(self, axis, keepdims)

    def mean(self, axis: Optional[Union[int, Sequence[int]]] = None, keepdims: bool = False) -> Tensor:
        from .ops import reduce_mean
        return reduce_mean(self, axis, keepdims)

    def reshape(self, *shape: int) -> Tensor:
        from .ops import reshape
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes: int) -> Tensor:
        from .ops import transpose
        return transpose(self, axes or None)

    @property
    def T(self) -> Tensor:
        return self.transpose()

    def expand(self, *shape: int) -> Tensor:
        from .ops import expand
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return expand(self, shape)

    def clip(self, low: float, high: float) -> Tensor:
        from .ops import clip
        return clip(self, low, high)


def as_tensor(value: Union[Tensor, ArrayLike]) -> Tensor:
    """
    Wrap a number or array as a constant tensor; tensors pass through.

    :param value: A tensor, number or array.
    :return: A tensor.
    """
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=False)


class Tape:
    """
    The operations that produced an output, ordered for reverse-mode replay.

    ``nodes`` starts at the output and lists every tensor that requires a
    gradient in reverse topological order, so each node is visited only after
    all of its consumers.
    """

    def __init__(self, output: Tensor, nodes: List[Tensor]) -> None:
        self.output = output
        self.nodes = nodes

    def __len__(self) -> int:
        return len(self.nodes)

    @classmethod
    def record(cls, output: Tensor) -> Tape:
        """
        Collect the graph behind ``output`` by a post-order traversal.

        :param output: The tensor to differentiate.
        :return: A tape ready for :meth:`replay`.
        """
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(output, False)]

        while stack:
            node, expanded = stack.pop()
            if id(node) in visited:
                continue
            if expanded:
                visited.add(id(node))
                order.append(node)
                continue
            stack.append((node, True))
            if node.creator is not None:
                for parent in node.creator.inputs:
                    if parent.requires_grad and id(parent) not in visited:
                        stack.append((parent, False))

        order.reverse()
        return cls(output, order)

    def replay(self, seed: np.ndarray) -> None:
        """
        Run the chain rule over the tape, accumulating into leaf gradients.

        :param seed: Gradient of the final quantity with respect to the output.
        """
        pending: Dict[int, np.ndarray] = {id(self.output): seed}

        for node in self.nodes:
            grad = pending.pop(id(node), None)
            if grad is None:
                continue
            if node.creator is None:
                node.accumulate_grad(grad)
                continue

            input_grads = node.creator.backward(grad)
            for parent, parent_grad in zip(node.creator.inputs, input_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + parent_grad
                else:
                    pending[key] = parent_grad

    def release(self) -> None:
        """
        Drop graph references so intermediate arrays can be freed.
        """
        for node in self.nodes:
            node.creator = None
        self.nodes = []


def backward(loss: Tensor) -> None:
    """
    Populate ``grad`` on every leaf that ``loss`` depends on.

    Gradients accumulate across calls until the leaves are reset with
    :meth:`Tensor.zero_grad`. The tape is freed afterwards.

    :param loss: A single-element tensor.
    """
    if loss.size != 1:
        raise NotScalarError(loss.shape)
    if not loss.requires_grad:
        return

    tape = Tape.record(loss)
    tape.replay(np.ones_like(loss.data))
    tape.release()
