"""
Differentiable operations on :class:`Tensor`.

Binary elementwise operations accept operands of equal shape, or one 0-d
scalar operand. Any other combination is rejected; use :func:`expand` to
broadcast explicitly.
"""
from __future__ import annotations

from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from ._base import Function, Tensor, as_tensor
from ..exceptions import DomainError, ShapeError, OperationError

Operand = Union[Tensor, float, int, np.ndarray]
Axes = Optional[Union[int, Sequence[int]]]


def _reduce_to(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    return np.asarray(grad.sum()).reshape(shape)


def _check_binary(op: str, x: Tensor, y: Tensor) -> None:
    if x.shape == y.shape or x.ndim == 0 or y.ndim == 0:
        return
    raise ShapeError(op, x.shape, y.shape, reason="Only equal shapes or a 0-d scalar operand are supported.")


def _check_positive(op: str, x: np.ndarray) -> None:
    if x.size and not np.all(x > 0):
        bad = x[~(x > 0)].reshape(-1)[0]
        raise DomainError(op, float(bad))


class Add(Function):
    name = "add"

    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self.shapes = (x.shape, y.shape)
        return x + y

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return _reduce_to(grad, self.shapes[0]), _reduce_to(grad, self.shapes[1])


class Sub(Function):
    name = "sub"

    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self.shapes = (x.shape, y.shape)
        return x - y

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return _reduce_to(grad, self.shapes[0]), _reduce_to(-grad, self.shapes[1])


class Mul(Function):
    name = "mul"

    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self.x, self.y = x, y
        return x * y

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        x_tensor, y_tensor = self.inputs
        gx = _reduce_to(grad * self.y, self.x.shape) if x_tensor.requires_grad else None
        gy = _reduce_to(grad * self.x, self.y.shape) if y_tensor.requires_grad else None
        return gx, gy


class Div(Function):
    name = "div"

    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self.x, self.y = x, y
        return x / y

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        x_tensor, y_tensor = self.inputs
        gx = _reduce_to(grad / self.y, self.x.shape) if x_tensor.requires_grad else None
        gy = _reduce_to(-grad * self.x / (self.y * self.y), self.y.shape) if y_tensor.requires_grad else None
        return gx, gy


class Neg(Function):
    name = "neg"

    def forward(self, x: np.ndarray) -> np.ndarray:
        return -x

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (-grad,)


class Exp(Function):
    name = "exp"

    def forward(self, x: np.ndarray) -> np.ndarray:
        self.out = np.exp(x)
        return self.out

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad * self.out,)


class Log(Function):
    name = "log"

    def forward(self, x: np.ndarray) -> np.ndarray:
        _check_positive(self.name, x)
        self.x = x
        return np.log(x)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad / self.x,)


class Tanh(Function):
    name = "tanh"

    def forward(self, x: np.ndarray) -> np.ndarray:
        self.out = np.tanh(x)
        return self.out

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad * (1.0 - self.out * self.out),)


class Sigmoid(Function):
    name = "sigmoid"

    def forward(self, x: np.ndarray) -> np.ndarray:
        self.out = special.expit(x)
        return self.out

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad * self.out * (1.0 - self.out),)


class Softplus(Function):
    name = "softplus"

    def forward(self, x: np.ndarray) -> np.ndarray:
        self.x = x
        return np.logaddexp(0.0, x)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad * special.expit(self.x),)


class Lgamma(Function):
    name = "lgamma"

    def forward(self, x: np.ndarray) -> np.ndarray:
        _check_positive(self.name, x)
        self.x = x
        return special.gammaln(x)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad * special.psi(self.x),)


class Digamma(Function):
    name = "digamma"

    def forward(self, x: np.ndarray) -> np.ndarray:
        self.x = x
        return special.psi(x)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad * special.polygamma(1, self.x),)


class PowScalar(Function):
    name = "pow_scalar"

    def forward(self, x: np.ndarray, exponent: float = 2.0) -> np.ndarray:
        self.x, self.exponent = x, exponent
        return np.power(x, exponent)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        if self.exponent == 2.0:
            return (grad * 2.0 * self.x,)
        return (grad * self.exponent * np.power(self.x, self.exponent - 1.0),)


class Clip(Function):
    name = "clip"

    def forward(self, x: np.ndarray, low: float = -np.inf, high: float = np.inf) -> np.ndarray:
        self.inside = (x >= low) & (x <= high)
        return np.clip(x, low, high)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad * self.inside,)


class MatMul(Function):
    name = "matmul"

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeError(self.name, a.shape, b.shape, reason="Expected [m x k] @ [k x n].")
        self.a, self.b = a, b
        return a @ b

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        a_tensor, b_tensor = self.inputs
        ga = grad @ self.b.T if a_tensor.requires_grad else None
        gb = self.a.T @ grad if b_tensor.requires_grad else None
        return ga, gb


def _normalize_axes(op: str, shape: Tuple[int, ...], axis: Axes) -> Tuple[int, ...]:
    ndim = len(shape)
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, (int, np.integer)) else tuple(axis)
    normalized = []
    for a in axes:
        if not -ndim <= a < ndim:
            raise ShapeError(op, shape, reason=f"Axis {a} is out of range for {ndim} dimensions.")
        normalized.append(int(a) % ndim)
    if len(set(normalized)) != len(normalized):
        raise ShapeError(op, shape, reason=f"Repeated axis in {axes}.")
    return tuple(sorted(normalized))


class Sum(Function):
    name = "sum"

    def forward(self, x: np.ndarray, axes: Tuple[int, ...] = (), keepdims: bool = False) -> np.ndarray:
        self.shape, self.axes, self.keepdims = x.shape, axes, keepdims
        return np.sum(x, axis=axes, keepdims=keepdims)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        if not self.keepdims:
            grad = np.expand_dims(grad, self.axes)
        return (np.broadcast_to(grad, self.shape),)


class Mean(Function):
    name = "mean"

    def forward(self, x: np.ndarray, axes: Tuple[int, ...] = (), keepdims: bool = False) -> np.ndarray:
        self.shape, self.axes, self.keepdims = x.shape, axes, keepdims
        self.count = int(np.prod([x.shape[a] for a in axes], dtype=np.int64)) if axes else 1
        return np.mean(x, axis=axes, keepdims=keepdims)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        if not self.keepdims:
            grad = np.expand_dims(grad, self.axes)
        return (np.broadcast_to(grad / self.count, self.shape),)


class Reshape(Function):
    name = "reshape"

    def forward(self, x: np.ndarray, shape: Tuple[int, ...] = ()) -> np.ndarray:
        self.shape = x.shape
        try:
            return x.reshape(shape)
        except ValueError as e:
            raise ShapeError(self.name, x.shape, tuple(shape), reason=str(e)) from None

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad.reshape(self.shape),)


class Transpose(Function):
    name = "transpose"

    def forward(self, x: np.ndarray, axes: Optional[Tuple[int, ...]] = None) -> np.ndarray:
        self.axes = tuple(reversed(range(x.ndim))) if axes is None else tuple(axes)
        if sorted(self.axes) != list(range(x.ndim)):
            raise ShapeError(self.name, x.shape, reason=f"Invalid permutation {self.axes}.")
        return np.transpose(x, self.axes)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (np.transpose(grad, np.argsort(self.axes)),)


class GetItem(Function):
    name = "getitem"

    def forward(self, x: np.ndarray, index: Any = None) -> np.ndarray:
        self.shape, self.index = x.shape, index
        return x[index]

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        out = np.zeros(self.shape, dtype=np.float64)
        if _is_basic_index(self.index):
            out[self.index] = grad
        else:
            np.add.at(out, self.index, grad)
        return (out,)


def _is_basic_index(index: Any) -> bool:
    parts = index if isinstance(index, tuple) else (index,)
    return all(
        isinstance(p, (int, np.integer, slice)) or p is Ellipsis or p is None
        for p in parts
    )


class Concat(Function):
    name = "concat"

    def forward(self, *arrays: np.ndarray, axis: int = 0) -> np.ndarray:
        reference = arrays[0].shape
        for a in arrays[1:]:
            if a.ndim != len(reference) or any(
                    s != r for i, (s, r) in enumerate(zip(a.shape, reference)) if i != axis % len(reference)
            ):
                raise ShapeError(self.name, reference, a.shape, reason=f"Shapes must agree off axis {axis}.")
        self.axis = axis
        self.splits = np.cumsum([a.shape[axis] for a in arrays])[:-1]
        return np.concatenate(arrays, axis=axis)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, ...]:
        return tuple(np.split(grad, self.splits, axis=self.axis))


class Stack(Function):
    name = "stack"

    def forward(self, *arrays: np.ndarray, axis: int = 0) -> np.ndarray:
        reference = arrays[0].shape
        for a in arrays[1:]:
            if a.shape != reference:
                raise ShapeError(self.name, reference, a.shape)
        self.axis = axis
        return np.stack(arrays, axis=axis)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, ...]:
        return tuple(np.moveaxis(grad, self.axis, 0))


class Expand(Function):
    name = "expand"

    def forward(self, x: np.ndarray, shape: Tuple[int, ...] = ()) -> np.ndarray:
        self.shape = x.shape
        try:
            return np.broadcast_to(x, shape)
        except ValueError:
            raise ShapeError(self.name, x.shape, tuple(shape), reason="Cannot broadcast.") from None

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        lead = grad.ndim - len(self.shape)
        if lead:
            grad = grad.sum(axis=tuple(range(lead)))
        axes = tuple(i for i, s in enumerate(self.shape) if s == 1 and grad.shape[i] != 1)
        if axes:
            grad = grad.sum(axis=axes, keepdims=True)
        return (grad,)


def add(x: Operand, y: Operand) -> Tensor:
    x, y = as_tensor(x), as_tensor(y)
    _check_binary(Add.name, x, y)
    return Add.apply(x, y)


def sub(x: Operand, y: Operand) -> Tensor:
    x, y = as_tensor(x), as_tensor(y)
    _check_binary(Sub.name, x, y)
    return Sub.apply(x, y)


def mul(x: Operand, y: Operand) -> Tensor:
    x, y = as_tensor(x), as_tensor(y)
    _check_binary(Mul.name, x, y)
    return Mul.apply(x, y)


def div(x: Operand, y: Operand) -> Tensor:
    x, y = as_tensor(x), as_tensor(y)
    _check_binary(Div.name, x, y)
    return Div.apply(x, y)


def neg(x: Operand) -> Tensor:
    return Neg.apply(as_tensor(x))


def exp(x: Operand) -> Tensor:
    return Exp.apply(as_tensor(x))


def log(x: Operand) -> Tensor:
    return Log.apply(as_tensor(x))


def tanh(x: Operand) -> Tensor:
    return Tanh.apply(as_tensor(x))


def sigmoid(x: Operand) -> Tensor:
    return Sigmoid.apply(as_tensor(x))


def softplus(x: Operand) -> Tensor:
    return Softplus.apply(as_tensor(x))


def lgamma(x: Operand) -> Tensor:
    return Lgamma.apply(as_tensor(x))


def digamma(x: Operand) -> Tensor:
    return Digamma.apply(as_tensor(x))


def pow_scalar(x: Operand, exponent: float) -> Tensor:
    return PowScalar.apply(as_tensor(x), exponent=float(exponent))


def square(x: Operand) -> Tensor:
    return PowScalar.apply(as_tensor(x), exponent=2.0)


def clip(x: Operand, low: float, high: float) -> Tensor:
    return Clip.apply(as_tensor(x), low=low, high=high)


def matmul(a: Operand, b: Operand) -> Tensor:
    return MatMul.apply(as_tensor(a), as_tensor(b))


def reduce_sum(x: Operand, axis: Axes = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    return Sum.apply(x, axes=_normalize_axes(Sum.name, x.shape, axis), keepdims=keepdims)


def reduce_mean(x: Operand, axis: Axes = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    return Mean.apply(x, axes=_normalize_axes(Mean.name, x.shape, axis), keepdims=keepdims)


def reduce(op_kind: str, x: Operand, axis: Axes = None, keepdims: bool = False) -> Tensor:
    """
    Reduce a tensor over the given axes.

    :param op_kind: Either "sum" or "mean".
    :param x: The tensor to reduce.
    :param axis: Axis or axes to reduce; None reduces everything.
    :param keepdims: Keep reduced axes with size 1.
    :return: The reduced tensor.
    """
    if op_kind == "sum":
        return reduce_sum(x, axis, keepdims)
    if op_kind == "mean":
        return reduce_mean(x, axis, keepdims)
    raise OperationError(op_kind, ("sum", "mean"))


def reshape(x: Operand, shape: Sequence[int]) -> Tensor:
    return Reshape.apply(as_tensor(x), shape=tuple(shape))


def transpose(x: Operand, axes: Optional[Sequence[int]] = None) -> Tensor:
    return Transpose.apply(as_tensor(x), axes=None if axes is None else tuple(axes))


def getitem(x: Operand, index: Any) -> Tensor:
    return GetItem.apply(as_tensor(x), index=index)


def concat(tensors: Sequence[Operand], axis: int = 0) -> Tensor:
    if len(tensors) == 1:
        return as_tensor(tensors[0])
    return Concat.apply(*(as_tensor(t) for t in tensors), axis=axis)


def stack(tensors: Sequence[Operand], axis: int = 0) -> Tensor:
    return Stack.apply(*(as_tensor(t) for t in tensors), axis=axis)


def expand(x: Operand, shape: Sequence[int]) -> Tensor:
    return Expand.apply(as_tensor(x), shape=tuple(shape))


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """
    Affine map ``x @ weight + bias`` with the bias expanded over the batch.

    :param x: Input of shape [batch x in].
    :param weight: Kernel of shape [in x out].
    :param bias: Optional bias of shape [out].
    :return: Output of shape [batch x out].
    """
    out = matmul(x, weight)
    if bias is not None:
        out = add(out, expand(bias, out.shape))
    return out


_UNARY: Dict[str, Callable[[Operand], Tensor]] = {
    "exp": exp,
    "log": log,
    "tanh": tanh,
    "sigmoid": sigmoid,
    "softplus": softplus,
    "lgamma": lgamma,
    "digamma": digamma,
    "neg": neg,
}

_BINARY: Dict[str, Callable[[Operand, Operand], Tensor]] = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "div": div,
}
_KNOWN = tuple(sorted(_UNARY)) + tuple(sorted(_BINARY)) + ("pow_scalar",)


def elementwise(op_kind: str, x: Operand, y: Optional[Union[Operand, float]] = None) -> Tensor:
    """
    Dispatch an elementwise operation by name.

    :param op_kind: One of add, sub, mul, div, exp, log, tanh, sigmoid,
        softplus, lgamma, digamma, neg, pow_scalar.
    :param x: First operand.
    :param y: Second operand for binary operations, or the exponent for pow_scalar.
    :return: The result tensor.
    """
    if op_kind in _UNARY:
        return _UNARY[op_kind](x)
    if op_kind in _BINARY:
        if y is None:
            raise OperationError(op_kind, _KNOWN, reason=f"Operation '{op_kind}' needs two operands.")
        return _BINARY[op_kind](x, y)
    if op_kind == "pow_scalar":
        if y is None:
            raise OperationError(op_kind, _KNOWN, reason="pow_scalar needs an exponent.")
        return pow_scalar(x, float(y))
    raise OperationError(op_kind, _KNOWN)


def zeros(shape: Sequence[int]) -> Tensor:
    return Tensor(np.zeros(tuple(shape)))


def ones(shape: Sequence[int]) -> Tensor:
    return Tensor(np.ones(tuple(shape)))
