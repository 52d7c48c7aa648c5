import numpy as np
import pytest
from scipy import special

from lfads.exceptions import DomainError, NotScalarError, OperationError, ShapeError
from lfads.tensor import (
    Tape,
    Tensor,
    backward,
    check_gradients,
    clip,
    concat,
    digamma,
    elementwise,
    exp,
    expand,
    finite_difference_grad,
    getitem,
    lgamma,
    linear,
    log,
    matmul,
    reduce,
    reduce_mean,
    reduce_sum,
    relative_error,
    reshape,
    sigmoid,
    softplus,
    square,
    stack,
    tanh,
    transpose,
)


def leaf(shape, rng, positive=False, name=None):
    data = rng.standard_normal(shape)
    if positive:
        data = np.abs(data) + 0.5
    return Tensor(data, requires_grad=True, name=name)


@pytest.mark.parametrize("op, positive", [
    (exp, False),
    (tanh, False),
    (sigmoid, False),
    (softplus, False),
    (square, False),
    (log, True),
    (lgamma, True),
    (digamma, True),
])
def test_unary_gradients(op, positive, rng):
    x = leaf((3, 4), rng, positive=positive)
    report = check_gradients(lambda: reduce_sum(op(x) * Tensor(np.arange(12.0).reshape(3, 4))), {"x": x})
    assert report.max_error < 1e-5, report.worst()


@pytest.mark.parametrize("kind", ["add", "sub", "mul", "div"])
def test_binary_gradients(kind, rng):
    x = leaf((2, 3), rng)
    y = leaf((2, 3), rng, positive=True)
    report = check_gradients(lambda: reduce_sum(square(elementwise(kind, x, y))), {"x": x, "y": y})
    assert report.max_error < 1e-5, report.worst()


def test_scalar_operand_gradient(rng):
    x = leaf((2, 3), rng)
    s = leaf((), rng, positive=True)
    report = check_gradients(lambda: reduce_sum(square(x * s - s)), {"x": x, "s": s})
    assert report.max_error < 1e-5


def test_shape_op_gradients(rng):
    a = leaf((2, 3), rng)
    b = leaf((3, 4), rng)
    bias = leaf((4,), rng)
    c = leaf((2, 4), rng)

    def loss():
        h = tanh(linear(a, b, bias))
        joined = concat([h, c], axis=1)
        stacked = stack([joined, joined * 2.0], axis=0)
        flat = reshape(transpose(stacked, (1, 0, 2)), (2, 16))
        picked = getitem(flat, (slice(None), slice(3, 11)))
        return reduce_mean(square(picked)) + reduce_sum(expand(bias, (5, 4)))

    report = check_gradients(loss, {"a": a, "b": b, "bias": bias, "c": c}, max_coords=None)
    assert report.max_error < 1e-5, report.worst()


def test_fancy_index_accumulates(rng):
    x = leaf((4,), rng)
    y = reduce_sum(getitem(x, np.array([0, 0, 2])))
    backward(y)
    np.testing.assert_array_equal(x.grad, [2.0, 0.0, 1.0, 0.0])


def test_clip_passes_gradient_inside_only():
    x = Tensor(np.array([-2.0, 0.5, 3.0]), requires_grad=True)
    backward(reduce_sum(clip(x, -1.0, 1.0)))
    np.testing.assert_array_equal(x.grad, [0.0, 1.0, 0.0])


def test_gradients_accumulate_until_reset(rng):
    x = leaf((3,), rng)
    backward(reduce_sum(x * 2.0))
    backward(reduce_sum(x * 2.0))
    np.testing.assert_allclose(x.grad, 4.0)
    x.zero_grad()
    assert x.grad is None


def test_shared_subexpression_visited_once(rng):
    x = leaf((3,), rng)
    h = exp(x)
    backward(reduce_sum(h * h))
    np.testing.assert_allclose(x.grad, 2.0 * np.exp(2.0 * x.data))


def test_tape_orders_consumers_first(rng):
    x = leaf((2,), rng)
    h = tanh(x)
    out = reduce_sum(h + h)
    tape = Tape.record(out)
    positions = {id(node): i for i, node in enumerate(tape.nodes)}
    assert positions[id(out)] < positions[id(h)] < positions[id(x)]


def test_backward_releases_graph(rng):
    x = leaf((2,), rng)
    h = exp(x)
    out = reduce_sum(h)
    backward(out)
    assert h.creator is None
    assert out.creator is None


def test_backward_requires_scalar(rng):
    with pytest.raises(NotScalarError):
        backward(leaf((2,), rng) * 2.0)


def test_constant_graph_is_skipped():
    x = Tensor(np.ones(3))
    backward(reduce_sum(x))
    assert x.grad is None


def test_mismatched_shapes_rejected(rng):
    with pytest.raises(ShapeError):
        leaf((2, 3), rng) + leaf((3,), rng)
    with pytest.raises(ShapeError):
        matmul(leaf((2, 3), rng), leaf((2, 3), rng))
    with pytest.raises(ShapeError):
        concat([leaf((2, 3), rng), leaf((3, 2), rng)], axis=0)
    with pytest.raises(ShapeError):
        reduce_sum(leaf((2, 3), rng), axis=2)


def test_domain_errors():
    with pytest.raises(DomainError):
        log(Tensor(np.array([1.0, 0.0])))
    with pytest.raises(DomainError):
        lgamma(Tensor(np.array([-1.0])))


def test_special_function_values():
    x = np.array([0.5, 1.0, 4.0])
    np.testing.assert_allclose(lgamma(Tensor(x)).data, special.gammaln(x))
    np.testing.assert_allclose(digamma(Tensor(x)).data, special.digamma(x))
    np.testing.assert_allclose(softplus(Tensor(np.array([-800.0, 0.0, 800.0]))).data, [0.0, np.log(2.0), 800.0])


def test_reduce_dispatch(rng):
    x = leaf((2, 3), rng)
    np.testing.assert_allclose(reduce("sum", x, axis=1).data, x.data.sum(axis=1))
    np.testing.assert_allclose(reduce("mean", x, axis=0, keepdims=True).data, x.data.mean(axis=0, keepdims=True))
    with pytest.raises(OperationError) as info:
        reduce("max", x)
    assert info.value.known == ("sum", "mean")
    with pytest.raises(OperationError):
        elementwise("hypot", x, x)
    with pytest.raises(OperationError):
        elementwise("add", x)


def test_finite_difference_helpers():
    grad = finite_difference_grad(lambda t: float(np.sum(t ** 3)), [1.0, 2.0])
    np.testing.assert_allclose(grad, [3.0, 12.0], rtol=1e-8)
    assert relative_error(np.array([1.0]), np.array([1.0 + 1e-7])) < 1e-6
    assert relative_error(np.array([0.0]), np.array([1e-6]), floor=1e-4) == pytest.approx(1e-2)
