from ._base import (
    Function,
    Tape,
    Tensor,
    as_tensor,
    backward,
)
from .gradcheck import (
    GradientReport,
    check_gradients,
    finite_difference_grad,
    relative_error,
)
from .ops import (
    add,
    clip,
    concat,
    digamma,
    div,
    elementwise,
    exp,
    expand,
    getitem,
    lgamma,
    linear,
    log,
    matmul,
    mul,
    neg,
    ones,
    pow_scalar,
    reduce,
    reduce_mean,
    reduce_sum,
    reshape,
    sigmoid,
    softplus,
    square,
    stack,
    sub,
    tanh,
    transpose,
    zeros,
)

__all__ = [
    "Function",
    "Tape",
    "Tensor",
    "as_tensor",
    "backward",

    "GradientReport",
    "check_gradients",
    "finite_difference_grad",
    "relative_error",

    "add",
    "clip",
    "concat",
    "digamma",
    "div",
    "elementwise",
    "exp",
    "expand",
    "getitem",
    "lgamma",
    "linear",
    "log",
    "matmul",
    "mul",
    "neg",
    "ones",
    "pow_scalar",
    "reduce",
    "reduce_mean",
    "reduce_sum",
    "reshape",
    "sigmoid",
    "softplus",
    "square",
    "stack",
    "sub",
    "tanh",
    "transpose",
    "zeros",
]
