"""Minimal float64 tensor engine with reverse-mode automatic differentiation."""

from .gradcheck import grad_check, grad_check_params
from .nn import (
    LN_EPS,
    AttentionWeights,
    GRUWeights,
    apply_activation,
    bigru_forward,
    conv2d,
    gru,
    layer_norm,
    linear,
    multi_head_self_attention,
    prelu,
    relu,
    sigmoid,
    softmax,
    tanh,
)
from .tensor import (
    Tensor,
    add,
    as_tensor,
    backward,
    concat,
    div,
    exp,
    is_grad_enabled,
    matmul,
    mean,
    mul,
    no_grad,
    pad,
    reshape,
    sqrt,
    square,
    stack,
    sub,
    tensor_sum,
    topological_order,
    transpose,
)

__all__ = [
    "LN_EPS",
    "AttentionWeights",
    "GRUWeights",
    "Tensor",
    "add",
    "apply_activation",
    "as_tensor",
    "backward",
    "bigru_forward",
    "concat",
    "conv2d",
    "div",
    "exp",
    "grad_check",
    "grad_check_params",
    "gru",
    "is_grad_enabled",
    "layer_norm",
    "linear",
    "matmul",
    "mean",
    "mul",
    "multi_head_self_attention",
    "no_grad",
    "pad",
    "prelu",
    "relu",
    "reshape",
    "sigmoid",
    "softmax",
    "sqrt",
    "square",
    "stack",
    "sub",
    "tanh",
    "tensor_sum",
    "topological_order",
    "transpose",
]
