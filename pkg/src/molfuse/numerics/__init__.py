from .gradcheck import GradReport, gradcheck
from .nn import AttentionWeights, Linear, Mlp, biased_attention, linear, xavier_uniform
from .optim import Adam
from .params import Module, Parameter
from .tensor import (
    ShapeError,
    Tensor,
    absolute,
    add,
    clamp_min,
    concat_cols,
    concat_rows,
    div,
    exp,
    gather_rows,
    gelu,
    layer_norm_rows,
    log,
    log_softmax_rows,
    matmul,
    mul,
    reshape,
    slice_cols,
    slice_rows,
    softmax_rows,
    sqrt,
    sub,
    tmean,
    transpose,
    tsum,
)

__all__ = [
    "Adam",
    "AttentionWeights",
    "GradReport",
    "Linear",
    "Mlp",
    "Module",
    "Parameter",
    "ShapeError",
    "Tensor",
    "absolute",
    "add",
    "biased_attention",
    "clamp_min",
    "concat_cols",
    "concat_rows",
    "div",
    "exp",
    "gather_rows",
    "gelu",
    "gradcheck",
    "layer_norm_rows",
    "linear",
    "log",
    "log_softmax_rows",
    "matmul",
    "mul",
    "reshape",
    "slice_cols",
    "slice_rows",
    "softmax_rows",
    "sqrt",
    "sub",
    "tmean",
    "transpose",
    "tsum",
    "xavier_uniform",
]
