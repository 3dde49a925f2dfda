"""Attention and MLP building blocks on top of the autodiff tensor.

``biased_attention`` is the workhorse: multi-head scaled dot-product
attention whose per-head logits may be shifted by an additive bias. With
one head and no bias it reduces to plain single-head attention.
"""

from __future__ import annotations

import math

import numpy as np

from .params import Module, Parameter
from .tensor import (
    ShapeError,
    Tensor,
    add,
    concat_cols,
    gelu,
    matmul,
    mul,
    slice_cols,
    softmax_rows,
    transpose,
)


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def linear(x: Tensor, w: Tensor, bias: Tensor | None = None) -> Tensor:
    """Affine map ``x @ w + bias`` with shape checking."""
    if x.ndim != 2 or w.ndim != 2:
        raise ShapeError(f"linear needs 2-D x and w, got {x.shape} and {w.shape}")
    if x.shape[1] != w.shape[0]:
        raise ShapeError(f"linear dimension mismatch: {x.shape} @ {w.shape}")
    out = matmul(x, w)
    if bias is not None:
        if bias.shape != (w.shape[1],):
            raise ShapeError(f"bias shape {bias.shape} does not match output width {w.shape[1]}")
        out = add(out, bias)
    return out


class Linear(Module):
    def __init__(self, rng: np.random.Generator, d_in: int, d_out: int, bias: bool = True):
        self.w = Parameter(xavier_uniform(rng, d_in, d_out))
        self.b = Parameter(np.zeros(d_out)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return linear(x, self.w.tensor, self.b.tensor if self.b is not None else None)


ACTIVATIONS = {
    "gelu": gelu,
    "identity": lambda t: t,
}


class Mlp(Module):
    """Alternating linear/activation stack; the final layer is linear."""

    def __init__(self, rng: np.random.Generator, widths: list[int], activation: str = "gelu"):
        if len(widths) < 2:
            raise ValueError(f"mlp needs at least [in, out] widths, got {widths}")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.layers = [Linear(rng, a, b) for a, b in zip(widths[:-1], widths[1:])]
        self._act = activation

    def __call__(self, x: Tensor) -> Tensor:
        act = ACTIVATIONS[self._act]
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = act(x)
        return x


class AttentionWeights(Module):
    """Query/key/value/output projection matrices for one attention block."""

    def __init__(self, rng: np.random.Generator, d_in: int, d_attn: int | None = None):
        d_attn = d_in if d_attn is None else d_attn
        self.wq = Parameter(xavier_uniform(rng, d_in, d_attn))
        self.wk = Parameter(xavier_uniform(rng, d_in, d_attn))
        self.wv = Parameter(xavier_uniform(rng, d_in, d_attn))
        self.wo = Parameter(xavier_uniform(rng, d_attn, d_attn))


def biased_attention(
    q: Tensor,
    k: Tensor,
    v: Tensor,
    weights: "AttentionWeights | tuple[Tensor, Tensor, Tensor, Tensor]",
    heads: int = 1,
    bias: Tensor | list[Tensor] | None = None,
) -> Tensor:
    """softmax((qWq)(kWk)^T / sqrt(d_head) + bias) (vWv), heads concatenated
    and output-projected.

    ``weights`` is an ``AttentionWeights`` module or a (wq, wk, wv, wo)
    tensor tuple (used when adapters rewrite the effective matrices).
    ``bias`` may be a single (a, t) tensor shared by every head or a list of
    one (a, t) tensor per head.
    """
    if isinstance(weights, AttentionWeights):
        wq, wk, wv, wo = (weights.wq.tensor, weights.wk.tensor, weights.wv.tensor, weights.wo.tensor)
    else:
        wq, wk, wv, wo = weights
    qp = matmul(q, wq)
    kp = matmul(k, wk)
    vp = matmul(v, wv)
    d_attn = qp.shape[1]
    if d_attn % heads != 0:
        raise ShapeError(f"attention width {d_attn} not divisible by {heads} heads")
    d_head = d_attn // heads

    a, t = q.shape[0], k.shape[0]
    per_head_bias: list[Tensor | None]
    if bias is None:
        per_head_bias = [None] * heads
    elif isinstance(bias, Tensor):
        if bias.shape != (a, t):
            raise ShapeError(f"bias shape {bias.shape} != ({a}, {t})")
        per_head_bias = [bias] * heads
    else:
        if len(bias) != heads:
            raise ShapeError(f"got {len(bias)} bias matrices for {heads} heads")
        for b in bias:
            if b.shape != (a, t):
                raise ShapeError(f"bias shape {b.shape} != ({a}, {t})")
        per_head_bias = list(bias)

    scale = Tensor(1.0 / math.sqrt(d_head))
    outputs = []
    for h in range(heads):
        lo, hi = h * d_head, (h + 1) * d_head
        qh, kh, vh = slice_cols(qp, lo, hi), slice_cols(kp, lo, hi), slice_cols(vp, lo, hi)
        logits = mul(matmul(qh, transpose(kh)), scale)
        if per_head_bias[h] is not None:
            logits = add(logits, per_head_bias[h])
        outputs.append(matmul(softmax_rows(logits), vh))
    merged = outputs[0] if heads == 1 else concat_cols(outputs)
    return matmul(merged, wo)
