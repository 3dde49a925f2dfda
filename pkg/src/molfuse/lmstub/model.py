"""A tiny decoder-only language model.

Small enough that projector training signal passes through it at desk
scale: pre-norm blocks of causal self-attention plus a GELU MLP, learned
positional embeddings, and an output head tied to the token table. The
molecule tokens enter as soft prefix embeddings in front of the
instruction and response words.

Low-rank adapters may be attached to attention projection matrices; the
forward pass then uses W + (alpha/r) * A @ B in place of W. With B
initialized to zero the adapted model equals the base model exactly.
"""

from __future__ import annotations

import numpy as np

from .vocab import EOS_ID
from ..numerics import (
    AttentionWeights,
    Mlp,
    Module,
    Parameter,
    ShapeError,
    Tensor,
    add,
    biased_attention,
    concat_rows,
    gather_rows,
    layer_norm_rows,
    log_softmax_rows,
    matmul,
    mul,
    slice_rows,
    transpose,
    tsum,
)

CAUSAL_NEG = -1e9
EMBED_INIT_STD = 0.5  # sized so row layer norms stay well-conditioned at init


class LoraAdapter(Module):
    """Low-rank additive delta for one weight matrix."""

    def __init__(self, rng: np.random.Generator, target: Parameter, rank: int, alpha: float):
        d_in, d_out = target.data.shape
        self.down = Parameter(rng.normal(0.0, 0.02, size=(d_in, rank)))
        self.up = Parameter(np.zeros((rank, d_out)))  # zero init: adapted == base at start
        self._target = target  # identity reference; not part of the parameter tree
        self._scale = alpha / rank

    @property
    def target(self) -> Parameter:
        return self._target

    def delta(self) -> Tensor:
        return mul(matmul(self.down.tensor, self.up.tensor), Tensor(self._scale))


class RowNorm(Module):
    def __init__(self, width: int):
        self.gain = Parameter(np.ones(width))
        self.bias = Parameter(np.zeros(width))

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm_rows(x, self.gain.tensor, self.bias.tensor)


class DecoderBlock(Module):
    def __init__(self, rng: np.random.Generator, width: int):
        self.norm_attn = RowNorm(width)
        self.attn = AttentionWeights(rng, width)
        self.norm_mlp = RowNorm(width)
        self.mlp = Mlp(rng, [width, 4 * width, width])


class DecoderLM(Module):
    def __init__(
        self,
        rng: np.random.Generator,
        vocab_size: int,
        width: int,
        blocks: int = 2,
        heads: int = 4,
        max_seq: int = 128,
    ):
        self.token_table = Parameter(rng.normal(0.0, EMBED_INIT_STD, size=(vocab_size, width)))
        self.pos_table = Parameter(rng.normal(0.0, EMBED_INIT_STD, size=(max_seq, width)))
        self.blocks = [DecoderBlock(rng, width) for _ in range(blocks)]
        self.norm_out = RowNorm(width)
        self.adapters: list[LoraAdapter] = []
        self.vocab_size = vocab_size
        self.width = width
        self.heads = heads
        self.max_seq = max_seq

    # -- LoRA -----------------------------------------------------------------

    def attach_adapters(
        self, rng: np.random.Generator, targets: list[str], rank: int, alpha: float
    ) -> list[LoraAdapter]:
        """Attach low-rank adapters to the named weight parameters.

        Target names are parameter paths relative to this model, such as
        ``blocks.0.attn.wq``.
        """
        by_name = dict(self.named_parameters())
        adapters = []
        for target in targets:
            if target not in by_name:
                raise KeyError(f"unknown adapter target {target!r}")
            adapters.append(LoraAdapter(rng, by_name[target], rank, alpha))
        self.adapters.extend(adapters)
        return adapters

    def _effective(self, base: Parameter) -> Tensor:
        w = base.tensor
        for adapter in self.adapters:
            if adapter.target is base:
                w = add(w, adapter.delta())
        return w

    # -- forward ----------------------------------------------------------------

    def forward_embeddings(self, embeds: Tensor) -> Tensor:
        """Map a (seq, width) embedding matrix to (seq, vocab) logits."""
        s = embeds.shape[0]
        if s > self.max_seq:
            raise ShapeError(f"sequence length {s} exceeds maximum {self.max_seq}")
        if s == 0:
            raise ShapeError("cannot run the decoder on an empty sequence")
        causal = Tensor(np.triu(np.full((s, s), CAUSAL_NEG), k=1))
        x = add(embeds, slice_rows(self.pos_table.tensor, 0, s))
        for block in self.blocks:
            normed = block.norm_attn(x)
            weights = (
                self._effective(block.attn.wq),
                self._effective(block.attn.wk),
                self._effective(block.attn.wv),
                self._effective(block.attn.wo),
            )
            x = add(x, biased_attention(normed, normed, normed, weights, heads=self.heads, bias=causal))
            x = add(x, block.mlp(block.norm_mlp(x)))
        x = self.norm_out(x)
        return matmul(x, transpose(self.token_table.tensor))  # tied output head

    def embed_tokens(self, ids: list[int]) -> Tensor:
        return gather_rows(self.token_table.tensor, np.asarray(ids, dtype=np.intp))

    def forward_loss(
        self,
        prefix_embeds: Tensor,
        instruction_ids: list[int],
        response_ids: list[int],
    ) -> Tensor:
        """Mean negative log-likelihood of the response tokens only.

        Input layout: [prefix rows] ++ [instruction embeddings] ++ [response
        embeddings]. The position immediately before each response token
        carries its prediction; prefix and instruction positions contribute
        no loss terms.
        """
        if not response_ids:
            raise ValueError("response must be nonempty")
        parts = [prefix_embeds]
        if instruction_ids:
            parts.append(self.embed_tokens(instruction_ids))
        parts.append(self.embed_tokens(response_ids))
        embeds = concat_rows(parts)
        logits = self.forward_embeddings(embeds)
        log_probs = log_softmax_rows(logits)

        start = prefix_embeds.shape[0] + len(instruction_ids) - 1
        rows = np.arange(start, start + len(response_ids), dtype=np.intp)
        picked = gather_rows(log_probs, rows)
        one_hot = np.zeros((len(response_ids), self.vocab_size))
        one_hot[np.arange(len(response_ids)), response_ids] = 1.0
        total = tsum(mul(picked, Tensor(one_hot)))
        return mul(total, Tensor(-1.0 / len(response_ids)))

    def generate(self, prefix_embeds: Tensor, instruction_ids: list[int], max_len: int) -> list[int]:
        """Greedy decoding until EOS or ``max_len`` tokens."""
        out: list[int] = []
        while len(out) < max_len:
            parts = [prefix_embeds]
            if instruction_ids:
                parts.append(self.embed_tokens(instruction_ids))
            if out:
                parts.append(self.embed_tokens(out))
            logits = self.forward_embeddings(concat_rows(parts))
            next_id = int(np.argmax(logits.data[-1]))
            if next_id == EOS_ID:
                break
            out.append(next_id)
        return out
