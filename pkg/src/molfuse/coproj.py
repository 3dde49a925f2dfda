"""Modality-collaborative projector.

Converts per-layer encoder states from up to three modalities into a
fixed-length token sequence:

  1. Atom-indexed 2D/3D streams pass through self-attention whose logits
     are additively biased by two relation maps — a learnable per-head
     table indexed by clipped shortest-path-distance buckets, and a small
     MLP over a bank of Gaussian distance kernels — followed by a
     residual connection. Both biases feed both streams.
  2. Every stream is linearly projected to a shared width. The string
     stream skips attention and reuses its projected embedding at every
     level.
  3. Per level, a block of learnable query tokens (base plus one additive
     embedding per active modality) cross-attends to the row-wise
     concatenation of the active streams. No bias, no residual.
  4. The per-level query outputs are stacked and passed through a shared
     MLP, yielding exactly (queries x levels) output rows regardless of
     molecule size or which modalities are active.

Dropped modalities are removed physically: their stream is never
computed, their rows never enter the concatenation, and their relation
bias is zeroed in the surviving streams.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .encoders import ModalityHiddenStates
from .molio.structure import UNREACHABLE, StructMatrices
from .numerics import (
    AttentionWeights,
    Linear,
    Mlp,
    Module,
    Parameter,
    ShapeError,
    Tensor,
    absolute,
    add,
    biased_attention,
    clamp_min,
    concat_rows,
    div,
    exp,
    gather_rows,
    mul,
    reshape,
    slice_cols,
    sub,
)

log = logging.getLogger(__name__)

MODALITIES = ("1d", "2d", "3d")
SIGMA_FLOOR = 1e-4
_NEG_INV_SQRT2PI = -1.0 / math.sqrt(2.0 * math.pi)


class ModalityMask:
    """Nonempty subset of {1d, 2d, 3d}."""

    __slots__ = ("active",)

    def __init__(self, active):
        active = frozenset(active)
        unknown = active - set(MODALITIES)
        if unknown:
            raise ValueError(f"unknown modalities: {sorted(unknown)}")
        if not active:
            raise ValueError("modality mask must keep at least one modality active")
        self.active = active

    @classmethod
    def all(cls) -> "ModalityMask":
        return cls(MODALITIES)

    def __contains__(self, modality: str) -> bool:
        return modality in self.active

    def __iter__(self):
        return iter(m for m in MODALITIES if m in self.active)

    def __eq__(self, other) -> bool:
        return isinstance(other, ModalityMask) and self.active == other.active

    def __hash__(self) -> int:
        return hash(self.active)

    def __repr__(self) -> str:
        return "ModalityMask({" + ",".join(self) + "})"


def sample_modality_mask(rng: np.random.Generator, p_drop: float) -> ModalityMask:
    """Drop each modality independently; resample if the draw empties the set."""
    if not 0.0 <= p_drop < 1.0:
        raise ValueError(f"p_drop must be in [0, 1), got {p_drop}")
    while True:
        keep = [m for m in MODALITIES if rng.random() >= p_drop]
        if keep:
            return ModalityMask(keep)


@dataclass
class UnifiedMoleculeTokens:
    tokens: Tensor  # (queries * levels) x width
    active: frozenset


def spd_buckets(spd: np.ndarray, d_max: int) -> np.ndarray:
    """Clip hop counts at ``d_max``; unreachable pairs get bucket d_max + 1."""
    buckets = np.minimum(spd, d_max)
    buckets[spd == UNREACHABLE] = d_max + 1
    np.fill_diagonal(buckets, 0)
    return buckets.astype(np.intp)


def gaussian_kernels(dist: np.ndarray, mu: Tensor, sigma: Tensor) -> list[Tensor]:
    """Bank of negative Gaussian bumps over a distance matrix.

    kernel_k(i, j) = -(1 / (sqrt(2 pi) |sigma_k|))
                     * exp(-((dist_ij - mu_k) / |sigma_k|)^2 / 2)

    |sigma_k| below 1e-4 is clamped (with a warning) so the kernel stays
    defined for any real parameter value.
    """
    flat = gaussian_kernel_columns(dist, mu, sigma)
    n = dist.shape[0]
    k_count = mu.shape[0]
    return [reshape(slice_cols(flat, k, k + 1), (n, n)) for k in range(k_count)]


def gaussian_kernel_columns(dist: np.ndarray, mu: Tensor, sigma: Tensor) -> Tensor:
    """All K kernels at once, as an (n*n) x K matrix of per-pair features."""
    dist = np.asarray(dist, dtype=np.float64)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ShapeError(f"dist must be square, got {dist.shape}")
    abs_sigma = absolute(sigma)
    if (abs_sigma.data < SIGMA_FLOOR).any():
        log.warning("gaussian kernel width below %.0e clamped", SIGMA_FLOOR)
    abs_sigma = clamp_min(abs_sigma, SIGMA_FLOOR)
    flat = Tensor(dist.reshape(-1, 1))
    z = div(sub(flat, mu), abs_sigma)  # broadcasts (n*n, 1) against (K,)
    bump = exp(mul(mul(z, z), Tensor(-0.5)))
    return mul(div(bump, abs_sigma), Tensor(_NEG_INV_SQRT2PI))


class RelationBias(Module):
    """Learnable attention-bias parameters for the 2D/3D relation maps."""

    def __init__(self, rng: np.random.Generator, heads: int, d_max: int, kernel_count: int):
        self.spd_table = Parameter(np.zeros((d_max + 2, heads)))
        self.mu = Parameter(np.linspace(0.0, 8.0, kernel_count))
        self.sigma = Parameter(np.full(kernel_count, 0.5))
        self.dist_mlp = Mlp(rng, [kernel_count, kernel_count, heads])
        self.heads = heads
        self.d_max = d_max
        self.kernel_count = kernel_count

    def phi_2d(self, spd: np.ndarray) -> list[Tensor]:
        """Per-head n x n bias from the shortest-path bucket table."""
        n = spd.shape[0]
        buckets = spd_buckets(spd, self.d_max).reshape(-1)
        rows = gather_rows(self.spd_table.tensor, buckets)  # (n*n, heads)
        return [reshape(slice_cols(rows, h, h + 1), (n, n)) for h in range(self.heads)]

    def phi_3d(self, dist: np.ndarray) -> list[Tensor]:
        """Per-head n x n bias: shared MLP over the Gaussian kernel features."""
        n = dist.shape[0]
        features = gaussian_kernel_columns(dist, self.mu.tensor, self.sigma.tensor)
        mapped = self.dist_mlp(features)  # (n*n, heads)
        return [reshape(slice_cols(mapped, h, h + 1), (n, n)) for h in range(self.heads)]

    def clamp_widths(self) -> None:
        """Keep |sigma| away from zero; call after each optimizer step."""
        data = self.sigma.data
        sign = np.where(data < 0.0, -1.0, 1.0)
        self.sigma.tensor.data = sign * np.maximum(np.abs(data), SIGMA_FLOOR)


def co_attention_block(
    z: Tensor,
    phi2d: list[Tensor] | None,
    phi3d: list[Tensor] | None,
    weights: AttentionWeights,
    heads: int,
) -> Tensor:
    """Relation-biased self-attention over atoms, with residual connection."""
    n = z.shape[0]
    for phi in (phi2d, phi3d):
        if phi is not None:
            for mat in phi:
                if mat.shape != (n, n):
                    raise ShapeError(f"relation bias shape {mat.shape} != ({n}, {n})")
    if phi2d is None and phi3d is None:
        bias = None
    elif phi2d is None:
        bias = phi3d
    elif phi3d is None:
        bias = phi2d
    else:
        bias = [add(a, b) for a, b in zip(phi2d, phi3d)]
    return add(biased_attention(z, z, z, weights, heads=heads, bias=bias), z)


class Projector(Module):
    """Multi-level fusion of 1D/2D/3D streams into fixed-length tokens."""

    def __init__(
        self,
        rng: np.random.Generator,
        dims: dict[str, int],
        width: int,
        levels: int,
        queries: int,
        heads: int,
        kernel_count: int = 16,
        d_max: int = 8,
        use_relation_bias: bool = True,
        use_modality_embeddings: bool = True,
    ):
        self.relbias = RelationBias(rng, heads=heads, d_max=d_max, kernel_count=kernel_count)
        self.atom_attn_2d = [AttentionWeights(rng, dims["2d"]) for _ in range(levels)]
        self.atom_attn_3d = [AttentionWeights(rng, dims["3d"]) for _ in range(levels)]
        self.stream_proj_1d = Linear(rng, dims["1d"], width)
        self.stream_proj_2d = Linear(rng, dims["2d"], width)
        self.stream_proj_3d = Linear(rng, dims["3d"], width)
        self.query_base = [Parameter(rng.normal(0.0, 0.02, (queries, width))) for _ in range(levels)]
        self.query_1d = [Parameter(rng.normal(0.0, 0.02, (queries, width))) for _ in range(levels)]
        self.query_2d = [Parameter(rng.normal(0.0, 0.02, (queries, width))) for _ in range(levels)]
        self.query_3d = [Parameter(rng.normal(0.0, 0.02, (queries, width))) for _ in range(levels)]
        self.cross_attn = [AttentionWeights(rng, width) for _ in range(levels)]
        self.out_mlp = Mlp(rng, [width, 2 * width, width])
        self.width = width
        self.levels = levels
        self.queries = queries
        self.heads = heads
        self.use_relation_bias = use_relation_bias
        self.use_modality_embeddings = use_modality_embeddings

    # -- stream processing ----------------------------------------------------

    def process_streams(
        self,
        states: dict[str, ModalityHiddenStates],
        struct: StructMatrices | None,
        mask: ModalityMask,
    ) -> dict[str, list[Tensor]]:
        """Per-modality, per-level processed matrices at the shared width.

        A dropped modality's bias is zeroed (omitted) in the surviving
        streams, because its relational structure is considered unavailable.
        """
        phi2d = phi3d = None
        if self.use_relation_bias and struct is not None:
            if "2d" in mask:
                phi2d = self.relbias.phi_2d(struct.spd)
            if "3d" in mask and struct.dist is not None:
                phi3d = self.relbias.phi_3d(struct.dist)

        processed: dict[str, list[Tensor]] = {}
        if "1d" in mask:
            projected = self.stream_proj_1d(states["1d"].layers[0])
            processed["1d"] = [projected] * self.levels
        if "2d" in mask:
            processed["2d"] = [
                self.stream_proj_2d(
                    co_attention_block(z, phi2d, phi3d, self.atom_attn_2d[l], self.heads)
                )
                for l, z in enumerate(states["2d"].layers)
            ]
        if "3d" in mask:
            processed["3d"] = [
                self.stream_proj_3d(
                    co_attention_block(z, phi2d, phi3d, self.atom_attn_3d[l], self.heads)
                )
                for l, z in enumerate(states["3d"].layers)
            ]
        return processed

    def level_queries(self, level: int, mask: ModalityMask) -> Tensor:
        queries = self.query_base[level].tensor
        if self.use_modality_embeddings:
            embeddings = {"1d": self.query_1d, "2d": self.query_2d, "3d": self.query_3d}
            for modality in mask:
                queries = add(queries, embeddings[modality][level].tensor)
        return queries

    def unify_level(self, level: int, processed: dict[str, list[Tensor]], mask: ModalityMask) -> Tensor:
        parts = [processed[m][level] for m in mask]
        keys = parts[0] if len(parts) == 1 else concat_rows(parts)
        if keys.shape[0] == 0:
            raise ShapeError("no key rows: every active stream is empty")
        queries = self.level_queries(level, mask)
        return biased_attention(queries, keys, keys, self.cross_attn[level], heads=self.heads)

    def forward(
        self,
        states: dict[str, ModalityHiddenStates],
        struct: StructMatrices | None,
        mask: ModalityMask,
    ) -> UnifiedMoleculeTokens:
        missing = [m for m in mask if m not in states]
        if missing:
            raise ValueError(f"mask requests modalities without states: {missing}")
        processed = self.process_streams(states, struct, mask)
        unified = [self.unify_level(level, processed, mask) for level in range(self.levels)]
        stacked = unified[0] if self.levels == 1 else concat_rows(unified)
        return UnifiedMoleculeTokens(tokens=self.out_mlp(stacked), active=mask.active)
