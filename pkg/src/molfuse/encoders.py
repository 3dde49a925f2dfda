"""Toy per-modality molecular encoders with a shared layered interface.

Each encoder exposes L per-layer hidden-state matrices. The string
encoder is a plain token-embedding lookup replicated across layers; the
graph encoder runs sum-aggregation message passing with a learnable
self-loop weight; the geometry encoder aggregates neighbors weighted by
a Gaussian of their pairwise distance, consuming distances only — never
raw coordinates — so its output is invariant under rigid motions of the
conformer by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .molio.molecule import Molecule
from .molio.structure import pairwise_distances
from .numerics import Mlp, Module, Parameter, Tensor, add, gather_rows, matmul, mul

ELEMENT_ALPHABET = ["C", "N", "O", "S", "F", "H", "P", "Cl", "Br", "I"]
ELEMENT_UNK = len(ELEMENT_ALPHABET)


class ModalityUnavailable(RuntimeError):
    """The molecule lacks the data this encoder needs (e.g. no conformer)."""


@dataclass
class ModalityHiddenStates:
    modality: str  # "1d" | "2d" | "3d"
    layers: list[Tensor]


def element_ids(atoms: list[str]) -> list[int]:
    index = {el: i for i, el in enumerate(ELEMENT_ALPHABET)}
    return [index.get(a, ELEMENT_UNK) for a in atoms]


class TokenEmbedder(Module):
    """String-modality encoder: embedding lookup, replicated across layers."""

    def __init__(self, rng: np.random.Generator, vocab_size: int, dim: int):
        self.table = Parameter(rng.normal(0.0, 0.02, size=(vocab_size, dim)))
        self.vocab_size = vocab_size
        self.dim = dim

    def encode(self, token_ids: list[int], layer_count: int) -> ModalityHiddenStates:
        for tid in token_ids:
            if not 0 <= tid < self.vocab_size:
                raise IndexError(f"token id {tid} outside vocabulary of {self.vocab_size}")
        embedded = gather_rows(self.table.tensor, np.asarray(token_ids, dtype=np.intp))
        return ModalityHiddenStates(modality="1d", layers=[embedded] * layer_count)


class GraphEncoder(Module):
    """Message-passing graph encoder.

    Per round: h_i <- MLP((1 + eps) * h_i + sum over neighbors h_j), with a
    learnable scalar eps initialized to 0. Each round's output is one layer.
    """

    def __init__(self, rng: np.random.Generator, layer_count: int, dim: int):
        self.elem_table = Parameter(rng.normal(0.0, 0.02, size=(ELEMENT_UNK + 1, dim)))
        self.eps = [Parameter(np.zeros((1, 1))) for _ in range(layer_count)]
        self.mlps = [Mlp(rng, [dim, dim, dim]) for _ in range(layer_count)]
        self.layer_count = layer_count
        self.dim = dim

    def encode(self, mol: Molecule) -> ModalityHiddenStates:
        n = mol.n_atoms
        adjacency = np.zeros((n, n))
        for i, j, _ in mol.bonds:
            adjacency[i, j] = 1.0
            adjacency[j, i] = 1.0
        adj = Tensor(adjacency)
        h = gather_rows(self.elem_table.tensor, np.asarray(element_ids(mol.atoms), dtype=np.intp))
        layers = []
        for eps, mlp in zip(self.eps, self.mlps):
            self_scale = add(Tensor(1.0), eps.tensor)
            h = mlp(add(mul(h, self_scale), matmul(adj, h)))
            layers.append(h)
        return ModalityHiddenStates(modality="2d", layers=layers)


class GeometryEncoder(Module):
    """Distance-aware encoder.

    Per round: h_i <- MLP(h_i + sum_j exp(-dist(i,j)^2 / tau) * h_j), where the
    sum includes j = i with weight 1. Only the distance matrix enters.
    """

    def __init__(self, rng: np.random.Generator, layer_count: int, dim: int, tau: float = 4.0):
        self.elem_table = Parameter(rng.normal(0.0, 0.02, size=(ELEMENT_UNK + 1, dim)))
        self.mlps = [Mlp(rng, [dim, dim, dim]) for _ in range(layer_count)]
        self.layer_count = layer_count
        self.dim = dim
        self.tau = tau

    def encode(self, mol: Molecule) -> ModalityHiddenStates:
        if mol.coords is None:
            raise ModalityUnavailable(f"{mol.id}: no 3D coordinates")
        dist = pairwise_distances(mol.coords)
        kernel = Tensor(np.exp(-(dist * dist) / self.tau))
        h = gather_rows(self.elem_table.tensor, np.asarray(element_ids(mol.atoms), dtype=np.intp))
        layers = []
        for mlp in self.mlps:
            h = mlp(add(h, matmul(kernel, h)))
            layers.append(h)
        return ModalityHiddenStates(modality="3d", layers=layers)
