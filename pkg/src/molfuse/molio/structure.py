"""Structural preprocessing: hop-count and Euclidean distance matrices."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .molecule import Molecule

UNREACHABLE = -1


def shortest_path_matrix(mol: Molecule) -> np.ndarray:
    """Unweighted BFS hop counts between all atom pairs.

    Disconnected pairs hold the UNREACHABLE sentinel (-1); the diagonal is 0.
    """
    n = mol.n_atoms
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j, _ in mol.bonds:
        adj[i].append(j)
        adj[j].append(i)
    spd = np.full((n, n), UNREACHABLE, dtype=np.int64)
    for start in range(n):
        spd[start, start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if spd[start, w] == UNREACHABLE:
                    spd[start, w] = spd[start, u] + 1
                    queue.append(w)
    return spd


def pairwise_distances(coords: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix in Angstroms; symmetric with zero diagonal."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 3:
        raise ValueError(f"coords must be n x 3, got {coords.shape}")
    if not np.isfinite(coords).all():
        raise ValueError("coords must be finite")
    delta = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((delta * delta).sum(axis=2))
    np.fill_diagonal(dist, 0.0)
    return dist


@dataclass
class StructMatrices:
    spd: np.ndarray
    dist: np.ndarray | None

    @classmethod
    def from_molecule(cls, mol: Molecule) -> "StructMatrices":
        dist = pairwise_distances(mol.coords) if mol.coords is not None else None
        return cls(spd=shortest_path_matrix(mol), dist=dist)
