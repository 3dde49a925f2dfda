"""Deterministic synthetic molecule corpus.

Stand-in for real molecule-caption data: random trees plus up to two
extra edges over a small element alphabet, 3D coordinates from per-edge
unit-length spring relaxation, templated captions naming element counts,
ring presence and coarse shape, plus computed toy properties.
"""

from __future__ import annotations

import numpy as np

from .molecule import Molecule
from .structure import UNREACHABLE, pairwise_distances, shortest_path_matrix

ELEMENTS = ["C", "N", "O", "S", "F"]
ELEMENT_WEIGHTS = [0.55, 0.12, 0.15, 0.08, 0.10]
ELEMENT_NAMES = {"C": "carbon", "N": "nitrogen", "O": "oxygen", "S": "sulfur", "F": "fluorine"}

SPRING_ITERATIONS = 400
SPRING_RATE = 0.2
# mean pairwise distance relative to graph diameter; calibrated on seed-0 corpora
COMPACT_RATIO = 0.52


def generate_synthetic(seed: int, count: int, max_atoms: int = 8) -> list[Molecule]:
    """Generate ``count`` molecules, identical for identical seeds."""
    if max_atoms < 2:
        raise ValueError("max_atoms must be at least 2")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0x6D6F6C,)))
    return [_one_molecule(rng, f"syn-{seed}-{i:04d}", max_atoms) for i in range(count)]


def _one_molecule(rng: np.random.Generator, mol_id: str, max_atoms: int) -> Molecule:
    n = int(rng.integers(2, max_atoms + 1))
    atoms = [ELEMENTS[k] for k in rng.choice(len(ELEMENTS), size=n, p=ELEMENT_WEIGHTS)]
    parents = [int(rng.integers(0, i)) for i in range(1, n)]
    bonds = [(parent, i + 1, 1.0) for i, parent in enumerate(parents)]

    taken = {(min(i, j), max(i, j)) for i, j, _ in bonds}
    extra = 0
    for _ in range(int(rng.integers(0, 3))):
        if len(taken) >= n * (n - 1) // 2:
            break
        while True:
            i, j = int(rng.integers(0, n)), int(rng.integers(0, n))
            key = (min(i, j), max(i, j))
            if i != j and key not in taken:
                taken.add(key)
                bonds.append((key[0], key[1], 1.0))
                extra += 1
                break

    coords = _relax_coordinates(rng, n, bonds)
    mol = Molecule(
        id=mol_id,
        selfies=_build_selfies(atoms, parents, extra),
        atoms=atoms,
        bonds=bonds,
        coords=coords,
    )
    spd = shortest_path_matrix(mol)
    dist = pairwise_distances(coords)
    reachable = spd[spd != UNREACHABLE]
    diameter = int(reachable.max())
    off_diag = dist[~np.eye(n, dtype=bool)]
    mean_dist = float(off_diag.mean()) if off_diag.size else 0.0
    mol.properties = {
        "atom_count": float(n),
        "bond_count": float(len(bonds)),
        "mean_pairwise_distance": mean_dist,
        "ring_count": float(extra),
        "diameter": float(diameter),
    }
    mol.caption = _build_caption(atoms, extra, diameter, mean_dist)
    return mol.validate()


def _relax_coordinates(
    rng: np.random.Generator, n: int, bonds: list[tuple[int, int, float]]
) -> np.ndarray:
    coords = rng.normal(0.0, 1.0, size=(n, 3))
    edges = [(i, j) for i, j, _ in bonds]
    for _ in range(SPRING_ITERATIONS):
        for i, j in edges:
            delta = coords[i] - coords[j]
            dist = float(np.linalg.norm(delta))
            if dist < 1e-9:
                # coincident endpoints: nudge apart along a random direction
                delta = rng.normal(0.0, 1.0, size=3)
                dist = float(np.linalg.norm(delta))
            correction = SPRING_RATE * (dist - 1.0) * delta / dist
            coords[i] -= correction
            coords[j] += correction
    return coords - coords.mean(axis=0)


def _build_selfies(atoms: list[str], parents: list[int], rings: int) -> str:
    parts = [f"[{atoms[0]}]"]
    for i, parent in enumerate(parents):
        if parent != i:  # attach point is not the previous atom
            parts.append("[Branch1]")
        parts.append(f"[{atoms[i + 1]}]")
    parts.extend("[Ring1]" for _ in range(rings))
    return "".join(parts)


def _build_caption(atoms: list[str], rings: int, diameter: int, mean_dist: float) -> str:
    counts = {el: atoms.count(el) for el in ELEMENTS if atoms.count(el)}
    phrases = [
        f"{k} {ELEMENT_NAMES[el]} atom" + ("s" if k != 1 else "")
        for el, k in counts.items()
    ]
    if len(phrases) == 1:
        composition = phrases[0]
    else:
        composition = " , ".join(phrases[:-1]) + " and " + phrases[-1]
    if rings == 0:
        ring_part = "it contains no rings ."
    elif rings == 1:
        ring_part = "it contains 1 ring ."
    else:
        ring_part = f"it contains {rings} rings ."
    shape = "compact" if mean_dist <= COMPACT_RATIO * max(diameter, 1) else "elongated"
    bond_word = "bond" if diameter == 1 else "bonds"
    return (
        f"a molecule with {composition} . {ring_part} "
        f"the graph diameter is {diameter} {bond_word} and the shape is {shape} ."
    )
