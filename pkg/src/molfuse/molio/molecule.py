"""Molecule record: one string, one graph, one conformation, aligned by atom order."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .selfies import split_selfies


class ValidationError(ValueError):
    """A molecule record violates a structural invariant."""


@dataclass
class Molecule:
    id: str
    selfies: str
    atoms: list[str]
    bonds: list[tuple[int, int, float]]
    coords: np.ndarray | None = None
    caption: str | None = None
    properties: dict[str, float] = field(default_factory=dict)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def validate(self) -> "Molecule":
        n = self.n_atoms
        if n == 0:
            raise ValidationError(f"{self.id}: molecule has no atoms")
        seen: set[tuple[int, int]] = set()
        for i, j, order in self.bonds:
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"{self.id}: bond ({i},{j}) indexes outside {n} atoms")
            if i == j:
                raise ValidationError(f"{self.id}: self-bond on atom {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValidationError(f"{self.id}: duplicate bond {key}")
            seen.add(key)
            if order <= 0:
                raise ValidationError(f"{self.id}: bond {key} has non-positive order {order}")
        if self.coords is not None:
            coords = np.asarray(self.coords, dtype=np.float64)
            if coords.ndim != 2 or coords.shape[1] != 3:
                raise ValidationError(f"{self.id}: coords must be n x 3, got {coords.shape}")
            if coords.shape[0] != n:
                raise ValidationError(
                    f"{self.id}: {coords.shape[0]} coordinate rows for {n} atoms"
                )
            if not np.isfinite(coords).all():
                raise ValidationError(f"{self.id}: non-finite coordinates")
            self.coords = coords
        # round trip: splitting then joining must reproduce the stored string
        if "".join(split_selfies(self.selfies)) != self.selfies:
            raise ValidationError(f"{self.id}: selfies string does not round-trip")
        return self

    def permuted(self, perm: list[int]) -> "Molecule":
        """Relabel atoms by ``perm`` (new index of old atom i is perm[i])."""
        n = self.n_atoms
        if sorted(perm) != list(range(n)):
            raise ValueError("perm must be a permutation of atom indices")
        atoms = [""] * n
        for old, new in enumerate(perm):
            atoms[new] = self.atoms[old]
        bonds = [(perm[i], perm[j], order) for i, j, order in self.bonds]
        coords = None
        if self.coords is not None:
            coords = np.empty_like(self.coords)
            for old, new in enumerate(perm):
                coords[new] = self.coords[old]
        return Molecule(
            id=self.id,
            selfies=self.selfies,
            atoms=atoms,
            bonds=bonds,
            coords=coords,
            caption=self.caption,
            properties=dict(self.properties),
        )
