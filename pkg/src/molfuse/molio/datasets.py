"""JSONL molecule persistence and XYZ coordinate import.

Record format (one JSON object per line)::

    {"id": ..., "selfies": ..., "atoms": [...], "bonds": [[i, j, order], ...],
     "coords": [[x, y, z], ...], "caption": ..., "properties": {...}}

``coords``, ``caption`` and ``properties`` are optional.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .molecule import Molecule, ValidationError


def record_to_molecule(record: dict, context: str = "") -> Molecule:
    for key in ("id", "selfies", "atoms", "bonds"):
        if key not in record:
            raise ValidationError(f"{context}missing required field {key!r}")
    bonds = []
    for bond in record["bonds"]:
        if len(bond) != 3:
            raise ValidationError(f"{context}bond {bond!r} is not [i, j, order]")
        bonds.append((int(bond[0]), int(bond[1]), float(bond[2])))
    coords = record.get("coords")
    mol = Molecule(
        id=str(record["id"]),
        selfies=str(record["selfies"]),
        atoms=[str(a) for a in record["atoms"]],
        bonds=bonds,
        coords=np.asarray(coords, dtype=np.float64) if coords is not None else None,
        caption=record.get("caption"),
        properties={str(k): float(v) for k, v in (record.get("properties") or {}).items()},
    )
    return mol.validate()


def molecule_to_record(mol: Molecule) -> dict:
    record = {
        "id": mol.id,
        "selfies": mol.selfies,
        "atoms": list(mol.atoms),
        "bonds": [[i, j, order] for i, j, order in mol.bonds],
    }
    if mol.coords is not None:
        record["coords"] = [[float(x) for x in row] for row in mol.coords]
    if mol.caption is not None:
        record["caption"] = mol.caption
    if mol.properties:
        record["properties"] = {k: float(v) for k, v in mol.properties.items()}
    return record


def load_dataset(path: str | Path, skip_invalid: bool = False) -> tuple[list[Molecule], list[str]]:
    """Read a JSONL molecule file.

    Returns (molecules, error messages). Unless ``skip_invalid`` is set, the
    first invalid record aborts the load by raising ``ValidationError``.
    """
    path = Path(path)
    molecules: list[Molecule] = []
    errors: list[str] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                message = f"{path.name}:{lineno}: malformed JSON ({exc.msg})"
                if not skip_invalid:
                    raise ValidationError(message) from exc
                errors.append(message)
                continue
            try:
                molecules.append(record_to_molecule(record, context=f"{path.name}:{lineno}: "))
            except ValidationError as exc:
                if not skip_invalid:
                    raise
                errors.append(str(exc))
    return molecules, errors


def save_dataset(molecules: list[Molecule], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for mol in molecules:
            fh.write(json.dumps(molecule_to_record(mol)) + "\n")


def read_xyz(path: str | Path) -> dict[str, tuple[list[str], np.ndarray]]:
    """Parse an XYZ file of one or more blocks; the comment line carries the id."""
    path = Path(path)
    blocks: dict[str, tuple[list[str], np.ndarray]] = {}
    lines = path.read_text(encoding="utf-8").splitlines()
    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        try:
            count = int(lines[i].strip())
        except ValueError as exc:
            raise ValidationError(f"{path.name}:{i + 1}: expected atom count") from exc
        if i + 1 + count >= len(lines) + 1:
            raise ValidationError(f"{path.name}:{i + 1}: truncated XYZ block")
        mol_id = lines[i + 1].strip()
        elements: list[str] = []
        rows = []
        for k in range(count):
            parts = lines[i + 2 + k].split()
            if len(parts) < 4:
                raise ValidationError(f"{path.name}:{i + 3 + k}: expected 'El x y z'")
            elements.append(parts[0])
            rows.append([float(parts[1]), float(parts[2]), float(parts[3])])
        blocks[mol_id] = (elements, np.asarray(rows, dtype=np.float64))
        i += 2 + count
    return blocks


def merge_xyz(molecules: list[Molecule], xyz_path: str | Path) -> int:
    """Attach XYZ coordinates to records matched by id; returns merge count."""
    blocks = read_xyz(xyz_path)
    merged = 0
    for mol in molecules:
        if mol.id not in blocks:
            continue
        elements, coords = blocks[mol.id]
        if elements != mol.atoms:
            raise ValidationError(
                f"{mol.id}: XYZ element list {elements} does not match record atoms {mol.atoms}"
            )
        mol.coords = coords
        mol.validate()
        merged += 1
    return merged
