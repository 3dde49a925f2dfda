"""Synthetic instruction tasks: captioning, computed-property QA, motif counting."""

from __future__ import annotations

from ..molio.molecule import Molecule

TASK_NAMES = ("caption", "qa", "count")

INSTRUCTIONS = {
    "caption": "describe the molecule .",
    "qa": "how many atoms are in the molecule ?",
    "count": "how many carbon atoms does the molecule contain ?",
}


def task_example(task: str, mol: Molecule) -> tuple[str, str]:
    """(instruction text, target response text) for one molecule."""
    if task == "caption":
        if mol.caption is None:
            raise ValueError(f"{mol.id}: no caption for the captioning task")
        return INSTRUCTIONS[task], mol.caption
    if task == "qa":
        return INSTRUCTIONS[task], str(mol.n_atoms)
    if task == "count":
        return INSTRUCTIONS[task], str(sum(1 for a in mol.atoms if a == "C"))
    raise ValueError(f"unknown task {task!r}; expected one of {TASK_NAMES}")


def task_target_value(task: str, mol: Molecule) -> float | None:
    """Numeric ground truth for validity/MAE scoring, None for free text."""
    if task == "qa":
        return float(mol.n_atoms)
    if task == "count":
        return float(sum(1 for a in mol.atoms if a == "C"))
    return None


def vocabulary_texts(molecules: list[Molecule]) -> list[str]:
    """Every text the stub must tokenize: instructions, captions, numerals."""
    texts = list(INSTRUCTIONS.values())
    texts.extend(m.caption for m in molecules if m.caption is not None)
    texts.append(" ".join(str(i) for i in range(26)))
    return texts
