#!/usr/bin/env python3
"""Regenerate the bundled data fixtures.

Writes data/train64.jsonl and data/val16.jsonl (the seed-0 synthetic
corpus, split 64/16) plus data/gazetteer.txt. Invariants are enforced by
the generator itself; the split is positional so the files are fully
reproducible.
"""

from pathlib import Path

from molfuse.molio import generate_synthetic, save_dataset

GAZETTEER_TERMS = [
    "carbon",
    "nitrogen",
    "oxygen",
    "sulfur",
    "fluorine",
    "ring",
    "rings",
    "compact",
    "elongated",
    "hydroxy",
    "phosphate",
    "coenzyme a",
    "fatty acyl-coa",
    "coa",
]


def main() -> None:
    root = Path(__file__).resolve().parent.parent
    data = root / "data"
    data.mkdir(exist_ok=True)
    corpus = generate_synthetic(seed=0, count=80, max_atoms=8)
    save_dataset(corpus[:64], data / "train64.jsonl")
    save_dataset(corpus[64:], data / "val16.jsonl")
    (data / "gazetteer.txt").write_text("\n".join(GAZETTEER_TERMS) + "\n", encoding="utf-8")
    print(f"wrote {len(corpus)} molecules and {len(GAZETTEER_TERMS)} gazetteer terms under {data}")


if __name__ == "__main__":
    main()
