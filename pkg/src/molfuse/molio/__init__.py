from .datasets import (
    load_dataset,
    merge_xyz,
    molecule_to_record,
    read_xyz,
    record_to_molecule,
    save_dataset,
)
from .molecule import Molecule, ValidationError
from .selfies import (
    PAD_ID,
    UNK_ID,
    SelfiesParseError,
    SelfiesVocab,
    build_vocab,
    split_selfies,
    tokenize_selfies,
)
from .structure import UNREACHABLE, StructMatrices, pairwise_distances, shortest_path_matrix
from .synthetic import generate_synthetic

__all__ = [
    "Molecule",
    "PAD_ID",
    "SelfiesParseError",
    "SelfiesVocab",
    "StructMatrices",
    "UNK_ID",
    "UNREACHABLE",
    "ValidationError",
    "build_vocab",
    "generate_synthetic",
    "load_dataset",
    "merge_xyz",
    "molecule_to_record",
    "pairwise_distances",
    "read_xyz",
    "record_to_molecule",
    "save_dataset",
    "shortest_path_matrix",
    "split_selfies",
    "tokenize_selfies",
]
