"""Deterministic gazetteer-based chemical entity extraction.

Text is normalized (lowercased, punctuation stripped to spaces, whitespace
collapsed) and scanned left to right; at each token the longest matching
gazetteer term wins and its span is consumed, so a short term never fires
inside a longer match. Matches below the confidence threshold are dropped
after span selection.
"""

from __future__ import annotations

import re
from pathlib import Path

_PUNCT = re.compile(r"[.,;:!?()\[\]{}\"']")
_SPACES = re.compile(r"\s+")


def normalize(text: str) -> str:
    return _SPACES.sub(" ", _PUNCT.sub(" ", text.lower())).strip()


class EntityGazetteer:
    """Normalized term -> (canonical id, confidence)."""

    def __init__(self, terms: dict[str, float] | list[str] | None = None):
        self.entries: dict[tuple[str, ...], tuple[str, float]] = {}
        self.max_words = 0
        if isinstance(terms, dict):
            for term, confidence in terms.items():
                self.add(term, confidence)
        elif terms:
            for term in terms:
                self.add(term)

    def add(self, term: str, confidence: float = 1.0) -> None:
        normalized = normalize(term)
        if not normalized:
            raise ValueError(f"empty gazetteer term {term!r}")
        words = tuple(normalized.split())
        self.entries[words] = (normalized, float(confidence))
        self.max_words = max(self.max_words, len(words))

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_file(cls, path: str | Path) -> "EntityGazetteer":
        """One term per line, optionally followed by a tab and a confidence."""
        gazetteer = cls()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "\t" in line:
                term, conf = line.split("\t", 1)
                gazetteer.add(term, float(conf))
            else:
                gazetteer.add(line)
        return gazetteer


def extract_entities(text: str, gazetteer: EntityGazetteer, threshold: float = 0.9) -> frozenset[str]:
    """Canonical ids of gazetteer terms found in the text."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    tokens = normalize(text).split()
    found: set[str] = set()
    i = 0
    while i < len(tokens):
        matched = 0
        for span in range(min(gazetteer.max_words, len(tokens) - i), 0, -1):
            entry = gazetteer.entries.get(tuple(tokens[i : i + span]))
            if entry is not None:
                canonical, confidence = entry
                if confidence >= threshold:
                    found.add(canonical)
                matched = span
                break
        i += matched if matched else 1
    return frozenset(found)
