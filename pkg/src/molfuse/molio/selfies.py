"""Lexical SELFIES handling: bracketed-symbol splitting and a dense vocabulary.

SELFIES strings are treated purely as token streams — symbols are split
on brackets, never interpreted chemically.
"""

from __future__ import annotations

from typing import Iterable, Iterator

PAD_ID = 0
UNK_ID = 1
PAD_SYMBOL = "<pad>"
UNK_SYMBOL = "<unk>"


class SelfiesParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def split_selfies(s: str) -> list[str]:
    """Split a SELFIES string into its bracketed symbols.

    Raises ``SelfiesParseError`` with the byte offset of the first
    unbalanced or stray character.
    """
    symbols: list[str] = []
    i = 0
    while i < len(s):
        if s[i] != "[":
            raise SelfiesParseError(f"expected '[' but found {s[i]!r}", i)
        end = s.find("]", i + 1)
        if end == -1:
            raise SelfiesParseError("unclosed '['", i)
        inner = s[i + 1 : end]
        if "[" in inner:
            raise SelfiesParseError("nested '['", i + 1 + inner.index("["))
        symbols.append(s[i : end + 1])
        i = end + 1
    return symbols


class SelfiesVocab:
    """Symbol-to-id map with pad=0 and unk=1, dense first-seen ordering."""

    def __init__(self, symbols: Iterable[str] = ()):
        self.symbol_to_id: dict[str, int] = {PAD_SYMBOL: PAD_ID, UNK_SYMBOL: UNK_ID}
        for sym in symbols:
            self.add(sym)

    def add(self, symbol: str) -> int:
        if symbol not in self.symbol_to_id:
            self.symbol_to_id[symbol] = len(self.symbol_to_id)
        return self.symbol_to_id[symbol]

    def __len__(self) -> int:
        return len(self.symbol_to_id)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.symbol_to_id

    def id_of(self, symbol: str) -> int:
        return self.symbol_to_id.get(symbol, UNK_ID)

    def symbols(self) -> list[str]:
        return list(self.symbol_to_id)

    def encode(self, s: str) -> list[int]:
        return [self.id_of(sym) for sym in split_selfies(s)]


def tokenize_selfies(s: str, vocab: SelfiesVocab) -> list[int]:
    """One id per bracketed symbol, left to right; unknown symbols map to unk."""
    return vocab.encode(s)


def build_vocab(corpus: Iterator[str] | Iterable[str]) -> SelfiesVocab:
    """Vocabulary over all distinct symbols in the corpus, first-seen order."""
    vocab = SelfiesVocab()
    count = 0
    for index, s in enumerate(corpus):
        count += 1
        try:
            for sym in split_selfies(s):
                vocab.add(sym)
        except SelfiesParseError as exc:
            raise SelfiesParseError(f"sample {index}: {exc}", exc.offset) from exc
    if count == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    return vocab
