"""Word-level text vocabulary for the decoder stub."""

from __future__ import annotations

from typing import Iterable

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
UNK_ID = 3
SPECIALS = ["<pad>", "<bos>", "<eos>", "<unk>"]


def tokenize_text(text: str) -> list[str]:
    return text.lower().split()


class TextVocab:
    """Dense word-to-id map; specials first, then words in first-seen order."""

    def __init__(self, words: Iterable[str] = ()):
        self.word_to_id: dict[str, int] = {w: i for i, w in enumerate(SPECIALS)}
        for w in words:
            self.add(w)

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "TextVocab":
        vocab = cls()
        for text in texts:
            for word in tokenize_text(text):
                vocab.add(word)
        return vocab

    def add(self, word: str) -> int:
        if word not in self.word_to_id:
            self.word_to_id[word] = len(self.word_to_id)
        return self.word_to_id[word]

    def __len__(self) -> int:
        return len(self.word_to_id)

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_id

    def words(self) -> list[str]:
        return list(self.word_to_id)

    def encode(self, text: str) -> list[int]:
        return [self.word_to_id.get(w, UNK_ID) for w in tokenize_text(text)]

    def decode(self, ids: list[int]) -> str:
        words = self.words()
        return " ".join(words[i] for i in ids if i not in (PAD_ID, BOS_ID, EOS_ID))
