"""Hallucination set metrics, corpus BLEU, and numeric-answer parsing."""

from __future__ import annotations

import logging
import math
import re
from collections import Counter

log = logging.getLogger(__name__)

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


def charm(predicted: frozenset | set, groundtruth: frozenset | set) -> float:
    """Fraction of mentioned entities absent from the ground truth.

    Empty prediction sets score 0 by convention (nothing mentioned, nothing
    hallucinated); the case is logged because it usually means the
    extractor found no entities at all.
    """
    if not predicted:
        log.debug("charm: empty prediction set, returning 0")
        return 0.0
    return len(set(predicted) - set(groundtruth)) / len(set(predicted))


def rcharm(predicted: frozenset | set, groundtruth: frozenset | set) -> float:
    """Fraction of ground-truth entities the output failed to mention."""
    if not groundtruth:
        log.debug("rcharm: empty ground-truth set, returning 0")
        return 0.0
    return len(set(groundtruth) - set(predicted)) / len(set(groundtruth))


def tokenize_for_bleu(text: str) -> list[str]:
    return text.lower().split()


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidates: list[list[str]], references: list[list[str]], max_n: int = 4) -> float:
    """Corpus BLEU in [0, 100] with single references.

    Modified n-gram precisions are pooled over the corpus; orders above one
    get add-one smoothing ((m+1)/(t+1)); orders with no candidate n-grams
    anywhere in the corpus are dropped from the geometric mean; brevity
    penalty uses summed lengths. A zero unigram precision yields 0.
    """
    if not candidates:
        raise ValueError("empty corpus")
    if len(candidates) != len(references):
        raise ValueError(f"{len(candidates)} candidates vs {len(references)} references")

    matches = [0] * (max_n + 1)
    totals = [0] * (max_n + 1)
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            cand_counts = _ngrams(cand, n)
            ref_counts = _ngrams(ref, n)
            totals[n] += max(0, len(cand) - n + 1)
            matches[n] += sum(min(c, ref_counts[g]) for g, c in cand_counts.items())

    log_precision_sum = 0.0
    used = 0
    for n in range(1, max_n + 1):
        if totals[n] == 0:
            continue  # candidate side has no n-grams of this order at all
        if n == 1:
            if matches[1] == 0:
                return 0.0
            precision = matches[1] / totals[1]
        else:
            precision = (matches[n] + 1) / (totals[n] + 1)
        log_precision_sum += math.log(precision)
        used += 1
    if used == 0:
        return 0.0
    brevity = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / max(cand_len, 1))
    return 100.0 * brevity * math.exp(log_precision_sum / used)


def bleu_texts(candidates: list[str], references: list[str], max_n: int = 4) -> float:
    """Corpus BLEU over raw texts (lowercase + whitespace tokenization)."""
    return bleu(
        [tokenize_for_bleu(c) for c in candidates],
        [tokenize_for_bleu(r) for r in references],
        max_n=max_n,
    )


def parse_numeric_answer(text: str) -> tuple[bool, float]:
    """First decimal-number token in the text; (False, nan) when none."""
    match = _NUMBER.search(text)
    if match is None:
        return False, float("nan")
    return True, float(match.group(0))
