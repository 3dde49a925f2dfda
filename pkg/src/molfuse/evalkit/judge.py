"""Pluggable LLM-judge client for caption quality scoring.

The prompt presents, in order, the molecule string, the ground-truth
description, and the model output, and asks for a 0-5 score against two
criteria: factual informativeness and alignment with the ground truth.
The first integer in [0, 5] found in the reply is the score.

A deterministic offline stub (token-overlap Jaccard scaled to 0-5) ships
for CI and for runs without an endpoint.
"""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass

import requests

log = logging.getLogger(__name__)

_SCORE = re.compile(r"\b([0-5])\b")

PROMPT_TEMPLATE = """You are grading a model-generated molecular description.

Molecule (SELFIES): {selfies}
Ground-truth description: {groundtruth}
Model output: {generated}

Score the model output from 0 to 5 considering two criteria:
(1) factual informativeness, and (2) alignment with the ground truth.
Reply with the score first, e.g. "Score: 3".
"""


class JudgeError(RuntimeError):
    """The judge reply could not be obtained or parsed."""


@dataclass
class JudgeConfig:
    endpoint: str | None = None
    api_key_env: str = "MOLFUSE_JUDGE_API_KEY"
    stub: bool = True
    retries: int = 3
    timeout: float = 30.0
    max_concurrency: int = 1


def build_prompt(selfies: str, groundtruth: str, generated: str) -> str:
    return PROMPT_TEMPLATE.format(selfies=selfies, groundtruth=groundtruth, generated=generated)


def parse_score(reply: str) -> int:
    match = _SCORE.search(reply)
    if match is None:
        raise JudgeError(f"no integer 0-5 in judge reply: {reply!r}")
    return int(match.group(1))


def stub_score(groundtruth: str, generated: str) -> int:
    """Deterministic offline score: Jaccard token overlap scaled to 0-5."""
    gt = set(groundtruth.lower().split())
    gen = set(generated.lower().split())
    if not gt and not gen:
        return 5
    union = gt | gen
    if not union:
        return 0
    return round(5.0 * len(gt & gen) / len(union))


def judge_score(selfies: str, groundtruth: str, generated: str, config: JudgeConfig) -> int:
    """0-5 judge score; raises JudgeError after exhausting retries."""
    if config.stub:
        return stub_score(groundtruth, generated)
    if not config.endpoint:
        raise JudgeError("no judge endpoint configured and stub mode disabled")
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(config.api_key_env, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    prompt = build_prompt(selfies, groundtruth, generated)
    last_error: Exception | None = None
    for attempt in range(1, config.retries + 1):
        try:
            response = requests.post(
                config.endpoint,
                json={"prompt": prompt},
                headers=headers,
                timeout=config.timeout,
            )
            response.raise_for_status()
            return parse_score(response.json()["text"])
        except (requests.RequestException, KeyError, ValueError) as exc:
            last_error = exc
            log.warning("judge attempt %d/%d failed: %s", attempt, config.retries, exc)
    raise JudgeError(f"judge failed after {config.retries} attempts: {last_error}")
