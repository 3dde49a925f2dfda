"""Corpus evaluation: per-sample metric rows plus recomputable aggregates."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .entities import EntityGazetteer, extract_entities
from .judge import JudgeConfig, JudgeError, judge_score
from .metrics import bleu_texts, charm, parse_numeric_answer, rcharm


@dataclass
class SampleScore:
    id: str
    charm: float
    rcharm: float
    bleu: float
    valid: bool | None = None
    abs_error: float | None = None
    judge: int | None = None
    judge_error: str | None = None


@dataclass
class EvalReport:
    samples: list[SampleScore]
    aggregates: dict[str, float | None]
    corpus_bleu: float
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "corpus_bleu": self.corpus_bleu,
            "aggregates": self.aggregates,
            "samples": [vars(s) for s in self.samples],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = []
        header = f"{'id':<16} {'charm':>7} {'rcharm':>7} {'bleu':>7} {'valid':>6} {'abserr':>8} {'judge':>6}"
        lines.append(header)
        lines.append("-" * len(header))
        for s in self.samples:
            valid = "-" if s.valid is None else ("yes" if s.valid else "no")
            abserr = "-" if s.abs_error is None or math.isnan(s.abs_error) else f"{s.abs_error:.3f}"
            judge = "-" if s.judge is None else str(s.judge)
            lines.append(
                f"{s.id:<16} {s.charm:>7.3f} {s.rcharm:>7.3f} {s.bleu:>7.2f} {valid:>6} {abserr:>8} {judge:>6}"
            )
        lines.append("-" * len(header))
        for key in sorted(self.aggregates):
            value = self.aggregates[key]
            lines.append(f"{key:<24} {'-' if value is None else f'{value:.4f}'}")
        lines.append(f"{'corpus_bleu':<24} {self.corpus_bleu:.4f}")
        return "\n".join(lines) + "\n"


def recompute_aggregates(samples: list[SampleScore]) -> dict[str, float | None]:
    """Aggregate block derived purely from the per-sample rows."""
    count = len(samples)
    aggregates: dict[str, float | None] = {
        "charm_mean": sum(s.charm for s in samples) / count,
        "rcharm_mean": sum(s.rcharm for s in samples) / count,
        "bleu_mean": sum(s.bleu for s in samples) / count,
    }
    numeric = [s for s in samples if s.valid is not None]
    if numeric:
        valid = [s for s in numeric if s.valid]
        aggregates["validity_pct"] = 100.0 * len(valid) / len(numeric)
        aggregates["mae"] = (
            sum(s.abs_error for s in valid) / len(valid) if valid else None
        )
    else:
        aggregates["validity_pct"] = None
        aggregates["mae"] = None
    judged = [s for s in samples if s.judge is not None]
    aggregates["judge_mean"] = (
        sum(s.judge for s in judged) / len(judged) if judged else None
    )
    return aggregates


def _load_jsonl(path: str | Path) -> dict[str, dict]:
    records = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                record = json.loads(line)
                records[str(record["id"])] = record
    return records


@dataclass
class EvalOptions:
    threshold: float = 0.9
    judge: JudgeConfig | None = None


def evaluate_corpus(
    predictions_path: str | Path,
    references_path: str | Path,
    gazetteer: EntityGazetteer,
    options: EvalOptions | None = None,
) -> EvalReport:
    """Score aligned prediction/reference JSONL files.

    Both files hold ``{"id", "text"}`` records; references may add
    ``"value"`` (numeric ground truth) and ``"selfies"`` (for the judge
    prompt). An id present on only one side aborts with the orphans listed.
    """
    options = options or EvalOptions()
    predictions = _load_jsonl(predictions_path)
    references = _load_jsonl(references_path)
    orphans = sorted(set(predictions) ^ set(references))
    if orphans:
        raise ValueError(f"prediction/reference id mismatch; orphans: {orphans}")

    samples = []
    for mol_id in sorted(predictions):
        pred_text = str(predictions[mol_id]["text"])
        ref = references[mol_id]
        ref_text = str(ref["text"])
        pred_entities = extract_entities(pred_text, gazetteer, options.threshold)
        ref_entities = extract_entities(ref_text, gazetteer, options.threshold)
        score = SampleScore(
            id=mol_id,
            charm=charm(pred_entities, ref_entities),
            rcharm=rcharm(pred_entities, ref_entities),
            bleu=bleu_texts([pred_text], [ref_text]),
        )
        if "value" in ref:
            valid, value = parse_numeric_answer(pred_text)
            score.valid = valid
            score.abs_error = abs(value - float(ref["value"])) if valid else None
        if options.judge is not None:
            try:
                score.judge = judge_score(
                    str(ref.get("selfies", "")), ref_text, pred_text, options.judge
                )
            except JudgeError as exc:
                score.judge_error = str(exc)
        samples.append(score)

    ordered_ids = sorted(predictions)
    corpus = bleu_texts(
        [str(predictions[i]["text"]) for i in ordered_ids],
        [str(references[i]["text"]) for i in ordered_ids],
    )
    return EvalReport(
        samples=samples,
        aggregates=recompute_aggregates(samples),
        corpus_bleu=corpus,
        config={"threshold": options.threshold, "judge": options.judge is not None},
    )
