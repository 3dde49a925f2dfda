from .entities import EntityGazetteer, extract_entities, normalize
from .judge import JudgeConfig, JudgeError, build_prompt, judge_score, parse_score, stub_score
from .metrics import bleu, bleu_texts, charm, parse_numeric_answer, rcharm, tokenize_for_bleu
from .report import EvalOptions, EvalReport, SampleScore, evaluate_corpus, recompute_aggregates

__all__ = [
    "EntityGazetteer",
    "EvalOptions",
    "EvalReport",
    "JudgeConfig",
    "JudgeError",
    "SampleScore",
    "bleu",
    "bleu_texts",
    "build_prompt",
    "charm",
    "evaluate_corpus",
    "extract_entities",
    "judge_score",
    "normalize",
    "parse_numeric_answer",
    "parse_score",
    "rcharm",
    "recompute_aggregates",
    "stub_score",
    "tokenize_for_bleu",
]
