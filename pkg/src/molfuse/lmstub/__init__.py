from .model import DecoderLM, LoraAdapter
from .tasks import INSTRUCTIONS, TASK_NAMES, task_example, task_target_value, vocabulary_texts
from .training import (
    TrainLogRow,
    TrainResult,
    TrainSettings,
    encode_example,
    train_stage1,
    train_stage2,
    validation_loss,
)
from .vocab import BOS_ID, EOS_ID, PAD_ID, UNK_ID, TextVocab, tokenize_text

__all__ = [
    "BOS_ID",
    "DecoderLM",
    "EOS_ID",
    "INSTRUCTIONS",
    "LoraAdapter",
    "PAD_ID",
    "TASK_NAMES",
    "TextVocab",
    "TrainLogRow",
    "TrainResult",
    "TrainSettings",
    "UNK_ID",
    "encode_example",
    "task_example",
    "task_target_value",
    "tokenize_text",
    "train_stage1",
    "train_stage2",
    "validation_loss",
    "vocabulary_texts",
]
