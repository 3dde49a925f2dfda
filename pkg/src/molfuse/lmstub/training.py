"""Two-stage training of the projector against the frozen decoder stub.

Stage 1 aligns the molecule side with the language model: encoders and
projector train on captioning while every LM parameter stays frozen.
Stage 2 instruction-tunes: the projector keeps training, low-rank
adapters on the LM's attention query/value projections become trainable,
and the encoders freeze. Modality dropout is active in both stages.

All randomness flows from named child streams of the run seed, so two
runs with the same seed produce identical loss curves, and disabling one
factor (say dropout) never shifts the draws of the others.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .tasks import TASK_NAMES, task_example
from .vocab import EOS_ID
from ..coproj import ModalityMask, sample_modality_mask
from ..molio.molecule import Molecule
from ..numerics import Adam, Tensor, mul
from ..rng import child_rng

if TYPE_CHECKING:
    from ..pipeline import PipelineModel

log = logging.getLogger(__name__)


@dataclass
class TrainSettings:
    seed: int = 0
    steps: int = 300
    batch_size: int = 4
    lr: float = 3e-3
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 0.0
    p_drop: float = 0.15
    lora_rank: int = 4
    lora_alpha: float = 8.0
    log_every: int = 10


@dataclass
class TrainLogRow:
    step: int
    loss: float
    lr: float
    active_1d: int
    active_2d: int
    active_3d: int


@dataclass
class TrainResult:
    history: list[TrainLogRow] = field(default_factory=list)

    @property
    def first_loss(self) -> float:
        return self.history[0].loss

    @property
    def last_loss(self) -> float:
        return self.history[-1].loss


class _IndexStream:
    """Reshuffled epoch order over corpus indices."""

    def __init__(self, count: int, rng: np.random.Generator):
        self.count = count
        self.rng = rng
        self.order: list[int] = []

    def take(self, k: int) -> list[int]:
        out = []
        while len(out) < k:
            if not self.order:
                self.order = list(self.rng.permutation(self.count))
            out.append(int(self.order.pop()))
        return out


def encode_example(model: "PipelineModel", task: str, mol: Molecule) -> tuple[list[int], list[int]]:
    instruction, response = task_example(task, mol)
    return model.text_vocab.encode(instruction), model.text_vocab.encode(response) + [EOS_ID]


def _run_steps(
    model: "PipelineModel",
    molecules: list[Molecule],
    settings: TrainSettings,
    stream_tag: str,
    pick_task,
) -> TrainResult:
    trainable = [p for p in model.parameters() if p.trainable]
    if not trainable:
        raise ValueError("no trainable parameters")
    optimizer = Adam(
        trainable,
        lr=settings.lr,
        betas=(settings.beta1, settings.beta2),
        weight_decay=settings.weight_decay,
    )
    data_rng = child_rng(settings.seed, f"{stream_tag}/data")
    drop_rng = child_rng(settings.seed, f"{stream_tag}/dropout")
    task_rng = child_rng(settings.seed, f"{stream_tag}/task")
    stream = _IndexStream(len(molecules), data_rng)

    result = TrainResult()
    scale = Tensor(1.0 / settings.batch_size)
    for step in range(1, settings.steps + 1):
        optimizer.zero_grad()
        counts = {"1d": 0, "2d": 0, "3d": 0}
        total = 0.0
        for idx in stream.take(settings.batch_size):
            mol = molecules[idx]
            task = pick_task(task_rng)
            instruction_ids, response_ids = encode_example(model, task, mol)
            if settings.p_drop > 0.0:
                mask = sample_modality_mask(drop_rng, settings.p_drop)
            else:
                mask = ModalityMask.all()
            mask = model.effective_mask(mol, mask)
            for m in mask:
                counts[m] += 1
            loss = model.loss(mol, instruction_ids, response_ids, mask)
            mul(loss, scale).backward()
            total += loss.item()
        for p in trainable:
            if p.tensor.grad is None:  # e.g. a modality embedding never drawn this step
                p.tensor.grad = np.zeros_like(p.data)
        optimizer.step()
        model.projector.relbias.clamp_widths()
        result.history.append(
            TrainLogRow(
                step=step,
                loss=total / settings.batch_size,
                lr=settings.lr,
                active_1d=counts["1d"],
                active_2d=counts["2d"],
                active_3d=counts["3d"],
            )
        )
        if settings.log_every and step % settings.log_every == 0:
            log.info("%s step %d loss %.4f", stream_tag, step, result.history[-1].loss)
    return result


def pretrain_lm(model: "PipelineModel", molecules: list[Molecule], settings: TrainSettings) -> TrainResult:
    """Text-only warmup of the decoder stub (instruction -> response, no prefix).

    The stub stands in for a pretrained language model, so it learns the
    caption/answer language before alignment begins; the aligned stages then
    freeze it. Touches LM parameters only.
    """
    if not molecules:
        raise ValueError("empty corpus")
    if settings.steps <= 0:
        return TrainResult()
    model.freeze()
    for p in model.lm_base_parameters():
        p.trainable = True
    optimizer = Adam(
        model.lm_base_parameters(),
        lr=settings.lr,
        betas=(settings.beta1, settings.beta2),
        weight_decay=settings.weight_decay,
    )
    data_rng = child_rng(settings.seed, "warmup/data")
    task_rng = child_rng(settings.seed, "warmup/task")
    stream = _IndexStream(len(molecules), data_rng)
    empty_prefix = model.lm.embed_tokens([])
    scale = Tensor(1.0 / settings.batch_size)
    result = TrainResult()
    for step in range(1, settings.steps + 1):
        optimizer.zero_grad()
        total = 0.0
        for idx in stream.take(settings.batch_size):
            mol = molecules[idx]
            task = TASK_NAMES[int(task_rng.integers(0, len(TASK_NAMES)))]
            instruction_ids, response_ids = encode_example(model, task, mol)
            loss = model.lm.forward_loss(empty_prefix, instruction_ids, response_ids)
            mul(loss, scale).backward()
            total += loss.item()
        for p in optimizer.params:
            if p.tensor.grad is None:
                p.tensor.grad = np.zeros_like(p.data)
        optimizer.step()
        result.history.append(
            TrainLogRow(step=step, loss=total / settings.batch_size, lr=settings.lr,
                        active_1d=0, active_2d=0, active_3d=0)
        )
        if settings.log_every and step % settings.log_every == 0:
            log.info("warmup step %d loss %.4f", step, result.history[-1].loss)
    return result


def train_stage1(model: "PipelineModel", molecules: list[Molecule], settings: TrainSettings) -> TrainResult:
    """Align encoders + projector with the frozen LM on captioning."""
    if not molecules:
        raise ValueError("empty corpus")
    model.unfreeze()
    for p in model.lm_base_parameters():
        p.trainable = False
    return _run_steps(model, molecules, settings, "stage1", lambda rng: "caption")


def train_stage2(model: "PipelineModel", molecules: list[Molecule], settings: TrainSettings) -> TrainResult:
    """Instruction-tune projector + LM adapters with encoders frozen."""
    if not molecules:
        raise ValueError("empty corpus")
    if not model.lm.adapters:
        model.lm.attach_adapters(
            child_rng(settings.seed, "stage2/lora"),
            targets=[
                name
                for i in range(len(model.lm.blocks))
                for name in (f"blocks.{i}.attn.wq", f"blocks.{i}.attn.wv")
            ],
            rank=settings.lora_rank,
            alpha=settings.lora_alpha,
        )
    model.unfreeze()
    for p in model.encoder_parameters():
        p.trainable = False
    for p in model.lm_base_parameters():
        p.trainable = False

    def pick_task(rng: np.random.Generator) -> str:
        return TASK_NAMES[int(rng.integers(0, len(TASK_NAMES)))]

    return _run_steps(model, molecules, settings, "stage2", pick_task)


def validation_loss(
    model: "PipelineModel",
    molecules: list[Molecule],
    task: str = "caption",
    mask: ModalityMask | None = None,
) -> float:
    """Mean response NLL over a corpus under a fixed inference mask."""
    if not molecules:
        raise ValueError("empty validation corpus")
    total = 0.0
    for mol in molecules:
        instruction_ids, response_ids = encode_example(model, task, mol)
        total += model.loss(mol, instruction_ids, response_ids, mask).item()
    return total / len(molecules)
