"""Command implementations behind the CLI.

Each runner is an ordinary function over (config, paths) so tests can
drive them directly; ``main`` only parses arguments and maps exceptions
to exit codes. Every report path also renders a PNG figure next to the
delimited output.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import ConfigError, RunConfig, config_from_dict
from .figures import save_grouped_bars, save_loss_curve, save_metric_bars
from ..coproj import ModalityMask
from ..encoders import ELEMENT_ALPHABET
from ..evalkit import EntityGazetteer, EvalOptions, JudgeConfig, evaluate_corpus
from ..lmstub.tasks import INSTRUCTIONS, TASK_NAMES, task_example, task_target_value
from ..lmstub.training import (
    TrainResult,
    pretrain_lm,
    train_stage1,
    train_stage2,
    validation_loss,
)
from ..lmstub.vocab import TextVocab
from ..molio import Molecule, generate_synthetic, load_dataset, merge_xyz, save_dataset
from ..molio.selfies import SelfiesVocab
from ..numerics import gradcheck
from ..pipeline import PipelineModel, build_model
from ..rng import child_rng

log = logging.getLogger(__name__)

GRADCHECK_TOLERANCE = 1e-4
ABLATION_COMPONENTS = ("co_attention", "modality_embedding", "modality_dropout")
# validation protocol: caption loss averaged over the four canonical
# inference settings, weighting robustness to missing modalities
VALIDATION_MASKS = [("all", None), ("1d", {"1d"}), ("2d", {"2d"}), ("3d", {"3d"})]


# -- model (de)serialization ----------------------------------------------------


def model_to_checkpoint(model: PipelineModel, config: RunConfig, extra: dict | None = None) -> Checkpoint:
    tensors = model.state_arrays()  # also assigns fully-qualified parameter names
    payload_extra = {
        "selfies_symbols": model.selfies_vocab.symbols()[2:],  # pad/unk implicit
        "text_words": model.text_vocab.words()[4:],  # specials implicit
        "lora_rank": 0,
        "lora_alpha": 0.0,
        "lora_targets": [],
    }
    if model.lm.adapters:
        first = model.lm.adapters[0]
        rank = first.down.data.shape[1]
        payload_extra["lora_rank"] = rank
        payload_extra["lora_alpha"] = first._scale * rank
        payload_extra["lora_targets"] = [a.target.name for a in model.lm.adapters]
    payload_extra.update(extra or {})
    return Checkpoint(config=config.to_dict(), tensors=tensors, extra=payload_extra)


def model_from_checkpoint(checkpoint: Checkpoint) -> tuple[PipelineModel, RunConfig]:
    config = config_from_dict(checkpoint.config)
    selfies_vocab = SelfiesVocab(checkpoint.extra["selfies_symbols"])
    text_vocab = TextVocab(checkpoint.extra["text_words"])
    model = PipelineModel(config.seed, config.model_dims(), selfies_vocab, text_vocab)
    targets = checkpoint.extra.get("lora_targets") or []
    if targets:
        model.lm.attach_adapters(
            child_rng(config.seed, "stage2/lora"),
            targets=[t.removeprefix("lm.") for t in targets],
            rank=int(checkpoint.extra["lora_rank"]),
            alpha=float(checkpoint.extra["lora_alpha"]),
        )
    model.load_state_arrays(checkpoint.tensors)
    return model, config


# -- data helpers -----------------------------------------------------------------


def load_corpora(config: RunConfig) -> tuple[list[Molecule], list[Molecule]]:
    train, _ = load_dataset(config.data_path)
    val, _ = load_dataset(config.val_path)
    if not train:
        raise ConfigError(f"no molecules in {config.data_path}")
    return train, val


def default_gazetteer() -> EntityGazetteer:
    from ..molio.synthetic import ELEMENT_NAMES

    terms = list(ELEMENT_NAMES.values())
    terms += [e.lower() for e in ELEMENT_ALPHABET if len(e) > 1]
    terms += ["ring", "rings", "compact", "elongated", "hydroxy", "phosphate"]
    return EntityGazetteer(terms)


def load_gazetteer(config: RunConfig) -> EntityGazetteer:
    path = Path(config.gazetteer_path)
    if path.exists():
        return EntityGazetteer.from_file(path)
    log.warning("gazetteer file %s missing; using built-in terms", path)
    return default_gazetteer()


# -- synth / ingest ------------------------------------------------------------------


def run_synth(seed: int, count: int, max_atoms: int, output: str | Path) -> int:
    molecules = generate_synthetic(seed, count, max_atoms=max_atoms)
    save_dataset(molecules, output)
    return len(molecules)


def run_ingest(
    input_path: str | Path,
    output_path: str | Path,
    skip_invalid: bool = False,
    xyz_path: str | Path | None = None,
) -> tuple[int, list[str]]:
    molecules, errors = load_dataset(input_path, skip_invalid=skip_invalid)
    if xyz_path is not None:
        merge_xyz(molecules, xyz_path)
    save_dataset(molecules, output_path)
    return len(molecules), errors


# -- train ------------------------------------------------------------------------------


def _write_history_csv(result: TrainResult, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss", "lr", "active_1d", "active_2d", "active_3d"])
        for row in result.history:
            writer.writerow(
                [row.step, repr(row.loss), repr(row.lr), row.active_1d, row.active_2d, row.active_3d]
            )


def instruction_validation_loss(model: PipelineModel, molecules: list[Molecule]) -> float:
    return float(np.mean([validation_loss(model, molecules, task=t) for t in TASK_NAMES]))


def prepared_model(config: RunConfig, train_mols, val_mols) -> PipelineModel:
    """Fresh pipeline with the language stub warmed up on text and frozen."""
    model = build_model(config.seed, config.model_dims(), train_mols + val_mols)
    pretrain_lm(model, train_mols, config.train_settings(stage=0))
    return model


def run_train(config: RunConfig, stage: int, from_checkpoint: str | None = None) -> dict[str, str]:
    train_mols, val_mols = load_corpora(config)
    if stage == 1:
        model = prepared_model(config, train_mols, val_mols)
        result = train_stage1(model, train_mols, config.train_settings(stage=1))
    elif stage == 2:
        if not from_checkpoint:
            raise ConfigError("stage 2 requires --from <stage-1 checkpoint>")
        model, _ = model_from_checkpoint(load_checkpoint(from_checkpoint))
        result = train_stage2(model, train_mols, config.train_settings(stage=2))
    else:
        raise ConfigError(f"stage must be 1 or 2, got {stage}")

    extra = {
        "stage": stage,
        "first_loss": result.first_loss,
        "last_loss": result.last_loss,
        "val_caption_loss": validation_loss(model, val_mols, task="caption") if val_mols else None,
        "val_instruction_loss": instruction_validation_loss(model, val_mols) if val_mols else None,
    }
    checkpoint_path = Path(config.checkpoint_dir) / f"stage{stage}.ckpt"
    save_checkpoint(model_to_checkpoint(model, config, extra), checkpoint_path)

    report_dir = Path(config.report_dir)
    csv_path = report_dir / f"train_stage{stage}.csv"
    _write_history_csv(result, csv_path)
    fig_path = report_dir / f"train_stage{stage}.png"
    save_loss_curve(
        [r.step for r in result.history],
        [r.loss for r in result.history],
        fig_path,
        title=f"stage {stage} training loss (seed {config.seed})",
    )
    return {"checkpoint": str(checkpoint_path), "log": str(csv_path), "figure": str(fig_path)}


# -- eval -----------------------------------------------------------------------------


def run_eval(
    config: RunConfig,
    checkpoint_path: str,
    task: str,
    modalities: frozenset[str] | None = None,
    judge: JudgeConfig | None = None,
    tag: str = "",
) -> dict[str, str]:
    if task not in TASK_NAMES:
        raise ConfigError(f"unknown task {task!r}; expected one of {TASK_NAMES}")
    model, _ = model_from_checkpoint(load_checkpoint(checkpoint_path))
    _, val_mols = load_corpora(config)
    if not val_mols:
        raise ConfigError(f"no molecules in {config.val_path}")
    modalities = modalities or config.modality_set()
    mask = ModalityMask(modalities)

    mods_tag = "".join(m[0] for m in sorted(modalities))
    out_dir = Path(config.report_dir) / f"eval_{task}_{mods_tag}{tag}"
    out_dir.mkdir(parents=True, exist_ok=True)
    predictions_path = out_dir / "predictions.jsonl"
    references_path = out_dir / "references.jsonl"

    with predictions_path.open("w", encoding="utf-8") as pred_fh, references_path.open(
        "w", encoding="utf-8"
    ) as ref_fh:
        for mol in val_mols:
            text = model.generate_text(mol, INSTRUCTIONS[task], mask=mask)
            pred_fh.write(json.dumps({"id": mol.id, "text": text}) + "\n")
            reference = {"id": mol.id, "text": task_example(task, mol)[1], "selfies": mol.selfies}
            value = task_target_value(task, mol)
            if value is not None:
                reference["value"] = value
            ref_fh.write(json.dumps(reference) + "\n")

    report = evaluate_corpus(
        predictions_path,
        references_path,
        load_gazetteer(config),
        EvalOptions(judge=judge),
    )
    report.config.update(
        {
            "task": task,
            "modalities": sorted(modalities),
            "checkpoint": str(checkpoint_path),
            "seed": config.seed,
        }
    )
    json_path = out_dir / "report.json"
    json_path.write_text(report.to_json(), encoding="utf-8")
    text_path = out_dir / "report.txt"
    text_path.write_text(report.to_text(), encoding="utf-8")
    fig_path = out_dir / "report.png"
    bars = {k: v for k, v in report.aggregates.items() if v is not None}
    bars["corpus_bleu"] = report.corpus_bleu
    save_metric_bars(bars, fig_path, title=f"{task} / modalities {'+'.join(sorted(modalities))}")
    return {
        "report_json": str(json_path),
        "report_text": str(text_path),
        "figure": str(fig_path),
        "predictions": str(predictions_path),
        "references": str(references_path),
    }


# -- ablation ---------------------------------------------------------------------------


def ablation_variant_config(config: RunConfig, component: str) -> RunConfig:
    variant = config_from_dict(config.to_dict())
    if component == "co_attention":
        variant.use_relation_bias = False
    elif component == "modality_embedding":
        variant.use_modality_embeddings = False
    elif component == "modality_dropout":
        variant.p_drop = 0.0
    else:
        raise ConfigError(f"unknown component {component!r}; expected one of {ABLATION_COMPONENTS}")
    return variant


def masked_validation_losses(model: PipelineModel, val_mols: list[Molecule]) -> dict[str, float]:
    losses = {}
    for label, subset in VALIDATION_MASKS:
        mask = None if subset is None else ModalityMask(subset)
        losses[f"val_loss_{label}"] = validation_loss(model, val_mols, task="caption", mask=mask)
    losses["robust_val_loss"] = float(np.mean([losses[f"val_loss_{label}"] for label, _ in VALIDATION_MASKS]))
    return losses


def run_ablate(config: RunConfig, components: list[str]) -> dict[str, str]:
    for component in components:
        if component not in ABLATION_COMPONENTS:
            raise ConfigError(f"unknown component {component!r}; expected one of {ABLATION_COMPONENTS}")
    train_mols, val_mols = load_corpora(config)
    variants = {"full": config}
    for component in components:
        variants[f"no_{component}"] = ablation_variant_config(config, component)

    rows = {}
    for name, variant in variants.items():
        model = prepared_model(variant, train_mols, val_mols)
        result = train_stage1(model, train_mols, variant.train_settings(stage=1))
        rows[name] = {
            "config": variant.to_dict(),
            "train_last_loss": result.last_loss,
            **masked_validation_losses(model, val_mols),
        }
        log.info("ablation variant %s: robust val loss %.4f", name, rows[name]["robust_val_loss"])

    out_dir = Path(config.report_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "ablation.json"
    json_path.write_text(json.dumps({"variants": rows}, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    text_path = out_dir / "ablation.txt"
    labels = [label for label, _ in VALIDATION_MASKS]
    header = f"{'variant':<24} " + " ".join(f"{('val_' + label):>10}" for label in labels) + f" {'robust':>10}"
    lines = [header, "-" * len(header)]
    for name, row in rows.items():
        lines.append(
            f"{name:<24} "
            + " ".join(f"{row[f'val_loss_{label}']:>10.4f}" for label in labels)
            + f" {row['robust_val_loss']:>10.4f}"
        )
    text_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    fig_path = out_dir / "ablation.png"
    save_grouped_bars(
        labels + ["robust"],
        {
            name: [row[f"val_loss_{label}"] for label in labels] + [row["robust_val_loss"]]
            for name, row in rows.items()
        },
        fig_path,
        title="ablation: caption validation loss by inference modalities",
        ylabel="loss",
    )
    return {"report_json": str(json_path), "report_text": str(text_path), "figure": str(fig_path)}


# -- gradcheck -----------------------------------------------------------------------------


def gradcheck_molecule() -> Molecule:
    """Fixed 4-atom molecule used by every gradient check."""
    coords = np.array(
        [
            [0.0, 0.0, 0.0],
            [1.0, 0.1, -0.1],
            [1.6, 1.0, 0.4],
            [-0.4, 0.9, 0.8],
        ]
    )
    mol = Molecule(
        id="gradcheck-0",
        selfies="[C][C][O][N]",
        atoms=["C", "C", "O", "N"],
        bonds=[(0, 1, 1.0), (1, 2, 1.0), (0, 3, 1.0)],
        coords=coords,
        caption="a molecule with 2 carbon atoms , 1 oxygen atom and 1 nitrogen atom .",
    )
    return mol.validate()


MODULE_PREFIXES = {
    "coproj": ("projector.",),
    "lmstub": ("lm.",),
    "encoders": ("embed_1d.", "encoder_2d.", "encoder_3d."),
    "all": ("",),
}


def run_gradcheck(config: RunConfig, module: str = "all", step: float = 1e-3):
    """Finite-difference check of the selected subgraph on the fixed molecule.

    Returns (passed, reports, coverage) where coverage = (checked, trainable).
    """
    if module not in MODULE_PREFIXES:
        raise ConfigError(f"unknown module {module!r}; expected one of {sorted(MODULE_PREFIXES)}")
    mol = gradcheck_molecule()
    model = build_model(config.seed, config.model_dims(), [mol])
    from ..lmstub.training import encode_example

    instruction_ids, response_ids = encode_example(model, "caption", mol)

    def loss_fn():
        return model.loss(mol, instruction_ids, response_ids)

    named = model.named_parameters()
    prefixes = MODULE_PREFIXES[module]
    selected = [p for name, p in named if any(name.startswith(pre) for pre in prefixes)]
    reports = gradcheck(loss_fn, selected, step=step)
    passed = all(r.max_rel_err <= GRADCHECK_TOLERANCE for r in reports)
    return passed, reports, (len(selected), len(named))
