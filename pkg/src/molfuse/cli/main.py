"""molfuse command-line interface.

Subcommands: synth, ingest, train, eval, ablate, gradcheck.
Exit codes: 0 success, 1 usage/config error, 2 validation error,
3 gradient-check failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import runners
from .checkpoint import CheckpointError
from .config import ConfigError, RunConfig, load_config
from ..evalkit import JudgeConfig
from ..molio import SelfiesParseError, ValidationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_GRADCHECK = 3


def _add_config_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="run config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")


def _load(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    return config.validate()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="molfuse", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic molecule corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--max-atoms", type=int, default=8)
    p.add_argument("--output", required=True)

    p = sub.add_parser("ingest", help="validate and normalize a JSONL corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--skip-invalid", action="store_true")
    p.add_argument("--xyz", default=None, help="merge coordinates from an XYZ file by record id")

    p = sub.add_parser("train", help="run a training stage")
    _add_config_arg(p)
    p.add_argument("--stage", type=int, choices=(1, 2), required=True)
    p.add_argument("--from", dest="from_checkpoint", default=None, help="stage-1 checkpoint (stage 2)")

    p = sub.add_parser("eval", help="generate predictions and score them")
    _add_config_arg(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--task", choices=("caption", "qa", "count"), required=True)
    p.add_argument("--modalities", default=None, help="comma list, e.g. 1d,2d")
    p.add_argument("--judge-endpoint", default=None)
    p.add_argument("--stub-judge", action="store_true", help="offline deterministic judge")

    p = sub.add_parser("ablate", help="train and compare component-ablated variants")
    _add_config_arg(p)
    p.add_argument(
        "--components",
        default=",".join(runners.ABLATION_COMPONENTS),
        help="comma list of components to ablate",
    )

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    _add_config_arg(p)
    p.add_argument("--module", choices=("coproj", "lmstub", "encoders", "all"), default="all")

    return parser


def _cmd_synth(args) -> int:
    count = runners.run_synth(args.seed, args.count, args.max_atoms, args.output)
    print(f"wrote {count} molecules to {args.output}")
    return EXIT_OK


def _cmd_ingest(args) -> int:
    count, errors = runners.run_ingest(
        args.input, args.output, skip_invalid=args.skip_invalid, xyz_path=args.xyz
    )
    for message in errors:
        print(f"rejected: {message}", file=sys.stderr)
    print(f"ingested {count} records ({len(errors)} rejected) -> {args.output}")
    return EXIT_OK


def _cmd_train(args) -> int:
    config = _load(args)
    paths = runners.run_train(config, stage=args.stage, from_checkpoint=args.from_checkpoint)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    config = _load(args)
    modalities = None
    if args.modalities is not None:
        modalities = frozenset(m.strip() for m in args.modalities.split(",") if m.strip())
        if not modalities:
            raise ConfigError("--modalities must name at least one modality")
    judge = None
    if args.stub_judge:
        judge = JudgeConfig(stub=True)
    elif args.judge_endpoint:
        judge = JudgeConfig(endpoint=args.judge_endpoint, stub=False)
    paths = runners.run_eval(
        config, args.checkpoint, task=args.task, modalities=modalities, judge=judge
    )
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def _cmd_ablate(args) -> int:
    config = _load(args)
    components = [c.strip() for c in args.components.split(",") if c.strip()]
    paths = runners.run_ablate(config, components)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    config = _load(args)
    passed, reports, (checked, total) = runners.run_gradcheck(config, module=args.module)
    worst = max(reports, key=lambda r: r.max_rel_err)
    print(f"checked {checked}/{total} parameter tensors (module={args.module})")
    print(f"worst: {worst}")
    print("PASS" if passed else "FAIL")
    return EXIT_OK if passed else EXIT_GRADCHECK


_COMMANDS = {
    "synth": _cmd_synth,
    "ingest": _cmd_ingest,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "ablate": _cmd_ablate,
    "gradcheck": _cmd_gradcheck,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, CheckpointError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, SelfiesParseError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
