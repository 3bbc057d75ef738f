"""Training-dynamics toolkit CLI: train, ingest, analyze, filter, retrain.

Exit codes: 0 success, 1 usage error, 2 data/validation error,
3 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataset import read_split, save_split, subsample
from .dynamics import compute_dynamics, load_dynamics, save_dynamics
from .errors import ConfigError, DynamapError
from .experiment import emit_table, inspect_hard, parse_config_file, run_experiment
from .ingest import load_log, validate_completeness, write_log
from .render import MapStyle, render_map
from .seeding import SplitMix64, derive_seed
from .subsets import (
    RECIPE_NAMES,
    make_spec,
    materialize,
    recipe_by_name,
    save_manifest,
    select,
)
from .trainer import EpochRecord, TrainConfig, evaluate, save_checkpoint, train

USAGE_ERROR = 1
DATA_ERROR = 2
INTERNAL_ERROR = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; our contract reserves 2 for
    data errors, so remap usage problems to exit code 1."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="dynamap", description=__doc__.strip().splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("train", parents=[], help="preliminary run plus epoch log")
    p.add_argument("--train", required=True, help="train split TSV")
    p.add_argument("--epochs", type=int, default=TrainConfig().epochs)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--cap", type=int, default=None, help="seeded uniform train subsample")

    p = commands.add_parser("dynamics", help="epoch log to dynamics TSV")
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True)

    p = commands.add_parser("map", help="dynamics TSV to data-map SVG")
    p.add_argument("--dynamics", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=MapStyle().width_px)
    p.add_argument("--height", type=int, default=MapStyle().height_px)

    p = commands.add_parser("filter", help="build one subset from dynamics")
    p.add_argument("--dynamics", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--recipe", required=True,
                   help=f"one of {', '.join(RECIPE_NAMES)}, or 'custom'")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spec", default=None, help="recipe file, required with --recipe custom")

    p = commands.add_parser("experiment", help="full pipeline from a config file")
    p.add_argument("--config", required=True)

    p = commands.add_parser("inspect", help="lowest-confidence samples for triage")
    p.add_argument("--dynamics", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("-k", type=int, required=True)

    p = commands.add_parser("ingest", help="parse and summarize an epoch log")
    p.add_argument("--log", required=True)
    p.add_argument("--validate", action="store_true",
                   help="also require one record per guid per epoch")

    return parser


def _cmd_train(args) -> int:
    result = read_split(args.train, kind="train")
    split = result.split
    if args.cap is not None:
        if not 1 <= args.cap <= len(split):
            raise ConfigError(f"--cap must be in [1, {len(split)}]")
        rng = SplitMix64(derive_seed(args.seed, "desk-cap"))
        split = subsample(split, rng.sample_indices(len(split), args.cap))
    config = TrainConfig(epochs=args.epochs, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    records: list[EpochRecord] = []
    model = train(split, config, records.append)
    write_log(records, out / "epoch_log.jsonl")
    save_checkpoint(model, out / "model.ckpt")
    accuracy = evaluate(model, split)
    print(f"trained on {len(split)} samples ({result.skipped} rows skipped), "
          f"{config.epochs} epochs")
    print(f"final train accuracy: {accuracy:.4f}")
    print(f"epoch log: {out / 'epoch_log.jsonl'}")
    print(f"checkpoint: {out / 'model.ckpt'}")
    return 0


def _cmd_dynamics(args) -> int:
    records, summary = load_log(args.log)
    epochs = validate_completeness(records)
    dynamics = compute_dynamics(records)
    save_dynamics(dynamics, args.out)
    print(f"{summary.lines} records, {summary.guids} samples, {epochs} epochs")
    print(f"dynamics: {args.out}")
    return 0


def _cmd_map(args) -> int:
    dynamics = load_dynamics(args.dynamics)
    style = MapStyle(width_px=args.width, height_px=args.height)
    Path(args.out).write_bytes(render_map(dynamics, style))
    print(f"map: {args.out} ({len(dynamics)} points)")
    return 0


def _cmd_filter(args) -> int:
    if args.recipe == "custom" and not args.spec:
        raise _UsageError("--recipe custom requires --spec FILE")
    dynamics = load_dynamics(args.dynamics)
    split = read_split(args.train, kind="train").split
    if args.recipe == "custom":
        spec = _parse_spec_file(args.spec, default_seed=args.seed)
    else:
        spec = recipe_by_name(args.recipe, args.seed)
    selection = select(spec, dynamics)
    subset = materialize(selection, split, order_seed=spec.shuffle_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_manifest(selection, out / "manifest.tsv")
    save_split(subset, out / "train.tsv")
    print(f"recipe {spec.name}: {len(subset)} of {len(split)} samples")
    print(f"subset: {out / 'train.tsv'}")
    print(f"manifest: {out / 'manifest.tsv'}")
    return 0


def _parse_spec_file(path: str, default_seed: int | None):
    """Recipe file: `name = ...`, one `component = CATEGORY FRACTION`
    line per component (fractions like 1/3 or 0.25), and an optional
    `shuffle_seed = N` overriding the --seed flag."""
    name = None
    components: list[tuple[str, str]] = []
    shuffle_seed = default_seed
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "name":
            name = value
        elif key == "component":
            parts = value.split()
            if len(parts) != 2:
                raise ConfigError(f"{path}:{line_no}: expected 'component = CATEGORY FRACTION'")
            components.append((parts[0], parts[1]))
        elif key == "shuffle_seed":
            shuffle_seed = int(value)
        else:
            raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
    if not name:
        raise ConfigError(f"{path}: missing 'name'")
    if not components:
        raise ConfigError(f"{path}: no components")
    try:
        return make_spec(name, components, shuffle_seed=shuffle_seed)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _cmd_experiment(args) -> int:
    config = parse_config_file(args.config)
    table = run_experiment(config)
    sys.stdout.write(emit_table(table, "tsv").decode("utf-8"))
    print(f"artifacts: {config.out_dir}")
    return 0


def _cmd_inspect(args) -> int:
    dynamics = load_dynamics(args.dynamics)
    split = read_split(args.train, kind="train").split
    entries = inspect_hard(dynamics, split, args.k)
    print("guid\tsentence1\tsentence2\tgold_label\tconfidence\tvariability\tcorrectness")
    for e in entries:
        print(f"{e.guid}\t{e.sentence1}\t{e.sentence2}\t{e.gold_label}"
              f"\t{e.confidence:.6f}\t{e.variability:.6f}\t{e.correctness:.6f}")
    return 0


def _cmd_ingest(args) -> int:
    records, summary = load_log(args.log)
    span = (f"epochs {summary.epoch_min}..{summary.epoch_max}"
            if summary.epoch_min is not None else "no epochs")
    print(f"{summary.lines} records, {summary.guids} distinct guids, {span}")
    if args.validate:
        epochs = validate_completeness(records)
        print(f"complete: one record per guid for each of {epochs} epochs")
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "dynamics": _cmd_dynamics,
    "map": _cmd_map,
    "filter": _cmd_filter,
    "experiment": _cmd_experiment,
    "inspect": _cmd_inspect,
    "ingest": _cmd_ingest,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return USAGE_ERROR
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return USAGE_ERROR
    except DynamapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except Exception as exc:  # noqa: BLE001 - the CLI boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INTERNAL_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
