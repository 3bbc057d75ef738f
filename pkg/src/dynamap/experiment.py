"""End-to-end experiment: preliminary run, dynamics, nine subsets,
retraining, and a results table comparing subset quality.

Artifact tree under the configured output directory:

    preliminary/epoch_log.jsonl   per-sample records, all epochs
    preliminary/model.ckpt        preliminary model checkpoint
    dynamics.tsv                  per-sample training dynamics
    datamap.svg                   the data map for the preliminary run
    subsets/<name>/train.tsv      each recipe's materialized split
    subsets/<name>/manifest.tsv   which component claimed each guid
    results.tsv, results.md       the accuracy table

While a run is in flight an INCOMPLETE file naming the current stage
sits in the output directory; it is removed on success, so its
presence marks the tree as partial.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .dataset import DatasetSplit, read_split, save_split, subsample
from .dynamics import TrainingDynamics, compute_dynamics, save_dynamics
from .errors import ConfigError, DataError, DynamapError
from .ingest import write_log
from .render import render_map
from .seeding import SplitMix64, derive_seed
from .subsets import Category, materialize, nine_recipes, rank, save_manifest, select
from .trainer import (
    EpochRecord,
    TrainConfig,
    evaluate,
    featurize_split,
    save_checkpoint,
    train,
)

INCOMPLETE_MARKER = "INCOMPLETE"
PRELIMINARY_ROW = "preliminary"


@dataclass(frozen=True)
class ExperimentConfig:
    train_path: Path
    dev_path: Path
    test_path: Path
    out_dir: Path
    trainer: TrainConfig = TrainConfig()
    subset_seed: int = 0
    desk_scale_cap: int | None = None  # seeded uniform subsample of train

    def __post_init__(self):
        paths = [Path(self.train_path), Path(self.dev_path), Path(self.test_path)]
        if len({str(p) for p in paths}) != 3:
            raise ConfigError("train, dev, and test paths must be distinct")
        if self.desk_scale_cap is not None and self.desk_scale_cap < 1:
            raise ConfigError("desk_scale_cap must be >= 1 when set")


@dataclass(frozen=True)
class ResultsRow:
    subset_name: str
    train_size: int
    id_accuracy: float
    dev_accuracy: float
    test_accuracy: float

    def __post_init__(self):
        for value in (self.id_accuracy, self.dev_accuracy, self.test_accuracy):
            if not 0.0 <= value <= 1.0:
                raise DataError(f"accuracy {value!r} outside [0, 1]")


@dataclass
class ResultsTable:
    rows: list[ResultsRow] = field(default_factory=list)


class StageError(DynamapError):
    """A pipeline stage failed; the stage name leads the message."""

    def __init__(self, stage: str, original: Exception):
        super().__init__(f"stage {stage!r}: {original}")
        self.stage = stage
        self.original = original


def _discard(_record: EpochRecord) -> None:
    pass


def run_experiment(config: ExperimentConfig) -> ResultsTable:
    """Run the whole pipeline; everything on disk afterwards is a pure
    function of the config."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / INCOMPLETE_MARKER
    stage = "load"
    try:
        marker.write_text(stage + "\n", encoding="utf-8")
        train_split = read_split(config.train_path, kind="train").split
        dev_split = read_split(config.dev_path, kind="dev").split
        test_split = read_split(config.test_path, kind="test").split
        _check_hygiene(train_split, dev_split, test_split)

        stage = "cap"
        marker.write_text(stage + "\n", encoding="utf-8")
        if config.desk_scale_cap is not None:
            cap = config.desk_scale_cap
            if cap > len(train_split):
                raise ConfigError(
                    f"desk_scale_cap {cap} exceeds train split size {len(train_split)}"
                )
            rng = SplitMix64(derive_seed(config.subset_seed, "desk-cap"))
            train_split = subsample(train_split, rng.sample_indices(len(train_split), cap))

        stage = "preliminary"
        marker.write_text(stage + "\n", encoding="utf-8")
        cfg = config.trainer
        feats_train = featurize_split(train_split, cfg.hash_dim, cfg.cross_cap)
        records: list[EpochRecord] = []
        preliminary = train(train_split, cfg, records.append, features=feats_train)
        prelim_dir = out / "preliminary"
        prelim_dir.mkdir(exist_ok=True)
        write_log(records, prelim_dir / "epoch_log.jsonl")
        save_checkpoint(preliminary, prelim_dir / "model.ckpt")

        stage = "dynamics"
        marker.write_text(stage + "\n", encoding="utf-8")
        dynamics = compute_dynamics(records)
        save_dynamics(dynamics, out / "dynamics.tsv")

        stage = "map"
        marker.write_text(stage + "\n", encoding="utf-8")
        (out / "datamap.svg").write_bytes(render_map(dynamics))

        stage = "subsets"
        marker.write_text(stage + "\n", encoding="utf-8")
        subset_splits: list[tuple[str, DatasetSplit]] = []
        for spec in nine_recipes(config.subset_seed):
            selection = select(spec, dynamics)
            split = materialize(selection, train_split, order_seed=spec.shuffle_seed)
            subset_dir = out / "subsets" / spec.name
            subset_dir.mkdir(parents=True, exist_ok=True)
            save_manifest(selection, subset_dir / "manifest.tsv")
            save_split(split, subset_dir / "train.tsv")
            subset_splits.append((spec.name, split))

        stage = "retrain"
        marker.write_text(stage + "\n", encoding="utf-8")
        row_index = {guid: i for i, guid in enumerate(train_split.guids())}
        x_train, y_train = feats_train
        subset_models = []
        for name, split in subset_splits:
            rows = [row_index[guid] for guid in split.guids()]
            sub_feats = (x_train[rows], y_train[rows])
            sub_cfg = replace(cfg, seed=derive_seed(cfg.seed, f"subset:{name}"))
            model = train(split, sub_cfg, _discard, features=sub_feats)
            subset_models.append((name, split, sub_feats, model))

        stage = "evaluate"
        marker.write_text(stage + "\n", encoding="utf-8")
        feats_dev = featurize_split(dev_split, cfg.hash_dim, cfg.cross_cap)
        feats_test = featurize_split(test_split, cfg.hash_dim, cfg.cross_cap)
        table = ResultsTable()
        table.rows.append(ResultsRow(
            subset_name=PRELIMINARY_ROW,
            train_size=len(train_split),
            id_accuracy=evaluate(preliminary, train_split, feats_train),
            dev_accuracy=evaluate(preliminary, dev_split, feats_dev),
            test_accuracy=evaluate(preliminary, test_split, feats_test),
        ))
        for name, split, sub_feats, model in subset_models:
            table.rows.append(ResultsRow(
                subset_name=name,
                train_size=len(split),
                id_accuracy=evaluate(model, split, sub_feats),
                dev_accuracy=evaluate(model, dev_split, feats_dev),
                test_accuracy=evaluate(model, test_split, feats_test),
            ))

        stage = "report"
        marker.write_text(stage + "\n", encoding="utf-8")
        (out / "results.tsv").write_bytes(emit_table(table, "tsv"))
        (out / "results.md").write_bytes(emit_table(table, "markdown"))
    except (DynamapError, OSError) as exc:
        raise StageError(stage, exc) from exc
    except Exception as exc:
        raise RuntimeError(f"stage {stage!r}: {exc}") from exc

    marker.unlink()
    return table


def _check_hygiene(train: DatasetSplit, dev: DatasetSplit, test: DatasetSplit) -> None:
    """Held-out samples must never be trainable; guid overlap is the
    observable symptom."""
    train_guids = set(train.guids())
    for other in (dev, test):
        overlap = train_guids & set(other.guids())
        if overlap:
            shown = ", ".join(repr(g) for g in sorted(overlap)[:5])
            raise DataError(
                f"train and {other.kind} splits share {len(overlap)} guids ({shown}); "
                "evaluation data must be disjoint from training data"
            )


@dataclass(frozen=True)
class InspectEntry:
    guid: str
    sentence1: str
    sentence2: str
    gold_label: str
    confidence: float
    variability: float
    correctness: float


def inspect_hard(
    dynamics: Sequence[TrainingDynamics],
    train: DatasetSplit,
    k: int,
) -> list[InspectEntry]:
    """The k lowest-confidence samples, for manual label triage."""
    if not 1 <= k <= len(train.samples):
        raise DataError(f"k must be in [1, {len(train.samples)}], got {k}")
    by_guid = train.by_guid()
    metrics = {d.guid: d for d in dynamics}
    entries = []
    for guid in rank(dynamics, Category.HARD_TO_LEARN)[:k]:
        if guid not in by_guid:
            raise DataError(f"dynamics guid {guid!r} not present in train split")
        sample, d = by_guid[guid], metrics[guid]
        entries.append(InspectEntry(
            guid=guid,
            sentence1=sample.sentence1,
            sentence2=sample.sentence2,
            gold_label=sample.gold_label.value,
            confidence=d.confidence,
            variability=d.variability,
            correctness=d.correctness,
        ))
    return entries


RESULTS_COLUMNS = ("subset", "train_size", "id_accuracy", "dev_accuracy", "test_accuracy")


def _acc(value: float) -> str:
    # 4 decimal places; Python's float formatting rounds half to even.
    return format(value, ".4f")


def emit_table(table: ResultsTable, format: str = "tsv") -> bytes:
    """Render the results table; accuracies at 4 decimal places."""
    if format == "tsv":
        lines = ["\t".join(RESULTS_COLUMNS)]
        for row in table.rows:
            lines.append("\t".join((
                row.subset_name, str(row.train_size), _acc(row.id_accuracy),
                _acc(row.dev_accuracy), _acc(row.test_accuracy),
            )))
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format == "markdown":
        lines = [
            "| Subset | Train size | ID accuracy | Dev accuracy (OOD) | Test accuracy (OOD) |",
            "| --- | ---: | ---: | ---: | ---: |",
        ]
        for row in table.rows:
            lines.append(
                f"| {row.subset_name} | {row.train_size} | {_acc(row.id_accuracy)} "
                f"| {_acc(row.dev_accuracy)} | {_acc(row.test_accuracy)} |"
            )
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ConfigError(f"unknown table format {format!r} (expected tsv or markdown)")


_CONFIG_KEYS = {
    "train", "dev", "test", "out", "subset_seed", "cap", "epochs",
    "learning_rate", "l2", "batch_size", "hash_dim", "seed",
    "shuffle_each_epoch", "cross_cap",
}


def _parse_bool(value: str, key: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def parse_config_file(path: str | Path) -> ExperimentConfig:
    """Read a `key = value` experiment config.

    Lines starting with '#' and blank lines are ignored. Relative paths
    resolve against the config file's directory. Keys: train, dev,
    test, out (required); seed, epochs, learning_rate, l2, batch_size,
    hash_dim, cross_cap, shuffle_each_epoch (trainer knobs);
    subset_seed, cap (harness knobs).
    """
    path = Path(path)
    values: dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{line_no}: duplicate key {key!r}")
        values[key] = value

    for required in ("train", "dev", "test", "out"):
        if required not in values:
            raise ConfigError(f"{path}: missing required key {required!r}")

    base = path.parent

    def as_path(key: str) -> Path:
        p = Path(values[key])
        return p if p.is_absolute() else base / p

    def as_int(key: str, default: int) -> int:
        if key not in values:
            return default
        try:
            return int(values[key])
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {values[key]!r}") from None

    def as_float(key: str, default: float) -> float:
        if key not in values:
            return default
        try:
            return float(values[key])
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {values[key]!r}") from None

    defaults = TrainConfig()
    trainer = TrainConfig(
        epochs=as_int("epochs", defaults.epochs),
        learning_rate=as_float("learning_rate", defaults.learning_rate),
        l2=as_float("l2", defaults.l2),
        batch_size=as_int("batch_size", defaults.batch_size),
        hash_dim=as_int("hash_dim", defaults.hash_dim),
        seed=as_int("seed", defaults.seed),
        shuffle_each_epoch=(
            _parse_bool(values["shuffle_each_epoch"], "shuffle_each_epoch")
            if "shuffle_each_epoch" in values else defaults.shuffle_each_epoch
        ),
        cross_cap=as_int("cross_cap", defaults.cross_cap),
    )
    return ExperimentConfig(
        train_path=as_path("train"),
        dev_path=as_path("dev"),
        test_path=as_path("test"),
        out_dir=as_path("out"),
        trainer=trainer,
        subset_seed=as_int("subset_seed", 0),
        desk_scale_cap=as_int("cap", -1) if "cap" in values else None,
    )
