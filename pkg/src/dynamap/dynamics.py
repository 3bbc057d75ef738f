"""Per-sample training dynamics from epoch-level prediction records.

For each sample, the gold-label probability series across epochs is
reduced to three numbers:

    confidence   arithmetic mean of the series
    variability  population standard deviation (divide by E, not E-1:
                 the E epochs are the whole population, and E is small)
    correctness  fraction of epochs where the predicted label was gold

Sums run left to right in epoch order, then a second pass for the
squared deviations, so results are bit-stable and easy to reproduce by
hand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .dataset import LABEL_INDEX
from .errors import DataError, ParseError
from .trainer import EpochRecord


@dataclass(frozen=True)
class TrainingDynamics:
    guid: str
    confidence: float
    variability: float
    correctness: float
    epochs: int

    def __post_init__(self):
        if self.epochs < 1:
            raise DataError(f"guid {self.guid!r}: epochs must be >= 1")
        if not 0.0 <= self.confidence <= 1.0:
            raise DataError(f"guid {self.guid!r}: confidence {self.confidence!r} outside [0, 1]")
        if not 0.0 <= self.variability <= 0.5:
            raise DataError(f"guid {self.guid!r}: variability {self.variability!r} outside [0, 0.5]")
        if not 0.0 <= self.correctness <= 1.0:
            raise DataError(f"guid {self.guid!r}: correctness {self.correctness!r} outside [0, 1]")


def group_records(records: Iterable[EpochRecord]) -> tuple[dict[str, list[EpochRecord]], int]:
    """Group records per guid, sorted by epoch, after checking that every
    guid has exactly one record per epoch 0..E-1 with a consistent gold
    label. Returns the groups and E."""
    by_guid: dict[str, dict[int, EpochRecord]] = {}
    max_epoch = -1
    for record in records:
        slots = by_guid.setdefault(record.guid, {})
        if record.epoch in slots:
            raise DataError(f"guid {record.guid!r}: duplicate record for epoch {record.epoch}")
        slots[record.epoch] = record
        max_epoch = max(max_epoch, record.epoch)
    if not by_guid:
        raise DataError("no records to compute dynamics from")

    epochs = max_epoch + 1
    grouped: dict[str, list[EpochRecord]] = {}
    for guid, slots in by_guid.items():
        missing = [e for e in range(epochs) if e not in slots]
        if missing:
            raise DataError(f"guid {guid!r}: missing epochs {missing}")
        series = [slots[e] for e in range(epochs)]
        golds = {record.gold for record in series}
        if len(golds) > 1:
            names = sorted(g.value for g in golds)
            raise DataError(f"guid {guid!r}: inconsistent gold labels {names}")
        grouped[guid] = series
    return grouped, epochs


def dynamics_from_series(guid: str, gold_probs: Sequence[float], correct: int) -> TrainingDynamics:
    """Reduce one gold-probability series; exposed for reference checks."""
    count = len(gold_probs)
    total = 0.0
    for p in gold_probs:
        total += p
    mean = total / count
    squares = 0.0
    for p in gold_probs:
        d = p - mean
        squares += d * d
    std = math.sqrt(squares / count)
    return TrainingDynamics(
        guid=guid,
        confidence=min(mean, 1.0),
        variability=min(std, 0.5),
        correctness=correct / count,
        epochs=count,
    )


def compute_dynamics(records: Iterable[EpochRecord]) -> list[TrainingDynamics]:
    """One TrainingDynamics per guid, sorted by guid."""
    grouped, _ = group_records(records)
    out = []
    for guid in sorted(grouped):
        series = grouped[guid]
        gold_idx = LABEL_INDEX[series[0].gold]
        gold_probs = [record.probs[gold_idx] for record in series]
        correct = sum(1 for record in series if record.predicted is record.gold)
        out.append(dynamics_from_series(guid, gold_probs, correct))
    return out


DYNAMICS_HEADER = ("guid", "confidence", "variability", "correctness", "epochs")


def _real(value: float) -> str:
    return format(value, ".17g")


def write_dynamics_tsv(dynamics: Sequence[TrainingDynamics]) -> bytes:
    """Dynamics as TSV; reals carry 17 significant digits so the exact
    float64 value survives the text round trip."""
    lines = ["\t".join(DYNAMICS_HEADER)]
    for d in dynamics:
        lines.append("\t".join((
            d.guid, _real(d.confidence), _real(d.variability),
            _real(d.correctness), str(d.epochs),
        )))
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_dynamics_tsv(data: bytes | str) -> list[TrainingDynamics]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty dynamics file")
    header = tuple(lines[0].rstrip("\r").split("\t"))
    if header != DYNAMICS_HEADER:
        raise ParseError(f"bad dynamics header {header!r}")
    out = []
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.rstrip("\r").split("\t")
        if len(fields) != 5:
            raise ParseError("expected 5 fields", line=line_no)
        try:
            out.append(TrainingDynamics(
                guid=fields[0],
                confidence=float(fields[1]),
                variability=float(fields[2]),
                correctness=float(fields[3]),
                epochs=int(fields[4]),
            ))
        except (ValueError, DataError) as exc:
            raise ParseError(str(exc), line=line_no) from None
    return out


def save_dynamics(dynamics: Sequence[TrainingDynamics], path: str | Path) -> None:
    Path(path).write_bytes(write_dynamics_tsv(dynamics))


def load_dynamics(path: str | Path) -> list[TrainingDynamics]:
    return read_dynamics_tsv(Path(path).read_bytes())
