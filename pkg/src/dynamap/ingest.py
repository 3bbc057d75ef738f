"""Epoch-level prediction logs: one JSON object per line.

The line format is the toolkit's external contract for prediction
records, shared with any exporter that wraps a real training loop:

    {"guid": "17", "epoch": 0, "probs": [0.2, 0.5, 0.3], "gold": "contradiction"}

``probs`` is ordered entailment, contradiction, neutral. Unknown extra
fields are ignored. Probabilities are renormalized on ingest (text
round trips drift) and ``predicted`` is always recomputed here, so one
argmax and tie rule holds no matter who produced the log.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

from .dataset import LABEL_NAMES, parse_label
from .errors import DataError, ParseError
from .trainer import EpochRecord, argmax_label

#: Looser than the in-memory record invariant (1e-6): external floats
#: have survived a text round trip, possibly through other languages.
SUM_TOLERANCE = 1e-4


@dataclass
class IngestSummary:
    lines: int
    guids: int
    epoch_min: int | None
    epoch_max: int | None


def record_to_line(record: EpochRecord) -> str:
    """Serialize one record; float repr keeps the exact values."""
    return json.dumps(
        {
            "guid": record.guid,
            "epoch": record.epoch,
            "probs": list(record.probs),
            "gold": record.gold.value,
        },
        ensure_ascii=False,
    )


def write_log(records: Iterable[EpochRecord], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record_to_line(record) + "\n")
            count += 1
    return count


def _parse_line(raw: str, line_no: int) -> EpochRecord:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc.msg}", line=line_no) from None
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", line=line_no)

    for key in ("guid", "epoch", "probs", "gold"):
        if key not in obj:
            raise ParseError(f"missing field {key!r}", line=line_no)

    guid = obj["guid"]
    if not isinstance(guid, str) or not guid:
        raise ParseError("guid must be a non-empty string", line=line_no)
    epoch = obj["epoch"]
    if not isinstance(epoch, int) or isinstance(epoch, bool) or epoch < 0:
        raise ParseError("epoch must be a nonnegative integer", line=line_no)
    probs = obj["probs"]
    if not isinstance(probs, list) or len(probs) != 3 or not all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in probs
    ):
        raise ParseError("probs must be an array of 3 numbers", line=line_no)
    probs = [float(p) for p in probs]
    for p in probs:
        if not math.isfinite(p) or not 0.0 <= p <= 1.0:
            raise ParseError(
                f"guid {guid!r}, epoch {epoch}: probability {p!r} outside [0, 1]",
                line=line_no,
            )
    total = probs[0] + probs[1] + probs[2]
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise ParseError(
            f"guid {guid!r}, epoch {epoch}: probabilities sum to {total!r}, "
            f"outside 1 +/- {SUM_TOLERANCE}",
            line=line_no,
        )
    try:
        gold = parse_label(obj["gold"]) if isinstance(obj["gold"], str) else None
    except ValueError:
        gold = None
    if gold is None:
        raise ParseError(
            f"gold must be one of {', '.join(LABEL_NAMES)}, got {obj['gold']!r}",
            line=line_no,
        )

    normalized = (probs[0] / total, probs[1] / total, probs[2] / total)
    return EpochRecord(
        guid=guid,
        epoch=epoch,
        probs=normalized,
        predicted=argmax_label(normalized),
        gold=gold,
    )


def ingest(data: bytes | str | IO[bytes]) -> tuple[list[EpochRecord], IngestSummary]:
    """Parse a prediction log; blank lines are allowed and skipped."""
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"log is not valid UTF-8: {exc}") from None

    records: list[EpochRecord] = []
    for line_no, raw in enumerate(data.split("\n"), start=1):
        raw = raw.strip()
        if not raw:
            continue
        records.append(_parse_line(raw, line_no))

    guids = {record.guid for record in records}
    epochs = [record.epoch for record in records]
    summary = IngestSummary(
        lines=len(records),
        guids=len(guids),
        epoch_min=min(epochs) if epochs else None,
        epoch_max=max(epochs) if epochs else None,
    )
    return records, summary


def load_log(path: str | Path) -> tuple[list[EpochRecord], IngestSummary]:
    return ingest(Path(path).read_bytes())


def validate_completeness(records: Sequence[EpochRecord], max_report: int = 20) -> int:
    """Check that every guid covers epochs 0..E-1 exactly once with one
    gold label, where E is the highest epoch seen plus one. Returns E;
    raises with an itemized report (first ``max_report`` offenders)."""
    if not records:
        raise DataError("no records to validate")
    by_guid: dict[str, dict[int, list[EpochRecord]]] = {}
    max_epoch = -1
    for record in records:
        by_guid.setdefault(record.guid, {}).setdefault(record.epoch, []).append(record)
        max_epoch = max(max_epoch, record.epoch)
    epochs = max_epoch + 1

    problems: list[str] = []
    for guid in sorted(by_guid):
        slots = by_guid[guid]
        for epoch in range(epochs):
            hits = slots.get(epoch, [])
            if not hits:
                problems.append(f"({guid!r}, {epoch}): missing")
            elif len(hits) > 1:
                problems.append(f"({guid!r}, {epoch}): {len(hits)} duplicate records")
        golds = {record.gold for slot in slots.values() for record in slot}
        if len(golds) > 1:
            names = sorted(g.value for g in golds)
            problems.append(f"({guid!r}): inconsistent gold labels {names}")
        if len(problems) >= max_report:
            break

    if problems:
        listed = "; ".join(problems[:max_report])
        raise DataError(f"incomplete record set ({len(problems)}+ issues): {listed}")
    return epochs
