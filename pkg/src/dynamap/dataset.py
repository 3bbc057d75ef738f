"""GLUE-style TSV datasets in the SNLI schema.

A split is an ordered list of premise/hypothesis pairs, each with a
gold label and a guid that stays stable through every read/write and
join in the pipeline.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO

from .errors import DataError, ParseError, SchemaError, SerializationError


class Label(enum.Enum):
    """The three NLI labels, in fixed order (used for tie-breaking)."""

    ENTAILMENT = "entailment"
    CONTRADICTION = "contradiction"
    NEUTRAL = "neutral"


LABEL_ORDER: tuple[Label, ...] = (Label.ENTAILMENT, Label.CONTRADICTION, Label.NEUTRAL)
LABEL_INDEX: dict[Label, int] = {label: i for i, label in enumerate(LABEL_ORDER)}
LABEL_NAMES: tuple[str, ...] = tuple(label.value for label in LABEL_ORDER)

#: SNLI's marker for rows without annotator consensus; skipped, never trained on.
NO_CONSENSUS = "-"

SPLIT_KINDS = ("train", "dev", "test")


def parse_label(text: str) -> Label:
    for label in LABEL_ORDER:
        if label.value == text:
            return label
    raise ValueError(f"unknown label {text!r} (expected one of {', '.join(LABEL_NAMES)})")


@dataclass(frozen=True)
class Sample:
    """One premise/hypothesis pair with its gold label."""

    guid: str
    sentence1: str
    sentence2: str
    gold_label: Label

    def __post_init__(self):
        if not self.sentence1.strip():
            raise DataError(f"sample {self.guid!r}: sentence1 is empty")
        if not self.sentence2.strip():
            raise DataError(f"sample {self.guid!r}: sentence2 is empty")


@dataclass
class DatasetSplit:
    """An ordered split; order is significant and survives round trips."""

    kind: str
    samples: list[Sample] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in SPLIT_KINDS:
            raise DataError(f"split kind must be one of {SPLIT_KINDS}, got {self.kind!r}")
        seen: set[str] = set()
        for sample in self.samples:
            if sample.guid in seen:
                raise DataError(f"duplicate guid {sample.guid!r} in {self.kind} split")
            seen.add(sample.guid)

    def __len__(self) -> int:
        return len(self.samples)

    def guids(self) -> list[str]:
        return [sample.guid for sample in self.samples]

    def by_guid(self) -> dict[str, Sample]:
        return {sample.guid: sample for sample in self.samples}


@dataclass(frozen=True)
class TsvSchema:
    """Column names for reading a GLUE-style TSV.

    ``guid`` is optional: set it to None, or leave it pointing at a
    column the file does not have, and guids are synthesized as the
    0-based index of each kept row.
    """

    sentence1: str = "sentence1"
    sentence2: str = "sentence2"
    gold_label: str = "gold_label"
    guid: str | None = "pairID"


DEFAULT_SCHEMA = TsvSchema()


@dataclass
class ParseResult:
    split: DatasetSplit
    rows: int  # data rows seen (header excluded)
    skipped: int  # rows dropped for the no-consensus marker


def _decode(data: bytes | str) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from None


def parse_tsv(
    data: bytes | str | IO[bytes],
    schema: TsvSchema = DEFAULT_SCHEMA,
    kind: str = "train",
) -> ParseResult:
    """Parse one TSV split.

    Rows labeled with the no-consensus marker are skipped and counted;
    any other unknown label is an error. With no usable guid column,
    kept rows are numbered "0", "1", ... in order.
    """
    if hasattr(data, "read"):
        data = data.read()
    text = _decode(data)

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty input: no header row")
    lines = [line[:-1] if line.endswith("\r") else line for line in lines]

    header = lines[0].split("\t")
    positions: dict[str, int] = {}
    for idx, name in enumerate(header):
        positions.setdefault(name, idx)

    def column(name: str) -> int:
        if name not in positions:
            raise SchemaError(f"column {name!r} not found in header {header!r}")
        return positions[name]

    col_s1 = column(schema.sentence1)
    col_s2 = column(schema.sentence2)
    col_label = column(schema.gold_label)
    col_guid = None
    if schema.guid is not None and schema.guid in positions:
        col_guid = positions[schema.guid]

    samples: list[Sample] = []
    skipped = 0
    rows = 0
    for line_no, line in enumerate(lines[1:], start=2):
        rows += 1
        fields = line.split("\t")
        if len(fields) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, got {len(fields)}", line=line_no
            )
        raw_label = fields[col_label]
        if raw_label == NO_CONSENSUS:
            skipped += 1
            continue
        try:
            gold = parse_label(raw_label)
        except ValueError as exc:
            raise ParseError(str(exc), line=line_no) from None
        guid = fields[col_guid] if col_guid is not None else str(len(samples))
        try:
            sample = Sample(guid=guid, sentence1=fields[col_s1],
                            sentence2=fields[col_s2], gold_label=gold)
        except DataError as exc:
            raise ParseError(str(exc), line=line_no) from None
        samples.append(sample)

    try:
        split = DatasetSplit(kind=kind, samples=samples)
    except DataError as exc:
        raise ParseError(str(exc)) from None
    return ParseResult(split=split, rows=rows, skipped=skipped)


#: Column order used when writing; reading it back with the default
#: schema reproduces the split exactly, guids included.
_WRITE_COLUMNS = ("sentence1", "sentence2", "gold_label", "pairID")


def write_tsv(split: DatasetSplit) -> bytes:
    """Serialize a split, header first, one row per sample in order.

    GLUE TSV has no quoting convention, so fields containing a tab or a
    newline are rejected rather than silently corrupting the file.
    """
    lines = ["\t".join(_WRITE_COLUMNS)]
    for sample in split.samples:
        for text in (sample.sentence1, sample.sentence2, sample.guid):
            if "\t" in text or "\n" in text or "\r" in text:
                raise SerializationError(
                    f"sample {sample.guid!r} contains a tab or newline; cannot be written as TSV"
                )
        lines.append(
            "\t".join((sample.sentence1, sample.sentence2, sample.gold_label.value, sample.guid))
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_split(path: str | Path, schema: TsvSchema = DEFAULT_SCHEMA, kind: str = "train") -> ParseResult:
    return parse_tsv(Path(path).read_bytes(), schema=schema, kind=kind)


def save_split(split: DatasetSplit, path: str | Path) -> None:
    Path(path).write_bytes(write_tsv(split))


def subsample(split: DatasetSplit, indices: list[int]) -> DatasetSplit:
    return replace(split, samples=[split.samples[i] for i in indices])
