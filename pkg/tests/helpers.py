"""Shared builders for tests."""

from __future__ import annotations

from dynamap.dataset import LABEL_INDEX, DatasetSplit, Label, Sample
from dynamap.trainer import EpochRecord, argmax_label


def make_sample(guid: str, s1: str = "A dog runs.", s2: str = "An animal runs.",
                gold: Label = Label.ENTAILMENT) -> Sample:
    return Sample(guid=guid, sentence1=s1, sentence2=s2, gold_label=gold)


def make_split(samples, kind: str = "train") -> DatasetSplit:
    return DatasetSplit(kind=kind, samples=list(samples))


def probs_with_gold(gold: Label, gold_prob: float) -> tuple[float, float, float]:
    """A valid 3-vector with the requested gold probability; the rest is
    split evenly between the other two labels."""
    probs = [0.0, 0.0, 0.0]
    gi = LABEL_INDEX[gold]
    probs[gi] = gold_prob
    rest = (1.0 - gold_prob) / 2.0
    for j in range(3):
        if j != gi:
            probs[j] = rest
    return tuple(probs)


def series_records(guid: str, gold: Label, gold_probs) -> list[EpochRecord]:
    """One record per epoch with the given gold-probability series."""
    records = []
    for epoch, gold_prob in enumerate(gold_probs):
        probs = probs_with_gold(gold, gold_prob)
        records.append(EpochRecord(
            guid=guid, epoch=epoch, probs=probs,
            predicted=argmax_label(probs), gold=gold,
        ))
    return records


def separable_split(per_class: int = 4) -> DatasetSplit:
    """Distinct single-token sentences per class: trivially separable."""
    tokens = {
        Label.ENTAILMENT: ("aaa", "bbb"),
        Label.CONTRADICTION: ("ccc", "ddd"),
        Label.NEUTRAL: ("eee", "fff"),
    }
    samples = []
    for label, (t1, t2) in tokens.items():
        for i in range(per_class):
            samples.append(Sample(
                guid=f"{label.value}-{i}",
                sentence1=t1,
                sentence2=t2,
                gold_label=label,
            ))
    return DatasetSplit(kind="train", samples=samples)
