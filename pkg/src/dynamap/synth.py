"""Deterministic SNLI-shaped demo corpus.

Generates premise/hypothesis pairs from scene templates so the whole
pipeline can run and be verified at desk scale without shipping a real
corpus. Three populations are mixed in, because the downstream
analysis is only interesting when a dataset has all three:

  clean       template instances whose label follows the template rule;
              a bag-of-n-grams model can learn these almost perfectly
  ambiguous   borderline wordings whose gold label is a seeded coin
              flip between the two defensible readings
  mislabeled  clean instances deliberately stamped with a wrong label
              (train splits only); these are what label triage should
              surface

Everything is driven by one seed; guids carry the split name, so
generated train/dev/test splits never share guids.

Usage: ``python -m dynamap.synth --out DIR --train 2000 --dev 500 --test 500``
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from .dataset import LABEL_ORDER, DatasetSplit, Label, Sample, save_split
from .errors import ConfigError
from .seeding import SplitMix64, derive_seed

_PEOPLE = (
    "a man", "a woman", "a boy", "a girl", "a chef", "a doctor", "a nurse",
    "a farmer", "a teacher", "a musician", "an artist", "a firefighter",
    "a hiker", "a dancer", "a soldier", "a waiter", "a student", "a climber",
)
_ANIMALS = ("a dog", "a cat", "a horse", "a bird", "a monkey", "a rabbit", "a squirrel")
_SUBJECTS = tuple((s, "a person") for s in _PEOPLE) + tuple((s, "an animal") for s in _ANIMALS)

_ACTIVITIES = (
    "running", "sleeping", "swimming", "dancing", "singing", "cooking",
    "reading", "eating", "drinking", "jumping", "climbing", "painting",
    "fishing", "drumming", "skating", "surfing", "laughing", "waving",
    "digging", "resting",
)

_LOCATIONS = (
    "in the park", "on the beach", "at the station", "in the garden",
    "near the river", "on the street", "in the snow", "at the market",
    "in the city", "on a hill",
)

# Only clean-neutral hypotheses use these, so the tokens are a reliable
# neutral cue.
_NEUTRAL_TAILS = (
    "with a friend", "for charity", "before dinner", "with great skill",
    "during a holiday",
)

# Borderline detail: might follow from the premise, might not. Used only
# by the ambiguous entailment/neutral family.
_AMBIGUOUS_TAILS = ("outside", "somewhere nearby", "right now", "in public")

# Mislabeled rows draw from these restricted pools so that wrongly
# labeled near-twins collide: a model retrained on the mislabeled rows
# alone then faces conflicting labels it cannot fit, instead of
# memorizing each row through a rare token pair.
_NOISE_SUBJECTS = _SUBJECTS[:8]
_NOISE_ACTIVITIES = _ACTIVITIES[:8]
_NOISE_LOCATIONS = _LOCATIONS[:5]

# Borderline activity substitutions: compatible enough that neutral and
# contradiction are both defensible. The replacement words appear nowhere
# else in the corpus.
_AMBIGUOUS_SWAPS = {
    "running": "training",
    "cooking": "working",
    "reading": "studying",
    "swimming": "bathing",
    "singing": "performing",
    "painting": "decorating",
}
_SWAP_KEYS = tuple(sorted(_AMBIGUOUS_SWAPS))


@dataclass(frozen=True)
class SplitPlan:
    kind: str
    size: int
    guid_prefix: str
    noise_pct: int  # percent of rows stamped with a wrong label
    ambiguous_pct: int  # percent of rows drawn from the borderline families


def _capitalize(phrase: str) -> str:
    return phrase[0].upper() + phrase[1:]


def _pick(rng: SplitMix64, items: tuple) -> object:
    return items[rng.below(len(items))]


def _clean_pair(
    rng: SplitMix64,
    subjects: tuple = _SUBJECTS,
    activities: tuple = _ACTIVITIES,
    locations: tuple = _LOCATIONS,
) -> tuple[str, str, Label]:
    subject, hypernym = _pick(rng, subjects)
    activity = _pick(rng, activities)
    location = _pick(rng, locations)
    premise = f"{_capitalize(subject)} is {activity} {location}."
    label = LABEL_ORDER[rng.below(3)]
    if label is Label.ENTAILMENT:
        hypothesis = f"{_capitalize(hypernym)} is {activity}."
    elif label is Label.CONTRADICTION:
        others = tuple(a for a in activities if a != activity)
        hypothesis = f"{_capitalize(subject)} is {_pick(rng, others)}."
    else:
        hypothesis = f"{_capitalize(subject)} is {activity} {_pick(rng, _NEUTRAL_TAILS)}."
    return premise, hypothesis, label


def _ambiguous_pair(rng: SplitMix64) -> tuple[str, str, Label]:
    subject, hypernym = _pick(rng, _SUBJECTS)
    location = _pick(rng, _LOCATIONS)
    if rng.below(2) == 0:
        # Entailment-or-neutral: a detail the premise neither states nor rules out.
        activity = _pick(rng, _ACTIVITIES)
        premise = f"{_capitalize(subject)} is {activity} {location}."
        hypothesis = f"{_capitalize(hypernym)} is {activity} {_pick(rng, _AMBIGUOUS_TAILS)}."
        label = Label.ENTAILMENT if rng.below(2) == 0 else Label.NEUTRAL
    else:
        # Neutral-or-contradiction: a near-compatible activity substitution.
        activity = _pick(rng, _SWAP_KEYS)
        premise = f"{_capitalize(subject)} is {activity} {location}."
        hypothesis = f"{_capitalize(subject)} is {_AMBIGUOUS_SWAPS[activity]}."
        label = Label.NEUTRAL if rng.below(2) == 0 else Label.CONTRADICTION
    return premise, hypothesis, label


def build_split(plan: SplitPlan, seed: int) -> DatasetSplit:
    """One generated split; a pure function of the plan and seed."""
    if plan.size < 0:
        raise ConfigError("split size must be nonnegative")
    if not 0 <= plan.noise_pct <= 100 or not 0 <= plan.ambiguous_pct <= 100:
        raise ConfigError("noise_pct and ambiguous_pct must be percentages")
    if plan.noise_pct + plan.ambiguous_pct > 100:
        raise ConfigError("noise_pct + ambiguous_pct must not exceed 100")

    rng = SplitMix64(derive_seed(seed, f"corpus:{plan.kind}"))
    samples = []
    for i in range(plan.size):
        roll = rng.below(100)
        if roll < plan.ambiguous_pct:
            premise, hypothesis, label = _ambiguous_pair(rng)
        elif roll < plan.ambiguous_pct + plan.noise_pct:
            premise, hypothesis, label = _clean_pair(
                rng, _NOISE_SUBJECTS, _NOISE_ACTIVITIES, _NOISE_LOCATIONS
            )
            wrong = (LABEL_ORDER.index(label) + 1 + rng.below(2)) % 3
            label = LABEL_ORDER[wrong]
        else:
            premise, hypothesis, label = _clean_pair(rng)
        samples.append(Sample(
            guid=f"{plan.guid_prefix}-{i:06d}",
            sentence1=premise,
            sentence2=hypothesis,
            gold_label=label,
        ))
    return DatasetSplit(kind=plan.kind, samples=samples)


def write_corpus(
    out_dir: str | Path,
    train_size: int,
    dev_size: int,
    test_size: int,
    seed: int = 0,
    noise_pct: int = 33,
    ambiguous_pct: int = 20,
) -> dict[str, Path]:
    """Write train/dev/test TSVs; held-out splits carry no label noise."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plans = (
        SplitPlan("train", train_size, "train", noise_pct, ambiguous_pct),
        SplitPlan("dev", dev_size, "dev", 0, ambiguous_pct),
        SplitPlan("test", test_size, "test", 0, ambiguous_pct),
    )
    paths = {}
    for plan in plans:
        split = build_split(plan, seed)
        path = out / f"{plan.kind}.tsv"
        save_split(split, path)
        paths[plan.kind] = path
    return paths


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m dynamap.synth",
        description="Generate a deterministic SNLI-shaped demo corpus.",
    )
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--train", type=int, default=2000)
    parser.add_argument("--dev", type=int, default=500)
    parser.add_argument("--test", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--noise", type=int, default=33, help="train label noise, percent")
    parser.add_argument("--ambiguous", type=int, default=20, help="borderline share, percent")
    args = parser.parse_args(argv)
    paths = write_corpus(
        args.out, args.train, args.dev, args.test,
        seed=args.seed, noise_pct=args.noise, ambiguous_pct=args.ambiguous,
    )
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
