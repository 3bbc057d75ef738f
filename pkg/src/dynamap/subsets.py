"""Rank samples by their dynamics and build filtered train splits.

Fractions are exact rationals throughout: floor(1/3 * 6) must be 2,
and float(1/3) * 6 rounds just below it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .dataset import DatasetSplit
from .dynamics import TrainingDynamics
from .errors import DataError, ParseError, SelectionError
from .seeding import SplitMix64, derive_seed


class Category(enum.Enum):
    """How a component ranks the train split before taking its share."""

    EASY_TO_LEARN = "easy_to_learn"      # confidence, descending
    HARD_TO_LEARN = "hard_to_learn"      # confidence, ascending
    AMBIGUOUS = "ambiguous"              # variability, descending
    RANDOM = "random"                    # seeded shuffle


def parse_category(text: str) -> Category:
    for category in Category:
        if category.value == text:
            return category
    known = ", ".join(c.value for c in Category)
    raise ValueError(f"unknown category {text!r} (expected one of {known})")


FractionLike = Fraction | int | str | float


def as_fraction(value: FractionLike) -> Fraction:
    """Exact fraction from "1/3", "0.25", ints, or floats.

    Floats go through their shortest decimal repr, so 0.25 means 1/4
    and a literal 1/3 should be written as the string "1/3".
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class SubsetSpec:
    """A named recipe: ordered (category, fraction) components.

    ``shuffle_seed`` is the recipe's one source of randomness: it seeds
    the random category's ranking and, when set, the materialized
    sample order.
    """

    name: str
    components: tuple[tuple[Category, Fraction], ...]
    shuffle_seed: int | None = None

    def __post_init__(self):
        if not self.components:
            raise DataError(f"recipe {self.name!r} has no components")
        total = Fraction(0)
        for _, fraction in self.components:
            if not 0 < fraction <= 1:
                raise DataError(f"recipe {self.name!r}: fraction {fraction} outside (0, 1]")
            total += fraction
        if total > 1:
            raise DataError(f"recipe {self.name!r}: fractions sum to {total} > 1")


def make_spec(
    name: str,
    components: Sequence[tuple[Category | str, FractionLike]],
    shuffle_seed: int | None = None,
) -> SubsetSpec:
    parsed = tuple(
        (category if isinstance(category, Category) else parse_category(category),
         as_fraction(fraction))
        for category, fraction in components
    )
    return SubsetSpec(name=name, components=parsed, shuffle_seed=shuffle_seed)


def rank(dynamics: Sequence[TrainingDynamics], category: Category, seed: int = 0) -> list[str]:
    """Total order over all guids for one category.

    Metric ties break by ascending guid, so rankings are independent of
    input order. The random category ignores the dynamics values and
    returns a seeded permutation.
    """
    if not dynamics:
        raise DataError("cannot rank empty dynamics")
    if category is Category.RANDOM:
        guids = sorted(d.guid for d in dynamics)
        SplitMix64(seed).shuffle(guids)
        return guids
    if category is Category.EASY_TO_LEARN:
        keyed = sorted(dynamics, key=lambda d: (-d.confidence, d.guid))
    elif category is Category.HARD_TO_LEARN:
        keyed = sorted(dynamics, key=lambda d: (d.confidence, d.guid))
    else:
        keyed = sorted(dynamics, key=lambda d: (-d.variability, d.guid))
    return [d.guid for d in keyed]


@dataclass(frozen=True)
class SelectionEntry:
    guid: str
    component_index: int
    category: Category


@dataclass
class Selection:
    """Chosen guids plus which component claimed each one."""

    spec_name: str
    entries: list[SelectionEntry]

    def guids(self) -> set[str]:
        return {entry.guid for entry in self.entries}

    def __len__(self) -> int:
        return len(self.entries)


def select(spec: SubsetSpec, dynamics: Sequence[TrainingDynamics]) -> Selection:
    """Apply a recipe to a full train split's dynamics.

    Components claim floor(fraction * N) guids each, in order, walking
    their category ranking and skipping guids an earlier component
    already took; the walk continues past skips (backfill) until the
    quota is met. Quotas that cannot be met raise.
    """
    n = len(dynamics)
    if n == 0:
        raise DataError("cannot select from empty dynamics")
    taken: set[str] = set()
    entries: list[SelectionEntry] = []
    seed = spec.shuffle_seed if spec.shuffle_seed is not None else 0
    for index, (category, fraction) in enumerate(spec.components):
        quota = math.floor(fraction * n)
        claimed = 0
        for guid in rank(dynamics, category, seed=seed):
            if claimed == quota:
                break
            if guid in taken:
                continue
            taken.add(guid)
            entries.append(SelectionEntry(guid=guid, component_index=index, category=category))
            claimed += 1
        if claimed < quota:
            raise SelectionError(
                f"recipe {spec.name!r}, component {index} ({category.value}): "
                f"quota {quota} unreachable, short by {quota - claimed}"
            )
    return Selection(spec_name=spec.name, entries=entries)


def materialize(
    selection: Selection | Iterable[str],
    train: DatasetSplit,
    order_seed: int | None = None,
) -> DatasetSplit:
    """New split holding exactly the selected samples.

    Samples keep their original order unless ``order_seed`` asks for a
    seeded shuffle.
    """
    wanted = selection.guids() if isinstance(selection, Selection) else set(selection)
    known = {sample.guid for sample in train.samples}
    missing = wanted - known
    if missing:
        shown = ", ".join(repr(g) for g in sorted(missing)[:5])
        raise DataError(f"guids not present in train split: {shown}")
    samples = [sample for sample in train.samples if sample.guid in wanted]
    if order_seed is not None:
        SplitMix64(order_seed).shuffle(samples)
    return replace(train, samples=samples)


#: Recipe names, fixed order; the experiment harness reports rows in
#: this order after the preliminary model.
RECIPE_NAMES = (
    "full-shuffled",
    "random-33",
    "easy-33",
    "hard-33",
    "ambiguous-33",
    "easy+hard",
    "easy+ambiguous",
    "hard+ambiguous",
    "easy+hard+ambiguous",
)


def nine_recipes(seed: int) -> list[SubsetSpec]:
    """The nine standard recipes.

    Only the recipes with a random component carry a shuffle seed
    (derived from ``seed`` and the recipe name); the ranked recipes
    keep the original sample order.
    """
    third = Fraction(1, 3)
    sixth = Fraction(1, 6)
    ninth = Fraction(1, 9)
    easy = Category.EASY_TO_LEARN
    hard = Category.HARD_TO_LEARN
    ambiguous = Category.AMBIGUOUS

    def seeded(name: str) -> int:
        return derive_seed(seed, f"recipe:{name}")

    return [
        SubsetSpec("full-shuffled", ((Category.RANDOM, Fraction(1)),),
                   shuffle_seed=seeded("full-shuffled")),
        SubsetSpec("random-33", ((Category.RANDOM, third),),
                   shuffle_seed=seeded("random-33")),
        SubsetSpec("easy-33", ((easy, third),)),
        SubsetSpec("hard-33", ((hard, third),)),
        SubsetSpec("ambiguous-33", ((ambiguous, third),)),
        SubsetSpec("easy+hard", ((easy, sixth), (hard, sixth))),
        SubsetSpec("easy+ambiguous", ((easy, sixth), (ambiguous, sixth))),
        SubsetSpec("hard+ambiguous", ((hard, sixth), (ambiguous, sixth))),
        SubsetSpec("easy+hard+ambiguous", ((easy, ninth), (hard, ninth), (ambiguous, ninth))),
    ]


def recipe_by_name(name: str, seed: int) -> SubsetSpec:
    for spec in nine_recipes(seed):
        if spec.name == name:
            return spec
    raise DataError(f"unknown recipe {name!r} (expected one of {', '.join(RECIPE_NAMES)})")


MANIFEST_HEADER = ("guid", "component_index", "category")


def write_manifest(selection: Selection) -> bytes:
    """Selection as TSV, rows in claim order, so any external tool can
    rebuild the subset exactly."""
    lines = ["\t".join(MANIFEST_HEADER)]
    for entry in selection.entries:
        lines.append(f"{entry.guid}\t{entry.component_index}\t{entry.category.value}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_manifest(data: bytes | str, spec_name: str = "") -> Selection:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or tuple(lines[0].rstrip("\r").split("\t")) != MANIFEST_HEADER:
        raise ParseError("bad manifest header")
    entries = []
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.rstrip("\r").split("\t")
        if len(fields) != 3:
            raise ParseError("expected 3 fields", line=line_no)
        try:
            entries.append(SelectionEntry(
                guid=fields[0],
                component_index=int(fields[1]),
                category=parse_category(fields[2]),
            ))
        except ValueError as exc:
            raise ParseError(str(exc), line=line_no) from None
    return Selection(spec_name=spec_name, entries=entries)


def save_manifest(selection: Selection, path: str | Path) -> None:
    Path(path).write_bytes(write_manifest(selection))
