"""Deterministic reference classifier for sentence pairs.

Hashed bag-of-n-grams features feeding a 3-way softmax regression
trained with plain mini-batch SGD. Nothing here is clever on purpose:
the classifier exists to produce bit-reproducible per-epoch prediction
records at desk scale, not to chase accuracy.

Checkpoint layout (binary, little-endian, documented here as the
format of record):

    bytes 0..7    magic b"DYNMAP01" (8 ASCII bytes, version in the name)
    bytes 8..15   hash_dim as uint64
    then          weights, float64, row-major, shape 3 x hash_dim
    then          bias, float64, 3 values
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import sparse

from .dataset import LABEL_INDEX, LABEL_ORDER, DatasetSplit, Label, Sample
from .errors import ConfigError, DataError, TrainingError
from .hashing import fnv1a_64_text
from .seeding import SplitMix64, derive_seed

_CHECKPOINT_MAGIC = b"DYNMAP01"


@dataclass(frozen=True)
class FeatureVector:
    """Sparse features: strictly increasing indices, matching weights."""

    indices: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise DataError("indices and values differ in length")
        for a, b in zip(self.indices, self.indices[1:]):
            if b <= a:
                raise DataError("feature indices must be strictly increasing")


@dataclass
class ModelParams:
    """weights: 3 x hash_dim (one row per label, in label order); bias: 3."""

    weights: np.ndarray
    bias: np.ndarray

    @property
    def hash_dim(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 6
    learning_rate: float = 0.1
    l2: float = 1e-6
    batch_size: int = 64
    hash_dim: int = 2**18
    seed: int = 0
    shuffle_each_epoch: bool = True
    cross_cap: int = 30  # max tokens per side feeding the cross-pair features

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.hash_dim < 2 or self.hash_dim & (self.hash_dim - 1):
            raise ConfigError("hash_dim must be a power of two >= 2")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.l2 < 0:
            raise ConfigError("l2 must be nonnegative")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.cross_cap < 0:
            raise ConfigError("cross_cap must be nonnegative")


@dataclass(frozen=True)
class EpochRecord:
    """One model observation of one sample at the end of one epoch."""

    guid: str
    epoch: int
    probs: tuple[float, float, float]
    predicted: Label
    gold: Label

    def __post_init__(self):
        if self.epoch < 0:
            raise DataError(f"guid {self.guid!r}: negative epoch {self.epoch}")
        total = 0.0
        for p in self.probs:
            if not 0.0 <= p <= 1.0:
                raise DataError(f"guid {self.guid!r}: probability {p!r} outside [0, 1]")
            total += p
        if abs(total - 1.0) > 1e-6:
            raise DataError(f"guid {self.guid!r}: probabilities sum to {total!r}")
        if self.predicted is not argmax_label(self.probs):
            raise DataError(f"guid {self.guid!r}: predicted label is not the argmax")


RecordSink = Callable[[EpochRecord], None]


def argmax_label(probs: Sequence[float]) -> Label:
    """Highest-probability label; ties go to the earliest label in order."""
    best = 0
    for i in (1, 2):
        if probs[i] > probs[best]:
            best = i
    return LABEL_ORDER[best]


@lru_cache(maxsize=65536)
def _is_separator(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on Unicode whitespace and punctuation."""
    tokens: list[str] = []
    current: list[str] = []
    for ch in text.lower():
        if _is_separator(ch):
            if current:
                tokens.append("".join(current))
                current = []
        else:
            current.append(ch)
    if current:
        tokens.append("".join(current))
    return tokens


def feature_terms(sample: Sample, cross_cap: int = 30) -> list[str]:
    """The namespaced terms a sample produces, before hashing.

    Per side: unigrams and adjacent bigrams; across sides: every
    premise-unigram x hypothesis-unigram pair, both sides capped at
    their first ``cross_cap`` tokens.
    """
    premise = tokenize(sample.sentence1)
    hypothesis = tokenize(sample.sentence2)
    terms: list[str] = []
    terms.extend(f"p1:{tok}" for tok in premise)
    terms.extend(f"p2:{a}_{b}" for a, b in zip(premise, premise[1:]))
    terms.extend(f"h1:{tok}" for tok in hypothesis)
    terms.extend(f"h2:{a}_{b}" for a, b in zip(hypothesis, hypothesis[1:]))
    for p_tok in premise[:cross_cap]:
        for h_tok in hypothesis[:cross_cap]:
            terms.append(f"x:{p_tok}|{h_tok}")
    return terms


def _hash_terms(terms: list[str], hash_dim: int) -> tuple[tuple[int, ...], tuple[float, ...]]:
    mask = hash_dim - 1
    counts: dict[int, float] = {}
    for term in terms:
        idx = fnv1a_64_text(term) & mask
        counts[idx] = counts.get(idx, 0.0) + 1.0
    indices = tuple(sorted(counts))
    return indices, tuple(counts[i] for i in indices)


def featurize(sample: Sample, hash_dim: int, cross_cap: int = 30) -> FeatureVector:
    """Hash a sample's terms into a sparse count vector (64-bit FNV-1a
    modulo hash_dim; colliding terms merge by summing counts)."""
    indices, values = _hash_terms(feature_terms(sample, cross_cap), hash_dim)
    return FeatureVector(indices=indices, values=values)


def featurize_split(
    split: DatasetSplit, hash_dim: int, cross_cap: int = 30
) -> tuple[sparse.csr_matrix, np.ndarray]:
    """Feature matrix (n_samples x hash_dim, CSR) and gold-label indices."""
    indptr = [0]
    indices: list[int] = []
    values: list[float] = []
    labels = np.empty(len(split.samples), dtype=np.int64)
    for row, sample in enumerate(split.samples):
        idx, val = _hash_terms(feature_terms(sample, cross_cap), hash_dim)
        indices.extend(idx)
        values.extend(val)
        indptr.append(len(indices))
        labels[row] = LABEL_INDEX[sample.gold_label]
    matrix = sparse.csr_matrix(
        (np.asarray(values, dtype=np.float64),
         np.asarray(indices, dtype=np.int64),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(split.samples), hash_dim),
    )
    return matrix, labels


def _softmax_rows(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def predict_probs(model: ModelParams, fv: FeatureVector) -> np.ndarray:
    """softmax(weights . fv + bias), stabilized by max-subtraction."""
    scores = model.bias.copy()
    if fv.indices:
        idx = np.asarray(fv.indices, dtype=np.int64)
        val = np.asarray(fv.values, dtype=np.float64)
        scores = scores + (model.weights[:, idx] * val).sum(axis=1)
    return _softmax_rows(scores.reshape(1, 3))[0]


def loss_and_grads(
    weights_t: np.ndarray,
    bias: np.ndarray,
    x: sparse.csr_matrix,
    y: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy with L2 on the weights (bias unpenalized).

    ``weights_t`` is the transposed layout used during training
    (hash_dim x 3). Returns (loss, grad wrt weights_t, grad wrt bias).
    """
    n = x.shape[0]
    probs = _softmax_rows(x.dot(weights_t) + bias)
    with np.errstate(divide="ignore"):
        data_loss = float(-np.log(probs[np.arange(n), y]).sum() / n)
    loss = data_loss + 0.5 * l2 * float((weights_t * weights_t).sum())
    delta = probs
    delta[np.arange(n), y] -= 1.0
    grad_w = x.T.dot(delta) / n + l2 * weights_t
    grad_b = delta.sum(axis=0) / n
    return loss, grad_w, grad_b


def _batches(order: list[int], batch_size: int):
    for start in range(0, len(order), batch_size):
        yield order[start:start + batch_size]


def train(
    split: DatasetSplit,
    config: TrainConfig,
    sink: RecordSink,
    features: tuple[sparse.csr_matrix, np.ndarray] | None = None,
) -> ModelParams:
    """Train from zero weights; emit one EpochRecord per sample per epoch.

    Records come from a full inference pass at the end of each epoch,
    over the split in stored order, so the dynamics do not depend on
    batch boundaries within the epoch. Single-threaded with a fixed
    summation order: identical inputs give bit-identical outputs.

    ``features`` may carry a precomputed ``featurize_split`` result for
    the same split and config, to avoid re-hashing.
    """
    if not split.samples:
        raise DataError("cannot train on an empty split")
    if features is None:
        features = featurize_split(split, config.hash_dim, config.cross_cap)
    x, y = features
    n = x.shape[0]

    weights_t = np.zeros((config.hash_dim, 3), dtype=np.float64)
    bias = np.zeros(3, dtype=np.float64)
    lr = config.learning_rate
    decay = 1.0 - lr * config.l2

    for epoch in range(config.epochs):
        if config.shuffle_each_epoch:
            rng = SplitMix64(derive_seed(config.seed, f"epoch:{epoch}"))
            order = rng.permutation(n)
        else:
            order = list(range(n))

        for batch_no, batch in enumerate(_batches(order, config.batch_size)):
            xb = x[batch]
            b = len(batch)
            probs = _softmax_rows(xb.dot(weights_t) + bias)
            with np.errstate(divide="ignore"):
                batch_loss = float(-np.log(probs[np.arange(b), y[batch]]).sum() / b)
            if not np.isfinite(batch_loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch {batch_no}"
                )
            delta = probs
            delta[np.arange(b), y[batch]] -= 1.0
            grad_w = xb.T.dot(delta)
            if decay != 1.0:
                weights_t *= decay
            weights_t -= (lr / b) * grad_w
            bias -= (lr / b) * delta.sum(axis=0)

        probs_all = _softmax_rows(x.dot(weights_t) + bias)
        for row, sample in enumerate(split.samples):
            p = (float(probs_all[row, 0]), float(probs_all[row, 1]), float(probs_all[row, 2]))
            sink(EpochRecord(
                guid=sample.guid,
                epoch=epoch,
                probs=p,
                predicted=argmax_label(p),
                gold=sample.gold_label,
            ))

    return ModelParams(weights=np.ascontiguousarray(weights_t.T), bias=bias)


def evaluate(
    model: ModelParams,
    split: DatasetSplit,
    features: tuple[sparse.csr_matrix, np.ndarray] | None = None,
    cross_cap: int = 30,
) -> float:
    """Fraction of samples whose argmax prediction matches the gold label."""
    if not split.samples:
        raise DataError("accuracy of an empty split is undefined")
    if features is None:
        features = featurize_split(split, model.hash_dim, cross_cap)
    x, y = features
    scores = x.dot(model.weights.T) + model.bias
    predicted = np.argmax(scores, axis=1)  # first max == fixed label-order ties
    return float((predicted == y).sum() / len(y))


def save_checkpoint(model: ModelParams, path: str | Path) -> None:
    blob = bytearray()
    blob += _CHECKPOINT_MAGIC
    blob += int(model.hash_dim).to_bytes(8, "little")
    blob += np.ascontiguousarray(model.weights, dtype="<f8").tobytes()
    blob += np.ascontiguousarray(model.bias, dtype="<f8").tobytes()
    Path(path).write_bytes(bytes(blob))


def load_checkpoint(path: str | Path) -> ModelParams:
    blob = Path(path).read_bytes()
    if blob[:8] != _CHECKPOINT_MAGIC:
        raise DataError(f"{path}: not a model checkpoint (bad magic)")
    hash_dim = int.from_bytes(blob[8:16], "little")
    expected = 16 + 8 * (3 * hash_dim + 3)
    if len(blob) != expected:
        raise DataError(f"{path}: truncated checkpoint ({len(blob)} bytes, expected {expected})")
    weights = np.frombuffer(blob, dtype="<f8", count=3 * hash_dim, offset=16)
    bias = np.frombuffer(blob, dtype="<f8", count=3, offset=16 + 24 * hash_dim)
    return ModelParams(
        weights=weights.reshape(3, hash_dim).copy(),
        bias=bias.copy(),
    )
