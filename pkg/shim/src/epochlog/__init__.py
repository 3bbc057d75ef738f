"""Epoch-end prediction logger for external training loops.

Wraps a file in the line format the dynamics toolkit ingests: one JSON
object per line with ``guid``, ``epoch``, ``probs`` (three numbers,
ordered entailment, contradiction, neutral) and ``gold``. Call
:meth:`EpochLogger.on_epoch_end` from your framework's epoch-end hook
with ``(guid, gold_label, probability_triple)`` rows; the file is
flushed once per epoch.

The logger stays framework-agnostic on purpose: it is a plain callable
fed by whatever evaluation loop the host trainer runs, not a binding to
any particular callback API. Full probability vectors are logged, not
just the gold probability, so the consuming side can recompute
predicted labels under its own tie rule.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

__version__ = "0.1.0"

#: The ingest contract's label order. Probability triples must follow it.
LABEL_ORDER = ("entailment", "contradiction", "neutral")

Row = tuple[str, str, tuple[float, float, float]]


@dataclass(frozen=True)
class ShimConfig:
    """Where to write, and an explicit declaration of the label order.

    The declaration must match :data:`LABEL_ORDER` exactly; it exists so
    a mis-ordered producer fails at construction instead of silently
    logging swapped probabilities.
    """

    path: str | Path
    label_order: tuple[str, str, str] = LABEL_ORDER

    def __post_init__(self):
        if tuple(self.label_order) != LABEL_ORDER:
            raise ValueError(
                f"label_order must be {LABEL_ORDER}, got {tuple(self.label_order)}"
            )


class EpochLogger:
    """Appends one line per sample at each epoch end; single writer."""

    def __init__(self, config: ShimConfig):
        self.config = config
        self._handle: IO[str] = open(config.path, "a", encoding="utf-8")

    def on_epoch_end(self, epoch: int, rows: Iterable[Row]) -> int:
        """Append one record per row and flush. Returns the line count.

        Rows are ``(guid, gold_label, probs)`` with probs ordered per the
        config. Probability vectors of the wrong arity are rejected;
        non-finite values fail JSON serialization loudly.
        """
        if not isinstance(epoch, int) or isinstance(epoch, bool) or epoch < 0:
            raise ValueError(f"epoch must be a nonnegative integer, got {epoch!r}")
        written = 0
        for guid, gold, probs in rows:
            probs = tuple(probs)
            if len(probs) != 3:
                raise ValueError(
                    f"guid {guid!r}: expected 3 probabilities, got {len(probs)}"
                )
            line = json.dumps(
                {"guid": str(guid), "epoch": epoch,
                 "probs": [float(p) for p in probs], "gold": str(gold)},
                ensure_ascii=False, allow_nan=False,
            )
            self._handle.write(line + "\n")
            written += 1
        self._handle.flush()
        return written

    def close(self) -> None:
        self._handle.close()

    def __enter__(self) -> "EpochLogger":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
