"""Dimension witness over two-bit-to-one-bit behavior tables.

A prepare-and-measure round selects one of four preparations, labelled
by two bits ``a``, and one of two binary measurements ``y``.  The
behavior table collects the conditional probabilities
``E[a, y] = P(b = 0 | a, y)``.  The witness is a signed sum of the
eight cells; one classical bit of communication caps it at 2, a single
qubit at ``2 * sqrt(2)``.  Randomness against a classical adversary is
quantified by the largest cell-wise guessing probability
``max(E, 1 - E)`` and its min-entropy ``-log2``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PREPARATION_LABELS",
    "WITNESS_SIGNS",
    "BehaviorTable",
    "CertificationResult",
    "witness_value",
    "guessing_probability",
    "min_entropy",
    "classical_bound",
    "quantum_bound",
    "deterministic_strategy_tables",
]

PREPARATION_LABELS = ("00", "01", "10", "11")

#: Sign carried by cell (a, y); row order follows PREPARATION_LABELS.
WITNESS_SIGNS = np.array(
    [
        [1.0, 1.0],
        [1.0, -1.0],
        [-1.0, 1.0],
        [-1.0, -1.0],
    ]
)
WITNESS_SIGNS.setflags(write=False)

# Probabilities produced by floating-point Born rules can overshoot the
# unit interval by a few ulp; anything past this slack is a real error.
_RANGE_SLACK = 1e-9


def _coerce_table(table: "BehaviorTable | np.ndarray") -> np.ndarray:
    if isinstance(table, BehaviorTable):
        return table.e
    arr = np.asarray(table, dtype=float)
    if arr.shape != (4, 2):
        raise ValueError(f"behavior table must have shape (4, 2), got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class BehaviorTable:
    """Wrapper holding the eight probabilities ``P(b = 0 | a, y)``.

    Entries within a few ulp outside ``[0, 1]`` are clipped; anything
    further out raises ``ValueError``.  The stored array is read-only.
    """

    e: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.e, dtype=float)
        if arr.shape != (4, 2):
            raise ValueError(f"behavior table must have shape (4, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("behavior table entries must be finite")
        if arr.min() < -_RANGE_SLACK or arr.max() > 1.0 + _RANGE_SLACK:
            raise ValueError(
                f"behavior table entries must lie in [0, 1], "
                f"got range [{arr.min():.6g}, {arr.max():.6g}]"
            )
        np.clip(arr, 0.0, 1.0, out=arr)
        arr.setflags(write=False)
        object.__setattr__(self, "e", arr)

    def cell(self, a: int, y: int) -> float:
        """Probability of outcome 0 for preparation index ``a`` and measurement ``y``."""
        return float(self.e[a, y])

    def as_array(self) -> np.ndarray:
        """Writable copy of the underlying (4, 2) array."""
        return self.e.copy()


def witness_value(table: BehaviorTable | np.ndarray) -> float:
    """Signed sum of the eight table cells under :data:`WITNESS_SIGNS`.

    Bounded by 4 in magnitude for arbitrary tables, by
    :func:`classical_bound` for one-bit classical messages and by
    :func:`quantum_bound` for qubit messages.
    """
    arr = _coerce_table(table)
    return float(np.sum(WITNESS_SIGNS * arr))


def guessing_probability(table: BehaviorTable | np.ndarray) -> float:
    """Best cell-wise outcome-guessing probability, ``max_ay max(E, 1 - E)``.

    Always in ``[0.5, 1]``: a uniformly random cell is the hardest to
    guess, a deterministic one the easiest.
    """
    arr = _coerce_table(table)
    arr = np.clip(arr, 0.0, 1.0)
    return float(np.max(np.maximum(arr, 1.0 - arr)))


def min_entropy(p_guess: float) -> float:
    """Min-entropy ``-log2(p_guess)`` of a binary outcome.

    ``p_guess`` must lie in ``[0.5, 1]``; the result lies in ``[0, 1]``.
    """
    if not 0.5 <= p_guess <= 1.0:
        raise ValueError(f"guessing probability must lie in [0.5, 1], got {p_guess!r}")
    # + 0.0 normalises the -0.0 that -log2(1.0) would otherwise produce.
    return -math.log2(p_guess) + 0.0


def classical_bound() -> float:
    """Largest witness value reachable with one classical bit of communication."""
    return 2.0


def quantum_bound() -> float:
    """Largest witness value reachable with one qubit of communication."""
    return 2.0 * math.sqrt(2.0)


def deterministic_strategy_tables() -> np.ndarray:
    """All 256 behavior tables realizable with a deterministic one-bit message.

    The sender maps each of the four inputs to a message bit (16
    encodings); the receiver maps message and measurement choice to an
    outcome (16 decodings).  Returns an array of shape (256, 4, 2).
    """
    tables = np.empty((256, 4, 2))
    idx = 0
    for enc in itertools.product((0, 1), repeat=4):
        for dec in itertools.product((0, 1), repeat=4):
            for a in range(4):
                m = enc[a]
                for y in range(2):
                    b = dec[2 * m + y]
                    tables[idx, a, y] = 1.0 if b == 0 else 0.0
            idx += 1
    return tables


@dataclass(frozen=True)
class CertificationResult:
    """Witness value and the per-round randomness it certifies."""

    t_value: float
    p_guess: float
    h_min: float

    @classmethod
    def from_table(cls, table: BehaviorTable | np.ndarray) -> "CertificationResult":
        p = guessing_probability(table)
        return cls(t_value=witness_value(table), p_guess=p, h_min=min_entropy(p))
