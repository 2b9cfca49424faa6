"""Finite-round simulation and certification of the expansion protocol.

A run draws uniformly random inputs ``(a, y)`` each round, samples the
outcome from the device's (possibly noise-degraded) behaviour table,
estimates the witness with a one-sided Hoeffding bound, converts that
bound into a certified min-entropy rate via a precomputed curve, and
hashes the raw outcomes down to certified bits with a seeded linear
extractor.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, replace
from typing import Any, Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from numpy.random import Philox
from scipy.signal import fftconvolve

from .optimize import CurvePoint
from .qubit import BinaryMeasurement, Device, PureQubit, behavior_table
from .witness import (
    PREPARATION_LABELS,
    BehaviorTable,
    quantum_bound,
    witness_value,
)

__all__ = [
    "INPUT_BITS_PER_ROUND",
    "IID_ASSUMPTION",
    "RoundRecord",
    "RoundLog",
    "concatenate_logs",
    "NoiseModel",
    "NO_NOISE",
    "run_rounds",
    "EstimationError",
    "EstimationReport",
    "cell_deviation",
    "estimate_witness",
    "CertificationError",
    "certify",
    "with_certification",
    "ExtractionParams",
    "extraction_output_length",
    "toeplitz_seed_bits",
    "extract_bits",
    "pack_bits_msb_first",
    "qrac_preset",
    "bb84_preset",
]

#: Fresh uniform bits consumed per round: two select ``a``, one selects ``y``.
INPUT_BITS_PER_ROUND = 3

#: Statement attached to every emitted report.
IID_ASSUMPTION = (
    "Certification assumes independent and identically distributed rounds; "
    "the confidence bound does not cover memory effects or adaptive devices."
)

# Fixed second key words.  They keep round sampling and extractor-seed
# expansion on disjoint counter-based streams when the caller reuses one
# 64-bit integer seed for both.
_STREAM_ROUNDS = 0x524E44
_STREAM_TOEPLITZ = 0x54504C

_U53 = 2.0**-53


class EstimationError(ValueError):
    """A round log cannot support witness estimation."""


class CertificationError(RuntimeError):
    """The lower confidence bound exceeds the qubit maximum.

    Either the dimension assumption is broken or the statistics are.
    """


class RoundRecord(NamedTuple):
    """One protocol round: preparation index ``a``, basis ``y``, outcome ``b``."""

    a: int
    y: int
    b: int

    @property
    def a_label(self) -> str:
        """Two-character preparation label, e.g. ``"10"`` for index 2."""
        return PREPARATION_LABELS[self.a]


@dataclass(frozen=True, eq=False)
class RoundLog:
    """Column-oriented immutable sequence of :class:`RoundRecord`.

    Storing the three columns as packed arrays keeps million-round logs
    cheap; indexing and iteration still hand out individual records, and
    slicing hands back a log.
    """

    a: np.ndarray
    y: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        cols: dict[str, np.ndarray] = {}
        for name in ("a", "y", "b"):
            col = np.ascontiguousarray(getattr(self, name), dtype=np.uint8)
            if col.ndim != 1:
                raise ValueError(f"column {name!r} must be one-dimensional")
            cols[name] = col
        if not (cols["a"].shape == cols["y"].shape == cols["b"].shape):
            raise ValueError("columns a, y, b must have equal length")
        if cols["a"].size:
            if cols["a"].max() > 3:
                raise ValueError("preparation labels must lie in 0..3")
            if cols["y"].max() > 1 or cols["b"].max() > 1:
                raise ValueError("y and b must be bits")
        for name, col in cols.items():
            col.setflags(write=False)
            object.__setattr__(self, name, col)

    def __len__(self) -> int:
        return self.a.shape[0]

    def __getitem__(self, index: int | slice) -> "RoundRecord | RoundLog":
        if isinstance(index, slice):
            return RoundLog(self.a[index], self.y[index], self.b[index])
        i = operator.index(index)
        return RoundRecord(int(self.a[i]), int(self.y[i]), int(self.b[i]))

    def __iter__(self) -> Iterator[RoundRecord]:
        for ai, yi, bi in zip(self.a, self.y, self.b):
            yield RoundRecord(int(ai), int(yi), int(bi))


def concatenate_logs(logs: Iterable[RoundLog]) -> RoundLog:
    """Join shard logs in order into one log."""
    parts = list(logs)
    if not parts:
        return RoundLog(np.zeros(0, np.uint8), np.zeros(0, np.uint8), np.zeros(0, np.uint8))
    return RoundLog(
        np.concatenate([p.a for p in parts]),
        np.concatenate([p.y for p in parts]),
        np.concatenate([p.b for p in parts]),
    )


@dataclass(frozen=True)
class NoiseModel:
    """Classical degradation applied to the ideal outcome distribution.

    ``depolarizing_q`` replaces the prepared state by the maximally mixed
    one with probability ``q``, pulling every table cell toward 1/2;
    ``flip_p`` flips the outcome bit with probability ``p``.  Both act on
    the behaviour table directly, which matches a density-matrix
    simulation by linearity of the outcome probability.
    """

    depolarizing_q: float = 0.0
    flip_p: float = 0.0

    def __post_init__(self) -> None:
        for name in ("depolarizing_q", "flip_p"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
            object.__setattr__(self, name, value)

    def apply(self, table: BehaviorTable) -> BehaviorTable:
        """Table of outcome-0 probabilities after the noise acts."""
        e = table.as_array()
        e = (1.0 - self.depolarizing_q) * e + self.depolarizing_q / 2.0
        e = (1.0 - self.flip_p) * e + self.flip_p * (1.0 - e)
        return BehaviorTable(e)


NO_NOISE = NoiseModel()


def _check_seed(seed: int, *, name: str = "seed") -> int:
    value = operator.index(seed)
    if not 0 <= value < 2**64:
        raise ValueError(f"{name} must be a 64-bit unsigned integer, got {seed!r}")
    return value


def _philox_words(seed: int, stream: int, first_block: int, count: int) -> np.ndarray:
    """``count`` consecutive 4-word blocks of the keyed counter stream.

    Block ``i`` is a pure function of ``(seed, stream, first_block + i)``,
    which is what makes sharded generation match one contiguous run.
    """
    gen = Philox(
        key=np.array([seed, stream], dtype=np.uint64),
        counter=np.array([first_block, 0, 0, 0], dtype=np.uint64),
    )
    return gen.random_raw(4 * count).reshape(count, 4)


def run_rounds(
    device: Device,
    noise: NoiseModel,
    n: int,
    seed: int,
    *,
    first_round: int = 0,
) -> RoundLog:
    """Simulate ``n`` protocol rounds and return their log.

    Inputs ``(a, y)`` are uniform and independent; the outcome of round
    ``first_round + i`` is sampled from the noisy behaviour table.  Each
    round consumes one block of a counter-based stream keyed by ``seed``,
    so the same rounds can be produced in one call or in shards::

        run_rounds(d, noise, n, s) == concatenate_logs(
            [run_rounds(d, noise, k, s),
             run_rounds(d, noise, n - k, s, first_round=k)])
    """
    if n < 1:
        raise ValueError(f"need at least one round, got {n!r}")
    seed = _check_seed(seed)
    first = operator.index(first_round)
    if first < 0:
        raise ValueError(f"first_round must be non-negative, got {first_round!r}")
    p0 = noise.apply(behavior_table(device)).e
    words = _philox_words(seed, _STREAM_ROUNDS, first, n)
    a = (words[:, 0] & 3).astype(np.uint8)
    y = (words[:, 1] & 1).astype(np.uint8)
    u = (words[:, 2] >> 11) * _U53
    b = (u >= p0[a, y]).astype(np.uint8)
    return RoundLog(a, y, b)


@dataclass(frozen=True)
class EstimationReport:
    """Summary statistics of a round log at a given confidence level.

    ``counts_total[a][y]`` is the number of rounds seen for that cell and
    ``counts_b0[a][y]`` how many of them gave outcome 0.  The certified
    rate stays ``None`` until a curve lookup fills it in; it is always
    derived from ``t_lower``, never from ``t_hat``.
    """

    n_rounds: int
    counts_total: tuple[tuple[int, int], ...]
    counts_b0: tuple[tuple[int, int], ...]
    t_hat: float
    t_lower: float
    confidence: float
    h_min_certified: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_rounds", int(self.n_rounds))
        for name in ("counts_total", "counts_b0"):
            rows = tuple(tuple(int(v) for v in row) for row in getattr(self, name))
            if len(rows) != 4 or any(len(row) != 2 for row in rows):
                raise ValueError(f"{name} must have shape 4x2")
            object.__setattr__(self, name, rows)
        for name in ("t_hat", "t_lower", "confidence"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must lie in (0, 1), got {self.confidence!r}")
        if self.t_lower > self.t_hat + 1e-9:
            raise ValueError("t_lower cannot exceed t_hat")
        if self.h_min_certified is not None:
            object.__setattr__(self, "h_min_certified", float(self.h_min_certified))

    def empirical_table(self) -> BehaviorTable:
        """Per-cell outcome-0 frequencies as a behaviour table."""
        total = np.array(self.counts_total, dtype=float)
        b0 = np.array(self.counts_b0, dtype=float)
        if total.min() <= 0:
            raise EstimationError("report has an empty cell; no table to build")
        return BehaviorTable(b0 / total)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready view with all fields."""
        return {
            "n_rounds": self.n_rounds,
            "counts_total": [list(row) for row in self.counts_total],
            "counts_b0": [list(row) for row in self.counts_b0],
            "t_hat": self.t_hat,
            "t_lower": self.t_lower,
            "confidence": self.confidence,
            "h_min_certified": self.h_min_certified,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EstimationReport":
        return cls(
            n_rounds=data["n_rounds"],
            counts_total=tuple(tuple(row) for row in data["counts_total"]),
            counts_b0=tuple(tuple(row) for row in data["counts_b0"]),
            t_hat=data["t_hat"],
            t_lower=data["t_lower"],
            confidence=data["confidence"],
            h_min_certified=data.get("h_min_certified"),
        )


def cell_deviation(n_ay: int, confidence: float) -> float:
    """One-sided Hoeffding deviation for one of the eight table cells.

    Splitting the failure budget ``1 - confidence`` evenly over the cells
    gives ``sqrt(ln(8 / (1 - confidence)) / (2 n_ay))`` per cell.
    """
    if n_ay < 1:
        raise ValueError(f"cell count must be positive, got {n_ay!r}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence!r}")
    return math.sqrt(math.log(8.0 / (1.0 - confidence)) / (2.0 * n_ay))


def _records_as_columns(
    records: RoundLog | Iterable[RoundRecord],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(records, RoundLog):
        return records.a, records.y, records.b
    rows = [(r.a, r.y, r.b) if isinstance(r, RoundRecord) else tuple(r) for r in records]
    if not rows:
        return (np.zeros(0, np.uint8),) * 3
    arr = np.asarray(rows, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("records must be (a, y, b) triples")
    log = RoundLog(arr[:, 0], arr[:, 1], arr[:, 2])
    return log.a, log.y, log.b


def estimate_witness(
    records: RoundLog | Iterable[RoundRecord],
    confidence: float,
) -> EstimationReport:
    """Empirical witness estimate with a one-sided lower confidence bound.

    ``t_hat`` is the witness of the per-cell outcome-0 frequencies;
    ``t_lower`` subtracts one Hoeffding deviation per cell (union bound
    over the eight cells).  The bound treats rounds as i.i.d.
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence!r}")
    a, y, b = _records_as_columns(records)
    if a.size == 0:
        raise EstimationError("round log is empty")
    idx = a.astype(np.intp) * 2 + y
    total = np.bincount(idx, minlength=8)
    for cell in range(8):
        if total[cell] == 0:
            raise EstimationError(
                f"no rounds observed for cell (a={PREPARATION_LABELS[cell >> 1]}, y={cell & 1})"
            )
    b0 = np.bincount(idx[b == 0], minlength=8)
    e_hat = (b0 / total).reshape(4, 2)
    t_hat = witness_value(e_hat)
    deviation = sum(cell_deviation(int(c), confidence) for c in total)
    return EstimationReport(
        n_rounds=int(a.size),
        counts_total=tuple(tuple(int(v) for v in row) for row in total.reshape(4, 2)),
        counts_b0=tuple(tuple(int(v) for v in row) for row in b0.reshape(4, 2)),
        t_hat=t_hat,
        t_lower=t_hat - deviation,
        confidence=float(confidence),
    )


def certify(
    report: EstimationReport,
    curve: Sequence[CurvePoint],
    *,
    zero_tolerance: float = 1e-6,
) -> float:
    """Certified min-entropy per round for ``report`` under ``curve``.

    Looks up ``report.t_lower`` — never ``t_hat`` — by linear
    interpolation over the curve's targets.  Bounds at or below the
    classical value certify nothing, and anything below the curve's
    positivity threshold (the smallest target whose rate exceeds
    ``zero_tolerance``) is clamped to exactly zero rather than
    interpolated.  Bounds above the qubit maximum are evaluated there;
    more than ``1e-6`` past it raises :class:`CertificationError`.
    """
    points = sorted(curve, key=lambda p: p.t_target)
    if not points:
        raise ValueError("curve is empty")
    ts = np.array([p.t_target for p in points])
    hs = np.array([p.h_min for p in points])
    qb = quantum_bound()
    if ts[0] > 2.0 + 1e-9 or ts[-1] < qb - 1e-9:
        raise ValueError(
            f"curve must cover [2, 2*sqrt(2)], got [{ts[0]:.6g}, {ts[-1]:.6g}]"
        )
    t = report.t_lower
    if t > qb + 1e-6:
        raise CertificationError(
            f"witness lower bound {t:.6f} exceeds the qubit maximum {qb:.6f}"
        )
    if t <= 2.0:
        return 0.0
    positive = ts[hs > zero_tolerance]
    if positive.size == 0 or t < positive[0]:
        return 0.0
    value = float(np.interp(min(t, qb), ts, hs))
    # The true rate curve is non-decreasing; capping at the endpoint keeps
    # that safety property even for unpolished input curves.
    return min(value, float(hs[-1]))


def with_certification(
    report: EstimationReport,
    curve: Sequence[CurvePoint],
    *,
    zero_tolerance: float = 1e-6,
) -> EstimationReport:
    """Copy of ``report`` with the certified rate filled in from ``curve``."""
    rate = certify(report, curve, zero_tolerance=zero_tolerance)
    return replace(report, h_min_certified=rate)


def _check_extraction_args(input_length: int, min_entropy_rate: float, security_parameter: float) -> None:
    if input_length < 1:
        raise ValueError(f"input length must be positive, got {input_length!r}")
    if not math.isfinite(min_entropy_rate) or not 0.0 <= min_entropy_rate <= 1.0:
        raise ValueError(f"min-entropy rate must lie in [0, 1], got {min_entropy_rate!r}")
    if not 0.0 < security_parameter < 1.0:
        raise ValueError(
            f"security parameter must lie in (0, 1), got {security_parameter!r}"
        )


def extraction_output_length(
    input_length: int,
    min_entropy_rate: float,
    security_parameter: float,
) -> int:
    """Leftover-hash output budget ``max(0, floor(n h - 2 log2(1/eps)))``."""
    _check_extraction_args(input_length, min_entropy_rate, security_parameter)
    budget = input_length * min_entropy_rate - 2.0 * math.log2(1.0 / security_parameter)
    return max(0, math.floor(budget))


@dataclass(frozen=True, eq=False)
class ExtractionParams:
    """Inputs of the seeded linear extractor.

    ``seed`` supplies the ``input_length + output_length - 1`` bits that
    define a diagonal-constant binary matrix; the output length follows
    the leftover-hash budget and is never negative.
    """

    input_length: int
    min_entropy_rate: float
    security_parameter: float
    seed: np.ndarray

    def __post_init__(self) -> None:
        n = operator.index(self.input_length)
        h = float(self.min_entropy_rate)
        eps = float(self.security_parameter)
        _check_extraction_args(n, h, eps)
        m = extraction_output_length(n, h, eps)
        seed = np.ascontiguousarray(self.seed, dtype=np.uint8)
        if seed.ndim != 1 or seed.size != n + m - 1:
            raise ValueError(
                f"seed must hold input_length + output_length - 1 = {n + m - 1} bits, "
                f"got {seed.size}"
            )
        if seed.size and seed.max() > 1:
            raise ValueError("seed entries must be bits")
        seed.setflags(write=False)
        object.__setattr__(self, "input_length", n)
        object.__setattr__(self, "min_entropy_rate", h)
        object.__setattr__(self, "security_parameter", eps)
        object.__setattr__(self, "seed", seed)

    @property
    def output_length(self) -> int:
        return extraction_output_length(
            self.input_length, self.min_entropy_rate, self.security_parameter
        )


def toeplitz_seed_bits(input_length: int, output_length: int, seed: int) -> np.ndarray:
    """Expand a 64-bit integer into the extractor's seed-bit string.

    Uses a counter-based stream disjoint from round sampling, so one
    integer seed may drive a whole run.  Bytes are taken big-endian per
    64-bit word, making the bit string identical across platforms.
    """
    seed = _check_seed(seed)
    count = input_length + output_length - 1
    if count <= 0:
        return np.zeros(0, dtype=np.uint8)
    n_words = -(-count // 64)
    blocks = -(-n_words // 4)
    words = _philox_words(seed, _STREAM_TOEPLITZ, 0, blocks).reshape(-1)[:n_words]
    bits = np.unpackbits(words.astype(">u8").view(np.uint8))
    return np.ascontiguousarray(bits[:count])


def extract_bits(raw: np.ndarray | Sequence[int], params: ExtractionParams) -> np.ndarray:
    """Apply the seed-defined binary matrix to ``raw`` over GF(2).

    Row ``j`` of the matrix reads ``seed[n-1+j], seed[n-2+j], ...`` —
    constant along diagonals — so the whole product is one convolution.
    It runs in floating point through an FFT; every coefficient is an
    integer far below 2**53, and a residual check guards the rounding.
    """
    x = np.ascontiguousarray(raw, dtype=np.uint8)
    if x.ndim != 1 or x.size != params.input_length:
        raise ValueError(
            f"raw must hold exactly input_length = {params.input_length} bits, got {x.size}"
        )
    if x.size and x.max() > 1:
        raise ValueError("raw entries must be bits")
    m = params.output_length
    if m == 0:
        return np.zeros(0, dtype=np.uint8)
    n = params.input_length
    conv = fftconvolve(x.astype(np.float64), params.seed.astype(np.float64))
    window = conv[n - 1 : n - 1 + m]
    rounded = np.rint(window)
    residual = float(np.max(np.abs(window - rounded)))
    if residual > 1e-3:
        raise RuntimeError(
            f"convolution drifted from integers (residual {residual:.3g}); refusing to round"
        )
    return (rounded.astype(np.int64) & 1).astype(np.uint8)


def pack_bits_msb_first(bits: np.ndarray | Sequence[int]) -> bytes:
    """Pack a bit string into bytes, first bit highest in the first byte.

    A final partial byte is zero-padded; callers record the valid bit
    count separately.
    """
    arr = np.ascontiguousarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bits must be one-dimensional")
    if arr.size == 0:
        return b""
    if arr.max() > 1:
        raise ValueError("entries must be bits")
    return np.packbits(arr).tobytes()


def qrac_preset() -> Device:
    """Device encoding two bits in one qubit at the optimal trade-off.

    The four preparations sit on a single great circle at 45-degree
    steps; the first measurement reads the computational basis, the
    second the conjugate one.  The resulting table attains the qubit
    maximum of the witness with every cell at ``cos^2(pi/8)`` or
    ``sin^2(pi/8)``.
    """
    quarter = math.pi / 4
    preparations = (
        PureQubit(quarter, 0.0),
        PureQubit(quarter, math.pi),
        PureQubit(3 * quarter, 0.0),
        PureQubit(3 * quarter, math.pi),
    )
    return Device(preparations, _preset_measurements())


def bb84_preset() -> Device:
    """Four conjugate-basis preparations, as used for key distribution.

    Reaches only the classical witness value 2, so the protocol certifies
    no randomness from it — useful as a negative control.
    """
    half = math.pi / 2
    preparations = (
        PureQubit(0.0, 0.0),
        PureQubit(half, math.pi),
        PureQubit(half, 0.0),
        PureQubit(math.pi, 0.0),
    )
    return Device(preparations, _preset_measurements())


def _preset_measurements() -> tuple[BinaryMeasurement, BinaryMeasurement]:
    return (
        BinaryMeasurement(0.0, 0.0, fixed_computational=True),
        BinaryMeasurement(math.pi / 2, 0.0),
    )
