"""Pure qubit states, binary projective measurements and the Born rule.

States are parametrized by Bloch angles: ``|phi> = cos(theta/2) |0> +
exp(i eta) sin(theta/2) |1>`` with ``theta`` in ``[0, pi]`` and ``eta``
in ``[0, 2 pi)``.  Out-of-range angles are rejected, never wrapped
silently.  A binary measurement is the projector pair onto such a state
and its orthogonal complement; the first measurement of a device is
conventionally pinned to the computational basis.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .witness import BehaviorTable

__all__ = [
    "TWO_PI",
    "ComplexAmplitudePair",
    "PureQubit",
    "BinaryMeasurement",
    "Device",
    "state_from_angles",
    "projector_p0",
    "projectors",
    "born_probability",
    "behavior_table",
]

TWO_PI = 2.0 * math.pi


def _check_angles(theta: float, eta: float) -> None:
    if not (math.isfinite(theta) and math.isfinite(eta)):
        raise ValueError("angles must be finite")
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
    if not 0.0 <= eta < TWO_PI:
        raise ValueError(f"eta must lie in [0, 2*pi), got {eta!r}")


class ComplexAmplitudePair(NamedTuple):
    """Amplitudes of a qubit state in the computational basis."""

    a0: complex
    a1: complex

    def norm(self) -> float:
        return math.sqrt(abs(self.a0) ** 2 + abs(self.a1) ** 2)

    def density_matrix(self) -> np.ndarray:
        """Rank-one projector ``|phi><phi|`` as a (2, 2) complex array."""
        vec = np.array([self.a0, self.a1])
        return np.outer(vec, vec.conj())


def state_from_angles(theta: float, eta: float) -> ComplexAmplitudePair:
    """Amplitudes ``(cos(theta/2), exp(i eta) sin(theta/2))``.

    Raises ``ValueError`` when ``theta`` is outside ``[0, pi]`` or
    ``eta`` outside ``[0, 2 pi)``.
    """
    _check_angles(theta, eta)
    return ComplexAmplitudePair(
        complex(math.cos(theta / 2.0)),
        cmath.exp(1j * eta) * math.sin(theta / 2.0),
    )


@dataclass(frozen=True)
class PureQubit:
    """Pure state identified by its Bloch angles."""

    theta: float
    eta: float

    def __post_init__(self) -> None:
        _check_angles(self.theta, self.eta)

    def amplitudes(self) -> ComplexAmplitudePair:
        return state_from_angles(self.theta, self.eta)

    def density_matrix(self) -> np.ndarray:
        return self.amplitudes().density_matrix()

    def bloch_vector(self) -> np.ndarray:
        """Cartesian unit vector (sin t cos e, sin t sin e, cos t)."""
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.eta), st * math.sin(self.eta), math.cos(self.theta)]
        )


@dataclass(frozen=True)
class BinaryMeasurement:
    """Projective binary measurement ``{P0, I - P0}``.

    With ``fixed_computational`` set, ``P0 = |0><0|`` regardless of the
    angles; the angle fields are still validated so that configurations
    stay well formed.
    """

    theta: float
    eta: float
    fixed_computational: bool = False

    def __post_init__(self) -> None:
        _check_angles(self.theta, self.eta)

    def axis_state(self) -> PureQubit:
        """State whose projector is the outcome-0 element."""
        if self.fixed_computational:
            return PureQubit(0.0, 0.0)
        return PureQubit(self.theta, self.eta)


def projector_p0(measurement: BinaryMeasurement) -> np.ndarray:
    """Outcome-0 projector of ``measurement`` as a (2, 2) complex array."""
    if measurement.fixed_computational:
        return np.array([[1.0 + 0.0j, 0.0j], [0.0j, 0.0j]])
    return state_from_angles(measurement.theta, measurement.eta).density_matrix()


def projectors(measurement: BinaryMeasurement) -> tuple[np.ndarray, np.ndarray]:
    """Both projectors ``(P0, I - P0)``."""
    p0 = projector_p0(measurement)
    return p0, np.eye(2, dtype=complex) - p0


def born_probability(
    state: PureQubit | ComplexAmplitudePair,
    measurement: BinaryMeasurement,
    b: int,
) -> float:
    """Outcome probability ``tr(rho P_b)`` for ``b`` in ``{0, 1}``."""
    if b not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {b!r}")
    rho = state.density_matrix()
    p0 = projector_p0(measurement)
    p = p0 if b == 0 else np.eye(2, dtype=complex) - p0
    value = float(np.trace(rho @ p).real)
    # Trace of a projector sandwich lies in [0, 1] up to rounding.
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class Device:
    """Four preparations and two binary measurements."""

    preparations: tuple[PureQubit, ...]
    measurements: tuple[BinaryMeasurement, ...]

    def __post_init__(self) -> None:
        preps = tuple(self.preparations)
        meas = tuple(self.measurements)
        if len(preps) != 4:
            raise ValueError(f"device needs exactly 4 preparations, got {len(preps)}")
        if len(meas) != 2:
            raise ValueError(f"device needs exactly 2 measurements, got {len(meas)}")
        object.__setattr__(self, "preparations", preps)
        object.__setattr__(self, "measurements", meas)


def behavior_table(device: Device) -> BehaviorTable:
    """Born-rule table ``E[a, y] = P(b = 0 | a, y)`` of ``device``."""
    e = np.empty((4, 2))
    for a, prep in enumerate(device.preparations):
        for y, meas in enumerate(device.measurements):
            e[a, y] = born_probability(prep, meas, 0)
    return BehaviorTable(e)
