import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from qsatlink.consts import NUMERIC_TOLERANCE
from qsatlink.exceptions import InvalidArgumentException


@dataclass(frozen=True, eq=False)
class PolarizationState:
    """
    Normalized Jones vector in the {|H>, |V>} basis.

    Two states compare equal when they differ only by a global phase.
    """

    amplitude_h: complex
    """Amplitude along |H>."""
    amplitude_v: complex
    """Amplitude along |V>."""

    def __post_init__(self):
        norm = abs(self.amplitude_h) ** 2 + abs(self.amplitude_v) ** 2
        if not math.isfinite(norm) or abs(norm - 1.0) > NUMERIC_TOLERANCE:
            raise InvalidArgumentException(
                f"Polarization state is not normalized: |h|^2 + |v|^2 = {norm}"
            )
        object.__setattr__(self, "amplitude_h", complex(self.amplitude_h))
        object.__setattr__(self, "amplitude_v", complex(self.amplitude_v))

    @classmethod
    def from_vector(cls, vector, normalize: bool = False) -> "PolarizationState":
        """
        Build a state from any length-2 complex sequence.

        :param vector: Jones vector
        :param normalize: Rescale the vector to unit norm instead of rejecting it

        :return: Polarization state
        """
        v = np.asarray(vector, dtype=complex).reshape(-1)
        if v.shape != (2,):
            raise InvalidArgumentException(
                f"Jones vector must have 2 components, got {v.shape[0]}"
            )
        if normalize:
            norm = float(np.linalg.norm(v))
            if norm == 0.0 or not math.isfinite(norm):
                raise InvalidArgumentException("Cannot normalize a zero Jones vector")
            v = v / norm
        return cls(complex(v[0]), complex(v[1]))

    @classmethod
    def from_angles(cls, alpha: float, phase: float = 0.0) -> "PolarizationState":
        """
        State (cos alpha, e^{i phase} sin alpha).
        """
        return cls(math.cos(alpha), complex(math.cos(phase), math.sin(phase)) * math.sin(alpha))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amplitude_h, self.amplitude_v], dtype=complex)

    def overlap(self, other: "PolarizationState") -> complex:
        """
        Inner product <self|other>.
        """
        return complex(np.vdot(self.vector, other.vector))

    def fidelity(self, other: "PolarizationState") -> float:
        """
        |<self|other>|, equal to 1 for states that differ only by a global phase.
        """
        return abs(self.overlap(other))

    def orthogonal(self) -> "PolarizationState":
        """
        The state orthogonal to this one, (-conj(v), conj(h)).
        """
        return PolarizationState(
            -self.amplitude_v.conjugate(), self.amplitude_h.conjugate()
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolarizationState):
            return NotImplemented
        return abs(self.fidelity(other) - 1.0) <= 1e-9

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return f"({_format_complex(self.amplitude_h)}, {_format_complex(self.amplitude_v)})"


@dataclass(frozen=True, eq=False)
class PolarizationOperator:
    """
    Unitary 2x2 Jones matrix acting on column vectors in the {|H>, |V>} basis.
    """

    entries: np.ndarray
    """2x2 complex matrix."""

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidArgumentException(f"Jones matrix must be 2x2, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidArgumentException("Jones matrix has non-finite entries")
        if not np.allclose(m.conj().T @ m, np.eye(2), rtol=0.0, atol=NUMERIC_TOLERANCE):
            raise InvalidArgumentException("Jones matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def __matmul__(self, other):
        if isinstance(other, PolarizationOperator):
            return PolarizationOperator(self.entries @ other.entries)
        if isinstance(other, PolarizationState):
            return PolarizationState.from_vector(self.entries @ other.vector)
        return NotImplemented

    @property
    def adjoint(self) -> "PolarizationOperator":
        return PolarizationOperator(self.entries.conj().T)

    def is_close(self, other: "PolarizationOperator", atol: float = NUMERIC_TOLERANCE) -> bool:
        """
        Entrywise comparison, sensitive to global phase.
        """
        return bool(np.allclose(self.entries, other.entries, rtol=0.0, atol=atol))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolarizationOperator):
            return NotImplemented
        return self.is_close(other)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class TelescopePose:
    """
    Pointing of the ground telescope.
    """

    azimuth: float
    """Azimuth in radians, in [0, 2 pi)."""
    elevation: float
    """Elevation in radians, in [0, pi/2]."""

    def __post_init__(self):
        if not (math.isfinite(self.azimuth) and math.isfinite(self.elevation)):
            raise InvalidArgumentException("Telescope pose angles must be finite")
        if not 0.0 <= self.elevation <= math.pi / 2:
            raise InvalidArgumentException(
                f"Elevation {self.elevation} rad outside [0, pi/2]"
            )
        if not 0.0 <= self.azimuth < 2 * math.pi:
            raise InvalidArgumentException(
                f"Azimuth {self.azimuth} rad outside [0, 2 pi)"
            )

    @classmethod
    def from_degrees(cls, azimuth: float, elevation: float) -> "TelescopePose":
        return cls(math.radians(azimuth) % (2 * math.pi), math.radians(elevation))


AnalyzerBasis = Tuple[PolarizationState, PolarizationState]
"""
Pair of orthonormal states measured by the two detectors behind the PBS (channel 0, channel 1).
"""


def _format_complex(z: complex) -> str:
    if abs(z.imag) < 1e-12:
        return f"{z.real:.6g}"
    if abs(z.real) < 1e-12:
        return f"{z.imag:.6g}i"
    return f"{z.real:.6g}{z.imag:+.6g}i"
