"""Real-valued polarizer algebra: amplitudes through ideal linear polarizers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidInputError

__all__ = [
    "Angle",
    "FieldAmplitude",
    "CascadeSpec",
    "normalize_axis",
    "apply_polarizer",
    "cascade_intensity_fraction",
    "conditional_probability",
]


def normalize_axis(radians: float) -> float:
    """Map an axis angle onto ``[0, pi)``.

    Polarizer axes are unoriented, so ``a`` and ``a + pi`` describe the same axis.
    """
    x = math.fmod(float(radians), math.pi)
    if x < 0.0:
        x += math.pi
    # fmod of a tiny negative number can round up to exactly pi
    if x >= math.pi:
        x = 0.0
    return x


@dataclass(frozen=True)
class Angle:
    """Polarizer axis in radians.

    ``raw`` keeps the value as given (trigonometry is periodic, so using it is
    equivalent); ``radians`` is the canonical form used for equality and hashing.
    """

    raw: float

    def __post_init__(self):
        if not math.isfinite(self.raw):
            raise InvalidInputError(f"angle must be finite, got {self.raw!r}")

    @property
    def radians(self) -> float:
        return normalize_axis(self.raw)

    @property
    def degrees(self) -> float:
        return math.degrees(self.radians)

    @classmethod
    def from_degrees(cls, deg: float) -> "Angle":
        return cls(math.radians(deg))

    def _key(self) -> float:
        # rounded so that a and a + pi compare equal despite float error
        k = round(self.radians, 12)
        return 0.0 if k >= round(math.pi, 12) else k

    def __eq__(self, other):
        if isinstance(other, Angle):
            return self._key() == other._key()
        return NotImplemented

    def __hash__(self):
        return hash(self._key())

    def __float__(self):
        return self.raw


def _as_radians(a) -> float:
    return a.raw if isinstance(a, Angle) else float(a)


@dataclass(frozen=True)
class FieldAmplitude:
    magnitude: float
    axis: Angle

    def __post_init__(self):
        if not isinstance(self.axis, Angle):
            object.__setattr__(self, "axis", Angle(float(self.axis)))
        if not math.isfinite(self.magnitude):
            raise InvalidInputError(f"field magnitude must be finite, got {self.magnitude!r}")
        if self.magnitude < 0:
            raise InvalidInputError(f"field magnitude must be nonnegative, got {self.magnitude!r}")

    @property
    def intensity(self) -> float:
        return self.magnitude * self.magnitude


@dataclass(frozen=True)
class CascadeSpec:
    initial_axis: Angle
    stages: tuple[Angle, ...]

    def __post_init__(self):
        if not isinstance(self.initial_axis, Angle):
            object.__setattr__(self, "initial_axis", Angle(float(self.initial_axis)))
        stages = tuple(s if isinstance(s, Angle) else Angle(float(s)) for s in self.stages)
        if not stages:
            raise InvalidInputError("cascade needs at least one polarizer stage")
        object.__setattr__(self, "stages", stages)


def apply_polarizer(field: FieldAmplitude, setting: Angle | float) -> FieldAmplitude:
    """Pass ``field`` through an ideal polarizer: project and rotate onto ``setting``."""
    if not math.isfinite(field.magnitude):
        raise InvalidInputError("field magnitude must be finite")
    s = _as_radians(setting)
    m = field.magnitude * abs(math.cos(s - field.axis.raw))
    return FieldAmplitude(m, setting if isinstance(setting, Angle) else Angle(s))


def cascade_intensity_fraction(spec: CascadeSpec | None = None, *,
                               initial_axis: float | None = None,
                               stages: Sequence[float] | None = None) -> float:
    """Transmitted over input intensity for a chain of polarizers.

    Either pass a :class:`CascadeSpec` or the keyword pair ``initial_axis``/``stages``.
    """
    if spec is None:
        if stages is None or len(stages) == 0:
            raise InvalidInputError("cascade needs at least one polarizer stage")
        spec = CascadeSpec(Angle(float(initial_axis or 0.0)), tuple(stages))
    frac = 1.0
    prev = spec.initial_axis.raw
    for stage in spec.stages:
        c = math.cos(stage.raw - prev)
        frac *= c * c
        prev = stage.raw
    return frac


def conditional_probability(alpha: Angle | float, beta: Angle | float) -> float:
    """Probability that the second measurement differs, given the first: sin^2(beta - alpha)."""
    d = _as_radians(beta) - _as_radians(alpha)
    s = math.sin(d)
    return s * s
