"""Fuzzifier and membership functions over 3x3 pixel windows.

The fuzzifier measures a window's spread around a reference value (the
window average, maximum, or minimum): the square root of the ratio of
summed fourth-power deviations to summed squared deviations, over all
nine values. Memberships map each value's deviation into (0, 1]; the
center membership divides the center pixel by the fuzzifier and is the
weight the feature stage applies per block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

_SQRT2 = math.sqrt(2.0)


class FuzzifierRef(Enum):
    """Reference statistic the deviations are taken against."""

    AVERAGE = "avg"
    MAXIMUM = "max"
    MINIMUM = "min"

    @classmethod
    def from_string(cls, name: str) -> "FuzzifierRef":
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown reference {name!r}; choose one of {choices}") from None


@dataclass(frozen=True)
class Window3x3:
    """A 3x3 block: the center pixel plus its 8-neighbor ring.

    Ring order is fixed clockwise from the top-left neighbor:
    index 0..7 = top-left, top-center, top-right, middle-right,
    bottom-right, bottom-center, bottom-left, middle-left.
    All nine values must lie in [0, 1].
    """

    center: float
    ring: tuple[float, ...]

    def __post_init__(self):
        ring = tuple(float(v) for v in self.ring)
        if len(ring) != 8:
            raise ValueError(f"ring must hold exactly 8 values, got {len(ring)}")
        center = float(self.center)
        for v in (center, *ring):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"window value {v!r} outside [0, 1]")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "ring", ring)

    @property
    def values(self) -> tuple[float, ...]:
        """All nine values, center first, then the ring in its fixed order."""
        return (self.center, *self.ring)


def reference_value(window: Window3x3, ref: FuzzifierRef = FuzzifierRef.AVERAGE) -> float:
    """The reference gray level deviations are measured against."""
    vals = window.values
    if ref is FuzzifierRef.AVERAGE:
        return sum(vals) / 9.0
    if ref is FuzzifierRef.MAXIMUM:
        return max(vals)
    return min(vals)


def fuzzifier(window: Window3x3, ref: FuzzifierRef = FuzzifierRef.AVERAGE) -> float:
    """Spread of the nine window values around the reference.

    sqrt(sum(d^4) / sum(d^2)) over deviations d = reference - value.
    Zero for a constant window (every deviation vanishes).
    """
    vals = window.values
    if min(vals) == max(vals):
        # the averaging reference is not exact in floating point, so a
        # constant window needs catching before the deviations
        return 0.0
    r = reference_value(window, ref)
    sum_sq = 0.0
    sum_quad = 0.0
    for v in vals:
        d = r - v
        d2 = d * d
        sum_sq += d2
        sum_quad += d2 * d2
    if sum_sq == 0.0:
        return 0.0
    return math.sqrt(sum_quad / sum_sq)


def membership_exponential(
    window: Window3x3, ref: FuzzifierRef = FuzzifierRef.AVERAGE
) -> tuple[float, ...]:
    """exp(-|value - reference| / fuzzifier^2) for each of the nine values.

    Order follows Window3x3.values (center first). All ones for a
    constant window, where the fuzzifier degenerates to zero.
    """
    fh = fuzzifier(window, ref)
    if fh == 0.0:
        return (1.0,) * 9
    r = reference_value(window, ref)
    fh2 = fh * fh
    return tuple(math.exp(-abs(v - r) / fh2) for v in window.values)


def membership_gaussian(
    window: Window3x3, ref: FuzzifierRef = FuzzifierRef.AVERAGE
) -> tuple[float, ...]:
    """exp(-((value - reference) / (sqrt(2) * fuzzifier))^2) per value.

    Same ordering and constant-window convention as the exponential form.
    """
    fh = fuzzifier(window, ref)
    if fh == 0.0:
        return (1.0,) * 9
    r = reference_value(window, ref)
    scale = _SQRT2 * fh
    out = []
    for v in window.values:
        z = (v - r) / scale
        out.append(math.exp(-(z * z)))
    return tuple(out)


def membership_center(window: Window3x3, ref: FuzzifierRef = FuzzifierRef.AVERAGE) -> float:
    """Center pixel divided by the fuzzifier; zero for a constant window.

    Invariant under uniform scaling of the whole window when the
    reference is the window average (both scale linearly).
    """
    fh = fuzzifier(window, ref)
    if fh == 0.0:
        return 0.0
    return window.center / fh
