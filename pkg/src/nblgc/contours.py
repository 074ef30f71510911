"""Non-binary gradient contours over the 8-pixel ring of a 3x3 window.

Each contour sums absolute gray-level differences along closed loops
over the ring; the center pixel never participates. The single loop
(g1) walks adjacent ring pixels. The double loop (g2) is the sum of
two interleaved stride-2 loops: g20 over the even ring positions (the
corners) and g21 over the odd ones (the edge midpoints). The triple
loop (g3) strides by 3 and visits every ring pixel exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .infoset import Window3x3

# (a, b) index pairs into the ring; each loop term is |ring[a] - ring[b]|
_G1_PAIRS = ((7, 0), (6, 7), (5, 6), (4, 5), (3, 4), (2, 3), (1, 2), (0, 1))
_G20_PAIRS = ((6, 0), (4, 6), (2, 4), (0, 2))
_G21_PAIRS = ((7, 1), (5, 7), (3, 5), (1, 3))
_G3_PAIRS = ((5, 0), (2, 5), (7, 2), (4, 7), (1, 4), (6, 1), (3, 6), (0, 3))


class ContourVariant(Enum):
    """Which loop's contour value feeds the block feature."""

    G1 = "g1"
    G2 = "g2"
    G3 = "g3"

    @classmethod
    def from_string(cls, name: str) -> "ContourVariant":
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown contour variant {name!r}; choose one of {choices}") from None


@dataclass(frozen=True)
class ContourValues:
    """All contour values of one window; g2 is exactly g20 + g21."""

    g1: float
    g20: float
    g21: float
    g2: float
    g3: float

    def __post_init__(self):
        if self.g2 != self.g20 + self.g21:
            raise ValueError("g2 must equal g20 + g21 exactly")


def _loop_sum(ring: tuple[float, ...], pairs) -> float:
    total = 0.0
    for a, b in pairs:
        total += abs(ring[a] - ring[b])
    return total


def contour_g1(window: Window3x3) -> float:
    """Single loop: absolute differences of adjacent ring pixels."""
    return _loop_sum(window.ring, _G1_PAIRS)


def contour_g2(window: Window3x3) -> tuple[float, float, float]:
    """Double loop: (g20, g21, g20 + g21).

    g20 runs over ring positions 0,2,4,6; g21 over 1,3,5,7.
    """
    g20 = _loop_sum(window.ring, _G20_PAIRS)
    g21 = _loop_sum(window.ring, _G21_PAIRS)
    return g20, g21, g20 + g21


def contour_g3(window: Window3x3) -> float:
    """Triple loop: stride-3 walk visiting every ring pixel once."""
    return _loop_sum(window.ring, _G3_PAIRS)


def contour_values(window: Window3x3) -> ContourValues:
    g20, g21, g2 = contour_g2(window)
    return ContourValues(contour_g1(window), g20, g21, g2, contour_g3(window))


def contour_value(window: Window3x3, variant: ContourVariant) -> float:
    """The contour value selected by the variant (g2 = g20 + g21)."""
    if variant is ContourVariant.G1:
        return contour_g1(window)
    if variant is ContourVariant.G2:
        return contour_g2(window)[2]
    return contour_g3(window)
