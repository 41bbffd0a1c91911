"""XXX spinon dispersion and two-spinon band geometry.

Energies are in the units fixed by e(beta) = pi / cosh(beta); momenta live in
the zone [0, 2*pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWindow, DomainError, OutsideBand

TWO_PI = 2.0 * math.pi
# pi - float(pi); math.sin reduces against the true pi, so distances to pi must too
PI_LO = 1.2246467991473532e-16


@dataclass(frozen=True)
class KinematicPoint:
    """Energy transfer ``w`` and momentum transfer ``k``."""

    w: float
    k: float

    def __post_init__(self):
        if not (math.isfinite(self.w) and math.isfinite(self.k)):
            raise DomainError(f"non-finite kinematic point ({self.w}, {self.k})")
        if not 0.0 <= self.k <= TWO_PI:
            raise DomainError(f"k={self.k} outside the zone [0, 2pi]")
        if self.w < 0.0:
            raise DomainError(f"w={self.w} must be non-negative")


@dataclass(frozen=True)
class BandWindow:
    w_l: float
    w_u: float

    @property
    def width(self) -> float:
        return self.w_u - self.w_l

    def contains(self, w: float) -> bool:
        """Open-interval membership; the edges themselves are excluded."""
        return self.w_l < w < self.w_u


@dataclass(frozen=True)
class SpinonPair:
    """Unordered rapidity pair, stored canonically with beta1 <= beta2."""

    beta1: float
    beta2: float

    def __post_init__(self):
        if not (math.isfinite(self.beta1) and math.isfinite(self.beta2)):
            raise DomainError("rapidities must be finite")
        if self.beta1 > self.beta2:
            b1, b2 = self.beta2, self.beta1
            object.__setattr__(self, "beta1", b1)
            object.__setattr__(self, "beta2", b2)

    @property
    def difference(self) -> float:
        """Non-negative rapidity difference, the argument of |A_-|^2."""
        return self.beta2 - self.beta1


def spinon_energy(beta):
    """pi / cosh(beta); accepts scalars or arrays."""
    return np.pi / np.cosh(beta)


def spinon_momentum(beta):
    """Unique p in (-pi, 0) with cot(p) = sinh(beta).

    Written as -pi/2 - gd(beta) with the Gudermannian gd = arctan(sinh), which
    is monotone decreasing and never needs the cot branch.
    """
    return -0.5 * np.pi - np.arctan(np.sinh(beta))


def _check_zone(k: float) -> None:
    if not (math.isfinite(k) and 0.0 <= k <= TWO_PI):
        raise DomainError(f"k={k} outside the zone [0, 2pi]")


def band_boundaries(k: float) -> BandWindow:
    """Lower (pi |sin k|) and upper (2 pi sin(k/2)) edges of the two-spinon band."""
    _check_zone(k)
    return BandWindow(w_l=math.pi * abs(math.sin(k)), w_u=TWO_PI * math.sin(0.5 * k))


def _asinh(x: float) -> float:
    # log form, exact in sign for large |x|
    return math.copysign(math.log(abs(x) + math.sqrt(x * x + 1.0)), x)


def invert_kinematics(pt: KinematicPoint) -> SpinonPair:
    """Rapidities of the two spinons carrying total energy ``w`` and momentum ``k``.

    Closed form: p1,2 = -k/2 +- D with cos D = w / (2 pi sin(k/2)).  Both
    momenta stay in (-pi, 0) exactly when w is strictly inside the band.
    """
    k, w = pt.k, pt.w
    if k == 0.0 or k == TWO_PI:
        raise DegenerateWindow(f"two-spinon window is empty at k={k}")
    band = band_boundaries(k)
    if not band.contains(w):
        raise OutsideBand(f"w={w} not inside ({band.w_l}, {band.w_u}) at k={k}")
    return rapidities_from_offsets(k, w - band.w_l, band.w_u - w)


def rapidities_from_offsets(k: float, above_lower: float, below_upper: float) -> SpinonPair:
    """Inversion parameterized by the distances of w from both band edges.

    Near an edge the naive route subtracts nearly equal angles.  Here the
    angle D comes from 1 - cos D = (w_u - w) / w_u, and the gap eps = h - D to
    the lower edge, with h = min(k/2, pi - k/2), from

        sin(eps) sin(h + D) = (w - w_l)(w + w_l) / w_u^2,

    so callers who know the offsets exactly lose no digits at either edge.
    """
    if not (0.0 < k < TWO_PI):
        raise DegenerateWindow(f"two-spinon window is empty at k={k}")
    if not (above_lower > 0.0 and below_upper > 0.0):
        raise OutsideBand(f"offsets ({above_lower}, {below_upper}) not inside the band at k={k}")
    band = band_boundaries(k)
    w = band.w_l + above_lower
    d = 2.0 * math.asin(min(1.0, math.sqrt(0.5 * below_upper / band.w_u)))
    below_pi = (math.pi - k) + PI_LO
    h = 0.5 * k if below_pi >= 0.0 else (math.pi - 0.5 * k) + PI_LO
    eps = h - d
    if eps < 0.5 * h:
        x = above_lower * (w + band.w_l) / (band.w_u * band.w_u * math.sin(h + d))
        eps = math.asin(min(1.0, x))
    if not eps > 0.0:
        raise OutsideBand(f"w={w} indistinguishable from the lower edge at k={k}")
    # one spinon sits eps away from a zone edge, the other |pi - k| + eps away
    # from the opposite edge; cot has period pi so only those distances matter
    near = _asinh(1.0 / math.tan(eps))
    far = _asinh(1.0 / math.tan(abs(below_pi) + eps))
    if below_pi >= 0.0:
        return SpinonPair(-near, far)
    return SpinonPair(-far, near)
