"""Exact two-spinon dynamical correlation function of the XXX chain."""

from .errors import (
    ConvergenceFailure,
    DegenerateWindow,
    DivergentWeight,
    DomainError,
    OutsideBand,
    QuadratureFailure,
    SizeError,
    TwoSpinonError,
)
from .kinematics import (
    BandWindow,
    KinematicPoint,
    SpinonPair,
    band_boundaries,
    invert_kinematics,
    spinon_energy,
    spinon_momentum,
)

__version__ = "0.1.0"

__all__ = [
    "BandWindow",
    "ConvergenceFailure",
    "DegenerateWindow",
    "DivergentWeight",
    "DomainError",
    "KinematicPoint",
    "OutsideBand",
    "QuadratureFailure",
    "SizeError",
    "SpinonPair",
    "TwoSpinonError",
    "band_boundaries",
    "invert_kinematics",
    "spinon_energy",
    "spinon_momentum",
]
