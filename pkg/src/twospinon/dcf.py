"""Two-spinon dynamical correlation function S_2^{+-}(w, k) of the XXX chain.

    S_2^{+-}(w, k) = C |A_-(beta1 - beta2)|^2 / sqrt((2 pi sin(k/2))^2 - w^2)

inside the open band pi |sin k| < w < 2 pi sin(k/2) and zero elsewhere, with
C = ``prefactor_constant()``.  Values are reported exactly in that
normalization, with no 2 pi or per-site factors folded in; the transverse and
longitudinal components are S^xx = S^yy = S^zz = 4 S^{+-}.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DivergentWeight, DomainError, OutsideBand, QuadratureFailure, TwoSpinonError
from .formfactor import DEFAULT_SPEC, QuadratureSpec, abs_A_minus_real, prefactor_constant
from .kinematics import TWO_PI, BandWindow, KinematicPoint, band_boundaries, rapidities_from_offsets

NORMALIZATION_NOTE = (
    "S_2^{+-} in the closed-form normalization (energy units e(beta)=pi/cosh(beta)); "
    "S^xx=S^yy=S^zz=4 S^{+-}; integral over w of S equals 2 pi times Lehmann weight "
    "for a per-site-normalized sigma^-_k"
)


@dataclass(frozen=True)
class DcfValue:
    s_pm: float
    in_band: bool
    beta1: float = math.nan
    beta2: float = math.nan

    @property
    def s_xx(self) -> float:
        return 4.0 * self.s_pm


def s2_pm(pt: KinematicPoint, spec: QuadratureSpec = DEFAULT_SPEC) -> DcfValue:
    """S_2^{+-} at one kinematic point; band edges count as outside."""
    band = band_boundaries(pt.k)
    if pt.k in (0.0, TWO_PI) or not band.contains(pt.w):
        return DcfValue(0.0, False)
    return _s2_from_offsets(pt.k, band, pt.w - band.w_l, band.w_u - pt.w, spec)


def _s2_from_offsets(k: float, band: BandWindow, above: float, below: float, spec) -> DcfValue:
    try:
        pair = rapidities_from_offsets(k, above, below)
    except OutsideBand:
        return DcfValue(0.0, False)
    amp = abs_A_minus_real(pair.difference, spec)
    # w_u^2 - w^2 = (w_u - w)(w_u + w) stays accurate at the upper edge
    root = math.sqrt(below * (2.0 * band.w_u - below))
    return DcfValue(prefactor_constant(spec) * amp / root, True, pair.beta1, pair.beta2)


def s2_components(pt: KinematicPoint, spec: QuadratureSpec = DEFAULT_SPEC):
    """(S^xx, S^yy, S^zz), each exactly four times S^{+-}."""
    v = s2_pm(pt, spec).s_pm
    return 4.0 * v, 4.0 * v, 4.0 * v


# --- grids -------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    k_min: float
    k_max: float
    n_k: int
    w_min: float
    w_max: float
    n_w: int

    def __post_init__(self):
        if self.n_k < 2 or self.n_w < 2:
            raise DomainError("grid counts must be >= 2")
        if not (0.0 <= self.k_min < self.k_max <= TWO_PI):
            raise DomainError("k range must be ordered and inside [0, 2pi]")
        if not (0.0 <= self.w_min < self.w_max):
            raise DomainError("w range must be ordered and non-negative")

    def ks(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.n_k)

    def ws(self) -> np.ndarray:
        return np.linspace(self.w_min, self.w_max, self.n_w)

    def as_dict(self) -> dict:
        return {
            "k_min": self.k_min,
            "k_max": self.k_max,
            "n_k": self.n_k,
            "w_min": self.w_min,
            "w_max": self.w_max,
            "n_w": self.n_w,
        }


@dataclass
class GridResult:
    grid: GridSpec
    spec: QuadratureSpec
    rows: list  # (k, w, s_pm, s_xx), k-major
    failures: list = field(default_factory=list)  # (k, w, message)

    def intensity(self) -> np.ndarray:
        """S^{+-} reshaped to (n_k, n_w)."""
        return np.array([r[2] for r in self.rows]).reshape(self.grid.n_k, self.grid.n_w)


def _grid_row(args):
    k, ws, spec = args
    rows, failures = [], []
    for w in ws:
        try:
            v = s2_pm(KinematicPoint(float(w), float(k)), spec).s_pm
        except TwoSpinonError as exc:
            failures.append((float(k), float(w), str(exc)))
            v = math.nan
        rows.append((float(k), float(w), v, 4.0 * v))
    return rows, failures


def evaluate_grid(grid: GridSpec, spec: QuadratureSpec = DEFAULT_SPEC, workers: int = 1) -> GridResult:
    """Evaluate S on a k-major grid, optionally across worker processes.

    Every point is computed by the same deterministic code path regardless of
    which worker runs it, and rows are reassembled in grid order, so the output
    does not depend on ``workers``.
    """
    ws = [float(w) for w in grid.ws()]
    tasks = [(float(k), ws, spec) for k in grid.ks()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_grid_row, tasks))
    else:
        chunks = [_grid_row(t) for t in tasks]
    rows, failures = [], []
    for r, f in chunks:
        rows.extend(r)
        failures.extend(f)
    return GridResult(grid, spec, rows, failures)


# --- sum rules ---------------------------------------------------------------

_ROUNDOFF_CAP = 1e-5


@dataclass
class SumRuleReport:
    k: float
    fixed_k_weight: float
    abs_error: float
    total_weight: float = math.nan
    metadata: dict = field(default_factory=dict)


def fixed_k_weight(
    k: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    rel_tol: float = 1e-8,
    limit: int = 200,
) -> SumRuleReport:
    """int S_2^{+-}(w, k) dw across the band.

    The substitution w = w_l + (w_u - w_l) sin^2(theta) absorbs the inverse
    square-root growth at the lower edge, leaving only a mild logarithmic
    endpoint behaviour.  At k = pi the lower edge sits at w = 0, where S grows
    like 1/w and the integral does not exist.
    """
    if not 0.0 < k < TWO_PI:
        raise DomainError(f"k={k} must lie strictly inside (0, 2pi)")
    band = band_boundaries(k)
    if band.w_l == 0.0 or k == math.pi:
        raise DivergentWeight("at k = pi the band reaches w = 0 and S ~ 1/w is not integrable")
    width = band.width

    def integrand(theta):
        s, c = math.sin(theta), math.cos(theta)
        value = _s2_from_offsets(k, band, width * s * s, width * c * c, spec).s_pm
        return value * 2.0 * width * s * c

    def log_integrand(t):
        theta = math.exp(t)
        return integrand(theta) * theta

    # near k = pi, S ~ 1/w down to w ~ w_l, i.e. the theta-integrand ~ 1/theta
    # above theta_c = sqrt(w_l / width); each decade is smooth in log(theta)
    theta_c = math.sqrt(band.w_l / width)
    pieces = []
    if theta_c < 0.05:
        # below theta_c the rapidity difference grows like log(1/theta), so the
        # decades continue downward as well
        edges = [theta_c * 1e-6]
        while edges[-1] * 10.0 < 0.5:
            edges.append(edges[-1] * 10.0)
        pieces.append((integrand, 0.0, edges[0]))
        for a, b in zip(edges, edges[1:]):
            pieces.append((log_integrand, math.log(a), math.log(b)))
        pieces.append((integrand, edges[-1], 0.5 * math.pi))
    else:
        pieces.append((integrand, 0.0, 0.5 * math.pi))

    value, err, flagged = 0.0, 0.0, False
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for f, a, b in pieces:
            out = integrate.quad(f, a, b, epsabs=0.0, epsrel=rel_tol, limit=limit, full_output=1)
            value += out[0]
            err += out[1]
            flagged = flagged or len(out) > 3
    # within ~1e-10 of k = pi rounding noise in the form factor can stop QUADPACK
    # short of rel_tol; the achieved error estimate is reported instead
    if flagged and not err <= _ROUNDOFF_CAP * abs(value):
        raise QuadratureFailure(f"fixed-k weight at k={k} not converged (estimate {value!r} +- {err!r})")
    meta = {
        "weight_rel_tol": rel_tol,
        "converged_to_tolerance": not (flagged and err > 10.0 * rel_tol * abs(value)),
        "quadrature": spec.as_dict(),
        "substitution": "w = w_l + (w_u - w_l) sin^2(theta), log(theta) per decade near k = pi",
        "normalization": NORMALIZATION_NOTE,
    }
    return SumRuleReport(k=k, fixed_k_weight=value, abs_error=err, metadata=meta)


def zone_weight(
    spec: QuadratureSpec = DEFAULT_SPEC,
    n_nodes: int = 24,
    y_max: float = 18.0,
    rel_tol: float = 1e-8,
) -> tuple[float, float]:
    """(1/2pi) int_0^{2pi} dk fixed_k_weight(k) and an error estimate.

    By the k -> 2pi - k symmetry only (0, pi) is integrated.  The fixed-k weight
    grows like a power of log(1/(pi - k)) at the zone centre, so the variable is
    y = log(pi / (pi - k)); the y-integrand decays like exp(-y) and is cut at
    ``y_max`` (neglected tail ~ exp(-y_max) y_max^2).  Gauss-Legendre with
    ``n_nodes`` and ``n_nodes // 2`` points gives the value and the error
    estimate.
    """

    def rule(n):
        x, wts = np.polynomial.legendre.leggauss(n)
        y = 0.5 * y_max * (x + 1.0)
        total = 0.0
        for yi, wi in zip(y, wts):
            t = math.pi * math.exp(-yi)
            k = math.pi - t
            if not 0.0 < k < math.pi:
                continue
            total += wi * t * fixed_k_weight(k, spec, rel_tol=rel_tol).fixed_k_weight
        # (1/2pi) * 2 (symmetry) * (y_max / 2) (Legendre Jacobian)
        return total * 0.5 * y_max / math.pi

    full = rule(n_nodes)
    coarse = rule(max(2, n_nodes // 2))
    return full, abs(full - coarse)
