"""Spinon dispersion of the massive XXZ chain (Delta < -1) and its q -> -1 limit.

Conventions: q in (-1, 0), q = -exp(-pi K'/K), xi = i exp(i alpha), and

    tau(xi) = xi^{-1} theta_{q^4}(q xi^2) / theta_{q^4}(q xi^{-2})
    p(alpha) = am(2 K alpha / pi) - pi/2
    e(alpha) = (2K/pi) sinh(pi K'/K) dn(2 K alpha / pi)

Numerically tau(xi) = -exp(-i p(alpha)), i.e. arg tau = -p - pi (mod 2 pi); the
extra sign is fixed at alpha = 0 where xi = i and the theta ratio is 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from scipy import optimize

from .errors import ConvergenceFailure, DomainError
from .kinematics import spinon_energy, spinon_momentum

_EPS = 2.0 ** -52


def q_pochhammer(y: complex, x: complex, max_terms: int = 100000) -> complex:
    """(y; x)_inf = prod_{n >= 0} (1 - y x^n) for |x| < 1."""
    ax = abs(x)
    if not ax < 1.0:
        raise DomainError(f"|x|={ax} must be < 1")
    cutoff = 1e-17 * (1.0 - ax)
    prod = 1.0 + 0j
    term = complex(y)
    for _ in range(max_terms):
        prod *= 1.0 - term
        if abs(term) < cutoff:
            break
        term *= x
    else:
        raise ConvergenceFailure(f"(y; x) product did not converge in {max_terms} factors")
    return prod


def theta(x: complex, y: complex) -> complex:
    """theta_x(y) = (x; x)(y; x)(x/y; x)."""
    if y == 0:
        raise DomainError("theta_x(y) needs y != 0")
    return q_pochhammer(x, x) * q_pochhammer(y, x) * q_pochhammer(x / y, x)


# --- elliptic functions ------------------------------------------------------


def agm(a: float, b: float) -> float:
    for _ in range(200):
        if abs(a - b) <= 4.0 * _EPS * a:
            return 0.5 * (a + b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    raise ConvergenceFailure("AGM did not converge")


def ellipk_from_complement(kc: float) -> float:
    """K for complementary modulus kc = sqrt(1 - m); accurate for kc -> 0."""
    return 0.5 * math.pi / agm(1.0, kc)


def jacobi_am_dn(u: float, k: float, kc: float) -> tuple[float, float]:
    """Amplitude am(u) and dn(u) by the descending Landen (AGM) scale.

    ``k`` is the modulus and ``kc`` its complement; passing both keeps full
    precision when m is within rounding of 1.  am is the continuous branch with
    am(0) = 0.
    """
    a, b, c = 1.0, kc, k
    cs = []
    while abs(c) > _EPS * a:
        if len(cs) > 60:
            raise ConvergenceFailure("Landen scale did not converge")
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        cs.append((c, a))
    phi = (2.0 ** len(cs)) * a * u
    for c_n, a_n in reversed(cs):
        phi = 0.5 * (phi + math.asin(c_n / a_n * math.sin(phi)))
    sn, cn = math.sin(phi), math.cos(phi)
    return phi, math.sqrt(cn * cn + kc * kc * sn * sn)


# --- anisotropy --------------------------------------------------------------


@dataclass(frozen=True)
class Anisotropy:
    """Solved elliptic data for one value of q; build it with ``solve_nome``."""

    q: float
    epsilon: float
    K: float
    K_prime: float
    k: float = field(repr=False)
    kc: float = field(repr=False)

    @property
    def m(self) -> float:
        return self.k * self.k

    @property
    def m_complement(self) -> float:
        return self.kc * self.kc

    @property
    def delta(self) -> float:
        """Anisotropy Delta = (q + 1/q) / 2 (< -1)."""
        return 0.5 * (self.q + 1.0 / self.q)

    @property
    def nome(self) -> float:
        return math.exp(-math.pi * self.K_prime / self.K)


@dataclass(frozen=True)
class SpectralParam:
    alpha: float

    @property
    def xi(self) -> complex:
        return 1j * cmath.exp(1j * self.alpha)


def _moduli(mu):
    # kc = exp(-exp(mu)); both moduli computed without cancellation
    lam = -math.exp(mu)
    kc = math.exp(lam)
    k = math.sqrt(-math.expm1(2.0 * lam))
    return k, kc


def solve_nome(q: float) -> Anisotropy:
    """Find the modulus for which exp(-pi K'/K) = -q."""
    if not (-1.0 < q < 0.0):
        raise DomainError(f"q={q} outside the massive regime (-1, 0)")
    eps = -math.log(-q)
    target = math.log(eps / math.pi)

    def ratio(mu):
        k, kc = _moduli(mu)
        # K'/K = agm(1, kc) / agm(1, k)
        return math.log(agm(1.0, kc) / agm(1.0, k)) - target

    lo, hi = -690.0, math.log(700.0)
    f_lo, f_hi = ratio(lo), ratio(hi)
    if f_lo * f_hi > 0:
        raise DomainError(f"q={q} too close to 0 or -1 for double-precision moduli")
    try:
        mu = optimize.brentq(ratio, lo, hi, xtol=1e-300, rtol=4 * _EPS, maxiter=500)
    except RuntimeError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    k, kc = _moduli(mu)
    return Anisotropy(
        q=q,
        epsilon=eps,
        K=ellipk_from_complement(kc),
        K_prime=ellipk_from_complement(k),
        k=k,
        kc=kc,
    )


def anisotropy_from_epsilon(epsilon: float) -> Anisotropy:
    return solve_nome(-math.exp(-epsilon))


# --- spinon dispersion -------------------------------------------------------


def tau(xi: SpectralParam, aniso: Anisotropy) -> complex:
    """Translation eigenvalue of a single spinon."""
    z = xi.xi
    q = aniso.q
    x = q ** 4
    return theta(x, q * z * z) / theta(x, q / (z * z)) / z


def xxz_momentum(alpha: float, aniso: Anisotropy) -> float:
    u = 2.0 * aniso.K * alpha / math.pi
    return jacobi_am_dn(u, aniso.k, aniso.kc)[0] - 0.5 * math.pi


def xxz_energy(alpha: float, aniso: Anisotropy) -> float:
    u = 2.0 * aniso.K * alpha / math.pi
    dn = jacobi_am_dn(u, aniso.k, aniso.kc)[1]
    return 2.0 * aniso.K / math.pi * math.sinh(math.pi * aniso.K_prime / aniso.K) * dn


def energy_from_tau(alpha: float, aniso: Anisotropy, h: float = 1e-3) -> float:
    """((1 - q^2) / 2q) xi d/dxi log tau, by a five-point stencil in alpha.

    xi d/dxi = -i d/dalpha, so for unimodular tau this is the alpha-derivative
    of arg tau times (1 - q^2) / 2q.
    """
    t0 = tau(SpectralParam(alpha), aniso)

    def arg_rel(d):
        return cmath.phase(tau(SpectralParam(alpha + d), aniso) / t0)

    deriv = (8.0 * (arg_rel(h) - arg_rel(-h)) - (arg_rel(2 * h) - arg_rel(-2 * h))) / (12.0 * h)
    q = aniso.q
    return (1.0 - q * q) / (2.0 * q) * deriv


# --- isotropic limit ---------------------------------------------------------


@dataclass
class LimitRow:
    epsilon: float
    beta: float
    alpha: float
    e_xxz: float
    e_xxx: float
    p_xxz: float
    p_xxx: float

    @property
    def energy_error(self) -> float:
        return abs(self.e_xxz - self.e_xxx)

    @property
    def momentum_error(self) -> float:
        return abs(self.p_xxz - self.p_xxx)


@dataclass
class LimitReport:
    rows: list
    energy_scale: float
    energy_scale_error: float
    orders: dict
    monotone: dict

    def rows_for(self, beta):
        return [r for r in self.rows if r.beta == beta]


def _observed_orders(errs, epss):
    out = []
    for (e0, x0), (e1, x1) in zip(zip(errs, epss), zip(errs[1:], epss[1:])):
        if e0 > 0 and e1 > 0:
            out.append(math.log(e0 / e1) / math.log(x0 / x1))
        else:
            out.append(math.nan)
    return out


def isotropic_limit_check(epsilons, betas=(0.0, 0.5, 1.0, 2.0)) -> LimitReport:
    """Approach to the XXX dispersion along q = -exp(-eps), xi = i exp(eps beta / (i pi)).

    The XXZ spectral angle is alpha = -eps beta / pi.  The energy scale factor
    relating the two unit systems is measured at beta = 0 by Richardson
    extrapolation of e_xxz(0) / pi, assuming an eps^2 leading error (which the
    reported orders confirm).
    """
    epsilons = [float(e) for e in epsilons]
    if any(e <= 0 for e in epsilons) or any(a <= b for a, b in zip(epsilons, epsilons[1:])):
        raise DomainError("epsilon sequence must be positive and strictly decreasing")
    rows = []
    for eps in epsilons:
        aniso = anisotropy_from_epsilon(eps)
        for beta in betas:
            alpha = -eps * beta / math.pi
            rows.append(
                LimitRow(
                    epsilon=eps,
                    beta=float(beta),
                    alpha=alpha,
                    e_xxz=xxz_energy(alpha, aniso),
                    e_xxx=float(spinon_energy(beta)),
                    p_xxz=xxz_momentum(alpha, aniso),
                    p_xxx=float(spinon_momentum(beta)),
                )
            )
    orders, monotone = {}, {}
    for beta in betas:
        errs = [r.energy_error for r in rows if r.beta == beta]
        orders[float(beta)] = _observed_orders(errs, epsilons)
        monotone[float(beta)] = all(a > b for a, b in zip(errs, errs[1:]))
    zero = [r.e_xxz / math.pi for r in rows if r.beta == 0.0]
    if len(zero) >= 2:
        e0, e1 = epsilons[-2], epsilons[-1]
        r0, r1 = zero[-2], zero[-1]
        scale = (e0 * e0 * r1 - e1 * e1 * r0) / (e0 * e0 - e1 * e1)
        scale_err = abs(scale - r1)
    else:
        scale, scale_err = math.nan, math.nan
    return LimitReport(rows, scale, scale_err, orders, monotone)
