"""Exact diagonalization of short periodic XXZ rings.

Hamiltonian, on Pauli matrices:

    H = -1/2 sum_n (sx_n sx_{n+1} + sy_n sy_{n+1} + Delta sz_n sz_{n+1})

Basis states are integers; bit n set means spin up on site n.  The translation
T moves site n to n + 1, and momentum-k states satisfy T|psi> = exp(ik)|psi>.
Blocks labelled by (number of up spins, momentum index) are built by
projecting the magnetization sector onto translation orbits and diagonalized
densely.

At Delta = -1 the ring is the antiferromagnet in disguise: rotating every
other spin by pi about z maps it onto +1/2 sum sigma.sigma.  That rotation
shifts transverse momenta by pi and leaves sz untouched, which is why
``band_support_report`` tests both momentum conventions against the
two-spinon window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np
from scipy import sparse

from .errors import DomainError, SizeError
from .kinematics import TWO_PI, band_boundaries

MAX_SITES = 14
DEFAULT_ETA = 0.05 * math.pi
MERGE_WINDOW = 1e-10


@dataclass(frozen=True)
class ChainSpec:
    n_sites: int
    delta: float = -1.0
    periodic: bool = True

    def __post_init__(self):
        n = self.n_sites
        if not isinstance(n, (int, np.integer)) or n < 2 or n % 2:
            raise SizeError(f"n_sites must be an even integer >= 2, got {n!r}")
        if n > MAX_SITES:
            raise SizeError(f"n_sites={n} exceeds the dense limit of {MAX_SITES}")
        if not self.periodic:
            raise DomainError("only periodic rings are supported")

    def momentum(self, index: int) -> float:
        return TWO_PI * (index % self.n_sites) / self.n_sites


@dataclass
class SpectralLine:
    omega: float
    weight: float
    k: float


def _bonds(n):
    # a two-site ring has a single bond
    return [(0, 1)] if n == 2 else [(j, (j + 1) % n) for j in range(n)]


def _translate(state, n, steps=1):
    steps %= n
    mask = (1 << n) - 1
    return ((state << steps) | (state >> (n - steps))) & mask


def sector_states(n: int, n_up: int) -> np.ndarray:
    """All basis states with ``n_up`` up spins, ascending."""
    states = [sum(1 << j for j in c) for c in combinations(range(n), n_up)]
    return np.array(sorted(states), dtype=np.int64)


def build_hamiltonian(spec: ChainSpec, n_up: int | None = None) -> sparse.csr_matrix:
    """H on the full 2^N space, or on the sector with ``n_up`` up spins."""
    n = spec.n_sites
    if n_up is None:
        states = np.arange(1 << n, dtype=np.int64)
    else:
        states = sector_states(n, n_up)
    index = {int(s): i for i, s in enumerate(states)}
    rows, cols, vals = [], [], []
    half_delta = 0.5 * spec.delta
    for i, s in enumerate(states):
        s = int(s)
        diag = 0.0
        for a, b in _bonds(n):
            up_a, up_b = (s >> a) & 1, (s >> b) & 1
            if up_a == up_b:
                diag -= half_delta
            else:
                diag += half_delta
                # sx sx + sy sy = 2 (s+ s- + s- s+) flips the antiparallel pair
                rows.append(index[s ^ ((1 << a) | (1 << b))])
                cols.append(i)
                vals.append(-1.0)
        rows.append(i)
        cols.append(i)
        vals.append(diag)
    dim = len(states)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def translation_operator(n: int, n_up: int | None = None) -> sparse.csr_matrix:
    states = np.arange(1 << n, dtype=np.int64) if n_up is None else sector_states(n, n_up)
    index = {int(s): i for i, s in enumerate(states)}
    cols = np.arange(len(states))
    rows = [index[_translate(int(s), n)] for s in states]
    return sparse.csr_matrix((np.ones(len(states)), (rows, cols)), shape=(len(states),) * 2)


def total_sz(n: int) -> sparse.csr_matrix:
    """Total sum of sz (Pauli) on the full space."""
    diag = [2 * bin(s).count("1") - n for s in range(1 << n)]
    return sparse.diags(np.array(diag, dtype=float)).tocsr()


@dataclass
class Block:
    momentum_index: int
    energies: np.ndarray
    # eigenvectors expressed in the sector basis, one column per eigenstate
    vectors: np.ndarray


@dataclass
class Sector:
    spec: ChainSpec
    n_up: int
    states: np.ndarray
    hamiltonian: sparse.csr_matrix
    blocks: dict = field(default_factory=dict)

    @cached_property
    def index(self):
        return {int(s): i for i, s in enumerate(self.states)}

    def momentum_basis(self, kappa: int) -> np.ndarray:
        """Orthonormal columns spanning the momentum-``kappa`` subspace."""
        n = self.spec.n_sites
        k = TWO_PI * kappa / n
        seen = set()
        cols = []
        for s in self.states:
            s = int(s)
            if s in seen:
                continue
            orbit = [s]
            t = _translate(s, n)
            while t != s:
                orbit.append(t)
                t = _translate(t, n)
            seen.update(orbit)
            period = len(orbit)
            if (kappa * period) % n:
                continue
            col = np.zeros(len(self.states), dtype=complex)
            for j, t in enumerate(orbit):
                col[self.index[t]] = np.exp(-1j * k * j)
            cols.append(col / math.sqrt(period))
        if not cols:
            return np.zeros((len(self.states), 0), dtype=complex)
        return np.column_stack(cols)

    def block(self, kappa: int) -> Block:
        kappa %= self.spec.n_sites
        if kappa not in self.blocks:
            basis = self.momentum_basis(kappa)
            hk = basis.conj().T @ (self.hamiltonian @ basis)
            hk = 0.5 * (hk + hk.conj().T)
            energies, vecs = np.linalg.eigh(hk)
            self.blocks[kappa] = Block(kappa, energies, basis @ vecs)
        return self.blocks[kappa]


def make_sector(spec: ChainSpec, n_up: int) -> Sector:
    return Sector(spec, n_up, sector_states(spec.n_sites, n_up), build_hamiltonian(spec, n_up))


@dataclass
class GroundState:
    spec: ChainSpec
    energy: float
    momentum_index: int
    sector: Sector
    amplitudes: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_full(self) -> np.ndarray:
        full = np.zeros(1 << self.spec.n_sites, dtype=complex)
        full[self.sector.states] = self.amplitudes
        return full


def ground_state(spec: ChainSpec) -> GroundState:
    """Lowest eigenpair of the zero-magnetization sector.

    Ties between momentum blocks go to the lowest momentum index.  The global
    phase makes the first amplitude of non-negligible size real and positive.
    """
    sector = make_sector(spec, spec.n_sites // 2)
    best = None
    for kappa in range(spec.n_sites):
        blk = sector.block(kappa)
        if blk.energies.size == 0:
            continue
        e = float(blk.energies[0])
        if best is None or e < best[0] - 1e-12:
            best = (e, kappa, blk.vectors[:, 0])
    energy, kappa, vec = best
    vec = vec / np.linalg.norm(vec)
    lead = np.flatnonzero(np.abs(vec) > 1e-8)[0]
    vec = vec * (abs(vec[lead]) / vec[lead])
    return GroundState(spec, energy, kappa, sector, vec)


def _apply_lowering(gs: GroundState, target: Sector, k: float) -> np.ndarray:
    """(1/sqrt N) sum_n exp(ikn) sigma^-_n acting on the ground state."""
    n = gs.spec.n_sites
    out = np.zeros(len(target.states), dtype=complex)
    phases = np.exp(1j * k * np.arange(n)) / math.sqrt(n)
    for amp, s in zip(gs.amplitudes, gs.sector.states):
        if amp == 0:
            continue
        s = int(s)
        for site in range(n):
            if (s >> site) & 1:
                out[target.index[s ^ (1 << site)]] += phases[site] * amp
    return out


def _apply_sz(gs: GroundState, k: float) -> np.ndarray:
    """(1/sqrt N) sum_n exp(ikn) sigma^z_n acting on the ground state."""
    n = gs.spec.n_sites
    phases = np.exp(1j * k * np.arange(n)) / math.sqrt(n)
    out = np.zeros_like(gs.amplitudes)
    for i, (amp, s) in enumerate(zip(gs.amplitudes, gs.sector.states)):
        s = int(s)
        spins = np.array([1.0 if (s >> j) & 1 else -1.0 for j in range(n)])
        out[i] = amp * np.dot(phases, spins)
    return out


def merge_lines(omegas, weights, k, window=MERGE_WINDOW):
    lines = []
    for om, wt in zip(omegas, weights):
        if lines and abs(om - lines[-1].omega) <= window:
            lines[-1].weight += float(wt)
        else:
            lines.append(SpectralLine(float(om), float(wt), k))
    return lines


@dataclass
class LehmannResult:
    k_index: int
    k: float
    component: str
    lines: list
    static_weight: float

    @property
    def total_weight(self) -> float:
        return math.fsum(line.weight for line in self.lines)

    def broadened(self, omegas, eta=DEFAULT_ETA) -> np.ndarray:
        """Sum of unit-area Lorentzians; multiply by 2 pi for S(w, k) units."""
        omegas = np.asarray(omegas, dtype=float)
        out = np.zeros_like(omegas)
        for line in self.lines:
            out += line.weight * (eta / math.pi) / ((omegas - line.omega) ** 2 + eta * eta)
        return out


class EDOracle:
    """Lazily diagonalized ring with Lehmann decompositions on demand."""

    def __init__(self, spec: ChainSpec):
        self.spec = spec
        self.gs = ground_state(spec)
        self._lowered = None

    @property
    def lowered(self) -> Sector:
        if self._lowered is None:
            self._lowered = make_sector(self.spec, self.spec.n_sites // 2 - 1)
        return self._lowered

    def lehmann(self, k_index: int, component: str = "pm") -> LehmannResult:
        """Lines (E_f - E_0, |<f|O_k|0>|^2) for O = sigma^- (``pm``) or sigma^z (``zz``)."""
        n = self.spec.n_sites
        k_index %= n
        k = self.spec.momentum(k_index)
        if component == "pm":
            sector = self.lowered
            vec = _apply_lowering(self.gs, sector, k)
        elif component == "zz":
            sector = self.gs.sector
            vec = _apply_sz(self.gs, k)
        else:
            raise DomainError(f"unknown component {component!r}")
        # O_k lowers the T eigenvalue by exp(-ik)
        blk = sector.block(self.gs.momentum_index - k_index)
        amps = blk.vectors.conj().T @ vec
        weights = np.abs(amps) ** 2
        omegas = blk.energies - self.gs.energy
        lines = merge_lines(omegas, weights, k)
        static = float(np.vdot(vec, vec).real)
        return LehmannResult(k_index, k, component, lines, static)


def static_correlation(oracle: EDOracle, k_index: int) -> float:
    """(1/N) sum_{m,n} exp(ik(n - m)) <sigma^+_m sigma^-_n> from real-space pairs."""
    gs = oracle.gs
    n = oracle.spec.n_sites
    k = oracle.spec.momentum(k_index)
    psi = dict(zip((int(s) for s in gs.sector.states), gs.amplitudes))
    total = 0j
    for m in range(n):
        for j in range(n):
            # <0| s+_m s-_j |0>: lower site j, raise site m
            acc = 0j
            for s, amp in psi.items():
                if not (s >> j) & 1:
                    continue
                t = s ^ (1 << j)
                if (t >> m) & 1:
                    continue
                u = t | (1 << m)
                acc += np.conj(psi.get(u, 0.0)) * amp
            total += np.exp(1j * k * (j - m)) * acc
    return float((total / n).real)


def lehmann_dcf(spec: ChainSpec, k_index: int, eta: float = DEFAULT_ETA, omegas=None):
    """Transverse lines at ``k_index`` plus an optional broadened curve on ``omegas``."""
    if not eta > 0:
        raise DomainError("broadening eta must be positive")
    res = EDOracle(spec).lehmann(k_index, "pm")
    curve = None if omegas is None else res.broadened(omegas, eta)
    return res.lines, curve


def band_k(k: float, convention: str) -> float:
    """Momentum at which a transverse ED line is compared with the two-spinon band."""
    if convention == "direct":
        return k % TWO_PI
    if convention == "shifted":
        return (k + math.pi) % TWO_PI
    raise DomainError(f"unknown momentum convention {convention!r}")


def in_window(omega: float, k: float, tolerance: float) -> bool:
    band = band_boundaries(k)
    return band.w_l - tolerance <= omega <= band.w_u + tolerance


@dataclass
class BandRow:
    k_index: int
    k_ed: float
    k_band: float
    total_weight: float
    in_band_weight: float
    lowest_omega: float
    static_weight: float

    @property
    def in_band_fraction(self) -> float:
        return self.in_band_weight / self.total_weight if self.total_weight > 0 else math.nan


@dataclass
class BandSupportReport:
    spec: ChainSpec
    ground_energy: float
    ground_momentum_index: int
    tolerance: float
    convention: str
    convention_scores: dict
    rows: list
    zz_rows: list

    @property
    def in_band_fraction(self) -> float:
        tot = math.fsum(r.total_weight for r in self.rows)
        return math.fsum(r.in_band_weight for r in self.rows) / tot


def _rows(oracle, results, convention, tol, weight_floor):
    rows = []
    for res in results:
        kb = band_k(res.k, convention) if res.component == "pm" else res.k
        live = [ln for ln in res.lines if ln.weight > weight_floor]
        inside = [ln.weight for ln in live if in_window(ln.omega, kb, tol)]
        rows.append(
            BandRow(
                k_index=res.k_index,
                k_ed=res.k,
                k_band=kb,
                total_weight=res.total_weight,
                in_band_weight=math.fsum(inside),
                lowest_omega=min((ln.omega for ln in live), default=math.nan),
                static_weight=res.static_weight,
            )
        )
    return rows


def band_support_report(spec: ChainSpec, tolerance: float | None = None, weight_floor: float = 1e-12):
    """Per-k in-band vs out-of-band transverse weight, with the momentum convention
    chosen as the one that puts the most weight inside the two-spinon window."""
    tol = 4.0 * math.pi / spec.n_sites if tolerance is None else tolerance
    oracle = EDOracle(spec)
    pm = [oracle.lehmann(j, "pm") for j in range(spec.n_sites)]
    zz = [oracle.lehmann(j, "zz") for j in range(spec.n_sites)]
    scores = {}
    for conv in ("direct", "shifted"):
        rows = _rows(oracle, pm, conv, tol, weight_floor)
        scores[conv] = math.fsum(r.in_band_weight for r in rows)
    convention = max(scores, key=lambda c: (scores[c], c == "direct"))
    return BandSupportReport(
        spec=spec,
        ground_energy=oracle.gs.energy,
        ground_momentum_index=oracle.gs.momentum_index,
        tolerance=tol,
        convention=convention,
        convention_scores=scores,
        rows=_rows(oracle, pm, convention, tol, weight_floor),
        zz_rows=_rows(oracle, zz, "direct", tol, weight_floor),
    )


@dataclass
class WeightComparison:
    k_band: float
    ed_in_band: float
    analytic: float  # fixed_k_weight / (2 pi), i.e. in Lehmann-weight units

    @property
    def ratio(self) -> float:
        return self.ed_in_band / self.analytic if self.analytic > 0 else math.nan


def compare_weights(report: BandSupportReport) -> list:
    """ED in-band transverse weight against the analytic fixed-k weight.

    Momenta where the analytic weight is undefined (the closed window at
    k = 0 and the non-integrable 1/w growth at k = pi) are skipped.
    """
    from .dcf import fixed_k_weight
    from .errors import DivergentWeight

    out = []
    for row in report.rows:
        k = row.k_band
        if not 0.0 < k < TWO_PI:
            continue
        try:
            w = fixed_k_weight(k).fixed_k_weight
        except DivergentWeight:
            continue
        out.append(WeightComparison(k, row.in_band_weight, w / TWO_PI))
    return out
