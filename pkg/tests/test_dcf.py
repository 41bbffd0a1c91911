import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

import golden
from twospinon.dcf import (
    GridSpec,
    evaluate_grid,
    fixed_k_weight,
    s2_components,
    s2_pm,
    zone_weight,
)
from twospinon.errors import DivergentWeight, DomainError
from twospinon.formfactor import abs_A_minus_real, prefactor_constant
from twospinon.kinematics import KinematicPoint, band_boundaries

PI = math.pi


def test_golden_point():
    v = s2_pm(KinematicPoint(PI, PI))
    assert v.in_band
    assert v.s_pm == pytest.approx(golden.S2_PM_PI_PI, rel=1e-10)


def test_golden_point_composition():
    gamma = 2 * math.log(2 + math.sqrt(3))
    expected = prefactor_constant() * abs_A_minus_real(gamma) / (PI * math.sqrt(3))
    assert s2_pm(KinematicPoint(PI, PI)).s_pm == pytest.approx(expected, rel=1e-12)
    assert golden.PREFACTOR * golden.A_MINUS_AT_PI_PI / (PI * math.sqrt(3)) == pytest.approx(
        golden.S2_PM_PI_PI, rel=1e-15
    )


def test_above_band_is_zero():
    v = s2_pm(KinematicPoint(3 * PI, 0.5 * PI))
    assert (v.s_pm, v.in_band) == (0.0, False)
    assert s2_components(KinematicPoint(3 * PI, 0.5 * PI)) == (0.0, 0.0, 0.0)


def test_edges_are_zero():
    band = band_boundaries(1.2)
    assert s2_pm(KinematicPoint(band.w_l, 1.2)).s_pm == 0.0
    assert s2_pm(KinematicPoint(band.w_u, 1.2)).s_pm == 0.0
    assert s2_pm(KinematicPoint(1.0, 0.0)).s_pm == 0.0


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 2 * PI - 1e-3), st.floats(1e-6, 1 - 1e-6))
def test_components_are_exact_multiples(k, frac):
    band = band_boundaries(k)
    pt = KinematicPoint(band.w_l + frac * band.width, k)
    xx, yy, zz = s2_components(pt)
    s = s2_pm(pt).s_pm
    assert xx == yy == zz == 4.0 * s
    assert s >= 0 and math.isfinite(s)


def test_upper_edge_decay():
    wu = band_boundaries(PI).w_u
    vals = [s2_pm(KinematicPoint(wu * (1 - 10.0 ** -m), PI)).s_pm for m in range(2, 7)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.05 * vals[0]


def test_lower_edge_grows_without_bound():
    k = 0.5 * PI
    wl = band_boundaries(k).w_l
    vals = [s2_pm(KinematicPoint(wl * (1 + 10.0 ** -m), k)).s_pm for m in range(2, 7)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_lower_edge_log_corrected_constant():
    # S sqrt(w - w_l) drifts like sqrt(log(1/eta)); dividing that out leaves a constant
    k = 0.5 * PI
    wl = band_boundaries(k).w_l
    r = []
    for m in (4, 6, 8, 10):
        eta = 10.0 ** -m
        w = wl * (1 + eta)
        r.append(s2_pm(KinematicPoint(w, k)).s_pm * math.sqrt(w - wl) / math.sqrt(math.log(1 / eta)))
    drift = [abs(b / a - 1) for a, b in zip(r, r[1:])]
    assert all(d2 < d1 for d1, d2 in zip(drift, drift[1:]))
    assert drift[-1] < 0.02


def test_reflection_symmetry_pointwise():
    for k in (0.3, 1.1, 2.9):
        band = band_boundaries(k)
        for frac in (0.01, 0.5, 0.97):
            w = band.w_l + frac * band.width
            a = s2_pm(KinematicPoint(w, k)).s_pm
            b = s2_pm(KinematicPoint(w, 2 * PI - k)).s_pm
            assert a == pytest.approx(b, rel=1e-10)


def test_grid_spec_validation():
    with pytest.raises(DomainError):
        GridSpec(0, 1, 1, 0, 1, 3)
    with pytest.raises(DomainError):
        GridSpec(1, 0, 3, 0, 1, 3)
    with pytest.raises(DomainError):
        GridSpec(0, 7, 3, 0, 1, 3)


def test_grid_outside_band_is_zero():
    res = evaluate_grid(GridSpec(0.5, 1.0, 3, 5.0, 6.0, 3))
    assert np.all(res.intensity() == 0.0)
    assert res.failures == []


def test_grid_rows_are_k_major():
    g = GridSpec(0.2, 1.0, 3, 0.1, 2.0, 4)
    res = evaluate_grid(g)
    ks = [r[0] for r in res.rows]
    assert ks == sorted(ks)
    assert [r[1] for r in res.rows[:4]] == list(g.ws())


def test_grid_workers_identical():
    g = GridSpec(0.1, 2 * PI - 0.1, 6, 0.0, 2 * PI, 7)
    a = evaluate_grid(g, workers=1)
    b = evaluate_grid(g, workers=3)
    assert a.rows == b.rows


def test_grid_reflection():
    g = GridSpec(0.0, 2 * PI, 21, 0.0, 2 * PI, 15)
    s = evaluate_grid(g).intensity()
    np.testing.assert_allclose(s, s[::-1], rtol=1e-10, atol=0)


def test_grid_collects_failures(monkeypatch):
    import twospinon.dcf as dcf
    from twospinon.errors import QuadratureFailure

    real = dcf.s2_pm

    def flaky(pt, spec):
        if pt.w >= 3.0:
            raise QuadratureFailure("boom")
        return real(pt, spec)

    monkeypatch.setattr(dcf, "s2_pm", flaky)
    res = evaluate_grid(GridSpec(2.0, 3.0, 2, 2.5, 3.5, 3))
    assert len(res.failures) == 4
    assert sum(math.isnan(r[2]) for r in res.rows) == 4


@pytest.mark.parametrize("k", sorted(golden.FIXED_K_WEIGHT))
def test_fixed_k_weight_regression(k):
    r = fixed_k_weight(k)
    assert r.fixed_k_weight == pytest.approx(golden.FIXED_K_WEIGHT[k], rel=1e-8)
    assert r.abs_error < 1e-7 * r.fixed_k_weight
    assert r.metadata["weight_rel_tol"] == 1e-8


# the sqrt(log) factor at the lower edge makes QUADPACK warn, but it still converges
@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("k", [0.5 * PI, 2.0])
def test_fixed_k_weight_against_endpoint_weighted_rule(k):
    b = band_boundaries(k)

    def smooth(w):
        s = s2_pm(KinematicPoint(w, k)).s_pm
        return s * math.sqrt(max(w - b.w_l, 0.0) * max(b.w_u - w, 0.0))

    ref, _ = integrate.quad(smooth, b.w_l, b.w_u, weight="alg", wvar=(-0.5, -0.5), epsrel=1e-11, limit=200)
    assert fixed_k_weight(k).fixed_k_weight == pytest.approx(ref, rel=1e-7)


def test_fixed_k_weight_vanishes_as_band_closes():
    ws = [fixed_k_weight(k).fixed_k_weight for k in (1e-1, 1e-2, 1e-3)]
    assert all(a > b for a, b in zip(ws, ws[1:]))
    assert ws[-1] < 1e-3


def test_fixed_k_weight_symmetric():
    assert fixed_k_weight(1.0).fixed_k_weight == pytest.approx(fixed_k_weight(2 * PI - 1.0).fixed_k_weight, rel=1e-9)


def test_fixed_k_weight_diverges_at_zone_centre():
    with pytest.raises(DivergentWeight):
        fixed_k_weight(PI)
    # the growth toward k = pi is slow (logarithmic in pi - k)
    w = [fixed_k_weight(PI - d).fixed_k_weight for d in (1e-2, 1e-4, 1e-6)]
    assert w[0] < w[1] < w[2]


def test_fixed_k_weight_domain():
    with pytest.raises(DomainError):
        fixed_k_weight(0.0)


@pytest.mark.slow
def test_zone_weight_converges():
    # 16- and 8-node Legendre rules in y = log(pi / (pi - k)) agree to < 1%
    total, err = zone_weight(n_nodes=16)
    assert math.isfinite(total) and total > 0
    assert err < 1e-2 * total
