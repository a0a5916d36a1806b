import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from calr.errors import DeltaTooLargeError, InvalidParameterError
from calr.slab import (SlabConfig, admissible_delta_thresholds, delta_L, delta_g, delta_mu,
                       delta_psi_minus, feasible, g_direct, g_factored, k0, layer_difference_factor,
                       layer_scalars, layer_sum_factor, log_abs_g2, log_L,
                       psi_difference_ratio_sup, reflection_ratio, tau)
from oracles import g_from_layers, permittivities

FEASIBLE = [(b, l) for b in (0.3, 0.5, 1.0, 2.0) for l in (-1.0, 0.5, 1.0, 2.0) if feasible(b, l)]


def test_tau_values():
    assert tau(0.5) == pytest.approx(5.0 / 3.0)
    assert tau(0.8) == pytest.approx(2.8 / 1.8)
    assert tau(1.0) == tau(2.0) == 1.5
    with pytest.raises(InvalidParameterError):
        tau(0.0)


@pytest.mark.parametrize("beta, lam, ok", [
    (0.5, 1.0, True), (0.5, 0.0, False), (0.5, -1.0, False),
    (1.0, -1.0, True), (1.0, -1.5, False), (2.0, -1.0, True), (2.0, 0.0, False),
])
def test_feasibility(beta, lam, ok):
    assert feasible(beta, lam) is ok


def test_resonance_wavenumber_reference_value():
    # ln(1 / (2*0.01 + 1*0.1*0.1)) / 2
    cfg = SlabConfig(1.0, 0.1, 1.0, 1.0, 0.25)
    assert k0(cfg) == pytest.approx(0.5 * math.log(1.0 / 0.03), rel=1e-15)


def test_resonance_wavenumber_zero_at_threshold():
    # 2*0.25 + 2*0.5*0.5 = 1
    assert k0(SlabConfig(1.0, 0.5, 1.0, 2.0, 0.25)) == 0.0


def test_resonance_wavenumber_negative_raises():
    cfg = SlabConfig(1.0, 0.9, 0.5, 2.0, 0.25)
    with pytest.raises(DeltaTooLargeError) as exc:
        k0(cfg)
    assert exc.value.value < 0


def test_tiny_delta_stays_finite():
    cfg = SlabConfig(1.0, 1e-300, 0.5, 1.0, 0.25)
    kr = k0(cfg)
    assert np.isfinite(kr) and kr > 0
    # log(2 delta^2 + delta^1.5) ~ 1.5 log delta for tiny delta
    assert kr == pytest.approx(-1.5 * math.log(1e-300) / 2.0, rel=1e-12)


@pytest.mark.parametrize("kwargs", [
    dict(a=0.0, delta=0.1, beta=1.0, lam=1.0, xi=0.1),
    dict(a=1.0, delta=0.0, beta=1.0, lam=1.0, xi=0.1),
    dict(a=1.0, delta=1.0, beta=1.0, lam=1.0, xi=0.1),
    dict(a=1.0, delta=0.1, beta=1.0, lam=1.0, xi=1.0),
    dict(a=1.0, delta=0.1, beta=0.5, lam=-1.0, xi=0.1),
    dict(a=1.0, delta=0.9, beta=2.0, lam=-2.0, xi=0.1),
    dict(a=float("nan"), delta=0.1, beta=1.0, lam=1.0, xi=0.1),
])
def test_invalid_configs(kwargs):
    with pytest.raises(InvalidParameterError):
        SlabConfig(**kwargs)


@given(st.sampled_from(FEASIBLE), st.floats(-12, -1), st.floats(1e-3, 10.0))
def test_g_factored_equals_direct(bl, logd, k):
    beta, lam = bl
    d = 10.0**logd
    assume(loss_ok(d, beta, lam))
    direct = g_direct(1.0, d, beta, lam, k)
    fac = complex(g_factored(1.0, d, beta, lam, k).to_complex())
    assert abs(fac - direct) <= 1e-10 * abs(direct)
    assert float(log_abs_g2(1.0, d, beta, lam, k)) == pytest.approx(2 * math.log(abs(direct)), abs=1e-9)


def loss_ok(d, beta, lam):
    return d + lam * d**beta >= 0 and 2 * d * d + lam * d ** (beta + 1) > 0


@pytest.mark.parametrize("delta", [1e-2, 1e-4, 1e-6])
@pytest.mark.parametrize("k", [0.05, 0.7, -2.0, 6.0])
def test_g_matches_interface_solve(delta, k):
    ref = g_from_layers(1.0, delta, 0.8, 1.0, k)
    got = complex(g_factored(1.0, delta, 0.8, 1.0, k).to_complex())
    assert abs(got - ref) <= 1e-9 * abs(ref)


def test_g_symmetric_in_k():
    k = np.array([0.3, 2.0, 7.0])
    assert np.allclose(g_direct(1.0, 1e-3, 0.5, 1.0, k), g_direct(1.0, 1e-3, 0.5, 1.0, -k))


def test_g_collapses_near_resonance():
    # at k0 the exponential term cancels the constant to O(delta)
    cfg = SlabConfig(1.0, 1e-8, 0.5, 1.0, 0.25)
    g_at = math.exp(0.5 * float(cfg.log_abs_g2(k0(cfg))))
    assert g_at < 10 * cfg.delta
    assert math.exp(0.5 * float(cfg.log_abs_g2(0.5 * k0(cfg)))) > 1e3 * cfg.delta


def test_layer_scalars_consistent_with_factors():
    cfg = SlabConfig(1.0, 1e-2, 0.8, 1.0, 0.25)
    k = np.array([0.2, 1.0, 3.0])
    ls = layer_scalars(cfg, k)
    e = np.exp(-2 * k)
    assert np.allclose((ls.psi_plus - ls.psi_minus / k) * np.exp(-k),
                       layer_difference_factor(cfg.delta, 0.8, 1.0, e), rtol=1e-12)
    assert np.allclose((ls.psi_plus + ls.psi_minus / k) * np.exp(-k),
                       layer_sum_factor(cfg.delta, 0.8, 1.0, e), rtol=1e-12)
    ec, es, em = permittivities(cfg.delta, 0.8, 1.0)
    assert ls.chi_c == pytest.approx(es / ec)
    assert complex(reflection_ratio(cfg.delta, 0.8, 1.0)) == pytest.approx((es / ec - 1) / (es / ec + 1))


@given(st.sampled_from(FEASIBLE), st.floats(-14, -2), st.floats(-14, -2))
def test_resonance_wavenumber_decreases_with_loss(bl, l1, l2):
    beta, lam = bl
    _, d0 = admissible_delta_thresholds(beta, lam)
    d1, d2 = sorted([10.0**l1, 10.0**l2])
    assume(d2 < d0 and d1 < d2)
    k1 = k0(SlabConfig(1.0, d1, beta, lam, 0.25))
    k2 = k0(SlabConfig(1.0, d2, beta, lam, 0.25))
    assert k1 >= k2


@given(st.floats(0.01, 0.99), st.floats(1e-3, 20.0), st.floats(1e-10, 0.5))
def test_strip_weight_increases_with_width(f, k, d):
    a = 1.0
    l1 = log_L(a, f * a * 0.5, d, 0.8, 1.0, k)
    l2 = log_L(a, f * a, d, 0.8, 1.0, k)
    assert l1 <= l2 + 1e-12


def test_thresholds_for_reference_pairs():
    dmu, d0 = admissible_delta_thresholds(2.0, -1.0)
    assert dmu == pytest.approx(1.0, abs=1e-8) and d0 == pytest.approx(1.0, abs=1e-8)
    _, d0 = admissible_delta_thresholds(0.5, 1.0)
    # 2 d^2 + d^1.5 = 1
    assert 2 * d0**2 + d0**1.5 == pytest.approx(1.0, rel=1e-9)
    assert delta_mu(2.0, -1.0) > 0.99
    assert delta_mu(1.0, -1.0) > 0.99


@pytest.mark.parametrize("beta, lam", FEASIBLE)
def test_threshold_criteria_hold_just_below(beta, lam):
    dg = delta_g(beta, lam)
    dl = delta_L(1.0, 0.25, beta, lam)
    for d in (0.999 * dg, 0.5 * dg):
        cfg = SlabConfig(1.0, d, beta, lam, 0.25) if d + lam * d**beta >= 0 else None
        if cfg is None:
            continue
        try:
            kr = k0(cfg)
        except InvalidParameterError:
            continue
        k = kr + np.linspace(0.0, 5.0 * max(kr, 1.0), 400)
        assert np.all(cfg.log_abs_g2(k) <= math.log(26.0) + 2 * math.log(d) + 1e-12)
    d = 0.999 * dl
    cfg = SlabConfig(1.0, d, beta, lam, 0.25)
    k = k0(cfg) + np.linspace(0.0, 50.0, 400)
    assert np.all(cfg.log_L(k) >= math.log(0.5) - 1e-12)


def test_delta_g_requires_c1_above_25():
    with pytest.raises(InvalidParameterError):
        delta_g(0.5, 1.0, c1=25.0)


@pytest.mark.parametrize("beta, lam", FEASIBLE)
def test_psi_difference_threshold_is_the_loss_threshold(beta, lam):
    assert delta_psi_minus(beta, lam) == pytest.approx(delta_mu(beta, lam), rel=1e-9)
    d = np.logspace(-14, math.log10(0.99 * delta_mu(beta, lam)), 200)
    assert np.all(psi_difference_ratio_sup(d, beta, lam) <= 1.0 + 1e-12)
