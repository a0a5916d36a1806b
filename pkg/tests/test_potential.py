import csv
import math

import numpy as np
import pytest
from scipy import integrate

from calr.errors import InvalidParameterError, NotApplicableError
from calr.potential import (boundedness_certificates, coefficient_A, interface_residuals,
                            ode_residual, potential_hat, reconstruct_line, reconstruct_real,
                            region_of)
from calr.slab import SlabConfig, delta_psi_minus
from calr.sources import CircleSource, RectangleSource

import oracles

SRC = RectangleSource(6.0, 6.0, 1.0, 1.0)


def cfg(delta=1e-2, beta=0.8, a=1.0, lam=1.0):
    return SlabConfig(a, delta, beta, lam, 0.25 * a)


@pytest.mark.parametrize("delta", [1e-1, 1e-3, 1e-6])
@pytest.mark.parametrize("k", [0.05, 0.6, 2.0, 5.0, -1.3])
def test_layers_match_interface_solve(delta, k):
    c = cfg(delta)
    i_k = complex(SRC.transform_I(np.array(k)).to_complex())
    A, B, C, D = oracles.layer_solve(c.a, delta, c.beta, c.lam, k, i_k)
    kk = abs(k)
    kv = np.array([k])
    cases = [("c", -0.7, A * math.exp(kk * -0.7)),
             ("s", 0.0, B + C),
             ("s", 0.4, B * math.exp(kk * 0.4) + C * math.exp(-kk * 0.4)),
             ("m", 2.5, D * math.exp(-kk * 2.5) + i_k * math.exp(kk * 2.5) / (2 * kk))]
    for region, x, ref in cases:
        got = complex(potential_hat(SRC, c, region, x, kv).to_complex()[0])
        assert abs(got - ref) <= 1e-9 * abs(ref), (region, x)


def test_coefficient_A_at_zero_is_constant():
    c = cfg()
    tv = coefficient_A(SRC, c, np.array([0.0, 1.0]), A0=2.5)
    assert tv.to_complex()[0] == pytest.approx(2.5)
    v = potential_hat(SRC, c, "s", 0.3, np.array([0.0]), A0=-1.0)
    assert v.to_complex()[0] == pytest.approx(-1.0)


def test_region_checks():
    c = cfg()
    assert [region_of(c, x) for x in (-1, 0, 0.5, 1, 3)] == ["c", "s", "s", "s", "m"]
    with pytest.raises(InvalidParameterError):
        potential_hat(SRC, c, "c", 0.5, np.array([1.0]))
    with pytest.raises(InvalidParameterError):
        potential_hat(SRC, c, "m", 0.5, np.array([1.0]))
    with pytest.raises(InvalidParameterError):
        potential_hat(SRC, c, "q", 0.5, np.array([1.0]))
    with pytest.raises(InvalidParameterError):
        potential_hat(SRC, c, "s", 0.5, np.array([np.nan]))


@pytest.mark.parametrize("src", [SRC, CircleSource(6.0, 6.0, 1.0)])
def test_interface_conditions(src):
    k = np.concatenate([-np.geomspace(0.01, 20, 15), np.geomspace(0.01, 20, 15)])
    for delta in (1e-1, 1e-5, 1e-11):
        res = interface_residuals(src, cfg(delta), k)
        for vals in res.values():
            for v in vals:
                assert np.max(v) <= 1e-10


@pytest.mark.parametrize("x", [-2.0, 0.5, 3.0, 5.5, 6.7, 8.0])
def test_ode_residual_each_layer(x):
    k = np.array([-7.0, -0.3, 0.05, 1.0, 4.0])
    for src in (SRC, CircleSource(6.0, 6.0, 1.0)):
        assert np.max(ode_residual(src, cfg(1e-4), x, k)) <= 1e-6


def test_ode_residual_rejects_straddling_stencil():
    with pytest.raises(InvalidParameterError):
        ode_residual(SRC, cfg(), 0.999, np.array([1.0]), step=0.01)


def _direct_inverse(src, c, x, y):
    region = region_of(c, x)

    def part(k, fn):
        vp = complex(potential_hat(src, c, region, x, np.array([k])).to_complex()[0])
        vm = complex(potential_hat(src, c, region, x, np.array([-k])).to_complex()[0])
        return fn(vp * np.exp(1j * k * y) + vm * np.exp(-1j * k * y))

    out = 0j
    for unit, fn in ((1.0, np.real), (1j, np.imag)):
        out += unit * integrate.quad(part, 0.0, 30.0, args=(fn,), epsabs=1e-14,
                                     epsrel=1e-11, limit=1000)[0]
    return out / (2 * math.pi)


def test_antisymmetric_source_gives_zero_on_centre_line():
    field = reconstruct_real(SRC, cfg(), [(-1.0, 6.0)], k_max=30.0)
    assert abs(field.values[0]) <= 1e-15


def test_reconstruct_real_matches_scipy_inverse():
    c = cfg(1e-2)
    pts = [(-1.0, 6.3), (-0.5, 3.0), (0.5, 8.0), (3.0, 6.5)]
    field = reconstruct_real(SRC, c, pts, tol=1e-10)
    assert not field.warning.any()
    for (x, y), v in zip(pts, field.values):
        ref = _direct_inverse(SRC, c, x, y)
        assert abs(v - ref) <= 1e-7 * abs(ref) + 1e-14


def test_reconstructed_core_potential_is_harmonic():
    c = cfg(1e-2)
    x, y, h = -1.0, 6.5, 0.05
    offs = [(0, 0), (h, 0), (-h, 0), (0, h), (0, -h), (2 * h, 0), (-2 * h, 0), (0, 2 * h), (0, -2 * h)]
    v = reconstruct_real(SRC, c, [(x + dx, y + dy) for dx, dy in offs], tol=1e-12).values
    # fourth-order five-point second differences
    vxx = (-v[5] + 16 * v[1] - 30 * v[0] + 16 * v[2] - v[6]) / (12 * h * h)
    vyy = (-v[7] + 16 * v[3] - 30 * v[0] + 16 * v[4] - v[8]) / (12 * h * h)
    assert abs(vxx + vyy) <= 1e-5 * max(abs(vxx), abs(vyy))


def test_reconstruct_line_agrees_with_pointwise():
    c = cfg(1e-2)
    ys = np.array([2.0, 6.4, 9.0])
    line = reconstruct_line(SRC, c, -0.5, ys, k_max=30.0)
    pts = reconstruct_real(SRC, c, [(-0.5, y) for y in ys], tol=1e-11).values
    np.testing.assert_allclose(line, pts, rtol=1e-7)


def test_real_field_csv(tmp_path):
    field = reconstruct_real(SRC, cfg(), [(-1.0, 6.0), (2.0, 5.0)], tol=1e-8)
    path = tmp_path / "field.csv"
    field.to_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "re_V", "im_V", "truncation_estimate"]
    assert len(rows) == 3
    assert float(rows[1][2]) == pytest.approx(field.values[0].real, rel=1e-15)


def test_boundedness_certificate_threshold():
    c = cfg(0.5 * delta_psi_minus(0.8, 1.0))
    cert = boundedness_certificates(SRC, c)
    assert cert.C9 > 0 and cert.C10 > 0 and cert.x_core < 0 < c.a < cert.x_matrix
    with pytest.raises(NotApplicableError):
        # the threshold sits just below one
        boundedness_certificates(SRC, cfg(0.5 * (1.0 + delta_psi_minus(0.8, 1.0))))


@pytest.mark.parametrize("delta", [1e-1, 1e-4, 1e-8, 1e-12])
def test_coefficient_A_matches_interface_solve(delta):
    c = cfg(delta)
    for k in (0.05, 0.5, 2.0, 5.0, -3.0):
        i_k = complex(SRC.transform_I(np.array(k)).to_complex())
        ref = oracles.layer_solve(c.a, delta, c.beta, c.lam, k, i_k)[0]
        got = complex(coefficient_A(SRC, c, np.array(k)).to_complex())
        assert abs(got - ref) <= 1e-12 * abs(ref)
    assert np.all(np.isneginf(coefficient_A(SRC.with_charge(0.0), c, np.array([0.5, 3.0])).log_magnitude))


def test_matrix_derivative_decays():
    c = cfg(1e-6)
    k = np.array([0.05, 0.5, 3.0])
    xs = np.linspace(7.5, 7.0 + 20 * c.a, 30)
    mags = np.array([np.exp(potential_hat(SRC, c, "m", x, k, derivative=True).log_magnitude) for x in xs])
    assert np.all(np.diff(mags, axis=0) < 0)
    # beyond the support both terms carry exp(-k x) exactly
    np.testing.assert_allclose(mags[-1] / mags[0], np.exp(-k * (xs[-1] - xs[0])), rtol=1e-10)


def test_core_potential_nearly_real_at_small_loss():
    # Im V / |V| scales with delta + mu, which is about 1e-8 here
    c = cfg(1e-10)
    v = reconstruct_real(SRC, c, [(-3.5, 6.7), (-5.0, 2.0), (-4.0, 12.0)], tol=1e-12).values
    assert np.all(np.abs(v.imag) <= 1e-8 * np.abs(v))


def test_gradient_independent_of_gauge_constant():
    c = cfg()
    ys = np.array([-1.0, 2.0, 6.5])
    for der in ("x", "y"):
        g0 = reconstruct_line(SRC, c, 0.8, ys, k_max=20.0, derivative=der)
        g1 = reconstruct_line(SRC, c, 0.8, ys, k_max=20.0, derivative=der, A0=1e3)
        np.testing.assert_array_equal(g0, g1)


def test_certificate_constants():
    from calr.sources import bound_constants
    c = cfg(1e-6)
    cert = boundedness_certificates(SRC, c)
    bc = bound_constants(SRC)
    assert cert.C9 == pytest.approx(math.pi ** -1.5 * (bc.C_I**2 + 2.0 * 4.0), rel=1e-14)
    doubled = boundedness_certificates(SRC.with_charge(2.0), c)
    assert doubled.C9 == pytest.approx(4.0 * cert.C9, rel=1e-12)
    assert doubled.C10 == pytest.approx(4.0 * cert.C10, rel=1e-12)
    assert cert.x_core == -3.0 * c.a and cert.x_matrix == c.a + max(7.0, 4.0 * c.a)
