"""Reference computations that share no code with the package.

Everything here works from the raw definitions: the density itself, the
layer permittivities and the interface conditions.
"""
import math

import numpy as np
from scipy import integrate


def permittivities(delta, beta, lam):
    mu = delta + lam * delta**beta
    return 1.0 + 1j * mu, -1.0 + 1j * delta, 1.0


def rect_density(x0, y0, d, h, Q=1.0):
    def rho(x, y):
        if abs(x - x0) > d or abs(y - y0) > h:
            return 0.0
        return Q * math.copysign(1.0, y - y0) if y != y0 else 0.0
    return rho


def rect_rho_hat(x0, y0, d, h, x, k, Q=1.0):
    """``int rho(x, y) exp(-iky) dy`` by 1-D quadrature over each half."""
    if abs(x - x0) > d:
        return 0.0j
    out = 0.0j
    for lo, hi, s in ((y0 - h, y0, -Q), (y0, y0 + h, Q)):
        re = integrate.quad(lambda y: s * math.cos(k * y), lo, hi, epsabs=0, epsrel=1e-13, limit=200)[0]
        im = integrate.quad(lambda y: -s * math.sin(k * y), lo, hi, epsabs=0, epsrel=1e-13, limit=200)[0]
        out += re + 1j * im
    return out


def rect_I_shifted(x0, y0, d, h, k, Q=1.0):
    """``I_k exp(|k| d0)`` for the split rectangle by scipy ``dblquad``."""
    kk = abs(k)
    d0 = x0 - d
    out = 0.0j
    for lo, hi, s in ((y0 - h, y0, -Q), (y0, y0 + h, Q)):
        for part, fn in ((1.0, np.cos), (-1j, np.sin)):
            val = integrate.dblquad(lambda y, x: s * math.exp(-kk * (x - d0)) * fn(k * y),
                                    x0 - d, x0 + d, lo, hi, epsabs=0, epsrel=1e-13)[0]
            out += part * val
    return out


def circle_I_fixed_grid(x0, y0, R, k, Q=1.0, n=1_000_001):
    """``I_k`` for the split disc by composite Simpson on ``n`` points in ``x``.

    The inner ``y`` integral over a chord of half-length ``c`` is
    ``4 Q sin^2(k c / 2) / (i k) exp(-i k y0)``, a smooth function of ``c^2``.
    """
    x = np.linspace(x0 - R, x0 + R, n)
    c = np.sqrt(np.maximum(R * R - (x - x0) ** 2, 0.0))
    inner = 4.0 * Q * np.sin(0.5 * k * c) ** 2 / (1j * k) * np.exp(-1j * k * y0)
    return integrate.simpson(inner * np.exp(-abs(k) * x), x=x)


def circle_abs_I_angle(x0, R, k, Q=1.0):
    """``|I_k|`` for the split disc: ``(2|Q|/k) e^{-k x0} int (1 - cos(k c(s))) e^{-k s} ds``.

    The ``cos`` part is integrated with scipy ``quad`` in ``s = R sin t``;
    the constant part is ``2 sinh(kR) / k``.  Cancellation limits this to
    ``kR`` of order one and above.
    """
    kk = abs(k)
    z = kk * R
    # int_{-R}^{R} e^{-k s} ds
    a0 = 2.0 * math.sinh(z) / kk
    # int_{-R}^{R} cos(k sqrt(R^2 - s^2)) e^{-k s} ds, via s = R sin t
    val = integrate.quad(lambda t: math.cos(z * math.cos(t)) * math.exp(-z * math.sin(t)) * R * math.cos(t),
                         -math.pi / 2, math.pi / 2, epsabs=0, epsrel=1e-13, limit=400)[0]
    return abs(2.0 * Q / kk * (a0 - val)) * math.exp(-kk * x0)


def g_from_layers(a, delta, beta, lam, k):
    """``g`` through the interface solve: ``V_slab = I/(k g) (e^{kx} + r e^{-kx})``."""
    coeff = layer_solve(a, delta, beta, lam, k, 1.0)
    return 1.0 / (abs(k) * coeff[1])


def layer_solve(a, delta, beta, lam, k, I_k):
    """Coefficients ``(A, B, C, D)`` of the layered potential for source transform ``I_k``.

    ``V = A e^{kx}`` (x < 0), ``B e^{kx} + C e^{-kx}`` (0 < x < a),
    ``D e^{-kx} + I_k e^{kx} / (2k)`` (a < x < d0), from continuity of ``V``
    and ``eps dV/dx``.
    """
    ec, es, em = permittivities(delta, beta, lam)
    kk = abs(k)
    ep, emn = math.exp(kk * a), math.exp(-kk * a)
    M = np.array([
        [1.0, -1.0, -1.0, 0.0],
        [ec, -es, es, 0.0],
        [0.0, ep, emn, -emn],
        [0.0, es * ep, -es * emn, em * emn],
    ], dtype=complex)
    gp = I_k * ep / (2.0 * kk)
    rhs = np.array([0.0, 0.0, gp, em * gp], dtype=complex)
    return np.linalg.solve(M, rhs)


def strip_dissipation_layers(I_fun, a, xi, delta, beta, lam, k_max, n=200_001):
    """``delta int_{a-xi}^a int |grad V|^2`` from the layer solve, Simpson in ``k``.

    With ``V_slab = B e^{kx} + C e^{-kx}`` the cross terms cancel in
    ``|V'|^2 + k^2 |V|^2``, leaving ``2k^2 (|B|^2 e^{2kx} + |C|^2 e^{-2kx})``.
    """
    ks = np.linspace(0.0, k_max, n)[1:]
    i_vals = I_fun(ks)
    vals = np.empty(ks.size)
    for i, k in enumerate(ks):
        _, B, C, _ = layer_solve(a, delta, beta, lam, k, i_vals[i])
        vals[i] = k * (abs(B) ** 2 * (math.exp(2 * k * a) - math.exp(2 * k * (a - xi)))
                       + abs(C) ** 2 * (math.exp(-2 * k * (a - xi)) - math.exp(-2 * k * a)))
    # (1/2pi) over both signs of k gives 1/pi over k > 0
    ks = np.concatenate([[0.0], ks])
    vals = np.concatenate([[0.0], vals])
    return delta / math.pi * integrate.simpson(vals, x=ks)
