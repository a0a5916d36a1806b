"""Fourier-domain potentials in the three layers and real-space reconstruction.

For each wavenumber the potential solves ``V'' = k^2 V - rho_hat / eps``
layer by layer, decays away from the slab, and is continuous together with
``eps * dV/dx`` across ``x = 0`` and ``x = a``.  With
``I = I_k`` the closed forms are::

    core   (x < 0):       A_k exp(|k| x)
    slab   (0 <= x <= a): I / (|k| g) * (exp(|k| x) + r exp(-|k| x))
    matrix (x > a):       A_k q_minus/2 * exp(-|k| (x - 2a)) + G(x, k) / (2|k|)

where ``A_k = 2 (delta + i) I / ((delta + mu) |k| g)``, ``r`` is
:func:`calr.slab.reflection_ratio`, ``q_minus`` is
:func:`calr.slab.layer_difference_factor` and ``G`` is the free-space kernel
integral of the source.  At ``k = 0`` the potential is the arbitrary
constant ``A0`` (zero by default), which does not affect any observable.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NotApplicableError
from .logval import TransformValue, log1p_exp_complex, log_add
from .quadrature import adaptive_integrate, panel_nodes, KRONROD_WEIGHTS
from .slab import (SlabConfig, delta_psi_minus, g_factored, layer_difference_factor,
                   reflection_ratio)
from .sources import ChargeDensity, bound_constants

REGIONS = ("c", "s", "m")


def _patch_zero(tv: TransformValue, k, value):
    k = np.asarray(k)
    if not np.any(k == 0):
        return tv
    z = TransformValue.from_complex(np.full(k.shape, complex(value)))
    zero = k == 0
    return TransformValue(np.where(zero, z.log_magnitude, tv.log_magnitude),
                          np.where(zero, z.phase, tv.phase))


def _core_factor(src: ChargeDensity, cfg: SlabConfig, k):
    """``I_k / (|k| g)`` in log form."""
    k = np.asarray(k, dtype=float)
    kk = np.where(k == 0, 1.0, np.abs(k))
    i_tv = src.transform_I(k)
    g_tv = g_factored(cfg.a, cfg.delta, cfg.beta, cfg.lam, kk)
    return (i_tv / g_tv).scale(-np.log(kk))


def coefficient_A(src: ChargeDensity, cfg: SlabConfig, k, A0: complex = 0.0) -> TransformValue:
    """Core-side amplitude ``A_k``; ``A0`` is returned at ``k = 0``."""
    k = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k)):
        raise InvalidParameterError("k must be finite")
    d = cfg.delta
    log_pref = math.log(2.0) + 0.5 * math.log1p(d * d) - math.log(d + cfg.mu)
    tv = _core_factor(src, cfg, k).scale(log_pref, math.atan2(1.0, d))
    return _patch_zero(tv, k, A0)


def potential_hat(src: ChargeDensity, cfg: SlabConfig, region: str, x: float, k,
                  derivative: bool = False, A0: complex = 0.0) -> TransformValue:
    """``V_hat(x, k)`` (or ``dV_hat/dx``) in the given layer.

    Parameters
    ----------
    region : {'c', 's', 'm'}
        Core (``x <= 0``), slab (``0 <= x <= a``) or matrix (``x >= a``).
        Boundary points are accepted by both adjacent layers and give the
        one-sided limits.
    """
    k = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k)):
        raise InvalidParameterError("k must be finite")
    a = cfg.a
    kk = np.where(k == 0, 1.0, np.abs(k))
    with np.errstate(divide="ignore"):
        log_k = np.log(kk)
    if region == "c":
        if x > 0:
            raise InvalidParameterError(f"core region needs x <= 0, got {x}")
        tv = coefficient_A(src, cfg, k).scale(kk * x)
        if derivative:
            tv = tv.scale(log_k)
    elif region == "s":
        if not 0 <= x <= a:
            raise InvalidParameterError(f"slab region needs 0 <= x <= {a}, got {x}")
        r = complex(reflection_ratio(cfg.delta, cfg.beta, cfg.lam))
        log_w = math.log(abs(r)) - 2.0 * kk * x
        lm, ph = log1p_exp_complex(log_w, np.full(k.shape, np.angle(r)),
                                   sign=-1.0 if derivative else 1.0)
        tv = _core_factor(src, cfg, k).scale(kk * x + lm, ph)
        if derivative:
            tv = tv.scale(log_k)
    elif region == "m":
        if x < a:
            raise InvalidParameterError(f"matrix region needs x >= {a}, got {x}")
        with np.errstate(under="ignore"):
            e = np.exp(-2.0 * kk * a)
        qd = TransformValue.from_complex(layer_difference_factor(cfg.delta, cfg.beta, cfg.lam, e))
        reflected = (coefficient_A(src, cfg, k) * qd).scale(-math.log(2.0) - kk * (x - 2.0 * a))
        gval, gder = src.green_integral(x, k)
        if derivative:
            reflected = reflected.scale(log_k, np.pi)
            direct = gder.scale(-math.log(2.0) - log_k)
        else:
            direct = gval.scale(-math.log(2.0) - log_k)
        tv = log_add(reflected, direct)
    else:
        raise InvalidParameterError(f"unknown region {region!r}")
    return _patch_zero(tv, k, 0.0 if derivative else A0)


def region_of(cfg: SlabConfig, x: float) -> str:
    if x < 0:
        return "c"
    if x <= cfg.a:
        return "s"
    return "m"


# -- decay envelopes -------------------------------------------------------

def _envelope_terms(src: ChargeDensity, cfg: SlabConfig, x: float):
    """Terms ``(c, q, gamma)`` with ``|V_hat(x, k)| <= sum c k^-q exp(-gamma k)``.

    Built from the source envelope ``|I_k| <= C k^-p exp(-k d0)``, the
    lower bounds ``|g| >= delta`` and ``|k psi_plus + psi_minus| >= sqrt(2) k
    exp(-k a)``.  Returns ``None`` when ``x`` lies inside the support, where
    the transform decays only algebraically.
    """
    log_c, p = src.I_envelope()
    c = math.exp(log_c)
    b = src.support
    a = cfg.a
    q = p + 1.0
    region = region_of(cfg, x)
    if region == "c":
        return [(c / math.sqrt(2.0), q, b.d0 - x - 2.0 * a)]
    if region == "s":
        r = abs(complex(reflection_ratio(cfg.delta, cfg.beta, cfg.lam)))
        return [(c / cfg.delta, q, b.d0 - x), (c * r / cfg.delta, q, b.d0 + x)]
    if b.d0 < x < b.d1:
        return None
    qd = max(abs(complex(layer_difference_factor(cfg.delta, cfg.beta, cfg.lam, e))) for e in (0.0, 1.0))
    dist = b.d0 - x if x <= b.d0 else x - b.d1
    return [(c * qd / (2.0 * math.sqrt(2.0)), q, b.d0 + x - 4.0 * a), (0.5 * c, q, dist)]


def _tail(terms, K):
    """``(1/pi) sum c K^-q exp(-gamma K) / gamma``: bound on both k-tails of V."""
    total = 0.0
    for c, q, gamma in terms:
        if gamma <= 0:
            return math.inf
        total += c * K ** (-q) * math.exp(-gamma * K) / gamma
    return total / math.pi


def _derivative_terms(terms):
    # an extra factor |k| in the integrand; absorb it by lowering the power
    return [(c, q - 1.0, g) for c, q, g in terms]


# -- real-space reconstruction ---------------------------------------------

@dataclass
class RealField:
    """Reconstructed potential at a set of points.

    Attributes
    ----------
    points : ndarray, shape (n, 2)
    values : ndarray of complex
        ``V(x, y)``; imaginary parts reflect the complex permittivities.
    truncation_estimate : ndarray
        Bound on the neglected ``|k| > k_max`` contribution.
    k_max : ndarray
    quadrature_error : ndarray
    warning : ndarray of bool
        Set where the truncation or quadrature target was missed.
    """

    points: np.ndarray
    values: np.ndarray
    truncation_estimate: np.ndarray
    k_max: np.ndarray
    quadrature_error: np.ndarray
    warning: np.ndarray

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "re_V", "im_V", "truncation_estimate"])
            for (x, y), v, t in zip(self.points, self.values, self.truncation_estimate):
                w.writerow([f"{x:.16e}", f"{y:.16e}", f"{v.real:.16e}",
                            f"{v.imag:.16e}", f"{t:.16e}"])


def _symmetric_integrand(src, cfg, x, y, region, derivative, A0):
    """``V_hat(x,k) e^{iky} + V_hat(x,-k) e^{-iky}`` on k > 0 (optionally a derivative)."""
    dx = derivative == "x"

    def f(k):
        out = np.zeros(k.shape, dtype=complex)
        for sgn in (1.0, -1.0):
            ks = sgn * k
            tv = potential_hat(src, cfg, region, x, ks, derivative=dx, A0=A0)
            if derivative == "y":
                tv = tv.scale(np.log(k), sgn * 0.5 * np.pi)
            out += tv.scale(0.0, ks * y).to_complex()
        return out

    return f


def _panel_width(src, y):
    return math.pi / (1.0 + abs(y - src.y_center))


def reconstruct_point(src, cfg, x, y, k_max=None, tol=1e-10, derivative=None,
                      A0=0.0, max_panels=2**16):
    """Inverse transform at one point; returns ``(value, trunc, k_max, err, warn)``."""
    region = region_of(cfg, x)
    terms = _envelope_terms(src, cfg, x)
    if terms is not None and derivative is not None:
        terms = _derivative_terms(terms)
    f = _symmetric_integrand(src, cfg, x, y, region, derivative, A0)
    width = _panel_width(src, y)
    gamma = min(t[2] for t in terms) if terms else 0.0
    fixed = k_max is not None
    if fixed:
        K = float(k_max)
    elif gamma > 0:
        K = 40.0 / gamma
    else:
        K = 200.0 / max(cfg.a, 1e-300)
    lo = 0.0
    total = 0.0
    err = 0.0
    warn = False
    for _ in range(12):
        n = max(1, int(math.ceil((K - lo) / width)))
        res = adaptive_integrate(f, np.linspace(lo, K, n + 1), rtol=0.1 * tol,
                                 atol=1e-300, max_panels=max(max_panels, 4 * n))
        total += res.value
        err += res.error
        warn |= not res.converged
        trunc = _tail(terms, K) if terms else math.inf
        if fixed or trunc <= tol * abs(total) / (2 * math.pi) or not math.isfinite(trunc):
            break
        lo, K = K, 2.0 * K
    value = total / (2.0 * math.pi)
    trunc = trunc if terms else math.inf
    warn |= not (trunc <= tol * max(abs(value), 1e-300))
    return value, trunc, K, err / (2.0 * math.pi), warn


def reconstruct_real(src: ChargeDensity, cfg: SlabConfig, points, k_max=None,
                     tol: float = 1e-10, derivative=None, A0: complex = 0.0) -> RealField:
    """Reconstruct ``V(x, y) = (1/2pi) int V_hat(x, k) e^{iky} dk`` at points.

    Each point gets its own panel decomposition of ``(0, k_max]`` with panel
    width at most ``pi / (1 + |y - y_c|)`` (``y_c`` the source centre), refined
    adaptively.  When ``k_max`` is not given it is doubled until the analytic
    tail bound falls below ``tol`` times the accumulated value.

    Parameters
    ----------
    points : array_like, shape (n, 2)
    derivative : {None, 'x', 'y'}
        Reconstruct a partial derivative instead of the potential.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    vals = np.zeros(n, dtype=complex)
    trunc = np.zeros(n)
    kmax = np.zeros(n)
    qerr = np.zeros(n)
    warn = np.zeros(n, dtype=bool)
    for i, (x, y) in enumerate(pts):
        vals[i], trunc[i], kmax[i], qerr[i], warn[i] = reconstruct_point(
            src, cfg, x, y, k_max=k_max, tol=tol, derivative=derivative, A0=A0)
    return RealField(pts, vals, trunc, kmax, qerr, warn)


def reconstruct_line(src: ChargeDensity, cfg: SlabConfig, x: float, ys, k_max: float,
                     derivative=None, A0: complex = 0.0, panels_per_unit=None):
    """Reconstruct along a line ``x = const`` on a shared fixed panel grid.

    The panel width follows the largest ``|y - y_c|`` requested, so one set of
    transform evaluations serves every ``y``.  Used for window integrals in
    ``y`` where per-point adaptivity would repeat the same work.
    """
    ys = np.asarray(ys, dtype=float)
    region = region_of(cfg, x)
    width = math.pi / (1.0 + np.max(np.abs(ys - src.y_center)))
    if panels_per_unit is not None:
        width = min(width, 1.0 / panels_per_unit)
    n = max(1, int(math.ceil(k_max / width)))
    edges = np.linspace(0.0, k_max, n + 1)
    nodes, half = panel_nodes(edges[:-1], edges[1:])
    k = nodes.ravel()
    w = (half[:, None] * KRONROD_WEIGHTS[None, :]).ravel()
    out = np.zeros(ys.shape, dtype=complex)
    for sgn in (1.0, -1.0):
        ks = sgn * k
        tv = potential_hat(src, cfg, region, x, ks, derivative=(derivative == "x"), A0=A0)
        if derivative == "y":
            tv = tv.scale(np.log(k), sgn * 0.5 * np.pi)
        vhat = tv.to_complex() * w
        # chunk the (k, y) phase matrix to bound memory
        for start in range(0, ys.size, 64):
            yy = ys[start:start + 64]
            out[start:start + 64] += np.exp(1j * np.outer(yy, ks)) @ vhat
    return out / (2.0 * math.pi)


# -- boundedness certificates ------------------------------------------------

@dataclass(frozen=True)
class BoundednessCertificate:
    """Uniform bounds on ``|V|`` far from the slab.

    ``|V(x, y)| <= C9`` for ``x < x_core`` and ``|V(x, y)| <= C10`` for
    ``x > x_matrix``.
    """

    C9: float
    C10: float
    x_core: float
    x_matrix: float


def boundedness_certificates(src: ChargeDensity, cfg: SlabConfig) -> BoundednessCertificate:
    """Constants bounding the potential outside the resonant strip.

    Raises
    ------
    NotApplicableError
        If ``delta`` exceeds the threshold where the matrix-side factor bound holds.
    """
    if cfg.delta > delta_psi_minus(cfg.beta, cfg.lam):
        raise NotApplicableError("delta above the psi-difference threshold")
    bc = bound_constants(src)
    b = src.support
    spread = b.width * src.l2_norm_sq
    c0 = abs(src.moment_C0())
    s2 = (cfg.delta + cfg.mu) ** 2
    c9 = math.pi ** -1.5 * (bc.C_I**2 + spread)
    c10 = math.pi ** -1.5 * (1.25 * s2 * c0**2 + bc.C_J**2 + spread * (1.25 * s2 + 1.0))
    return BoundednessCertificate(c9, c10, -3.0 * cfg.a, cfg.a + max(b.d1, 4.0 * cfg.a))


def interface_residuals(src: ChargeDensity, cfg: SlabConfig, k):
    """Relative mismatch of value and ``eps * dV/dx`` at ``x = 0`` and ``x = a``."""
    prof = cfg.dielectric
    a = cfg.a
    out = {}
    for name, x, left, right, el, er in (("x=0", 0.0, "c", "s", prof.eps_c, prof.eps_s),
                                         ("x=a", a, "s", "m", prof.eps_s, prof.eps_m)):
        vl = potential_hat(src, cfg, left, x, k).to_complex()
        vr = potential_hat(src, cfg, right, x, k).to_complex()
        dl = el * potential_hat(src, cfg, left, x, k, derivative=True).to_complex()
        dr = er * potential_hat(src, cfg, right, x, k, derivative=True).to_complex()
        out[name] = (np.abs(vl - vr) / np.maximum(np.abs(vl), np.abs(vr)),
                     np.abs(dl - dr) / np.maximum(np.abs(dl), np.abs(dr)))
    return out


def _fd_step(src, cfg, region, x, kk):
    """Outer step of the extrapolated central difference for one wavenumber.

    Inside the support the source term sets the scale and ``4e-3 / max(1, k)``
    suffices.  Elsewhere ``V`` varies on the length ``1/k``, so the step is
    ``4e-3 / k``.  Either way it stays below half the distance to the nearest
    interface or support edge.
    """
    b = src.support
    cuts = [0.0, cfg.a] + ([b.d0, b.d1] if region == "m" else [])
    gap = min(abs(x - c) for c in cuts)
    if region == "m" and b.d0 < x < b.d1:
        return min(4e-3 / max(1.0, kk), 0.5 * gap)
    return min(4e-3 / max(kk, 1e-300), 0.5 * gap)


def ode_residual(src: ChargeDensity, cfg: SlabConfig, x: float, k, step: float | None = None):
    """Relative residual of ``eps (V'' - k^2 V) = -rho_hat`` by finite differences.

    ``V''`` is the Richardson extrapolation ``(4 D(h/2) - D(h)) / 3`` of
    central differences ``D``.  The residual is scaled by the largest of
    ``|V''|``, ``k^2 |V|`` and ``|rho_hat / eps|``.  ``step`` (``h``) defaults
    to a per-wavenumber choice; ``x +- h`` must stay inside one layer.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    region = region_of(cfg, x)
    lo, hi = {"c": (-math.inf, 0.0), "s": (0.0, cfg.a), "m": (cfg.a, math.inf)}[region]
    eps = {"c": cfg.dielectric.eps_c, "s": cfg.dielectric.eps_s, "m": cfg.dielectric.eps_m}[region]
    out = np.empty(k.shape)
    for i, ki in enumerate(k):
        h = step if step is not None else _fd_step(src, cfg, region, x, abs(ki))
        if not (lo < x - h and x + h < hi):
            raise InvalidParameterError("finite-difference stencil crosses an interface")
        kv = np.array([ki])
        offsets = np.array([-h, -0.5 * h, 0.0, 0.5 * h, h])
        v = np.array([complex(potential_hat(src, cfg, region, x + s, kv).to_complex()[0])
                      for s in offsets])
        d_full = (v[0] - 2.0 * v[2] + v[4]) / h**2
        d_half = (v[1] - 2.0 * v[2] + v[3]) / (0.5 * h) ** 2
        d2 = (4.0 * d_half - d_full) / 3.0
        rho = complex(np.ravel(src.rho_hat(x, kv))[0]) / eps if region == "m" else 0.0
        kvv = ki**2 * v[2]
        scale = max(abs(d2), abs(kvv), abs(rho))
        out[i] = abs(d2 - kvv + rho) / scale
    return out
