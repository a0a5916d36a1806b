"""Power dissipated in the strip ``a - xi < x < a`` of the slab.

By Plancherel the strip dissipation reduces to one wavenumber integral
``E = int_0^inf F(k) dk`` with::

    F(k) = delta |I_k|^2 / (pi k |g|^2) * exp(2 k a) * L(k)

The integrand is assembled in log form, integrated by adaptive
Gauss-Kronrod panels aligned with the oscillation of ``|I_k|``, and the
neglected tail beyond ``k_max`` is bounded in closed form with the source
envelope ``|I_k| <= C k^-p exp(-k d0)``, ``|g| >= delta`` and the
exponential-integral bound ``E1(x) < exp(-x) log(1 + 1/x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NotApplicableError
from .logval import TransformValue
from .quadrature import adaptive_integrate, panel_nodes
from .slab import (DEFAULT_C1, DEFAULT_CL, SlabConfig, admissible_delta_thresholds,
                   delta_g, delta_L, g_direct, k0)
from .sources import ChargeDensity, validate


@dataclass
class DissipationResult:
    """Value of a semi-infinite wavenumber integral and its error budget."""

    value: float
    abs_error_estimate: float
    tail_bound: float
    k_max_used: float
    panel_count: int
    warning: bool = False
    log_value: float = -math.inf


def log_integrand_F(src: ChargeDensity, cfg: SlabConfig, k):
    """``log F(k)`` as a float array (``-inf`` where ``F = 0``)."""
    k = np.asarray(k, dtype=float)
    log_i = src.transform_I(k, shifted=True).log_magnitude
    gap = src.support.d0 - cfg.a
    with np.errstate(divide="ignore"):
        return (math.log(cfg.delta) - math.log(math.pi) - np.log(k) + 2.0 * log_i
                - 2.0 * k * gap - cfg.log_abs_g2(k) + cfg.log_L(k))


def integrand_F(src: ChargeDensity, cfg: SlabConfig, k) -> TransformValue:
    """Dissipation density ``F(k)`` for ``k > 0`` in log form."""
    k = np.asarray(k, dtype=float)
    if np.any(~(k > 0)) or not np.all(np.isfinite(k)):
        raise InvalidParameterError("F(k) is defined for finite k > 0")
    return TransformValue.from_log_real(log_integrand_F(src, cfg, k))


def integrand_F_naive(src: ChargeDensity, cfg: SlabConfig, k):
    """Direct double-precision evaluation of ``F`` (for checks in the representable range)."""
    k = np.asarray(k, dtype=float)
    a, xi, d = cfg.a, cfg.xi, cfg.delta
    i_k = src.transform_I(k).to_complex()
    g = g_direct(a, d, cfg.beta, cfg.lam, k)
    db = cfg.lam * d**cfg.beta
    w = (db**2 + 4.0) / (2.0 * d + db) ** 2
    L = (1.0 - np.exp(-2 * k * xi)) + w * np.exp(-4 * k * a) * (np.exp(2 * k * xi) - 1.0)
    return d * np.abs(i_k) ** 2 / (math.pi * k * np.abs(g) ** 2) * np.exp(2 * k * a) * L


def _log_e1_upper(x):
    """``log`` of the bound ``E1(x) < exp(-x) log(1 + 1/x)``."""
    return -x + math.log(math.log1p(1.0 / x))


def _edges(lo, hi, width, breaks=()):
    pts = {lo, hi}
    pts.update(b for b in breaks if lo < b < hi)
    pts = sorted(pts)
    out = [pts[0]]
    for p0, p1 in zip(pts[:-1], pts[1:]):
        n = max(1, int(math.ceil((p1 - p0) / width)))
        out.extend(np.linspace(p0, p1, n + 1)[1:])
    return np.array(out)


def integrate_log_positive(log_f, k_lo, step, width, log_tail, tol=1e-8,
                           max_panels=2**18, breaks=()):
    """Integrate a positive function given by its log over ``[k_lo, inf)``.

    Parameters
    ----------
    log_f : callable
        Vectorised ``log f(k)``.
    step : float
        Initial truncation length; the range is extended by growing steps
        until ``exp(log_tail(K))`` is below ``0.01 * tol`` of the value.
    width : float
        Initial panel width.
    log_tail : callable
        ``log`` of an upper bound on ``int_K^inf f``.

    Returns
    -------
    DissipationResult
    """
    K = k_lo + step
    edges = _edges(k_lo, K, width, breaks)
    nodes, _ = panel_nodes(edges[:-1], edges[1:])
    shift = float(np.max(log_f(nodes)))
    if not np.isfinite(shift):
        shift = 0.0

    def scaled(k):
        with np.errstate(under="ignore"):
            return np.exp(log_f(k) - shift)

    total = 0.0
    err = 0.0
    panels = 0
    converged = True
    lt = math.inf
    for _ in range(60):
        budget = max(max_panels - panels, edges.size)
        res = adaptive_integrate(scaled, edges, rtol=0.5 * tol, atol=0.5 * tol * total,
                                 max_panels=budget)
        total += res.value
        err += res.error
        panels += res.panel_count
        converged &= res.converged
        lt = log_tail(K) - shift
        if total > 0 and lt <= math.log(0.01 * tol * total):
            break
        if total == 0 and lt < -745:
            break
        if panels >= max_panels:
            converged = False
            break
        step *= 2.0
        edges = _edges(K, K + step, width)
        K += step
    tail = math.exp(min(lt + shift, 709.0))
    log_value = shift + math.log(total) if total > 0 else -math.inf
    value = math.exp(min(log_value, 709.0)) if total > 0 else 0.0
    abs_err = err * math.exp(min(shift, 709.0))
    warning = (not converged) or abs_err + tail > tol * value + 1e-300
    return DissipationResult(value, abs_err, tail, K, panels, bool(warning), log_value)


def _log_tail_F(src, cfg):
    log_c, p = src.I_envelope()
    gap = src.support.d0 - cfg.a
    a, xi, d = cfg.a, cfg.xi, cfg.delta
    db = cfg.lam * d**cfg.beta
    log_w = math.log(db**2 + 4.0) - 2.0 * math.log(2.0 * d + db)

    def log_tail(K):
        log_lsup = np.logaddexp(0.0, log_w - 2.0 * K * (2.0 * a - xi))
        return (2 * log_c - math.log(math.pi) - math.log(d) - 2 * p * math.log(K)
                + _log_e1_upper(2.0 * K * gap) + float(log_lsup))

    return log_tail


def _check_source(src, cfg):
    rep = validate(src, cfg.a)
    if not rep.ok:
        names = ", ".join(c.name for c in rep.failures())
        raise InvalidParameterError(f"source is not admissible: {names}")


def _resonance_or_zero(cfg):
    try:
        return k0(cfg)
    except InvalidParameterError:
        return 0.0


def dissipation(src: ChargeDensity, cfg: SlabConfig, tol: float = 1e-8,
                max_panels: int = 2**18, k_lo: float = 0.0) -> DissipationResult:
    """Strip dissipation ``int_{k_lo}^inf F(k) dk`` (``k_lo = 0`` gives ``E_xi``).

    Panels start at ``k_lo`` (``F(0) = 0``), have width at most the source's
    oscillation period ``src.k_period`` and a breakpoint at the resonance
    wavenumber.  The result carries a warning flag when the requested
    relative tolerance is not met within the panel budget.
    """
    if src.abs_charge == 0:
        return DissipationResult(0.0, 0.0, 0.0, 0.0, 0, False, -math.inf)
    _check_source(src, cfg)
    gap = src.support.d0 - cfg.a
    kres = _resonance_or_zero(cfg)
    step = max(kres - k_lo, 0.0) + 40.0 / gap
    return integrate_log_positive(lambda k: log_integrand_F(src, cfg, k), k_lo, step,
                                  src.k_period, _log_tail_F(src, cfg), tol=tol,
                                  max_panels=max_panels, breaks=(kres,))


@dataclass
class LowerBoundTail:
    """Two lower bounds on the dissipation from wavenumbers above ``k0``.

    ``tail_integral = int_{k0}^inf F`` and
    ``closed_bound = C_L/(pi C1 delta) int_{k0}^inf |I_k|^2 e^{2ka}/k dk``.
    """

    k0: float
    tail_integral: DissipationResult
    closed_bound: float
    c1: float
    c_l: float


def dissipation_lower_bound_tail(src: ChargeDensity, cfg: SlabConfig,
                                 c1: float = DEFAULT_C1, c_l: float = DEFAULT_CL,
                                 tol: float = 1e-8) -> LowerBoundTail:
    """Lower bounds on ``E_xi`` from the resonant wavenumbers ``k >= k0``.

    Raises
    ------
    NotApplicableError
        If ``delta`` exceeds any of the thresholds under which
        ``|g|^2 <= c1 delta^2`` and ``L >= c_l`` hold above ``k0``.
    """
    _, d0 = admissible_delta_thresholds(cfg.beta, cfg.lam)
    limit = min(d0, delta_g(cfg.beta, cfg.lam, c1), delta_L(cfg.a, cfg.xi, cfg.beta, cfg.lam, c_l))
    if cfg.delta > limit:
        raise NotApplicableError(f"delta={cfg.delta} above threshold {limit}")
    kres = k0(cfg)
    tail = dissipation(src, cfg, tol=tol, k_lo=kres)
    gap = src.support.d0 - cfg.a
    log_c, p = src.I_envelope()

    def log_g(k):
        with np.errstate(divide="ignore"):
            return 2.0 * src.transform_I(k, shifted=True).log_magnitude - 2.0 * k * gap - np.log(k)

    def log_tail(K):
        return 2 * log_c - 2 * p * math.log(K) + _log_e1_upper(2.0 * K * gap)

    res = integrate_log_positive(log_g, kres, 40.0 / gap, src.k_period, log_tail, tol=tol)
    closed = c_l / (math.pi * c1 * cfg.delta) * res.value
    return LowerBoundTail(kres, tail, closed, c1, c_l)
