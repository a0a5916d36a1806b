"""Three-layer slab geometry, loss model and the layer scalars.

The slab occupies ``0 <= x <= a`` and has permittivity ``-1 + i*delta``.
The core (``x < 0``) has permittivity ``1 + i*mu`` with
``mu = delta + lam * delta**beta`` and the matrix (``x > a``) is vacuum.

Most kernels here are plain array functions of ``(a, delta, beta, lam, k)``
so they can be evaluated on whole sample sets at once; :class:`SlabConfig`
wraps them for the single-parameter case.  Everything depends on ``|k|``
only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._roots import DELTA_CAP, largest_admissible
from .errors import DeltaTooLargeError, InvalidParameterError
from .logval import TransformValue

DEFAULT_C1 = 26.0
DEFAULT_CL = 0.5


def feasible(beta: float, lam: float) -> bool:
    """Whether ``(beta, lam)`` keeps the core loss non-negative as delta -> 0."""
    if not beta > 0:
        raise InvalidParameterError(f"beta must be positive, got {beta}")
    if beta < 1:
        return lam > 0
    if beta == 1:
        return lam >= -1
    return lam != 0


def tau(beta: float) -> float:
    """Critical-depth ratio: sources closer than ``tau(beta)*a`` can resonate."""
    if not beta > 0:
        raise InvalidParameterError(f"beta must be positive, got {beta}")
    if beta < 1:
        return (beta + 2.0) / (beta + 1.0)
    return 1.5


def loss_mu(delta, beta, lam):
    """Core loss ``delta + lam * delta**beta``."""
    delta = np.asarray(delta, dtype=float)
    return delta + lam * delta**beta


def log_resonance_product(delta, beta, lam):
    """``log(2 delta^2 + lam delta^(beta+1))`` evaluated as ``log delta + log(delta + mu)``."""
    delta = np.asarray(delta, dtype=float)
    s = 2.0 * delta + lam * delta**beta
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(delta) + np.log(s)


def resonance_wavenumber(a, delta, beta, lam):
    """Array version of :func:`k0` without error checks."""
    return -log_resonance_product(delta, beta, lam) / (2.0 * a)


def log_abs_g2(a, delta, beta, lam, k):
    """``log|g(k)|^2`` in a form that never forms huge intermediates.

    Uses ``g = i delta (1 + P E - i S E)`` with ``E = exp(-2|k|a)``,
    ``P = (4 + lam delta^(beta+1)) / D`` and ``S = 2 (delta - lam delta^beta) / D``,
    where ``D = 2 delta^2 + lam delta^(beta+1)``.
    """
    delta = np.asarray(delta, dtype=float)
    k = np.abs(np.asarray(k, dtype=float))
    u, ratio = _g_exponent(a, delta, beta, lam, k)
    return 2.0 * np.log(delta) + _log_g_bracket(u, ratio)


def _g_exponent(a, delta, beta, lam, k):
    """Return ``u = log(P) - 2|k|a`` and ``S/P``."""
    log_p = np.log(4.0 + lam * delta ** (beta + 1)) - log_resonance_product(delta, beta, lam)
    ratio = 2.0 * (delta - lam * delta**beta) / (4.0 + lam * delta ** (beta + 1))
    return log_p - 2.0 * k * a, ratio


def _log_g_bracket(u, ratio):
    """``log((1 + e^u)^2 + (ratio e^u)^2)``."""
    u = np.asarray(u, dtype=float)
    small = u <= 0
    us = np.where(small, u, 0.0)
    ub = np.where(small, 0.0, u)
    with np.errstate(under="ignore"):
        es = np.exp(us)
        eb = np.exp(-ub)
    lo = np.log((1.0 + es) ** 2 + (ratio * es) ** 2)
    hi = 2.0 * ub + np.log((eb + 1.0) ** 2 + ratio**2)
    return np.where(small, lo, hi)


def g_factored(a, delta, beta, lam, k) -> TransformValue:
    """``g(k)`` as a :class:`TransformValue`."""
    delta = np.asarray(delta, dtype=float)
    k = np.abs(np.asarray(k, dtype=float))
    u, ratio = _g_exponent(a, delta, beta, lam, k)
    logm = np.log(delta) + 0.5 * _log_g_bracket(u, ratio)
    small = u <= 0
    with np.errstate(under="ignore"):
        es = np.exp(np.where(small, u, 0.0))
        eb = np.exp(-np.where(small, 0.0, u))
    arg = np.where(small, np.arctan2(ratio * es, 1.0 + es), np.arctan2(ratio, eb + 1.0))
    return TransformValue(logm, 0.5 * np.pi - arg)


def g_direct(a, delta, beta, lam, k):
    """``g(k)`` by direct complex arithmetic (valid while representable)."""
    delta = np.asarray(delta, dtype=float)
    k = np.abs(np.asarray(k, dtype=float))
    db = lam * delta**beta
    e = np.exp(-2.0 * k * a)
    return 1j * delta * (1.0 - (delta + 2j) * (2j - db) / (delta * (2.0 * delta + db)) * e)


def reflection_ratio(delta, beta, lam):
    """``(chi_c - 1)/(chi_c + 1) = (2i - lam delta^beta) / (2 delta + lam delta^beta)``."""
    db = lam * np.asarray(delta, dtype=float) ** beta
    return (2j - db) / (2.0 * delta + db)


def layer_difference_factor(delta, beta, lam, e):
    """``(psi_plus - psi_minus/|k|) * exp(-|k|a)`` as a function of ``e = exp(-2|k|a)``."""
    delta = np.asarray(delta, dtype=float)
    mu = loss_mu(delta, beta, lam)
    num = 1j * (delta + mu) * (2.0 - 1j * delta) + 1j * delta * (-2.0 + 1j * (delta - mu)) * e
    return num / (2.0 * (-1.0 + 1j * delta))


def layer_sum_factor(delta, beta, lam, e):
    """``(psi_plus + psi_minus/|k|) * exp(-|k|a)`` as a function of ``e = exp(-2|k|a)``.

    Expanded so that no cancellation occurs for small losses.
    """
    delta = np.asarray(delta, dtype=float)
    mu = loss_mu(delta, beta, lam)
    re = -(delta * (delta + mu) + (4.0 - delta * (delta - mu)) * e)
    im = (4.0 * delta - 2.0 * mu) * e
    return (re + 1j * im) / (2.0 * (-1.0 + 1j * delta))


def g_bracket_sup(delta, beta, lam):
    """Bracketed quantity bounding ``|g|^2/delta^2`` for ``k >= k0``."""
    delta = np.asarray(delta, dtype=float)
    return (25.0 + 2.0 * lam * delta ** (beta + 1) + 4.0 * delta**2
            + lam**2 * delta ** (2 * beta) * (4.0 + delta**2))


def log_L(a, xi, delta, beta, lam, k):
    """``log L(k)`` for the strip weight of width ``xi``.

    ``L = (1 - e^{-2k xi}) + W e^{-4ka} (e^{2k xi} - 1)`` with
    ``W = (lam^2 delta^{2 beta} + 4)/(2 delta + lam delta^beta)^2``.
    """
    delta = np.asarray(delta, dtype=float)
    k = np.abs(np.asarray(k, dtype=float))
    log_w = np.log(lam**2 * delta ** (2 * beta) + 4.0) - 2.0 * np.log(2.0 * delta + lam * delta**beta)
    with np.errstate(divide="ignore"):
        t1 = np.log(-np.expm1(-2.0 * k * xi))
        # e^{-4ka}(e^{2k xi} - 1) = e^{-2k(2a - xi)} (1 - e^{-2k xi})
        t2 = log_w - 2.0 * k * (2.0 * a - xi) + t1
    return np.logaddexp(t1, t2)


@dataclass(frozen=True)
class DielectricProfile:
    """Permittivities of core, slab and matrix."""

    eps_c: complex
    eps_s: complex
    eps_m: complex = 1.0 + 0.0j


@dataclass(frozen=True)
class LayerScalars:
    """Layer ratios and interface factors at one or more wavenumbers.

    ``psi_plus``/``psi_minus`` are formed directly and overflow for large
    ``|k| a``; ``g`` is also available in factored form through ``g_log``.
    """

    chi_c: complex
    chi_m: complex
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    g: np.ndarray
    g_log: TransformValue


@dataclass(frozen=True)
class SlabConfig:
    """Slab thickness, loss parameters and dissipation-strip width.

    Parameters
    ----------
    a : float
        Slab thickness.
    delta : float
        Slab loss, ``0 < delta < 1``.
    beta, lam : float
        Core loss is ``delta + lam * delta**beta``.
    xi : float
        Width of the strip ``a - xi < x < a`` where dissipation is measured.
    """

    a: float
    delta: float
    beta: float
    lam: float
    xi: float

    def __post_init__(self):
        for name in ("a", "delta", "beta", "lam", "xi"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")
        if not self.a > 0:
            raise InvalidParameterError(f"a must be positive, got {self.a}")
        if not 0 < self.delta < 1:
            raise InvalidParameterError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 < self.xi < self.a:
            raise InvalidParameterError(f"xi must lie in (0, a), got {self.xi}")
        if not feasible(self.beta, self.lam):
            raise InvalidParameterError(
                f"lambda={self.lam} is not feasible for beta={self.beta}")
        if self.mu < 0:
            raise InvalidParameterError(
                f"core loss is negative (mu={self.mu}) at delta={self.delta}")

    def with_delta(self, delta: float) -> "SlabConfig":
        return SlabConfig(self.a, delta, self.beta, self.lam, self.xi)

    @property
    def mu(self) -> float:
        return float(loss_mu(self.delta, self.beta, self.lam))

    @property
    def dielectric(self) -> DielectricProfile:
        return DielectricProfile(1.0 + 1j * self.mu, -1.0 + 1j * self.delta)

    @property
    def log_resonance_product(self) -> float:
        return float(log_resonance_product(self.delta, self.beta, self.lam))

    @property
    def resonance_product(self) -> float:
        """``2 delta^2 + lam delta^(beta+1)``."""
        return float(np.exp(self.log_resonance_product))

    def k0(self) -> float:
        return k0(self)

    def log_abs_g2(self, k):
        return log_abs_g2(self.a, self.delta, self.beta, self.lam, k)

    def log_L(self, k):
        return log_L(self.a, self.xi, self.delta, self.beta, self.lam, k)


def k0(cfg: SlabConfig) -> float:
    """Resonance wavenumber ``ln(1/(2 delta^2 + lam delta^(beta+1))) / (2a)``.

    Raises
    ------
    InvalidParameterError
        If the logarithm's argument is not positive.
    DeltaTooLargeError
        If the result is negative.
    """
    s = 2.0 * cfg.delta + cfg.lam * cfg.delta**cfg.beta
    if not s > 0:
        raise InvalidParameterError("2 delta^2 + lam delta^(beta+1) is not positive")
    value = float(-log_resonance_product(cfg.delta, cfg.beta, cfg.lam) / (2.0 * cfg.a)) + 0.0
    if value < 0:
        raise DeltaTooLargeError(
            f"delta={cfg.delta} too large: resonance wavenumber {value} < 0", value)
    return value


def layer_scalars(cfg: SlabConfig, k) -> LayerScalars:
    """Layer ratios, ``psi_plus``, ``psi_minus`` and ``g`` at wavenumber(s) ``k``."""
    k = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k)):
        raise InvalidParameterError("k must be finite")
    kk = np.abs(k)
    prof = cfg.dielectric
    chi_c = prof.eps_s / prof.eps_c
    chi_m = prof.eps_s / prof.eps_m
    with np.errstate(over="ignore"):
        ep = np.exp(kk * cfg.a)
        em = np.exp(-kk * cfg.a)
    psi_plus = ((chi_c + 1) * ep + (chi_c - 1) * em) / (2 * chi_c)
    psi_minus = kk * chi_m * ((chi_c + 1) * ep - (chi_c - 1) * em) / (2 * chi_c)
    glog = g_factored(cfg.a, cfg.delta, cfg.beta, cfg.lam, kk)
    return LayerScalars(chi_c, chi_m, psi_plus, psi_minus, glog.to_complex(), glog)


def delta_mu(beta: float, lam: float) -> float:
    """Largest loss below which the core loss stays non-negative (capped below 1)."""
    if not feasible(beta, lam):
        raise InvalidParameterError(f"lambda={lam} is not feasible for beta={beta}")
    if lam >= 0:
        return DELTA_CAP
    return largest_admissible(lambda d: loss_mu(d, beta, lam) >= 0)


def admissible_delta_thresholds(beta: float, lam: float):
    """Return ``(delta_mu, delta_0)``.

    ``delta_0`` is the largest loss with ``0 < 2 delta^2 + lam delta^(beta+1) < 1``
    on all of ``(0, delta_0]``.
    """
    dmu = delta_mu(beta, lam)

    def ok(d):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (loss_mu(d, beta, lam) >= 0) & (log_resonance_product(d, beta, lam) < 0)

    return dmu, largest_admissible(ok, upper=dmu)


def delta_g(beta: float, lam: float, c1: float = DEFAULT_C1) -> float:
    """Largest loss keeping ``|g|^2 <= c1 delta^2`` for ``k >= k0`` (needs ``c1 > 25``)."""
    if not c1 > 25:
        raise InvalidParameterError("c1 must exceed 25")
    dmu = delta_mu(beta, lam)
    return largest_admissible(lambda d: g_bracket_sup(d, beta, lam) <= c1, upper=dmu)


def delta_L(a: float, xi: float, beta: float, lam: float, c_l: float = DEFAULT_CL) -> float:
    """Largest loss keeping ``L >= c_l`` for ``k >= k0``.

    Criterion: ``(2 delta^2 + lam delta^(beta+1))^(xi/a) <= 1 - c_l``.
    """
    if not 0 < c_l < 1:
        raise InvalidParameterError("c_l must lie in (0, 1)")
    _, d0 = admissible_delta_thresholds(beta, lam)
    target = np.log1p(-c_l)

    def ok(d):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (xi / a) * log_resonance_product(d, beta, lam) <= target

    return largest_admissible(ok, upper=d0)


def psi_difference_ratio_sup(delta, beta, lam):
    """``sup_k |psi_plus - psi_minus/|k||^2 e^{-2|k|a} / (delta + mu)^2``.

    The ratio is a convex quadratic in ``e = exp(-2|k|a)`` on ``[0, 1]``, so
    the supremum is attained at an endpoint.
    """
    delta = np.asarray(delta, dtype=float)
    mu = loss_mu(delta, beta, lam)
    vals = [np.abs(layer_difference_factor(delta, beta, lam, e)) ** 2 for e in (0.0, 1.0)]
    return np.maximum(vals[0], vals[1]) / (delta + mu) ** 2


def delta_psi_minus(beta: float, lam: float) -> float:
    """Largest loss for which ``|psi_plus - psi_minus/|k||^2 <= 5/2 (delta+mu)^2 e^{2|k|a}``."""
    dmu = delta_mu(beta, lam)
    return largest_admissible(lambda d: psi_difference_ratio_sup(d, beta, lam) <= 2.5,
                              upper=dmu)
