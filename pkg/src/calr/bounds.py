"""Executable versions of the asymptotic bounds on the strip dissipation.

Contents
--------
* :func:`classify` -- decide whether a source sits inside the region of
  influence ``a < depth < tau(beta) a`` and whether the dissipation blows up.
* :func:`theorem_lower_bound` -- closed-form lower estimate that diverges as
  ``delta -> 0`` when the witness depth is inside the region of influence.
* :func:`upper_bound_chain` -- the four-term upper bound ``T1 + ... + T4``
  and its ``delta -> 0`` limits.
* :func:`blowup_sequence` -- losses ``delta_j`` whose resonance wavenumber
  hits the peaks of ``|I_k|`` for rectangle and circle sources.
* :func:`lemma_suite` -- randomized check of the pointwise inequalities the
  analysis rests on.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._roots import bisect
from .dissipation import _log_e1_upper, dissipation, integrate_log_positive
from .errors import InvalidParameterError, NotApplicableError
from .logval import TransformValue
from .potential import coefficient_A
from .quadrature import adaptive_integrate
from .slab import (DEFAULT_C1, DEFAULT_CL, SlabConfig, admissible_delta_thresholds,
                   delta_g, delta_L, delta_psi_minus, feasible, k0, layer_difference_factor,
                   layer_sum_factor, log_abs_g2, log_L, log_resonance_product, loss_mu,
                   resonance_wavenumber, tau)
from .sources import ChargeDensity, CircleSource, RectangleSource

REGIMES = ("strong_calr", "weak_calr", "no_calr", "indeterminate")
DELTA_FLOOR = 1e-300


# -- regime classification -------------------------------------------------

@dataclass
class ProbePlan:
    """How far to look for growth of ``|I_k| exp(k d*)``.

    ``n_terms`` resonant wavenumbers are used for rectangle/circle sources;
    grid sources are sampled on ``n_samples`` points up to ``k_limit``.
    """

    n_terms: int = 40
    k_limit: float = 200.0
    n_samples: int = 4000


@dataclass
class RegimeReport:
    tau_a: float
    d_star: float
    Lambda: float
    regime: str
    evidence: dict = field(default_factory=dict)


def resonant_wavenumbers(src: ChargeDensity, j):
    """Peaks of ``|I_k|`` used as blow-up witnesses.

    Rectangle: ``(2j - 1) pi / h`` (maxima of ``sin^2(hk/2)``);
    circle: ``(2/R)(pi/2 + 2 pi j)``.
    """
    j = np.asarray(j, dtype=float)
    if isinstance(src, RectangleSource):
        return (2.0 * j - 1.0) * math.pi / src.h
    if isinstance(src, CircleSource):
        return (2.0 / src.R) * (0.5 * math.pi + 2.0 * math.pi * j)
    raise InvalidParameterError("resonant sequences exist only for rectangle and circle sources")


def default_witness_depth(src: ChargeDensity, cfg: SlabConfig) -> float:
    b = src.support
    ta = tau(cfg.beta) * cfg.a
    if b.d0 < ta:
        return 0.5 * (b.d0 + min(b.d1, ta))
    return b.d0


def classify(src: ChargeDensity, cfg: SlabConfig, d_star: float | None = None,
             probe: ProbePlan | None = None) -> RegimeReport:
    """Classify the ``delta -> 0`` behaviour of the strip dissipation.

    ``Lambda`` estimates ``limsup_k |I_k| exp(k d*)``.  For rectangle and
    circle sources it is evaluated along the resonant wavenumbers and is
    infinite whenever ``d* > d0`` (the sequence grows like
    ``exp((d* - d0) k) / k^2``).  Grid sources only report the running
    maximum up to ``probe.k_limit``; their regime is indeterminate unless
    the whole support is beyond ``tau(beta) a``.
    """
    probe = probe or ProbePlan()
    b = src.support
    if d_star is None:
        d_star = default_witness_depth(src, cfg)
    if not b.d0 <= d_star <= b.d1:
        raise InvalidParameterError(f"d_star={d_star} outside [{b.d0}, {b.d1}]")
    ta = tau(cfg.beta) * cfg.a
    evidence = {}
    analytic = isinstance(src, (RectangleSource, CircleSource))
    if analytic:
        kj = resonant_wavenumbers(src, np.arange(1, probe.n_terms + 1))
        logs = src.transform_I(kj).log_magnitude + kj * d_star
        evidence["resonant_log_values"] = [float(v) for v in logs[:8]]
        growing = bool(d_star > b.d0 and logs[-1] > logs[len(logs) // 2])
        Lambda = math.inf if d_star > b.d0 else float(np.exp(logs[-1]))
    else:
        k = np.linspace(probe.k_limit / probe.n_samples, probe.k_limit, probe.n_samples)
        logs = src.transform_I(k).log_magnitude + k * d_star
        Lambda = float(np.exp(np.max(logs)))
        growing = False
        evidence["running_max_log"] = float(np.max(logs))
        evidence["k_limit"] = probe.k_limit
    if b.d0 >= ta * (1 - 1e-12):
        # the region of influence is open, so touching it from outside is bounded
        regime = "no_calr"
    elif analytic and cfg.a < d_star < ta and Lambda > 0 and growing:
        # sin^2 zeros (rectangle) and the sequence-only claim (circle) rule out
        # a full limit, so only the limsup statement is available
        regime = "weak_calr"
    else:
        regime = "indeterminate"
    evidence["d0"], evidence["d1"] = b.d0, b.d1
    return RegimeReport(ta, float(d_star), Lambda, regime, evidence)


# -- bound evaluations -------------------------------------------------------

@dataclass
class BoundEvaluation:
    """One bound evaluated at one loss value.

    ``limit`` is the stated ``delta -> 0`` limit where one is known
    (``None`` otherwise).
    """

    name: str
    delta: float
    value: float
    limit: float | None = None
    constants: dict = field(default_factory=dict)
    log_value: float = -math.inf


def witness_constant(src: ChargeDensity, cfg: SlabConfig, d_star: float,
                     n: int = 2001) -> float:
    """``min |I_k| exp(k d*)`` over ``[k0, k0 + 1]`` on ``n`` points.

    This is the lower bound on the weighted transform that the divergent
    lower estimate needs near the resonance wavenumber; it is zero when a
    zero of ``I_k`` falls in the window.
    """
    kres = k0(cfg)
    k = np.linspace(kres, kres + 1.0, n)
    logs = src.transform_I(k).log_magnitude + k * d_star
    return float(np.exp(np.min(logs)))


def theorem_constants(cfg: SlabConfig, d_star: float, Lambda: float,
                      c1: float = DEFAULT_C1, c_l: float = DEFAULT_CL) -> dict:
    """``C'``, ``C2``, ``C3``, ``C4`` of the divergent lower estimate."""
    a, lam = cfg.a, cfg.lam
    cp = c_l * math.exp(-2.0 * d_star) / (2.0 * math.pi * c1)
    out = {"C_prime": cp, "C_L": c_l, "C1": c1, "C4": cp * a * Lambda**2 / 4.0}
    if cfg.beta < 1:
        out["C2"] = cp * a * Lambda**2 * lam ** ((d_star - a) / a) / 2.0
        out["C3"] = math.log(lam)
    return out


def theorem_lower_bound(src: ChargeDensity, cfg: SlabConfig, d_star: float, Lambda: float,
                        c1: float = DEFAULT_C1, c_l: float = DEFAULT_CL,
                        check: bool = False) -> BoundEvaluation:
    """Closed-form lower estimate of ``E_xi(delta)``.

    For ``beta < 1``::

        C2 delta^((beta+1)(d*-a)/a - 1) / ((ln delta - 1)(C3 + (beta+1) ln delta))

    and for ``beta >= 1``::

        C4 delta^(2(d*-a)/a - 1) / ((ln delta - 1) ln delta)

    ``Lambda`` must bound ``|I_k| exp(k d*)`` from below near ``k0``.  With
    ``check=True`` the dissipation is computed and stored in
    ``constants['E_xi']`` together with ``constants['holds']``.

    Raises
    ------
    InvalidParameterError
        For ``beta < 1`` with ``lam <= 0`` or a non-finite/non-positive ``Lambda``.
    NotApplicableError
        If ``delta`` is above the loss thresholds or ``k0 < 1``.
    """
    if cfg.beta < 1 and cfg.lam <= 0:
        raise InvalidParameterError("beta < 1 needs lam > 0")
    if not (0 < Lambda < math.inf):
        raise InvalidParameterError("Lambda must be positive and finite")
    _, d0 = admissible_delta_thresholds(cfg.beta, cfg.lam)
    limit = min(d0, delta_g(cfg.beta, cfg.lam, c1), delta_L(cfg.a, cfg.xi, cfg.beta, cfg.lam, c_l))
    if cfg.delta > limit:
        raise NotApplicableError(f"delta={cfg.delta} above threshold {limit}")
    kres = k0(cfg)
    if kres < 1.0:
        raise NotApplicableError("k0 + 1 <= 2 k0 fails")
    const = theorem_constants(cfg, d_star, Lambda, c1, c_l)
    a, beta = cfg.a, cfg.beta
    ld = math.log(cfg.delta)
    if beta < 1:
        expo = (beta + 1.0) * (d_star - a) / a - 1.0
        denom = (ld - 1.0) * (const["C3"] + (beta + 1.0) * ld)
        log_value = math.log(const["C2"]) + expo * ld - math.log(denom)
    else:
        expo = 2.0 * (d_star - a) / a - 1.0
        denom = (ld - 1.0) * ld
        log_value = math.log(const["C4"]) + expo * ld - math.log(denom)
    const["exponent"] = expo
    value = math.exp(min(log_value, 709.0))
    if check:
        e = dissipation(src, cfg)
        const["E_xi"] = e.value
        const["holds"] = bool(e.log_value >= log_value)
    return BoundEvaluation("lower_estimate", cfg.delta, value, None, const, log_value)


def chain_constants(src: ChargeDensity, cfg: SlabConfig) -> dict:
    """``C5`` .. ``C8`` of the upper-bound chain."""
    b = src.support
    a, xi, d0 = cfg.a, cfg.xi, b.d0
    c5 = b.width * src.l2_norm_sq / (9.0 * math.pi)
    out = {"C5": c5, "C8": 9.0 * c5 / (2.0 * d0 + a - 2.0 * xi)}
    out["C6"] = xi * c5 / (d0 - 3.0 * a) if d0 != 3.0 * a else math.inf
    out["C7"] = 9.0 * c5 * xi / (d0 - 1.5 * a) if d0 != 1.5 * a else math.inf
    return out


def _finite_integral(log_f, lo, hi, scale_len, tol=1e-12):
    """``log int_lo^hi exp(log_f)`` for a smooth positive integrand."""
    if hi <= lo:
        return -math.inf
    n = 16 + int(math.ceil((hi - lo) / scale_len))
    edges = np.linspace(lo, hi, n + 1)
    mid = np.linspace(lo, hi, 4 * n + 1)[1:]
    shift = float(np.max(log_f(mid)))
    res = adaptive_integrate(lambda k: np.exp(log_f(k) - shift), edges, rtol=tol)
    return shift + math.log(res.value) if res.value > 0 else -math.inf


def _log_growth(k, xi):
    """``log((1 - exp(-2 k xi)) / k)``."""
    return np.log(-np.expm1(-2.0 * k * xi)) - np.log(k)


@dataclass
class UpperBoundChain:
    terms: list
    total: float
    constants: dict
    d0_over_tau_a: float


def upper_bound_chain(src: ChargeDensity, cfg: SlabConfig, strict: bool = True,
                      tol: float = 1e-10) -> UpperBoundChain:
    """Evaluate ``T1 .. T4`` with ``E_xi <= T1 + T2 + T3 + T4``.

    The integrals over ``[0, k0]`` are done by adaptive quadrature, the ones
    over ``[k0, inf)`` by quadrature plus a closed-form tail.

    Parameters
    ----------
    strict : bool
        Require ``xi < a/2`` (needed for the ``T2`` limit and the full chain).
        With ``strict=False`` the terms are still evaluated for ``xi < a``.

    Raises
    ------
    NotApplicableError
        If ``d0 < 3a/2``, ``delta`` exceeds ``delta_0`` or (strict) ``xi >= a/2``.
    """
    b = src.support
    a, xi, d0 = cfg.a, cfg.xi, b.d0
    if d0 < 1.5 * a:
        raise NotApplicableError("chain not applicable: d0 < 3a/2")
    if strict and not xi < 0.5 * a:
        raise NotApplicableError("chain needs xi < a/2")
    kres = k0(cfg)
    const = chain_constants(src, cfg)
    d, beta, lam = cfg.delta, cfg.beta, cfg.lam
    c5 = const["C5"]
    ld = math.log(d)
    ls = math.log(2.0 * d + lam * d**beta)           # log(delta + mu)
    lw = math.log(lam**2 * d ** (2 * beta) + 4.0)
    scale = 1.0 / max(2.0 * abs(3.0 * a - d0), 2.0 * xi, 1e-3 / a)

    def tail_integral(c):
        # int_{k0}^inf exp(-c k) (1 - exp(-2 k xi)) / k dk
        if c <= 0:
            return math.inf
        res = integrate_log_positive(lambda k: -c * k + _log_growth(k, xi), kres, 40.0 / c,
                                     1.0 / c, lambda K: _log_e1_upper(c * K), tol=tol)
        return res.log_value

    log_t = [
        math.log(c5) + ld + 2 * ls + _finite_integral(
            lambda k: 2.0 * k * (3.0 * a - d0) + _log_growth(k, xi), 0.0, kres, scale, tol),
        math.log(c5) + ld + lw + _finite_integral(
            lambda k: -2.0 * k * (d0 - a - xi) + _log_growth(k, xi), 0.0, kres, scale, tol),
        math.log(9 * c5) - 0.5 * ld + 0.5 * ls + tail_integral(2.0 * (d0 - 1.5 * a)),
        math.log(9 * c5) - 0.5 * ld - 1.5 * ls + lw + tail_integral(2.0 * d0 + a - 2.0 * xi),
    ]
    limits = _chain_limits(cfg, d0, const)
    terms = [BoundEvaluation(f"T{i + 1}", d, math.exp(min(lt, 709.0)), limits[i], const, lt)
             for i, lt in enumerate(log_t)]
    total = math.fsum(t.value for t in terms)
    return UpperBoundChain(terms, total, const, d0 / (tau(beta) * a))


def _chain_limits(cfg, d0, const):
    a, beta, lam = cfg.a, cfg.beta, cfg.lam
    ta = tau(beta) * a
    on_edge = abs(d0 - ta) <= 1e-9 * a
    beyond = d0 > ta and not on_edge
    lim = [None, None, None, None]
    if on_edge:
        base = lam if beta < 1 else (2.0 + lam if beta == 1 else 2.0)
        lim[0] = const["C6"] * base ** (2.0 + (d0 - 3.0 * a) / a)
        if beta < 1:
            lim[2] = const["C7"] * lam ** (0.5 + (d0 - 1.5 * a) / a)
    elif beyond:
        lim[0] = 0.0
        lim[2] = 0.0
    if on_edge or beyond:
        lim[3] = 0.0
        if cfg.xi < 0.5 * a:
            lim[1] = 0.0
    return lim


# -- blow-up sequences ---------------------------------------------------------

@dataclass
class BlowupSequence:
    kind: str
    j: np.ndarray
    k: np.ndarray
    delta: np.ndarray
    d_star: float
    warnings: list = field(default_factory=list)
    dissipation: np.ndarray | None = None
    log_dissipation: np.ndarray | None = None

    @property
    def increasing(self) -> bool | None:
        if self.log_dissipation is None:
            return None
        return bool(np.all(np.diff(self.log_dissipation) > 0))


def delta_for_wavenumber(cfg: SlabConfig, k_target: float) -> float:
    """Loss whose resonance wavenumber equals ``k_target`` (bisection in ``log delta``)."""
    _, d0 = admissible_delta_thresholds(cfg.beta, cfg.lam)
    target = -2.0 * cfg.a * k_target

    def f(u):
        return float(log_resonance_product(math.exp(u), cfg.beta, cfg.lam)) - target

    lo = math.log(DELTA_FLOOR)
    if f(lo) > 0:
        return 0.0
    u = bisect(f, lo, math.log(d0), xtol=0.0, rtol=1e-16, max_iter=2000)
    return math.exp(u)


def blowup_sequence(src: ChargeDensity, cfg: SlabConfig, j_range=range(1, 11),
                    d_star: float | None = None, evaluate: bool = False,
                    tol: float = 1e-8) -> BlowupSequence:
    """Losses ``delta_j`` with ``k0(delta_j) = k_j`` along the resonant wavenumbers.

    Entries whose loss would fall below ``1e-300`` are dropped with a
    warning.  With ``evaluate=True`` the dissipation is computed at each
    ``delta_j`` (see :attr:`BlowupSequence.increasing`).
    """
    j = np.array(list(j_range), dtype=int)
    k = resonant_wavenumbers(src, j)
    deltas = np.array([delta_for_wavenumber(cfg, kj) for kj in k])
    warnings = []
    keep = deltas >= DELTA_FLOOR
    if not keep.all():
        warnings.append(f"dropped j >= {j[~keep][0]}: delta below {DELTA_FLOOR}")
    j, k, deltas = j[keep], k[keep], deltas[keep]
    if d_star is None:
        d_star = default_witness_depth(src, cfg)
    seq = BlowupSequence(src.kind, j, k, deltas, float(d_star), warnings)
    if evaluate:
        vals = []
        for dj in deltas:
            res = dissipation(src, cfg.with_delta(float(dj)), tol=tol)
            vals.append(res.log_value)
        seq.dissipation = np.exp(np.minimum(vals, 709.0))
        seq.log_dissipation = np.array(vals)
    return seq


# -- randomized lemma suite ----------------------------------------------------

@dataclass
class SamplePlan:
    n_samples: int = 10_000
    seed: int = 0
    betas: tuple = (0.3, 0.5, 1.0, 2.0)
    lambdas: tuple = (-1.0, 0.5, 1.0, 2.0)
    delta_min: float = 1e-14
    k_factor: float = 5.0
    a: float = 1.0
    xi: float = 0.25
    c1: float = DEFAULT_C1
    c_l: float = DEFAULT_CL
    slack: float = 1e-12


@dataclass
class LemmaResult:
    name: str
    samples: int
    min_margin: float
    violations: int
    passed: bool


@dataclass
class LemmaReport:
    results: dict
    plan: SamplePlan

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def to_json(self) -> str:
        body = {
            "passed": self.passed,
            "plan": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self.plan).items()},
            "lemmas": {k: asdict(v) for k, v in self.results.items()},
        }
        return json.dumps(body, indent=2, sort_keys=True)


def _margin_le(log_lhs, log_rhs):
    """Relative margin of ``lhs <= rhs``: ``1 - lhs/rhs``."""
    return -np.expm1(np.asarray(log_lhs) - np.asarray(log_rhs))


def lemma_suite(src: ChargeDensity, plan: SamplePlan | None = None) -> LemmaReport:
    """Check the pointwise inequalities at seeded random samples.

    For each of ``plan.n_samples`` samples a feasible ``(beta, lam)`` pair is
    drawn, then ``delta`` log-uniformly between ``plan.delta_min`` and the
    loss threshold relevant to each inequality (never above ``delta_0``),
    then ``k`` uniformly in the part of ``(0, k_factor * k0]`` where the
    inequality is claimed.  Margins are relative (``1 - lhs/rhs``); an
    inequality fails if any margin is below ``-plan.slack``.
    """
    plan = plan or SamplePlan()
    a, xi = plan.a, plan.xi
    b = src.support
    if not b.d0 > a:
        raise InvalidParameterError("source must lie beyond the slab")
    combos = [(be, la) for be in plan.betas for la in plan.lambdas if feasible(be, la)]
    thresholds = []
    for be, la in combos:
        _, d0 = admissible_delta_thresholds(be, la)
        thresholds.append({
            "base": d0,
            "g": min(d0, delta_g(be, la, plan.c1)),
            "L": min(d0, delta_L(a, xi, be, la, plan.c_l)),
            "psi": min(d0, delta_psi_minus(be, la)),
        })
    rng = np.random.default_rng(plan.seed)
    n = plan.n_samples
    which = rng.integers(0, len(combos), n)
    u_delta = rng.random(n)
    u_k = 1.0 - rng.random(n)          # in (0, 1]
    u_x = 1.0 - rng.random(n)
    beta = np.array([combos[i][0] for i in which])
    lam = np.array([combos[i][1] for i in which])
    spread = math.log(b.width * src.l2_norm_sq)

    def deltas(key):
        hi = np.array([thresholds[i][key] for i in which])
        lo = np.minimum(plan.delta_min, hi)
        return np.exp(np.log(lo) + u_delta * (np.log(hi) - np.log(lo)))

    def k_in(d, lo_frac, hi_frac):
        kr = resonance_wavenumber(a, d, beta, lam)
        return kr * (lo_frac + u_k * (hi_frac - lo_frac))

    kf = plan.k_factor
    margins = {}

    d = deltas("base")
    k = k_in(d, 0.0, kf)
    s = d + loss_mu(d, beta, lam)
    lg = log_abs_g2(a, d, beta, lam, k)
    margins["lower_bound_g"] = _margin_le(
        math.log(8.0) + np.log1p(d**2) - 2 * np.log(s) - 4 * k * a, lg)

    # source moments are independent of the loss; reuse the same k samples
    li = src.transform_I(k, shifted=True).log_magnitude
    margins["I_k_envelope"] = _margin_le(2 * li, spread)
    x = b.d1 + 5.0 * a * u_x
    lj = (TransformValue.from_complex(src.shifted_J(k)).log_magnitude - k * (x - b.d1))
    margins["J_k_envelope"] = _margin_le(2 * lj, spread - 2 * k * (x - b.d1))

    e = np.exp(-2 * k * a)
    qs = layer_sum_factor(d, beta, lam, e)
    margins["psi_sum_lower"] = _margin_le(math.log(2.0) + 2 * np.log(e), 2 * np.log(np.abs(qs)))

    d = deltas("g")
    k = k_in(d, 1.0, kf)
    margins["g_upper_resonant"] = _margin_le(log_abs_g2(a, d, beta, lam, k),
                                             math.log(plan.c1) + 2 * np.log(d))

    d = deltas("L")
    k = k_in(d, 1.0, kf)
    margins["L_lower_resonant"] = _margin_le(math.log(plan.c_l), log_L(a, xi, d, beta, lam, k))

    d = deltas("base")
    kr = resonance_wavenumber(a, d, beta, lam)
    k = kr * u_k
    lD = log_resonance_product(d, beta, lam)
    margins["g_lower_below_k0"] = _margin_le(
        math.log(9.0) - 4 * k * a + 2 * np.log(d) - 2 * lD, log_abs_g2(a, d, beta, lam, k))
    k = kr * (1.0 + u_k * (kf - 1.0))
    margins["g_lower_above_k0"] = _margin_le(
        -k * a + 2 * np.log(d) - 0.5 * lD, log_abs_g2(a, d, beta, lam, k))

    d = deltas("psi")
    k = k_in(d, 0.0, kf)
    s = d + loss_mu(d, beta, lam)
    qd = layer_difference_factor(d, beta, lam, np.exp(-2 * k * a))
    margins["psi_difference_upper"] = _margin_le(2 * np.log(np.abs(qd)), math.log(2.5) + 2 * np.log(s))

    # core-side potential amplitude through the potential module, per sample
    d = deltas("base")
    k = k_in(d, 0.0, kf)
    x = -5.0 * a * u_x
    m = np.empty(n)
    for i in range(n):
        cfg = SlabConfig(a, float(d[i]), float(beta[i]), float(lam[i]), xi)
        la = float(coefficient_A(src, cfg, k[i]).log_magnitude) + k[i] * x[i]
        lI = float(src.transform_I(k[i]).log_magnitude)
        m[i] = _margin_le(2 * la, 2 * lI - math.log(2.0) - 2 * math.log(k[i]) + 2 * k[i] * (x[i] + 2 * a))
    margins["core_amplitude"] = m

    results = {}
    for name, mg in margins.items():
        mg = np.asarray(mg, dtype=float)
        bad = int(np.sum(~(mg >= -plan.slack)))
        results[name] = LemmaResult(name, int(mg.size), float(np.min(mg)), bad, bad == 0)
    return LemmaReport(results, plan)
