"""Self-check suites run by ``calr verify``.

Each suite compares an implementation against something computed a
different way: closed-form transforms against 2-D quadrature, the Fourier
potential against its real-space reconstruction (Plancherel), the layer
solutions against the interface conditions and the ODE, and the
dissipation against its lower and upper bounds.  The report text contains
no timings, so repeated runs give identical output.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .bounds import (SamplePlan, lemma_suite, theorem_lower_bound, upper_bound_chain,
                     witness_constant)
from .config import RunConfig
from .dissipation import dissipation, dissipation_lower_bound_tail
from .errors import InvalidParameterError, NotApplicableError
from .potential import interface_residuals, ode_residual, potential_hat, reconstruct_line
from .sources import ChargeDensity, CircleSource, GridSource, RectangleSource

ORACLE_K = (0.05, 0.3, 1.0, 4.0, 15.0, 50.0)


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def add(self, suite, name, passed, detail=""):
        self.checks.append(CheckResult(suite, name, bool(passed), detail))

    def to_text(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'} {c.suite}/{c.name}: {c.detail}"
                 for c in self.checks]
        lines.append(f"{len(self.checks) - len(self.failures())}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"


# -- brute-force transforms ----------------------------------------------------

def _dblquad_complex(f, x0, x1, ylo, yhi):
    opts = dict(epsabs=0.0, epsrel=1e-12)
    with warnings.catch_warnings():
        # the requested 1e-12 is beyond reach near zeros of the real or
        # imaginary part; the comparison tolerance is far looser
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.dblquad(lambda y, x: f(x, y).real, x0, x1, ylo, yhi, **opts)[0]
        im = integrate.dblquad(lambda y, x: f(x, y).imag, x0, x1, ylo, yhi, **opts)[0]
    return re + 1j * im


def brute_force_shifted_I(src: ChargeDensity, k: float) -> complex:
    """``I_k exp(|k| d0)`` by direct 2-D quadrature of the density.

    The integration regions follow the sign change of the rectangle and
    circle sources; grid sources are integrated cell by cell with a tensor
    Gauss-Legendre rule.
    """
    b = src.support
    kk = abs(k)

    def f(x, y):
        return complex(src.evaluate(x, y)) * np.exp(-kk * (x - b.d0) - 1j * k * y)

    if isinstance(src, RectangleSource):
        yc = src.y0
        return (_dblquad_complex(f, b.d0, b.d1, b.h0, yc)
                + _dblquad_complex(f, b.d0, b.d1, yc, b.h1))
    if isinstance(src, CircleSource):
        yc = src.y0
        lo = _dblquad_complex(f, b.d0, b.d1, lambda x: yc - src.half_chord(x), yc)
        hi = _dblquad_complex(f, b.d0, b.d1, yc, lambda x: yc + src.half_chord(x))
        return lo + hi
    if isinstance(src, GridSource):
        t, w = np.polynomial.legendre.leggauss(8)
        ny, nx = src.values.shape
        dx, dy = src.cell
        xs = src.origin[0] + dx * (np.arange(nx)[:, None] + 0.5 * (t[None, :] + 1)).ravel()
        ys = src.origin[1] + dy * (np.arange(ny)[:, None] + 0.5 * (t[None, :] + 1)).ravel()
        wx = np.tile(0.5 * dx * w, nx)
        wy = np.tile(0.5 * dy * w, ny)
        rho = np.repeat(np.repeat(src.values, 8, axis=0), 8, axis=1)
        ex = wx * np.exp(-kk * (xs - b.d0))
        ey = wy * np.exp(-1j * k * ys)
        return complex(ey @ rho @ ex)
    raise InvalidParameterError(f"no brute-force rule for {src.kind}")


def _oracle_suite(report, src, mutate):
    tested = src.with_charge(-_charge(src)) if mutate else src
    worst = 0.0
    for k in ORACLE_K:
        ref = brute_force_shifted_I(src, k)
        got = complex(tested.shifted_I(np.array(k)))
        worst = max(worst, abs(got - ref) / abs(ref))
    tol = 1e-8 if isinstance(src, (RectangleSource, GridSource)) else 1e-7
    report.add("oracles", "I_k_closed_form", worst <= tol,
               f"max rel err {worst:.3e} (tol {tol:.0e}){' [mutated]' if mutate else ''}")


def _charge(src):
    if isinstance(src, GridSource):
        return 1.0
    return src.Q


# -- other suites --------------------------------------------------------------

def _plancherel_suite(report, src, cfg, window=400.0, spacing=0.125):
    """``int |V_c(x, y)|^2 dy`` against ``(1/2pi) int |V_hat_c(x, k)|^2 dk`` at ``x = -4a``.

    The real-space side uses a window ``|y - y_c| <= window`` plus the tail
    ``2 |c1|^2 / window`` of the ``c1 / y`` far field, whose coefficient comes
    from the jump of ``V_hat`` at ``k = 0``.
    """
    x = -4.0 * cfg.a
    decay = src.support.d0 - x - 2.0 * cfg.a
    k_max = 40.0 / decay

    def power(k):
        return float(np.abs(potential_hat(src, cfg, "c", x, np.array([k])).to_complex()[0]) ** 2)

    spec = 0.0
    for sgn in (1.0, -1.0):
        edges = np.linspace(0.0, k_max, 9)
        for lo, hi in zip(edges[:-1], edges[1:]):
            spec += integrate.quad(lambda k: power(sgn * k), lo, hi, epsabs=0.0,
                                   epsrel=1e-12, limit=400)[0]
    spec /= 2.0 * math.pi
    n = int(round(window / spacing))
    ys = src.y_center + spacing * np.arange(-n, n + 1)
    v = reconstruct_line(src, cfg, x, ys, k_max=k_max)
    jump = (potential_hat(src, cfg, "c", x, np.array([1e-12])).to_complex()[0]
            - potential_hat(src, cfg, "c", x, np.array([-1e-12])).to_complex()[0])
    c1 = 1j * jump / (2.0 * math.pi)
    real = integrate.simpson(np.abs(v) ** 2, x=ys) + 2.0 * abs(c1) ** 2 / window
    rel = abs(real / spec - 1.0)
    report.add("plancherel", "core_potential", rel <= 1e-4, f"rel diff {rel:.3e} (tol 1e-4)")
    return rel


def _residual_suite(report, src, cfg, n=100, seed=0):
    rng = np.random.default_rng(seed)
    b = src.support
    worst_if = 0.0
    worst_ode = 0.0
    for _ in range(n):
        d = float(10.0 ** rng.uniform(-12, -1))
        c = cfg.with_delta(d)
        k = float(rng.choice([-1.0, 1.0]) * 10.0 ** rng.uniform(-2, 1))
        res = interface_residuals(src, c, np.array([k]))
        worst_if = max(worst_if, *(float(np.max(v)) for pair in res.values() for v in pair))
        x = float(rng.uniform(c.a + 0.01, b.d1 + 2.0))
        while min(abs(x - b.d0), abs(x - b.d1)) < 0.01:
            # rho_hat jumps at the support edges; keep the stencil off them
            x = float(rng.uniform(c.a + 0.01, b.d1 + 2.0))
        worst_ode = max(worst_ode, float(np.max(ode_residual(src, c, x, np.array([k])))))
    report.add("residuals", "interface_continuity", worst_if <= 1e-9,
               f"max rel mismatch {worst_if:.3e} (tol 1e-9)")
    report.add("residuals", "matrix_ode", worst_ode <= 1e-6,
               f"max rel residual {worst_ode:.3e} (tol 1e-6)")


def _sandwich_suite(report, src, config, beta, deltas=(1e-4, 1e-8, 1e-12)):
    for d in deltas:
        cfg = config.slab_config(beta, d, src)
        e = dissipation(src, cfg, tol=config.numerics.tol)
        tag = f"beta={beta:g},delta={d:.0e}"
        try:
            lb = dissipation_lower_bound_tail(src, cfg)
            ok = lb.tail_integral.value <= e.value * (1 + 1e-8) and lb.closed_bound <= lb.tail_integral.value
            report.add("sandwich", f"lower_tail[{tag}]", ok,
                       f"closed {lb.closed_bound:.4e} <= tail {lb.tail_integral.value:.4e} <= E {e.value:.4e}")
        except NotApplicableError as exc:
            report.add("sandwich", f"lower_tail[{tag}]", True, f"not applicable: {exc}")
        try:
            chain = upper_bound_chain(src, cfg)
            report.add("sandwich", f"upper_chain[{tag}]", e.value <= chain.total,
                       f"E {e.value:.4e} <= T_sum {chain.total:.4e}")
        except NotApplicableError as exc:
            report.add("sandwich", f"upper_chain[{tag}]", True, f"not applicable: {exc}")
        d_star = config.sweep.witness_depth
        if d_star is not None:
            try:
                lam = witness_constant(src, cfg, d_star)
                bound = theorem_lower_bound(src, cfg, d_star, lam)
                report.add("sandwich", f"lower_estimate[{tag}]", bound.log_value <= e.log_value,
                           f"bound {bound.value:.4e} <= E {e.value:.4e}")
            except (NotApplicableError, InvalidParameterError) as exc:
                report.add("sandwich", f"lower_estimate[{tag}]", True, f"not applicable: {exc}")


def run_verify(config: RunConfig, mutate: bool | None = None) -> VerifyReport:
    """Run the suites selected in ``config.verify.suites``.

    ``mutate`` (default from the config) flips the sign of the charge in the
    closed-form transform under test, which must make the oracle suite fail.
    """
    config.validate()
    mutate = config.verify.mutate if mutate is None else mutate
    src = config.build_source()
    suites = config.verify.suites
    beta = float(config.betas()[0]) if len(config.sweep.betas) else 0.8
    report = VerifyReport()
    if "lemmas" in suites:
        a = config.slab_thickness(beta, src)
        plan = SamplePlan(n_samples=config.verify.lemma_samples, seed=config.verify.seed,
                          a=a, xi=config.slab.xi_fraction * a)
        lem = lemma_suite(src, plan)
        for name, r in lem.results.items():
            report.add("lemmas", name, r.passed,
                       f"{r.violations}/{r.samples} violations, min margin {r.min_margin:.3e}")
    if "oracles" in suites:
        _oracle_suite(report, src, mutate)
    cfg = config.slab_config(beta, 1e-2, src)
    if "plancherel" in suites:
        _plancherel_suite(report, src, cfg)
    if "residuals" in suites:
        _residual_suite(report, src, cfg, seed=config.verify.seed)
    if "sandwich" in suites:
        _sandwich_suite(report, src, config, beta)
    return report

