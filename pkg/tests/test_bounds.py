import json
import math

import numpy as np
import pytest

from calr.bounds import (SamplePlan, blowup_sequence, chain_constants, classify,
                         delta_for_wavenumber, lemma_suite, resonant_wavenumbers,
                         theorem_constants, theorem_lower_bound, upper_bound_chain,
                         witness_constant)
from calr.dissipation import dissipation
from calr.errors import InvalidParameterError, NotApplicableError
from calr.slab import SlabConfig, tau
from calr.sources import CircleSource, GridSource, RectangleSource

RECT = RectangleSource(6.0, 6.0, 1.0, 1.0)
THIN = RectangleSource(1.55, 0.0, 0.03, 0.01)


def slab(a, delta=1e-8, beta=0.8, lam=1.0, xi_frac=0.25):
    return SlabConfig(a, delta, beta, lam, xi_frac * a)


def test_classify_regimes():
    beta = 0.8
    inside = classify(RECT, slab(7.0 / tau(beta), beta=beta))
    assert inside.regime == "weak_calr" and inside.Lambda == math.inf
    assert classify(RECT, slab(5.0 / tau(beta), beta=beta)).regime == "no_calr"
    assert classify(RECT, slab(3.0, beta=beta)).regime == "no_calr"
    circ = classify(CircleSource(6.0, 6.0, 1.0), slab(7.0 / tau(beta), beta=beta))
    assert circ.regime == "weak_calr"
    grid = GridSource((5.0, 5.0), (1.0, 1.0), [[-1.0, -1.0], [1.0, 1.0]])
    assert classify(grid, slab(4.0)).regime == "indeterminate"
    with pytest.raises(InvalidParameterError):
        classify(RECT, slab(4.0), d_star=8.0)


def test_witness_depth_at_support_edge_is_finite():
    rep = classify(RECT, slab(7.0 / tau(0.8)), d_star=5.0)
    assert 0 < rep.Lambda < math.inf and rep.regime == "indeterminate"


def test_resonant_wavenumbers_hit_peaks():
    j = np.arange(1, 6)
    k = resonant_wavenumbers(RECT, j)
    np.testing.assert_allclose(np.sin(0.5 * RECT.h * k) ** 2, 1.0)
    circ = CircleSource(0.0, 0.0, 0.5)
    kc = resonant_wavenumbers(circ, j)
    np.testing.assert_allclose(np.mod(0.5 * circ.R * kc, 2 * math.pi), 0.5 * math.pi)
    with pytest.raises(InvalidParameterError):
        resonant_wavenumbers(GridSource((3, 0), (1, 1), [[1.0, -1.0]]), j)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_delta_for_wavenumber_inverts_k0(beta):
    c = slab(1.0, beta=beta)
    for k in (3.0, 10.0, 40.0):
        d = delta_for_wavenumber(c, k)
        assert c.with_delta(d).k0() == pytest.approx(k, rel=1e-9)


def test_blowup_sequence_fields_and_growth():
    beta = 0.8
    c = slab(7.0 / tau(beta), beta=beta)
    seq = blowup_sequence(RECT, c, j_range=range(2, 6), evaluate=True)
    assert np.all(np.diff(seq.delta) < 0) and np.all(np.diff(seq.k) > 0)
    for dj, kj in zip(seq.delta, seq.k):
        assert c.with_delta(float(dj)).k0() == pytest.approx(kj, rel=1e-12)
    assert seq.increasing
    assert seq.dissipation.shape == seq.j.shape
    far = blowup_sequence(RECT, c, j_range=range(1, 400))
    assert far.warnings and far.j.size < 399


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("d_star", [1.52, 1.55])
@pytest.mark.parametrize("delta", [1e-8, 1e-10])
def test_lower_estimate_holds(beta, d_star, delta):
    c = slab(1.0, delta, beta)
    lam = witness_constant(THIN, c, d_star)
    assert lam > 0
    ev = theorem_lower_bound(THIN, c, d_star, lam, check=True)
    assert ev.constants["holds"]
    assert ev.value <= ev.constants["E_xi"]


def test_lower_estimate_errors():
    c = slab(1.0, 1e-8)
    with pytest.raises(InvalidParameterError):
        theorem_lower_bound(THIN, c, 1.55, 0.0)
    with pytest.raises(InvalidParameterError):
        theorem_lower_bound(THIN, slab(1.0, 1e-8, beta=0.5, lam=0.0), 1.55, 1.0)
    with pytest.raises(NotApplicableError):
        theorem_lower_bound(THIN, slab(1.0, 0.3), 1.55, 1.0)


@pytest.mark.parametrize("beta", [0.5, 0.8, 2.0])
@pytest.mark.parametrize("delta", [1e-4, 1e-8, 1e-12])
def test_upper_chain_dominates(beta, delta):
    # the chain needs d0 >= 3a/2: the support on or beyond the edge
    for a in (5.0 / tau(beta), 2.5):
        c = slab(a, delta, beta)
        chain = upper_bound_chain(RECT, c)
        e = dissipation(RECT, c)
        assert e.value <= chain.total
        assert [t.name for t in chain.terms] == ["T1", "T2", "T3", "T4"]
        assert chain.total == pytest.approx(sum(t.value for t in chain.terms))


def test_upper_chain_preconditions():
    with pytest.raises(NotApplicableError):
        upper_bound_chain(RECT, slab(4.0))
    with pytest.raises(NotApplicableError):
        upper_bound_chain(RECT, slab(3.0, xi_frac=0.6))
    loose = upper_bound_chain(RECT, slab(3.0, xi_frac=0.6), strict=False)
    assert loose.total > 0


def test_chain_limits_by_position():
    beta = 0.5
    edge = upper_bound_chain(RECT, slab(5.0 / tau(beta), 1e-10, beta))
    assert edge.terms[0].limit == pytest.approx(edge.constants["C6"] * 1.0)
    assert edge.terms[3].limit == 0.0
    beyond = upper_bound_chain(RECT, slab(2.5, 1e-10, beta))
    assert [t.limit for t in beyond.terms] == [0.0, 0.0, 0.0, 0.0]
    with pytest.raises(NotApplicableError):
        upper_bound_chain(RECT, slab(7.0 / tau(beta), 1e-10, beta))


def test_lower_estimate_constants():
    c = slab(1.0, 1e-8, beta=0.5, lam=2.0)
    const = theorem_constants(c, 1.55, 0.3)
    cp = 0.5 * math.exp(-2 * 1.55) / (2 * math.pi * 26.0)
    assert const["C_prime"] == cp
    assert const["C2"] == cp * 1.0 * 0.3**2 * 2.0 ** (0.55 / 1.0) / 2.0
    assert const["C3"] == math.log(2.0)
    assert const["C4"] == cp * 1.0 * 0.3**2 / 4.0
    assert "C2" not in theorem_constants(slab(1.0, 1e-8, beta=2.0), 1.55, 0.3)


def test_chain_constants_formulae():
    c = slab(3.0)
    const = chain_constants(RECT, c)
    c5 = 2.0 * 4.0 / (9 * math.pi)
    assert const["C5"] == pytest.approx(c5)
    assert const["C6"] == pytest.approx(c.xi * c5 / (5.0 - 9.0))
    assert const["C7"] == pytest.approx(9 * c5 * c.xi / (5.0 - 4.5))
    assert const["C8"] == pytest.approx(9 * c5 / (10.0 + 3.0 - 2 * c.xi))


def test_lemma_suite_passes_and_is_deterministic():
    plan = SamplePlan(n_samples=1500, seed=3)
    rep = lemma_suite(RECT, plan)
    assert rep.passed, {k: v.violations for k, v in rep.results.items()}
    again = lemma_suite(RECT, plan)
    assert rep.to_json() == again.to_json()
    body = json.loads(rep.to_json())
    assert body["passed"] is True and body["plan"]["seed"] == 3
    assert set(body["lemmas"]) == set(rep.results)
    with pytest.raises(InvalidParameterError):
        lemma_suite(RECT, SamplePlan(n_samples=10, a=6.0))
