import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from calr.logval import TransformValue, log1p_exp_complex, log_add

finite = st.floats(-1e6, 1e6, allow_nan=False)
nonzero = st.tuples(finite, finite).filter(lambda t: abs(complex(*t)) > 1e-200)


def close(a, b, rtol=1e-12):
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


@given(nonzero)
def test_complex_round_trip(t):
    z = complex(*t)
    assert close(complex(TransformValue.from_complex(z).to_complex()), z)


@given(nonzero, nonzero)
def test_products_and_quotients(s, t):
    u, v = complex(*s), complex(*t)
    tu, tv = TransformValue.from_complex(u), TransformValue.from_complex(v)
    assert close(complex((tu * tv).to_complex()), u * v)
    assert close(complex((tu / tv).to_complex()), u / v)


@given(nonzero, nonzero)
def test_sum_matches_complex_addition(s, t):
    u, v = complex(*s), complex(*t)
    got = complex(log_add(TransformValue.from_complex(u), TransformValue.from_complex(v)).to_complex())
    # cancellation makes the relative error scale with |u| + |v|
    assert abs(got - (u + v)) <= 1e-12 * (abs(u) + abs(v))


def test_sum_far_outside_double_range():
    big = TransformValue(np.array(2000.0), np.array(0.3))
    small = TransformValue(np.array(1990.0), np.array(0.3))
    s = big + small
    assert float(s.log_magnitude) == pytest.approx(2000.0 + math.log1p(math.exp(-10.0)), rel=1e-15)


@given(st.floats(-700, 5), st.floats(-math.pi, math.pi), st.sampled_from([1.0, -1.0]))
def test_log1p_exp_complex(lw, ph, sign):
    w = math.exp(lw) * complex(math.cos(ph), math.sin(ph))
    target = 1 + sign * w
    if abs(target) < 1e-8:
        return
    lm, arg = log1p_exp_complex(np.array(lw), np.array(ph), sign)
    assert float(lm) == pytest.approx(math.log(abs(target)), abs=1e-12)
    assert complex(math.cos(arg), math.sin(arg)) == pytest.approx(target / abs(target), abs=1e-12)


def test_zero_has_minus_infinite_log():
    z = TransformValue.from_complex(0.0)
    assert float(z.log_magnitude) == -math.inf
    assert complex(z.to_complex()) == 0


def test_conjugate_and_scale():
    tv = TransformValue.from_complex(np.array([1 + 2j, -3j]))
    assert np.allclose(tv.conj().to_complex(), np.conj([1 + 2j, -3j]))
    assert np.allclose(tv.scale(math.log(2.0), math.pi / 2).to_complex(), 2j * np.array([1 + 2j, -3j]))
