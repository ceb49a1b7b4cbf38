import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expray.algebra import (
    Poly,
    ProblemSpec,
    RationalFn,
    degree_excess,
    derivative,
    divide_by,
    eval_poly,
    eval_rational,
    is_canonical,
    normalize,
    reduce,
)

coef = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)
point = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def test_eval_examples():
    assert eval_poly(Poly([-1, 0, 1]), 2j) == -5
    assert eval_poly(Poly([0, 0, 0, 1]), 1) == 1
    assert eval_poly(Poly([2, 4, 1]), 1) == 7


def test_trailing_zeros_trimmed():
    p = Poly([1, 2, 0, 0])
    assert p.coeffs == (1, 2)
    assert Poly([0, 0]).is_zero() and Poly([0, 0]).degree == -1


@pytest.mark.parametrize(
    "raw, alpha, beta",
    [([1, 4, 2], 2 ** -0.5, -1), ([0, 0, 0, 1], 1, 0), ([0, 2, 1], 1, -1)],
)
def test_normalize_examples(raw, alpha, beta):
    p, a, b = normalize(Poly(raw))
    assert abs(a - alpha) < 1e-15 and abs(b - beta) < 1e-15
    assert is_canonical(p)
    n = p.degree
    want = [-1, 0, 1] if n == 2 else [0, 0, 0, 1]
    assert np.allclose(p.coeffs, want, atol=1e-14)


def test_normalize_needs_degree():
    with pytest.raises(ValueError):
        normalize(Poly([3]))


def test_derivative_examples():
    d = derivative(RationalFn(Poly([0, 0, 1])))
    assert d.num.coeffs == (0, 2) and d.den.degree == 0
    q = divide_by(RationalFn(Poly([0, 2])), Poly([0, 2]))
    assert q.den.degree == 0 and q.num.coeffs == (1,)
    f = RationalFn(Poly([0, 0, 0, 1]), Poly([-1, 1]))
    df = derivative(f)
    want = RationalFn(Poly([0, 0, -3, 2]), Poly([1, -2, 1]))
    for z in [2.0, 3 + 1j, -1.5j, 0.3 - 2j, 5.0]:
        assert abs(eval_rational(df, z) - eval_rational(want, z)) < 1e-12 * abs(eval_rational(want, z))
        h = 1e-6
        fd = (eval_rational(f, z + h) - eval_rational(f, z - h)) / (2 * h)
        assert abs(fd - eval_rational(df, z)) < 1e-6 * (1 + abs(fd))


def test_common_root_is_error_not_nan():
    f = RationalFn(Poly([-1, 1]), Poly([-1, 1]))
    with pytest.raises(ArithmeticError):
        eval_rational(f, 1.0)
    with pytest.raises(ZeroDivisionError):
        eval_rational(RationalFn(Poly([1]), Poly([-1, 1])), 1.0)


def test_reduce_and_m():
    # (z^2 - 1)/(z - 1) reduces to z + 1, so m = 1
    f = RationalFn(Poly([-1, 0, 1]), Poly([-1, 1]))
    r = reduce(f)
    assert r.den.degree == 0
    assert degree_excess(f) == 1
    assert degree_excess(RationalFn(Poly([1]), Poly([-0.5, 1]))) == -1


def test_problem_spec_rejects():
    S = RationalFn(Poly([1]))
    with pytest.raises(ValueError):
        ProblemSpec(Poly([0, 1, 1]), S)
    with pytest.raises(ValueError, match="pi/\\(2n\\)"):
        ProblemSpec(Poly([0, 1]), S, theta=2.0)
    with pytest.raises(ValueError):
        ProblemSpec(Poly([0, 1]), RationalFn(Poly([1]), Poly([-0.5, 1])), z0=0.2, pole_radius=1.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(coef, min_size=2, max_size=7), st.lists(point, min_size=5, max_size=5))
def test_derivative_matches_finite_difference(cs, zs):
    p = Poly(cs)
    dp = derivative(p)
    if p.degree >= 1:
        assert dp.num.degree == p.degree - 1
    for z in zs:
        # complex-step style central difference scaled to the coefficient size
        h = 1e-5
        fd = (eval_poly(p, z + h) - eval_poly(p, z - h)) / (2 * h)
        exact = eval_rational(dp, z)
        err_scale = 1e-10 * max(1.0, abs(z)) ** max(p.degree, 0) * max(abs(c) for c in cs) * 1e3
        assert abs(fd - exact) <= 1e-6 * (1 + abs(exact)) + err_scale


@settings(max_examples=60, deadline=None)
@given(st.lists(coef, min_size=2, max_size=6).filter(lambda c: abs(c[-1]) > 0.1))
def test_normalize_properties(cs):
    raw = Poly(cs)
    p, a, b = normalize(raw)
    assert is_canonical(p)
    p2, a2, b2 = normalize(p)
    assert abs(abs(a2) - 1) < 1e-12 and abs(b2) < 1e-12
    scale = sum(abs(c) for c in cs)
    for t in np.linspace(-1.5, 1.5, 20):
        w = complex(t, 0.7 * t - 0.2)
        lhs = eval_poly(p, w)
        rhs = eval_poly(raw, a * w + b)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs)) * max(1.0, scale) * 100
