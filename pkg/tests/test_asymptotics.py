import cmath
import math

import mpmath
import numpy as np
import pytest

from expray import verify as V
from expray.algebra import Poly, ProblemSpec, RationalFn, eval_poly, eval_rational
from expray.asymptotics import decay_ray_angle, default_N, expand, exactness_residual, ray_constant
from expray.field import Field

Z = Poly([0, 1])


def _spec(S, P=Z, **kw):
    return ProblemSpec(P, S if isinstance(S, RationalFn) else RationalFn(S), **kw)


@pytest.mark.parametrize(
    "S, P, Q",
    [
        (Poly([1]), Z, [1]),
        (Poly([0, 2]), Poly([0, 0, 1]), [1]),
        (Poly([0, 0, 1]), Z, [2, -2, 1]),
        (Poly([0, 0, 0, 1]), Z, [-6, 6, -3, 1]),
    ],
)
def test_terminated_expansions(S, P, Q):
    spec = _spec(S, P)
    exp = expand(spec)
    assert exp.terminated
    got = [exp.eval_Q(t) for t in (0.0, 1.0, 2.0, -1.5j)]
    want = [eval_poly(Poly(Q), t) for t in (0.0, 1.0, 2.0, -1.5j)]
    assert np.allclose(got, want, rtol=0, atol=1e-12)
    assert exactness_residual(spec, exp) < 1e-12


def test_sign_rule_discriminates():
    # the alternating rule would produce +6 as the constant term for S = z^3
    exp = expand(_spec(Poly([0, 0, 0, 1])))
    assert abs(exp.eval_Q(0.0) - (-6)) < 1e-12


def test_describe():
    assert expand(_spec(Poly([0, 2]), Poly([0, 0, 1]))).describe() == "Q = 1 (terminated, k=1)"


def test_degree_drop_and_tail():
    spec = V.family("pole")
    exp = expand(spec)
    assert not exp.terminated and exp.N == default_N(-1, 1) == 4
    for j, t in enumerate(exp.terms):
        r = t.num.degree - t.den.degree
        assert r <= exp.m - j * exp.n
    # Q_k r^{kn-m} settles to a constant
    rs = np.array([10.0, 100.0, 1000.0])
    vals = np.abs(eval_rational(exp.Qk, rs)) * rs ** (exp.k * exp.n - exp.m)
    assert np.all(np.isfinite(vals)) and abs(vals[2] / vals[1] - 1) < 0.1 and vals.max() < 10 * vals.min()


def test_ray_constant_terminated():
    rc = ray_constant(_spec(Poly([1]), z0=5.0), expand(_spec(Poly([1]), z0=5.0)))
    assert abs(rc.c1_complex - (-math.exp(5))) < 1e-12 * math.exp(5)
    s2 = _spec(Poly([0, 2]), Poly([0, 0, 1]), z0=3.0)
    assert abs(ray_constant(s2, expand(s2)).c1_complex + math.exp(9)) < 1e-12 * math.exp(9)


def test_ray_constant_self_convergence():
    S = RationalFn(Poly([1]), Poly([-0.5, 1]))
    spec = ProblemSpec(Z, S, z0=5.0, pole_radius=1.0)
    exp = expand(spec)
    a = ray_constant(spec, exp).c1_complex
    b = ray_constant(spec, exp, step=0.25).c1_complex
    assert math.isfinite(abs(a)) and abs(a - b) < 1e-9 * abs(a)
    # independent value of U_eff(z0): mpmath along the pole-avoiding decaying ray the code uses
    phi = decay_ray_angle(spec)
    d = cmath.exp(1j * phi)
    with mpmath.workdps(30):
        tail = mpmath.quad(lambda s: mpmath.exp(5 + s * d) / (4.5 + s * d) * d, [0, 10, 40, mpmath.inf])
    U_at_z0 = complex(-tail)
    fld = Field(spec, exp)
    assert abs(fld.u_value(5.0).to_complex() - U_at_z0) < 1e-10 * abs(U_at_z0)


@pytest.mark.parametrize("name", ["ez", "ez2", "z2ez"])
def test_terminated_exactness_against_quadrature(name):
    spec = V.family(name)
    exp = expand(spec)
    rc = ray_constant(spec, exp)
    z0 = spec.z0
    for z in np.linspace(0.3 + 0.2j, 2.5 + 1.5j, 10):
        with mpmath.workdps(30):
            f = lambda t: mpmath.mpc(complex(eval_rational(spec.S, complex(t)))) * mpmath.exp(
                mpmath.mpc(complex(eval_poly(spec.P, complex(t)))))
            quad = complex(mpmath.quad(f, [z0, z]))
        U = exp.eval_Q(z) * cmath.exp(eval_poly(spec.P, z)) + rc.c1_complex
        assert abs(U - quad) < 1e-10 * max(1.0, abs(quad))


def test_tail_order_slope():
    spec = V.family("pole")
    fld = Field(spec)
    d = cmath.exp(0.3j)
    rs = np.geomspace(20, 200, 6)
    res = [abs(fld._G_route(r * d) - fld.exp.eval_Q(r * d)) for r in rs]
    slope = np.polyfit(np.log(rs), np.log(res), 1)[0]
    assert slope <= -fld.exp.N + 0.5
