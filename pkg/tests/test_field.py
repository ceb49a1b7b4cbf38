import cmath
import math

import numpy as np
import pytest

from expray import verify as V
from expray.algebra import Poly, ProblemSpec, RationalFn
from expray.field import Field, PoleDiskError, field_for, in_admissible

TAU = 2 * math.pi


@pytest.fixture(scope="module")
def ez():
    return field_for(V.family("ez"))


@pytest.fixture(scope="module")
def ez2():
    return field_for(V.family("ez2"))


def test_u_value_closed_forms(ez, ez2):
    a = ez.u_value(10.0)
    assert a.lmag == pytest.approx(10, abs=1e-14) and a.arg == 0
    b = ez2.u_value(1 + 1j)
    assert abs(b.lmag) < 1e-14 and b.arg == pytest.approx(2, abs=1e-14)
    c = field_for(V.family("z2ez")).u_value(8.0)
    assert c.lmag == pytest.approx(8 + math.log(50), abs=1e-13)


def test_frame_values(ez, ez2):
    f = ez.frame_at(10.0)
    assert (f.u, f.v, f.uy, f.vy) == pytest.approx((10, 0, 0, 1), abs=1e-14)
    g = ez2.frame_at(2 + 1j)
    assert (g.u, g.v, g.uy, g.vy) == pytest.approx((3, 4, -2, 4), abs=1e-13)


def test_raw_antiderivative_from_z0():
    fld = field_for(ProblemSpec(Poly([0, 1]), RationalFn(Poly([1])), z0=5.0))
    raw = fld.u_value_raw(10.0)
    assert raw.lmag == pytest.approx(math.log(math.exp(10) - math.exp(5)), abs=1e-12)
    assert raw.lmag == pytest.approx(9.9932392505505, abs=1e-12)


def test_continuation_is_unwrapped(ez, ez2):
    fr = ez2.continue_along(np.linspace(1 + 1j, 3 + 3j, 9), 2.0)
    assert fr[0].v == pytest.approx(2) and fr[-1].v == pytest.approx(18, abs=1e-12)
    assert np.all(np.diff([f.v for f in fr]) > 0)
    up = ez.continue_along(np.linspace(0, 2 * TAU * 1j, 17), 0.0)
    assert up[-1].v == pytest.approx(2 * TAU, abs=1e-12)


def test_cr_consistency_cubic():
    rng = np.random.default_rng(3)
    a1, a0 = rng.normal(size=2) + 1j * rng.normal(size=2)
    P = Poly([a0, a1, 0, 1])
    S = RationalFn(Poly([0.5, 0.25, 3.0]))
    fld = Field(ProblemSpec(P, S, z0=0j))
    th = math.pi / 12
    zs = np.linspace(0.05, 3.0, 200) * cmath.exp(1j * th)
    frames = fld.continue_along(zs, fld.frame_at(zs[0]).v)
    assert max(fld.cr_defect(f) for f in frames) <= 1e-9


def test_near_far_agree():
    fld = field_for(V.family("pole"))
    for r in (0.9 * fld.r_switch, 1.1 * fld.r_switch):
        z = r * cmath.exp(1j * (math.pi / 2 - 0.002))
        near = fld._G_route(z)
        far = fld.G_far(z)
        lm_n, lm_f = math.log(abs(near)) + z.real, math.log(abs(far)) + z.real
        assert abs(lm_n - lm_f) <= 1e-8 * abs(lm_f)
        assert abs(cmath.phase(near / far)) <= 1e-8


def test_pole_disk_rejected():
    fld = field_for(V.family("pole"))
    with pytest.raises(PoleDiskError):
        fld.frame_at(0.3 + 0.2j)


@pytest.mark.parametrize("name", ["ez2", "ez3"])
def test_ray_predictions(name):
    spec = V.family(name)
    fld = field_for(spec)
    n, th = spec.n, spec.theta
    devs_u, devs_vy = [], []
    for y in (50.0, 100.0, 200.0):
        z = complex(y / math.tan(th), y)
        fr = fld.frame_at(z)
        du = abs(fr.u * math.sin(th) ** n / (y**n * math.cos(n * th)) - 1)
        dv = abs(fr.vy / (n * math.cos((n - 1) * th) / math.sin(th) ** (n - 1) * y ** (n - 1)) - 1)
        assert du <= 5 / y and dv <= 5 / y
        devs_u.append(du)
        devs_vy.append(dv)
    assert all(b <= a + 1e-15 for a, b in zip(devs_u, devs_u[1:]))


def test_admissible_membership(ez2):
    fr = ez2.frame_at(3 + 1j)
    assert in_admissible(fr, 1.0, 1, 2)
    assert not in_admissible(ez2.frame_at(1 + 3j), 1.0, 1, 2)
