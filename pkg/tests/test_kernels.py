"""Both kernel backends must agree; the compiled one is skipped when not built."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expray import _fallback, kernels
from expray import verify as V
from expray.field import field_for

BACKENDS = kernels.backends()
needs_ext = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


def _local(name, z):
    fld = field_for(V.family(name))
    fr = fld.frame_at(z)
    loc = fld.local(fr.z, fr.v)
    Uc = complex(math.exp(fr.u) * math.cos(fr.v), math.exp(fr.u) * math.sin(fr.v))
    return loc, Uc


def test_env_var_selects_fallback():
    code = "from expray import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, EXPRAY_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_expneg_segment_matches_entire_closed_form():
    # U = e^z: the integral of e^{-(U - Uc)} along 0 -> L from z = 1 is a difference of E1 values
    import mpmath

    loc, Uc = _local("ez", 1.0 + 0j)
    L = 0.5 + 0.25j
    M, re, im, _, _ = _fallback.expneg_segment(loc.dp, loc.num, loc.den, Uc, 0j, L)
    got = complex(re, im) * math.exp(M)
    with mpmath.workdps(30):
        a, b = mpmath.e, mpmath.exp(1 + L)
        want = complex(mpmath.exp(mpmath.e) * (mpmath.e1(a) - mpmath.e1(b)))
    assert abs(got - want) < 1e-13 * abs(want)


@needs_ext
@pytest.mark.parametrize("name, z, L", [("ez", 2 + 1j, 0.3j), ("ez2", 3 + 1.2j, 0.1j), ("ez3", 2 + 0.3j, -0.05 + 0.05j),
                                        ("z2ez", 5 + 2j, 0.2)])
def test_expneg_segment_backends_identical(name, z, L):
    loc, Uc = _local(name, z)
    a = BACKENDS["python"].expneg_segment(loc.dp, loc.num, loc.den, Uc, 0j, L, cutoff=46.0)
    b = BACKENDS["cython"].expneg_segment(loc.dp, loc.num, loc.den, Uc, 0j, L, cutoff=46.0)
    assert a[0] == b[0] and a[3:] == b[3:]
    scale = math.hypot(a[1], a[2])
    assert abs(a[1] - b[1]) <= 1e-14 * scale and abs(a[2] - b[2]) <= 1e-14 * scale


@needs_ext
def test_taylor_backends_identical():
    zs = np.linspace(0, 3 + 2j, 7)
    one = np.ones(1, dtype=complex)
    outs = []
    for mod in (BACKENDS["python"], BACKENDS["cython"]):
        out = np.zeros(zs.size, dtype=complex)
        steps = mod.taylor_polyline(zs, 0j, np.array([0, 1], dtype=complex), one, one, 24, 1e-16, out)
        outs.append((steps, out))
    assert outs[0][0] == outs[1][0]
    assert np.max(np.abs(outs[0][1] - outs[1][1]) / np.abs(outs[0][1][1:]).max()) < 1e-14


@needs_ext
def test_chi_and_filon_backends_identical():
    loc, Uc = _local("ez", 6 + 2j)
    qs = np.linspace(0, 30, 100)
    res = []
    for mod in (BACKENDS["python"], BACKENDS["cython"]):
        d, ln = np.zeros(qs.size), np.zeros(qs.size)
        fails = mod.chi_invert(loc.dp, loc.num, loc.den, Uc, 1j, 1.0, qs, 0.0, d, ln)
        res.append((fails, d, ln))
    assert res[0][0] == res[1][0]
    assert np.allclose(res[0][1], res[1][1], rtol=1e-13, atol=1e-15)
    assert np.allclose(res[0][2], res[1][2], rtol=1e-13, atol=1e-12)


@needs_ext
@settings(max_examples=40, deadline=None)
@given(st.integers(2, 200), st.floats(0.0, 0.05), st.floats(-3.0, 3.0))
def test_filon_backends_agree(m, slope, lam):
    ln0 = -slope * np.arange(m)
    ln1 = ln0 - slope
    lnm = 0.5 * (ln0 + ln1)
    q0 = np.pi * np.arange(m)
    h = np.full(m, np.pi)
    a = BACKENDS["python"].filon_cells(ln0, lnm, ln1, q0, h, lam)
    b = BACKENDS["cython"].filon_cells(ln0, lnm, ln1, q0, h, lam)
    scale = max(abs(a[0]), abs(a[1]), a[2], 1e-300)
    assert abs(a[0] - b[0]) <= 1e-13 * scale * m and abs(a[1] - b[1]) <= 1e-13 * scale * m


def test_filon_exact_for_exponential_envelope():
    # with ln chi linear the quadratic correction vanishes: compare with the analytic cell integral
    s, lam = 0.2, 0.4
    ln0 = np.array([0.0, -s * np.pi])
    ln1 = ln0 - s * np.pi
    lnm = 0.5 * (ln0 + ln1)
    q0 = np.array([0.0, np.pi])
    h = np.array([np.pi, np.pi])
    re, im, _ = _fallback.filon_cells(ln0, lnm, ln1, q0, h, lam)
    beta = 1j - s
    want = np.exp(1j * lam) * (np.exp(beta * 2 * np.pi) - 1) / beta
    assert abs(complex(re, im) - want) < 1e-14
