"""Gauss-Legendre and adaptive Gauss-Kronrod rules over real intervals."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np

# QUADPACK qk15 abscissae and weights (Kronrod extension of 7-point Gauss)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KX = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss weights sit on the odd Kronrod abscissae (indices 1, 3, 5 from each end, plus centre)
GW = np.zeros(15)
for _i, _w in zip((1, 3, 5, 7), _WG):
    GW[_i] = _w
    GW[14 - _i] = _w


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def fsum_complex(values: np.ndarray) -> complex:
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))


def gk_panels(f: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray):
    """Kronrod estimate and |K - G| for each panel [a_i, b_i]."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    t = mid[:, None] + half[:, None] * KX[None, :]
    vals = np.asarray(f(t.ravel()), dtype=complex).reshape(t.shape)
    k = (vals * KW).sum(axis=1) * half
    g = (vals * GW).sum(axis=1) * half
    return k, np.abs(k - g), np.abs(vals).max(axis=1)


def adaptive_gk(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    abstol: float = 0.0,
    reltol: float = 1e-13,
    npanels: int = 1,
    max_panels: int = 200000,
    peak_rel: float | None = None,
) -> tuple[complex, float, float]:
    """Globally adaptive G7-K15 quadrature of a complex integrand.

    ``f`` receives a 1-d array of parameters and returns complex values.
    With ``peak_rel`` set, the absolute tolerance becomes peak_rel times the
    largest integrand magnitude seen. Returns (value, error estimate, peak).
    """
    edges = np.linspace(a, b, npanels + 1)
    lo, hi = edges[:-1], edges[1:]
    k, err, peak = gk_panels(f, lo, hi)
    done_val = []
    done_err = 0.0
    pk = float(peak.max()) if peak.size else 0.0
    total_panels = lo.size
    while True:
        if peak_rel is not None:
            atol = max(abstol, peak_rel * pk * abs(b - a))
        else:
            atol = abstol
        total = fsum_complex(np.concatenate([np.array(done_val, dtype=complex), k]))
        tol = max(atol, reltol * abs(total))
        total_err = done_err + float(err.sum())
        if total_err <= tol or total_panels >= max_panels or lo.size == 0:
            return total, total_err, pk
        # panels whose share of the error budget is exceeded get bisected
        share = tol * (hi - lo) / abs(b - a)
        bad = err > share
        if not bad.any():
            bad = err >= err.max()
        done_val.extend(k[~bad].tolist())
        done_err += float(err[~bad].sum())
        lo_b, hi_b = lo[bad], hi[bad]
        mid = 0.5 * (lo_b + hi_b)
        lo = np.concatenate([lo_b, mid])
        hi = np.concatenate([mid, hi_b])
        order = np.argsort(lo, kind="stable")
        lo, hi = lo[order], hi[order]
        k, err, peak = gk_panels(f, lo, hi)
        pk = max(pk, float(peak.max()))
        total_panels += lo_b.size


def composite_gl(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int, order: int = 16) -> complex:
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(t.ravel()), dtype=complex).reshape(t.shape)
    return fsum_complex((vals * w).sum(axis=1) * half)


def segment_integral(
    g: Callable[[np.ndarray], np.ndarray],
    za: complex,
    zb: complex,
    reltol: float = 1e-13,
    abstol: float = 0.0,
    npanels: int = 1,
    peak_rel: float | None = None,
) -> complex:
    """Integral of an analytic g along the straight segment za -> zb."""
    dz = zb - za
    if dz == 0:
        return 0j

    def h(s):
        return g(za + s * dz) * dz

    val, _, _ = adaptive_gk(h, 0.0, 1.0, abstol=abstol, reltol=reltol, npanels=npanels, peak_rel=peak_rel)
    return val
