"""The constant-free antiderivative U of S e^P and its logarithm W = u + i v.

Everything is carried through G = U e^{-P}, which stays of moderate size:
W = P + log G and W' = S / G. For terminated expansions G = Q exactly; in
the far field G = Q up to a relative tail below |z|^{-N}; in the near field
G comes from quadrature of S e^{P(t) - P(z)} along a route from z0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .algebra import Poly, ProblemSpec, RationalFn, derivative, eval_poly, eval_rational
from .asymptotics import ExpansionResult, RayConstant, expand, ray_constant
from .logscale import TWO_PI, LogComplex, exp_of, from_complex, mul
from .quadrature import gauss_legendre, segment_integral


class BranchError(ArithmeticError):
    """Raised when U vanishes (log U has a branch point) or continuation fails."""


class PoleDiskError(ValueError):
    pass


@dataclass(frozen=True)
class FieldFrame:
    z: complex
    u: float
    v: float
    uy: float
    vy: float
    regime: str

    @property
    def x(self) -> float:
        return self.z.real

    @property
    def y(self) -> float:
        return self.z.imag

    @property
    def ux(self) -> float:
        return self.vy

    @property
    def vx(self) -> float:
        return -self.uy

    @property
    def dW(self) -> complex:
        """W' = vy - i uy."""
        return complex(self.vy, -self.uy)


def taylor_shift(p: Poly, c: complex) -> np.ndarray:
    """Coefficients of p(c + h) in powers of h."""
    a = np.array(p.coeffs, dtype=complex)
    n = a.size
    out = a.copy()
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] += c * out[j + 1]
    return out


def _horner(coeffs: np.ndarray, h):
    acc = coeffs[-1] + 0 * h
    for a in coeffs[-2::-1]:
        acc = acc * h + a
    return acc


def _dcoeffs(coeffs: np.ndarray) -> np.ndarray:
    if coeffs.size == 1:
        return np.zeros(1, dtype=complex)
    return coeffs[1:] * np.arange(1, coeffs.size)


def clog1p(x):
    """log(1 + x) for complex x, accurate when |x| is small."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-4
    out = np.log1p(x) if not small.any() else np.where(small, 0j, np.log(1 + x + 0j))
    if small.any():
        xs = np.where(small, x, 0)
        s = np.zeros_like(xs)
        term = xs.copy()
        for k in range(1, 8):
            s = s + term / k * (1 if k % 2 else -1)
            term = term * xs
        out = np.where(small, s, out)
    return out


def cexpm1(w):
    """e^w - 1 for complex w without cancellation in the real part."""
    w = np.asarray(w, dtype=complex)
    a, b = w.real, w.imag
    re = np.expm1(a) * np.cos(b) - 2.0 * np.sin(0.5 * b) ** 2
    im = np.exp(a) * np.sin(b)
    return re + 1j * im


@dataclass(frozen=True)
class LocalModel:
    """Accurate increments of W around a centre point when G is rational.

    Holds Taylor-shifted coefficients so that W(zc + h) - W(zc) is formed
    without subtracting large numbers; U(zc + h) = U(zc) exp(dW(h)).
    """

    zc: complex
    u: float
    v: float
    dp: np.ndarray  # P(zc + h) - P(zc), constant term zeroed
    num: np.ndarray  # G numerator shifted to zc
    den: np.ndarray

    def dW(self, h):
        h = np.asarray(h, dtype=complex)
        out = _horner(self.dp, h)
        if self.num.size > 1 or self.den.size > 1:
            n0, d0 = self.num[0], self.den[0]
            dn = _horner(np.concatenate([[0j], self.num[1:]]), h) if self.num.size > 1 else 0 * h
            dd = _horner(np.concatenate([[0j], self.den[1:]]), h) if self.den.size > 1 else 0 * h
            # G(zc+h)/G(zc) - 1 = (dn d0 - n0 dd) / (n0 (d0 + dd))
            rel = (dn * d0 - n0 * dd) / (n0 * (d0 + dd))
            out = out + clog1p(rel)
        return out

    def Wp(self, h):
        h = np.asarray(h, dtype=complex)
        out = _horner(_dcoeffs(self.dp), h)
        if self.num.size > 1:
            out = out + _horner(_dcoeffs(self.num), h) / _horner(self.num, h)
        if self.den.size > 1:
            out = out - _horner(_dcoeffs(self.den), h) / _horner(self.den, h)
        return out

    def U_rel(self, h):
        """U(zc + h)/U(zc) - 1."""
        return cexpm1(self.dW(h))

    @property
    def Uc_unit(self) -> complex:
        return cmath.exp(1j * self.v)


class Field:
    """Evaluator for U_eff, W and its partials for one problem."""

    def __init__(self, spec: ProblemSpec, exp: ExpansionResult | None = None, rc: RayConstant | None = None):
        self.spec = spec
        self.exp = exp if exp is not None else expand(spec)
        self.rc = rc if rc is not None else ray_constant(spec, self.exp)
        self.closed_form = self.exp.terminated
        if self.closed_form:
            self.r_switch = 0.0
        else:
            self.r_switch = max(2.0 * spec.pole_radius, 10.0, 10.0 ** (12.0 / self.exp.N))
        self._c1 = self.rc.c1_complex
        # near-field anchors: grid cell -> (anchor, G(anchor) + c1 e^{-P(anchor)})
        self._anchors: dict[tuple[int, int], tuple[complex, complex]] = {}
        dP = abs(complex(eval_poly(spec.P.deriv(), self.r_switch))) if self.r_switch else 1.0
        self._cell = 0.25 / max(1.0, dP)
        Q = self.exp.Q
        self._Gnum = Q.num
        self._Gden = Q.den

    # -- regime and G ---------------------------------------------------
    def regime(self, z: complex) -> str:
        return "far" if self.closed_form or abs(z) >= self.r_switch else "near"

    def _check_disk(self, z):
        r = self.spec.pole_radius
        if r > 0 and np.any(np.abs(z) <= r):
            raise PoleDiskError(f"evaluation inside the pole disk |z| <= {r:g}")

    def route(self, z: complex) -> list[complex]:
        """Piecewise-linear route from z0 to z that stays clear of the pole disk."""
        z0 = self.spec.z0
        r = self.spec.pole_radius
        if r <= 0 or _segment_clear(z0, z, 1.05 * r):
            return [z0, z]
        R = max(2.0 * r, min(abs(z0), abs(z)))
        # angles measured in (-pi/2, 3pi/2) so the route never crosses the negative imaginary axis
        a0 = _cut_angle(z0)
        a1 = _cut_angle(z)
        pts = [z0]
        if abs(z0) < R:
            pts.append(R * cmath.exp(1j * a0))
        steps = max(1, int(math.ceil(abs(a1 - a0) / (math.pi / 6))))
        for j in range(1, steps + 1):
            a = a0 + (a1 - a0) * j / steps
            pts.append(R * cmath.exp(1j * a))
        pts.append(z)
        if abs(pts[0] - pts[1]) == 0:
            pts.pop(1)
        return pts

    def G_near(self, z: complex) -> complex:
        """U_eff e^{-P} from the nearest grid anchor plus a short Gauss-Legendre chord."""
        z = complex(z)
        h = self._cell
        key = (round(z.real / h), round(z.imag / h))
        hit = self._anchors.get(key)
        if hit is None:
            a = complex(key[0] * h, key[1] * h)
            r = self.spec.pole_radius
            if r > 0 and not _segment_clear(a, z, 1.02 * r):
                return self._G_route(z)
            hit = (a, self._G_route(a) + self._c1 * cmath.exp(-eval_poly(self.spec.P, a)))
            self._anchors[key] = hit
        a, Ga = hit
        if a == z:
            return Ga - self._c1 * cmath.exp(-eval_poly(self.spec.P, z))
        Pz = eval_poly(self.spec.P, z)
        x, w = gauss_legendre(10)
        t = a + 0.5 * (z - a) * (1.0 + x)
        seg = 0.5 * (z - a) * complex(np.dot(w, eval_rational(self.spec.S, t) * np.exp(eval_poly(self.spec.P, t) - Pz)))
        return Ga * cmath.exp(eval_poly(self.spec.P, a) - Pz) + seg - self._c1 * cmath.exp(-Pz)

    def _G_route(self, z: complex) -> complex:
        """U_eff e^{-P} by quadrature from z0 along the route (valid anywhere outside the disk)."""
        P = self.spec.P
        S = self.spec.S
        Pz = eval_poly(P, z)
        pts = self.route(z)
        total = 0j
        for a, b in zip(pts[:-1], pts[1:]):
            def g(t, Pz=Pz):
                return eval_rational(S, t) * np.exp(eval_poly(P, t) - Pz)

            npan = max(1, int(abs(b - a) * max(1.0, abs(P.deriv()(b))) / 8))
            total += segment_integral(g, a, b, reltol=1e-14, npanels=min(npan, 4096), peak_rel=1e-17)
        return total - self._c1 * cmath.exp(-Pz)

    def G_far(self, z):
        return self.exp.eval_Q(z)

    def G(self, z):
        self._check_disk(z)
        if np.ndim(z) == 0:
            z = complex(z)
            return self.G_far(z) if self.regime(z) == "far" else self.G_near(z)
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        far = self.closed_form | (np.abs(z) >= self.r_switch)
        if far.any():
            out[far] = self.G_far(z[far])
        if (~far).any():
            out[~far] = self._G_near_many(z[~far])
        return out

    def _G_near_many(self, zs: np.ndarray) -> np.ndarray:
        """Vectorized G_near: one anchor lookup per cell, one batched chord rule."""
        h = self._cell
        ki = np.round(zs.real / h).astype(np.int64)
        kj = np.round(zs.imag / h).astype(np.int64)
        keys, inv = np.unique(np.stack([ki, kj], axis=1), axis=0, return_inverse=True)
        inv = inv.ravel()
        ka = keys[:, 0] * h + 1j * keys[:, 1] * h
        kG = np.empty(len(keys), dtype=complex)
        r = self.spec.pole_radius
        ok = _segments_clear(ka[inv], zs, 1.02 * r) if r > 0 else np.ones(zs.shape, dtype=bool)
        kok = np.bincount(inv, weights=~ok, minlength=len(keys)) == 0
        ok = kok[inv]
        for m in np.flatnonzero(kok):
            key = (int(keys[m, 0]), int(keys[m, 1]))
            hit = self._anchors.get(key)
            if hit is None:
                anc = complex(ka[m])
                hit = (anc, self._G_route(anc) + self._c1 * cmath.exp(-eval_poly(self.spec.P, anc)))
                self._anchors[key] = hit
            kG[m] = hit[1]
        a, Ga = ka[inv], kG[inv]
        out = np.empty(zs.shape, dtype=complex)
        for idx in np.flatnonzero(~ok):
            out[idx] = self.G_near(complex(zs[idx]))
        if ok.any():
            zz, aa = zs[ok], a[ok]
            P, S = self.spec.P, self.spec.S
            Pz = eval_poly(P, zz)
            x, w = gauss_legendre(10)
            t = aa[:, None] + 0.5 * (zz - aa)[:, None] * (1.0 + x[None, :])
            vals = eval_rational(S, t) * np.exp(eval_poly(P, t) - Pz[:, None])
            seg = 0.5 * (zz - aa) * (vals @ w)
            out[ok] = Ga[ok] * np.exp(eval_poly(P, aa) - Pz) + seg - self._c1 * np.exp(-Pz)
        return out

    # -- W and partials -------------------------------------------------
    def W(self, z, v_hint=None):
        """log U_eff = P + Log G, or its 2pi translate nearest v_hint."""
        Pz = eval_poly(self.spec.P, z)
        Gz = self.G(z)
        if np.any(Gz == 0):
            raise BranchError("U vanishes; log U has a branch point here")
        w = Pz + np.log(Gz)
        if v_hint is None:
            return w
        shift = TWO_PI * np.round((np.asarray(v_hint) - np.imag(w)) / TWO_PI)
        return w + 1j * shift

    def Wp(self, z):
        return eval_rational(self.spec.S, z) / self.G(z)

    def u_value(self, z: complex) -> LogComplex:
        z = complex(z)
        self._check_disk(z)
        Gz = self.G(z)
        if Gz == 0:
            return LogComplex(-math.inf, 0.0)
        return mul(from_complex(Gz), exp_of(eval_poly(self.spec.P, z)))

    def u_value_raw(self, z: complex) -> LogComplex:
        """The antiderivative from z0 itself, i.e. U_eff + c1."""
        z = complex(z)
        Gz = self.G_near(z) + self._c1 * cmath.exp(-eval_poly(self.spec.P, z))
        return mul(from_complex(Gz), exp_of(eval_poly(self.spec.P, z)))

    def frame_at(self, z: complex, v_hint: float | None = None) -> FieldFrame:
        z = complex(z)
        self._check_disk(z)
        Pz = eval_poly(self.spec.P, z)
        Gz = self.G(z)
        if Gz == 0 or not np.isfinite(Gz):
            raise BranchError(f"U vanishes or is singular at {z!r}")
        w = Pz + cmath.log(Gz)
        if v_hint is None:
            # natural branch: Im P plus the principal argument of G
            v = w.imag
        else:
            v = w.imag + TWO_PI * round((v_hint - w.imag) / TWO_PI)
        wp = complex(eval_rational(self.spec.S, z)) / Gz
        return FieldFrame(z, w.real, v, -wp.imag, wp.real, self.regime(z))

    def frames(self, zs: Sequence[complex], v_hints: Sequence[float]) -> list[FieldFrame]:
        zs = np.asarray(zs, dtype=complex)
        Pz = eval_poly(self.spec.P, zs)
        Gz = self.G(zs)
        if np.any(Gz == 0):
            raise BranchError("U vanishes on the path")
        w = Pz + np.log(Gz)
        vh = np.asarray(v_hints, dtype=float)
        v = w.imag + TWO_PI * np.round((vh - w.imag) / TWO_PI)
        wp = eval_rational(self.spec.S, zs) / Gz
        return [
            FieldFrame(complex(z), float(a), float(b), float(-c.imag), float(c.real), self.regime(complex(z)))
            for z, a, b, c in zip(zs, w.real, v, wp)
        ]

    def continue_along(self, points: Sequence[complex], v_start: float, max_depth: int = 40) -> list[FieldFrame]:
        """Frames along a polyline with v carried continuously; midpoints inserted on jumps."""
        pts = [complex(p) for p in points]
        out = [self.frame_at(pts[0], v_start)]
        for b in pts[1:]:
            self._extend(out, b, max_depth)
        return out

    def _extend(self, out: list[FieldFrame], b: complex, depth: int):
        a = out[-1]
        fb = self.frame_at(b, a.v + a.vy * (b - a.z).imag - a.uy * (b - a.z).real)
        if abs(fb.v - a.v) < math.pi / 2 or depth <= 0:
            if abs(fb.v - a.v) >= math.pi:
                raise BranchError("continuation refinement exceeded depth; path too near a zero of U")
            out.append(fb)
            return
        mid = 0.5 * (a.z + b)
        self._extend(out, mid, depth - 1)
        self._extend(out, b, depth - 1)

    def local(self, zc: complex, v_c: float | None = None) -> LocalModel:
        if not (self.closed_form or abs(zc) >= self.r_switch):
            raise ValueError("local model needs a rational G (terminated or far field)")
        fr = self.frame_at(zc, v_c)
        dp = taylor_shift(self.spec.P, zc)
        dp[0] = 0
        num = taylor_shift(self._Gnum, zc)
        den = taylor_shift(self._Gden, zc)
        return LocalModel(complex(zc), fr.u, fr.v, dp, num, den)

    def cr_defect(self, fr: FieldFrame) -> float:
        """Relative mismatch between vy - i uy and the independently formed S e^P / U."""
        lhs = fr.dW
        Ulog = self.u_value(fr.z)
        SeP = mul(from_complex(complex(eval_rational(self.spec.S, fr.z))), exp_of(eval_poly(self.spec.P, fr.z)))
        rhs = SeP / Ulog
        r = rhs.to_complex() if rhs.lmag < 700 else complex("nan")
        return abs(lhs - r) / max(abs(r), 1e-300)


def _segments_clear(a: np.ndarray, b: np.ndarray, r: float) -> np.ndarray:
    d = b - a
    n2 = np.abs(d) ** 2
    s = np.clip(-(a * d.conjugate()).real / np.where(n2 > 0, n2, 1.0), 0.0, 1.0)
    return np.abs(a + s * d) > r


def _segment_clear(a: complex, b: complex, r: float) -> bool:
    d = b - a
    if d == 0:
        return abs(a) > r
    s = max(0.0, min(1.0, -((a * d.conjugate()).real) / abs(d) ** 2))
    return abs(a + s * d) > r


def _cut_angle(z: complex) -> float:
    a = cmath.phase(z)
    if a < -math.pi / 2:
        a += TWO_PI
    return a


@lru_cache(maxsize=64)
def field_for(spec: ProblemSpec, exp: ExpansionResult | None = None) -> Field:
    return Field(spec, exp)


def u_value(spec: ProblemSpec, exp: ExpansionResult | None, z: complex) -> LogComplex:
    return field_for(spec, exp).u_value(z)


def frame_at(spec: ProblemSpec, exp: ExpansionResult | None, z: complex, v_hint: float | None = None) -> FieldFrame:
    return field_for(spec, exp).frame_at(z, v_hint)


def continue_along(spec: ProblemSpec, exp: ExpansionResult | None, path_points: Sequence[complex], v_start: float) -> list[FieldFrame]:
    return field_for(spec, exp).continue_along(path_points, v_start)


def in_admissible(fr: FieldFrame, omega: float, m: int, n: int) -> bool:
    """Membership e^u >= omega |z|^{-2|m-n+1|}."""
    return fr.u >= math.log(omega) - 2 * abs(m - n + 1) * math.log(max(abs(fr.z), 1e-300))
