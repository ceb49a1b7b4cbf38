"""Rational antiderivative Q of S e^P by repeated integration by parts.

With S_1 = S/P' and Q_j = -S_j', S_{j+1} = Q_j/P' one has
    int S e^P = (S_1 + ... + S_k) e^P + int Q_k e^P,
and the residual integrand Q_k decays like |z|^{m - k n}.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    Poly,
    ProblemSpec,
    RationalFn,
    derivative,
    divide_by,
    eval_poly,
    eval_rational,
    format_rational,
    reduce,
)
from .logscale import LogComplex, from_complex, lsum, mul, exp_of
from .quadrature import adaptive_gk

ZERO_TOL = 1e-13


def default_N(m: int, n: int) -> int:
    return 2 * abs(m - n + 1) + 2


@dataclass(frozen=True)
class ExpansionResult:
    terms: tuple[RationalFn, ...]
    Q: RationalFn
    Qk: RationalFn
    k: int
    N: int
    terminated: bool
    m: int
    n: int

    def eval_Q(self, z):
        """Q(z) as the sum of its terms; more accurate than the combined fraction."""
        out = 0j * np.asarray(z) if isinstance(z, np.ndarray) else 0j
        for t in self.terms:
            out = out + eval_rational(t, z)
        return out

    def eval_dQ(self, z):
        out = 0j * np.asarray(z) if isinstance(z, np.ndarray) else 0j
        for t in self.terms:
            out = out + eval_rational(derivative(t), z)
        return out

    def describe(self) -> str:
        state = "terminated" if self.terminated else f"tail |z|^{self.m - self.k * self.n}"
        return f"Q = {format_rational(reduce(self.Q))} ({state}, k={self.k})"


def _is_zero(f: RationalFn, scale: float) -> bool:
    return f.num.is_zero() or f.num.max_abs() <= ZERO_TOL * max(scale, 1.0)


def expand(spec: ProblemSpec, N_target: int | None = None) -> ExpansionResult:
    P = spec.P
    n = P.degree
    m = spec.m
    N = default_N(m, n) if N_target is None else int(N_target)
    if N < 1:
        raise ValueError("N_target must be >= 1")
    dP = P.deriv()
    terms = [divide_by(spec.S, dP)]
    scale = spec.S.num.max_abs() / spec.S.den.max_abs()
    j = 1
    while True:
        Qj = -derivative(terms[-1])
        if _is_zero(Qj, scale):
            terminated = True
            Qk = RationalFn(Poly([0j]), Poly([1.0]))
            break
        if m - j * n <= -(N + 1):
            terminated = False
            Qk = Qj
            break
        terms.append(divide_by(Qj, dP))
        j += 1
    Q = terms[0]
    for t in terms[1:]:
        Q = Q + t
    return ExpansionResult(tuple(terms), Q, Qk, j, N, terminated, m, n)


def exactness_residual(spec: ProblemSpec, exp: ExpansionResult) -> float:
    """Coefficient size of Q' + Q P' - S (zero when (Q e^P)' = S e^P identically)."""
    dP = RationalFn(spec.P.deriv())
    r = derivative(exp.Q) + exp.Q * dP - spec.S
    if r.num.is_zero():
        return 0.0
    scale = spec.S.num.max_abs() / spec.S.den.max_abs()
    return r.num.max_abs() / r.den.max_abs() / scale


@dataclass(frozen=True)
class RayConstant:
    theta_ref: float
    c0: complex
    c1: LogComplex
    radius: float = 0.0

    @property
    def c1_complex(self) -> complex:
        return self.c1.to_complex() if not self.c1.is_zero else 0j


def _ray_clears(z0: complex, phi: float, r: float) -> bool:
    if r <= 0:
        return True
    d = cmath.exp(1j * phi)
    s_star = -(z0 * d.conjugate()).real
    dist = abs(z0) if s_star <= 0 else abs((z0 * d.conjugate()).imag)
    return dist > 1.1 * r


def decay_ray_angle(spec: ProblemSpec) -> float:
    """Direction of the decaying ray from z0: pi/n unless that meets the pole disk."""
    n = spec.n
    lo, hi = math.pi / (2 * n), 3 * math.pi / (2 * n)
    mid = math.pi / n
    if _ray_clears(spec.z0, mid, spec.pole_radius):
        return mid
    for j in range(1, 64):
        for phi in (mid - j * (mid - lo) / 64, mid + j * (hi - mid) / 64):
            if _ray_clears(spec.z0, phi, spec.pole_radius):
                return phi
    raise ValueError("no decaying ray from z0 avoids the pole disk")


def ray_constant(
    spec: ProblemSpec,
    exp: ExpansionResult,
    step: float = 0.5,
    reltol: float = 1e-14,
    max_radius: float = 1e6,
) -> RayConstant:
    """c0 = integral of Q_k e^P from z0 to infinity inside the decaying sector."""
    QP0 = from_complex(exp.eval_Q(spec.z0))
    P0 = eval_poly(spec.P, spec.z0)
    base = mul(QP0, exp_of(P0))
    if exp.terminated:
        return RayConstant(math.pi / spec.n, 0j, -base, 0.0)
    phi = decay_ray_angle(spec)
    d = cmath.exp(1j * phi)
    z0 = spec.z0
    Qk = exp.Qk
    P = spec.P

    def g(s):
        t = z0 + s * d
        return eval_rational(Qk, t) * np.exp(eval_poly(P, t)) * d

    total = []
    s = 0.0
    while True:
        val, _, _ = adaptive_gk(g, s, s + step, reltol=reltol, npanels=4, peak_rel=1e-16)
        total.append(val)
        s += step
        running = complex(math.fsum(v.real for v in total), math.fsum(v.imag for v in total))
        tail = float(np.abs(g(np.array([s])))[0])
        if tail < 1e-18 * max(abs(running), 1e-300) and s > abs(z0) + 1:
            break
        if s > max_radius:
            raise RuntimeError("ray constant did not converge within radius 1e6; N_target too small?")
        step = min(step * 1.25, 50.0)
    c0 = complex(math.fsum(v.real for v in total), math.fsum(v.imag for v in total))
    c1 = lsum([from_complex(c0), -base])
    return RayConstant(phi, c0, c1, s)
