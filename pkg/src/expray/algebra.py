"""Complex polynomials, rational functions and the canonical normalization of P."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

GCD_TOL = 1e-10
CANON_TOL = 1e-12


def _trim(coeffs: Iterable[complex]) -> tuple[complex, ...]:
    c = [complex(a) for a in coeffs]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    if not c:
        c = [0j]
    return tuple(c)


@dataclass(frozen=True)
class Poly:
    """Polynomial with complex coefficients stored in ascending degree."""

    coeffs: tuple[complex, ...]

    def __init__(self, coeffs: Iterable[complex]):
        object.__setattr__(self, "coeffs", _trim(coeffs))

    @classmethod
    def const(cls, c: complex) -> "Poly":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "Poly":
        return cls([0j] * k + [c])

    @property
    def degree(self) -> int:
        # the zero polynomial reports degree -1
        if self.is_zero():
            return -1
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def __call__(self, z):
        return eval_poly(self, z)

    def __add__(self, other: "Poly | complex") -> "Poly":
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0j] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0j] * (n - len(other.coeffs))
        return Poly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly([-a for a in self.coeffs])

    def __sub__(self, other: "Poly | complex") -> "Poly":
        return self + (-_as_poly(other))

    def __rsub__(self, other: "Poly | complex") -> "Poly":
        return _as_poly(other) - self

    def __mul__(self, other: "Poly | complex") -> "Poly":
        other = _as_poly(other)
        if self.is_zero() or other.is_zero():
            return Poly([0j])
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly([1.0])
        for _ in range(k):
            out = out * self
        return out

    def deriv(self) -> "Poly":
        if len(self.coeffs) == 1:
            return Poly([0j])
        return Poly([k * a for k, a in enumerate(self.coeffs)][1:])

    def max_abs(self) -> float:
        return max(abs(a) for a in self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)})"


def _as_poly(p) -> Poly:
    return p if isinstance(p, Poly) else Poly([p])


def eval_poly(p: Poly, z):
    """Horner evaluation; works for scalars and numpy arrays."""
    c = p.coeffs
    acc = c[-1] + 0 * z
    for a in reversed(c[:-1]):
        acc = acc * z + a
    return acc


def poly_divmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    rem = list(a.coeffs)
    db = b.degree
    lead = b.leading
    if a.degree < db:
        return Poly([0j]), a
    quo = [0j] * (a.degree - db + 1)
    for i in range(a.degree - db, -1, -1):
        q = rem[i + db] / lead
        quo[i] = q
        for j, bc in enumerate(b.coeffs):
            rem[i + j] -= q * bc
        rem[i + db] = 0j
    return Poly(quo), Poly(rem[:db] if db > 0 else [0j])


def _chop(p: Poly, tol: float) -> Poly:
    return Poly([a if abs(a) > tol else 0j for a in p.coeffs])


def approx_gcd(a: Poly, b: Poly, tol: float = GCD_TOL) -> Poly:
    """Euclid with remainders chopped at ``tol`` relative to the divisor scale."""
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero() and b.degree > 0:
        _, r = poly_divmod(a, b)
        r = _chop(r, tol * max(1.0, b.max_abs()))
        a, b = b, r
    if b.is_zero():
        return Poly([c / a.leading for c in a.coeffs])
    return Poly([1.0])


@dataclass(frozen=True)
class RationalFn:
    num: Poly
    den: Poly = field(default_factory=lambda: Poly([1.0]))

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")

    @classmethod
    def from_poly(cls, p: Poly) -> "RationalFn":
        return cls(p, Poly([1.0]))

    @classmethod
    def from_coeffs(cls, num: Sequence[complex], den: Sequence[complex] = (1.0,)) -> "RationalFn":
        return cls(Poly(num), Poly(den))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __call__(self, z):
        return eval_rational(self, z)

    def __add__(self, other: "RationalFn") -> "RationalFn":
        other = _as_rational(other)
        if self.den == other.den:
            return RationalFn(self.num + other.num, self.den)
        return RationalFn(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFn":
        return RationalFn(-self.num, self.den)

    def __sub__(self, other: "RationalFn") -> "RationalFn":
        return self + (-_as_rational(other))

    def __mul__(self, other: "RationalFn | Poly | complex") -> "RationalFn":
        other = _as_rational(other)
        return RationalFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def top_degree(self) -> int:
        """deg num - deg den of the stored (possibly unreduced) form."""
        if self.num.is_zero():
            return -(10**9)
        return self.num.degree - self.den.degree

    def __repr__(self) -> str:
        return f"RationalFn({format_rational(self)})"


def _as_rational(x) -> RationalFn:
    if isinstance(x, RationalFn):
        return x
    return RationalFn(_as_poly(x), Poly([1.0]))


def eval_rational(f: RationalFn, z):
    n = eval_poly(f.num, z)
    d = eval_poly(f.den, z)
    scale = f.den.max_abs() * (1.0 + np.abs(z)) ** max(f.den.degree, 0)
    small = np.abs(d) <= 1e-14 * scale
    if np.any(small):
        nscale = f.num.max_abs() * (1.0 + np.abs(z)) ** max(f.num.degree, 0)
        if np.any(small & (np.abs(n) <= 1e-14 * nscale)):
            raise ArithmeticError("evaluation at a common root of numerator and denominator (0/0)")
        raise ZeroDivisionError("evaluation at a pole")
    return n / d


def derivative(f: RationalFn | Poly) -> RationalFn:
    """Quotient-rule derivative; the denominator is squared unless constant."""
    f = _as_rational(f)
    if f.den.degree <= 0:
        return RationalFn(f.num.deriv() * (1.0 / f.den.coeffs[0]), Poly([1.0]))
    num = f.num.deriv() * f.den - f.num * f.den.deriv()
    return RationalFn(num, f.den * f.den)


def divide_by(f: RationalFn | Poly, p: Poly) -> RationalFn:
    if p.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    f = _as_rational(f)
    if p.degree == 0:
        return RationalFn(f.num * (1.0 / p.coeffs[0]), f.den)
    # cancel factors shared by the numerator and p so that S/P' stays exact
    g = approx_gcd(f.num, p) if not f.num.is_zero() else Poly([1.0])
    if g.degree >= 1:
        num, _ = poly_divmod(f.num, g)
        p, _ = poly_divmod(p, g)
        if p.degree == 0:
            return RationalFn(num * (1.0 / p.coeffs[0]), f.den)
        return RationalFn(num, f.den * p)
    return RationalFn(f.num, f.den * p)


def reduce(f: RationalFn, tol: float = GCD_TOL) -> RationalFn:
    if f.num.is_zero():
        return RationalFn(Poly([0j]), Poly([1.0]))
    g = approx_gcd(f.num, f.den, tol)
    num, _ = poly_divmod(f.num, g)
    den, _ = poly_divmod(f.den, g)
    # keep the denominator monic for a deterministic representation
    lead = den.leading
    return RationalFn(Poly([c / lead for c in num.coeffs]), Poly([c / lead for c in den.coeffs]))


def degree_excess(f: RationalFn) -> int:
    """The exponent m with f ~ const * z^m at infinity, after reduction."""
    r = reduce(f)
    return r.num.degree - r.den.degree


def normalize(p_raw: Poly) -> tuple[Poly, complex, complex]:
    """Return (p, alpha, beta) with p(w) = p_raw(alpha*w + beta) monic and sub-leading-free."""
    n = p_raw.degree
    if n < 1:
        raise ValueError("normalize needs a polynomial of degree >= 1")
    lead = p_raw.leading
    beta = -p_raw.coeffs[n - 1] / (n * lead)
    alpha = cmath.exp(-cmath.log(lead) / n)
    # Taylor shift: p_raw(alpha w + beta) = sum_j p^(j)(beta)/j! alpha^j w^j
    out = []
    d = p_raw
    for j in range(n + 1):
        out.append(eval_poly(d, beta) / math.factorial(j) * alpha**j)
        d = d.deriv()
    # both are exact by construction; pin them to remove rounding
    out[n] = 1.0 + 0j
    out[n - 1] = 0j
    return Poly(out), alpha, beta


def is_canonical(p: Poly) -> bool:
    n = p.degree
    return n >= 1 and abs(p.leading - 1) < CANON_TOL and abs(p.coeffs[n - 1]) < CANON_TOL


def _fmt_c(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return f"{c.real:.15g}"
    if c.real == 0:
        return f"{c.imag:.15g}j"
    return f"({c.real:.15g}{c.imag:+.15g}j)"


def format_poly(p: Poly, var: str = "z") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k in range(len(p.coeffs) - 1, -1, -1):
        c = p.coeffs[k]
        if c == 0:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        cs = _fmt_c(c)
        if mono and cs == "1":
            cs = ""
        elif mono and cs == "-1":
            cs = "-"
        elif mono:
            cs += "*"
        parts.append(cs + mono)
    s = " + ".join(parts)
    return s.replace("+ -", "- ")


def format_rational(f: RationalFn, var: str = "z") -> str:
    if f.den.degree == 0:
        scaled = Poly([c / f.den.coeffs[0] for c in f.num.coeffs])
        return format_poly(scaled, var)
    return f"({format_poly(f.num, var)}) / ({format_poly(f.den, var)})"


@dataclass(frozen=True)
class Tolerances:
    trace_tol: float = 1e-10
    quad_tol: float = 1e-13
    high_accuracy: bool = False


@dataclass(frozen=True)
class ProblemSpec:
    """Normalized problem f' = S e^P f + 1 together with its base point and ray."""

    P: Poly
    S: RationalFn
    z0: complex = 0j
    c: complex = 0j
    pole_radius: float = 0.0
    theta: float | None = None
    tol: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if not is_canonical(self.P):
            raise ValueError("P must be monic with zero z^(n-1) coefficient; call normalize first")
        if self.S.is_zero():
            raise ValueError("S must not vanish identically")
        if self.pole_radius < 0:
            raise ValueError("pole_radius must be >= 0")
        # with no poles a zero radius is allowed and z0 may sit at the origin
        if self.pole_radius > 0 and not abs(self.z0) > self.pole_radius:
            raise ValueError(f"|z0| = {abs(self.z0):g} must exceed pole_radius = {self.pole_radius:g}")
        if self.S.den.degree > 0 and self.pole_radius == 0:
            raise ValueError("S has a denominator; pole_radius must enclose its poles")
        if self.theta is not None:
            hi = math.pi / (2 * self.n)
            if not 0 < self.theta < hi:
                raise ValueError(f"theta = {self.theta!r} outside the open interval (0, {hi!r}) = (0, pi/(2n))")

    @property
    def n(self) -> int:
        return self.P.degree

    @property
    def m(self) -> int:
        return degree_excess(self.S)

    def with_theta(self, theta: float) -> "ProblemSpec":
        return ProblemSpec(self.P, self.S, self.z0, self.c, self.pole_radius, theta, self.tol)

    def with_c(self, c: complex) -> "ProblemSpec":
        return ProblemSpec(self.P, self.S, self.z0, c, self.pole_radius, self.theta, self.tol)

    def key(self) -> str:
        """Stable text identity used to tag reports."""
        parts = [
            "P=" + ",".join(_fmt_c(a) for a in self.P.coeffs),
            "Snum=" + ",".join(_fmt_c(a) for a in self.S.num.coeffs),
            "Sden=" + ",".join(_fmt_c(a) for a in self.S.den.coeffs),
            f"z0={_fmt_c(self.z0)}",
            f"c={_fmt_c(self.c)}",
            f"r={self.pole_radius!r}",
            f"theta={self.theta!r}",
        ]
        return ";".join(parts)
