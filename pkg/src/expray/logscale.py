"""Complex numbers held as (log-magnitude, argument).

The magnitudes met along the far ray are of size exp(e^{x^n}); only their
logarithms fit in a double. Arguments are kept wrapped to (-pi, pi].
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

TWO_PI = 2.0 * math.pi
# 2*pi - float(2*pi), used to tighten the reduction of large phases
_TWO_PI_LO = 2.4492935982947064e-16
OVERFLOW_GUARD = 700.0


class LogOverflowError(OverflowError):
    pass


def wrap_angle(a: float) -> float:
    """Reduce a real angle to (-pi, pi]."""
    if not math.isfinite(a):
        raise ValueError(f"non-finite angle {a!r}")
    if -math.pi < a <= math.pi:
        return a
    r = math.remainder(a, TWO_PI)
    k = round((a - r) / TWO_PI)
    r -= k * _TWO_PI_LO
    if r <= -math.pi:
        r += TWO_PI
    elif r > math.pi:
        r -= TWO_PI
    return r


@dataclass(frozen=True)
class LogComplex:
    lmag: float
    arg: float = 0.0

    def __post_init__(self):
        lm = float(self.lmag)
        if math.isnan(lm) or lm == math.inf:
            raise ValueError(f"invalid log-magnitude {self.lmag!r}")
        if lm == -math.inf:
            object.__setattr__(self, "lmag", -math.inf)
            object.__setattr__(self, "arg", 0.0)
            return
        object.__setattr__(self, "lmag", lm)
        object.__setattr__(self, "arg", wrap_angle(float(self.arg)))

    @property
    def is_zero(self) -> bool:
        return self.lmag == -math.inf

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        return mul(self, other)

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        return div(self, other)

    def __add__(self, other: "LogComplex") -> "LogComplex":
        return lsum([self, other])

    def __sub__(self, other: "LogComplex") -> "LogComplex":
        return lsum([self, -other])

    def __neg__(self) -> "LogComplex":
        if self.is_zero:
            return self
        return LogComplex(self.lmag, self.arg + math.pi)

    def conj(self) -> "LogComplex":
        return LogComplex(self.lmag, -self.arg)

    def log(self) -> complex:
        """Principal logarithm lmag + i*arg."""
        if self.is_zero:
            raise ValueError("log of zero")
        return complex(self.lmag, self.arg)

    def to_complex(self) -> complex:
        return to_complex(self)

    def pair(self) -> tuple[str, str]:
        return fmt17(self.lmag), fmt17(self.arg)

    def __repr__(self) -> str:
        return f"LogComplex(lmag={self.lmag!r}, arg={self.arg!r})"


ZERO = LogComplex(-math.inf, 0.0)
ONE = LogComplex(0.0, 0.0)


def fmt17(x: float) -> str:
    return format(x, ".17g")


def from_complex(z: complex) -> LogComplex:
    z = complex(z)
    if z == 0:
        return ZERO
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite complex {z!r}")
    # atan2 directly: cmath.phase overflows on subnormal parts
    return LogComplex(math.log(abs(z)), math.atan2(z.imag, z.real))


def to_complex(v: LogComplex) -> complex:
    if v.is_zero:
        return 0j
    if v.lmag > OVERFLOW_GUARD:
        raise LogOverflowError(f"lmag = {v.lmag:g} exceeds the double range guard {OVERFLOW_GUARD:g}")
    return cmath.rect(math.exp(v.lmag), v.arg)


def mul(a: LogComplex, b: LogComplex) -> LogComplex:
    if a.is_zero or b.is_zero:
        return ZERO
    return LogComplex(a.lmag + b.lmag, a.arg + b.arg)


def div(a: LogComplex, b: LogComplex) -> LogComplex:
    if b.is_zero:
        raise ZeroDivisionError("LogComplex division by zero")
    if a.is_zero:
        return ZERO
    return LogComplex(a.lmag - b.lmag, a.arg - b.arg)


def exp_of(w) -> LogComplex:
    """e^w for w = complex or a (real_part, imag_part) pair with a huge real part."""
    if isinstance(w, tuple):
        re, im = w
    else:
        w = complex(w)
        re, im = w.real, w.imag
    if re == -math.inf:
        return ZERO
    return LogComplex(re, im)


def _neumaier(xs: Iterable[float]) -> float:
    s = 0.0
    comp = 0.0
    for x in xs:
        t = s + x
        if abs(s) >= abs(x):
            comp += (s - t) + x
        else:
            comp += (x - t) + s
        s = t
    return s + comp


# axis directions, so that 1 + (-1) cancels exactly
_EXACT_CS = {0.0: (1.0, 0.0), math.pi: (-1.0, 0.0), math.pi / 2: (0.0, 1.0), -math.pi / 2: (0.0, -1.0)}


def lsum(values: Sequence[LogComplex], high_accuracy: bool = False) -> LogComplex:
    """Max-shift summation with compensated accumulation of the shifted terms.

    With ``high_accuracy`` the shifted real and imaginary parts are summed
    with exact rounding (math.fsum) instead of Neumaier compensation.
    """
    vals = [v for v in values if not v.is_zero]
    if not vals:
        return ZERO
    m = max(v.lmag for v in vals)
    re = []
    im = []
    for v in vals:
        s = math.exp(v.lmag - m)
        c, sn = _EXACT_CS.get(v.arg) or (math.cos(v.arg), math.sin(v.arg))
        re.append(s * c)
        im.append(s * sn)
    if high_accuracy:
        sr, si = math.fsum(re), math.fsum(im)
    else:
        sr, si = _neumaier(re), _neumaier(im)
    mag = math.hypot(sr, si)
    if mag == 0.0:
        return ZERO
    return LogComplex(m + math.log(mag), math.atan2(si, sr))


# the operation named in the module contract
sum = lsum  # noqa: A001


def scale_real(v: LogComplex, c: float) -> LogComplex:
    """Multiply by a real scalar."""
    return mul(v, from_complex(c))


def max_lmag(values: Iterable[LogComplex]) -> float:
    return max((v.lmag for v in values), default=-math.inf)
