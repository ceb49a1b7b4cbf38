"""Pure-Python versions of the compiled kernels, same signatures and results."""

from __future__ import annotations

import cmath
import math

import numpy as np

GL8_X = (-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
         0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363)
GL8_W = (0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
         0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763)


def _horner(c, h):
    acc = c[-1]
    for a in c[-2::-1]:
        acc = acc * h + a
    return acc


def _horner_tail(c, h):
    if len(c) < 2:
        return 0j
    return _horner(c[1:], h) * h


def _dhorner(c, h):
    if len(c) < 2:
        return 0j
    return _horner([j * c[j] for j in range(1, len(c))], h)


def _clog1p(x: complex) -> complex:
    a, b = x.real, x.imag
    return complex(0.5 * math.log1p(2.0 * a + a * a + b * b), math.atan2(b, 1.0 + a))


def _cexpm1(w: complex) -> complex:
    a, b = w.real, w.imag
    s = math.sin(0.5 * b)
    return complex(math.expm1(a) * math.cos(b) - 2.0 * s * s, math.exp(a) * math.sin(b))


class _Local:
    __slots__ = ("dp", "num", "den", "ddp", "dnum", "dden")

    def __init__(self, dp, num, den):
        self.dp = [complex(x) for x in dp]
        self.num = [complex(x) for x in num]
        self.den = [complex(x) for x in den]

    def dW(self, h):
        out = _horner(self.dp, h)
        if len(self.num) > 1 or len(self.den) > 1:
            n0, d0 = self.num[0], self.den[0]
            dn = _horner_tail(self.num, h)
            dd = _horner_tail(self.den, h)
            out += _clog1p((dn * d0 - n0 * dd) / (n0 * (d0 + dd)))
        return out

    def Wp(self, h):
        out = _dhorner(self.dp, h)
        if len(self.num) > 1:
            out += _dhorner(self.num, h) / _horner(self.num, h)
        if len(self.den) > 1:
            out -= _dhorner(self.den, h) / _horner(self.den, h)
        return out


class _Neumaier:
    __slots__ = ("s", "c")

    def __init__(self):
        self.s = 0.0
        self.c = 0.0

    def add(self, x):
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    def scale(self, f):
        self.s *= f
        self.c *= f

    @property
    def value(self):
        return self.s + self.c


def expneg_segment(dp, num, den, Uc, ha, hb, dmax=0.39269908169872414, min_panels=4,
                   max_panels=2000000, cutoff=0.0):
    loc = _Local(dp, num, den)
    Uc, ha, hb = complex(Uc), complex(ha), complex(hb)
    L = hb - ha
    absL = abs(L)
    r = abs(Uc)
    if absL == 0.0:
        return (0.0, 0.0, 0.0, 0, 0)
    s = 0.0
    smax = 1.0 / min_panels
    M = -1e308
    re, im = _Neumaier(), _Neumaier()
    panels = 0
    truncated = 0

    def rate_at(h):
        return r * math.exp(loc.dW(h).real) * abs(loc.Wp(h)) * absL

    while s < 1.0:
        rate = rate_at(ha + s * L)
        ds = smax
        if rate * ds > dmax:
            ds = dmax / rate
        ds = min(ds, 1.0 - s)
        for _ in range(40):
            if rate_at(ha + (s + ds) * L) * ds <= 2.0 * dmax:
                break
            ds *= 0.5
        if ds < 1e-15:
            raise ArithmeticError("panel width underflow in expneg_segment")
        for x, w in zip(GL8_X, GL8_W):
            h = ha + (s + 0.5 * ds * (1.0 + x)) * L
            E = -Uc * _cexpm1(loc.dW(h))
            if E.real > M:
                f = math.exp(M - E.real)
                re.scale(f)
                im.scale(f)
                M = E.real
            mag = 0.5 * ds * w * math.exp(E.real - M)
            re.add(mag * math.cos(E.imag))
            im.add(mag * math.sin(E.imag))
        s += ds
        panels += 1
        if panels >= max_panels:
            truncated = 2
            break
        if cutoff > 0.0 and panels >= min_panels:
            if (-Uc * _cexpm1(loc.dW(ha + s * L))).real < M - cutoff:
                truncated = 1
                break
    tot = complex(re.value, im.value) * L
    return (M, tot.real, tot.imag, panels, truncated)


def _shift(src, c):
    dst = list(src)
    n = len(dst)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            dst[j] += c * dst[j + 1]
    return dst


def taylor_polyline(zs, f0, pc, snum, sden, order, tol, out, max_steps=1000000):
    K = int(order)
    pc = [complex(x) for x in pc]
    snum = [complex(x) for x in snum]
    sden = [complex(x) for x in sden]
    n = len(pc) - 1
    ns, nd = len(snum), len(sden)
    f = complex(f0)
    out[0] = f
    steps = 0
    for seg in range(len(zs) - 1):
        a, b = complex(zs[seg]), complex(zs[seg + 1])
        length = abs(b - a)
        if length == 0.0:
            out[seg + 1] = f
            continue
        d = (b - a) / length
        s = 0.0
        while s < length:
            c = a + s * d
            ps = _shift(pc, c)
            nsh = _shift(snum, c)
            dsh = _shift(sden, c)
            E = [cmath.exp(ps[0])] + [0j] * K
            for j in range(1, K + 1):
                E[j] = sum(i * ps[i] * E[j - i] for i in range(1, min(j, n) + 1)) / j
            Sser = [0j] * (K + 1)
            for j in range(K + 1):
                acc = nsh[j] if j < ns else 0j
                for i in range(1, min(j, nd - 1) + 1):
                    acc -= dsh[i] * Sser[j - i]
                Sser[j] = acc / dsh[0]
            A = [sum(Sser[i] * E[j - i] for i in range(j + 1)) for j in range(K + 1)]
            fm = max(abs(f), 1.0)
            F = [f / fm] + [0j] * K
            for j in range(K):
                acc = (1.0 / fm if j == 0 else 0.0) + sum(A[i] * F[j - i] for i in range(j + 1))
                F[j + 1] = acc / (j + 1)
            rho = 1e300
            for jj in (K - 1, K):
                t = abs(F[jj])
                if t > 0.0:
                    rho = min(rho, (tol / t) ** (1.0 / jj))
            h = min(rho, length - s)
            tau = h * d
            acc = F[K]
            for j in range(K - 1, -1, -1):
                acc = acc * tau + F[j]
            f = acc * fm
            s += h
            steps += 1
            if steps > max_steps or not (math.isfinite(f.real) and math.isfinite(f.imag)) or h <= 0.0:
                raise ArithmeticError("Taylor stepping failed (step budget or overflow)")
            if length - s < 1e-14 * length:
                break
        out[seg + 1] = f
    return steps


def chi_invert(dp, num, den, Uc, dirn, sigma, qs, delta0, out_delta, out_lnchi, max_iter=60):
    loc = _Local(dp, num, den)
    Uc, dirn = complex(Uc), complex(dirn)
    delta = float(delta0)
    fails = 0
    m = len(qs)
    for j in range(m):
        qt = float(qs[j])
        for _ in range(max_iter):
            h = delta * dirn
            ew = loc.dW(h)
            dU = Uc * _cexpm1(ew)
            q = sigma * dU.imag
            der = sigma * (Uc * cmath.exp(ew) * loc.Wp(h) * dirn).imag
            if der == 0.0:
                break
            delta += (qt - q) / der
            if abs(qt - q) <= 1e-13 * (1.0 + abs(qt)):
                break
        h = delta * dirn
        ew = loc.dW(h)
        dU = Uc * _cexpm1(ew)
        g = Uc * cmath.exp(ew) * loc.Wp(h) * dirn
        if abs(sigma * dU.imag - qt) > 1e-9 * (1.0 + abs(qt)) or g.imag == 0.0:
            fails += 1
        out_delta[j] = delta
        out_lnchi[j] = -dU.real - math.log(abs(g.imag)) if g.imag != 0.0 else -math.inf
        if j + 1 < m and g.imag != 0.0:
            delta += (float(qs[j + 1]) - qt) / (sigma * g.imag)
    return fails


def filon_cells(ln0, lnm, ln1, q0, h, lam):
    ln0 = np.asarray(ln0, dtype=float)
    lnm = np.asarray(lnm, dtype=float)
    ln1 = np.asarray(ln1, dtype=float)
    q0 = np.asarray(q0, dtype=float)
    h = np.asarray(h, dtype=float)
    sb = (ln0 - ln1) / h
    rho_m = np.exp(lnm - ln0 + 0.5 * sb * h)
    c2 = (rho_m - 1.0) / (0.25 * h * h)
    beta = 1j - sb
    ebh = np.exp(beta * h)
    M0 = (ebh - 1.0) / beta
    M1 = (h * ebh - M0) / beta
    M2 = (h * h * ebh - 2.0 * M1) / beta
    ph = np.exp(1j * (lam + q0) + (ln0 - ln0[0]))
    cells = ph * (M0 + c2 * (h * M1 - M2))
    re, im = _Neumaier(), _Neumaier()
    for c in cells:
        re.add(c.real)
        im.add(c.imag)
    return (re.value, im.value, float(abs(cells[-1])) if cells.size else 0.0)
