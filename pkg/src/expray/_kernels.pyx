# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: local-model quadrature of e^{-U}, the Taylor ODE
stepper and the chi lattice inversion.  ``_fallback`` mirrors every function."""

from libc.math cimport exp, log, log1p, expm1, sin, cos, atan2, sqrt, hypot, fabs, pow, isfinite
from libc.stdlib cimport malloc, free

cdef double GL8_X[8]
cdef double GL8_W[8]
GL8_X[:] = [-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
            0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363]
GL8_W[:] = [0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
            0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763]


cdef inline double cabs_(double complex z) noexcept nogil:
    return hypot(z.real, z.imag)


cdef inline double complex horner(const double complex[::1] c, double complex h) noexcept nogil:
    cdef Py_ssize_t j = c.shape[0] - 1
    cdef double complex acc = c[j]
    while j > 0:
        j -= 1
        acc = acc * h + c[j]
    return acc


cdef inline double complex horner_tail(const double complex[::1] c, double complex h) noexcept nogil:
    # sum_{j>=1} c_j h^j
    cdef Py_ssize_t j = c.shape[0] - 1
    if j < 1:
        return 0
    cdef double complex acc = c[j]
    while j > 1:
        j -= 1
        acc = acc * h + c[j]
    return acc * h


cdef inline double complex dhorner(const double complex[::1] c, double complex h) noexcept nogil:
    cdef Py_ssize_t j = c.shape[0] - 1
    if j < 1:
        return 0
    cdef double complex acc = j * c[j]
    while j > 1:
        j -= 1
        acc = acc * h + j * c[j]
    return acc


cdef inline double complex clog1p(double complex x) noexcept nogil:
    cdef double a = x.real, b = x.imag
    cdef double complex r
    r.real = 0.5 * log1p(2.0 * a + a * a + b * b)
    r.imag = atan2(b, 1.0 + a)
    return r


cdef inline double complex cexpm1(double complex w) noexcept nogil:
    cdef double a = w.real, b = w.imag, s = sin(0.5 * b)
    cdef double complex r
    r.real = expm1(a) * cos(b) - 2.0 * s * s
    r.imag = exp(a) * sin(b)
    return r


cdef inline double complex dW(const double complex[::1] dp, const double complex[::1] num,
                              const double complex[::1] den, double complex h) noexcept nogil:
    cdef double complex out = horner(dp, h)
    cdef double complex dn, dd, n0, d0
    if num.shape[0] > 1 or den.shape[0] > 1:
        n0 = num[0]
        d0 = den[0]
        dn = horner_tail(num, h)
        dd = horner_tail(den, h)
        out = out + clog1p((dn * d0 - n0 * dd) / (n0 * (d0 + dd)))
    return out


cdef inline double complex Wp(const double complex[::1] dp, const double complex[::1] num,
                              const double complex[::1] den, double complex h) noexcept nogil:
    cdef double complex out = dhorner(dp, h)
    if num.shape[0] > 1:
        out = out + dhorner(num, h) / horner(num, h)
    if den.shape[0] > 1:
        out = out - dhorner(den, h) / horner(den, h)
    return out


cdef inline void neumaier(double *s, double *c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def expneg_segment(const double complex[::1] dp, const double complex[::1] num,
                   const double complex[::1] den, double complex Uc,
                   double complex ha, double complex hb,
                   double dmax=0.39269908169872414, int min_panels=4,
                   long max_panels=2000000, double cutoff=0.0):
    """Integral of exp(-Uc*expm1(dW(h))) dh along ha -> hb.

    Returns (shift, re, im, panels, truncated): the value is e^shift*(re + i im).
    Panels are sized so the phase of U moves by at most ``dmax``. With
    ``cutoff`` > 0 the march stops once the integrand has fallen e^cutoff
    below its running peak.
    """
    cdef double complex L = hb - ha
    cdef double absL = cabs_(L)
    cdef double r = cabs_(Uc)
    cdef double s = 0.0, ds, smax = 1.0 / min_panels, rate, rate2
    cdef double M = -1e308, sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0, scale
    cdef double complex h, E, dw
    cdef double wgt, mag, re_end
    cdef long panels = 0
    cdef int i, it, truncated = 0
    if absL == 0.0:
        return (0.0, 0.0, 0.0, 0, 0)
    with nogil:
        while s < 1.0:
            h = ha + s * L
            dw = dW(dp, num, den, h)
            rate = r * exp(dw.real) * cabs_(Wp(dp, num, den, h)) * absL
            ds = smax
            if rate * ds > dmax:
                ds = dmax / rate
            if ds > 1.0 - s:
                ds = 1.0 - s
            for it in range(40):
                h = ha + (s + ds) * L
                rate2 = r * exp(dW(dp, num, den, h).real) * cabs_(Wp(dp, num, den, h)) * absL
                if rate2 * ds <= 2.0 * dmax:
                    break
                ds = 0.5 * ds
            if ds < 1e-15:
                panels = -1
                break
            for i in range(8):
                h = ha + (s + 0.5 * ds * (1.0 + GL8_X[i])) * L
                E = -Uc * cexpm1(dW(dp, num, den, h))
                if E.real > M:
                    scale = exp(M - E.real)
                    sr *= scale
                    cr *= scale
                    si *= scale
                    ci *= scale
                    M = E.real
                wgt = 0.5 * ds * GL8_W[i]
                mag = wgt * exp(E.real - M)
                neumaier(&sr, &cr, mag * cos(E.imag))
                neumaier(&si, &ci, mag * sin(E.imag))
            s += ds
            panels += 1
            if panels >= max_panels:
                truncated = 2
                break
            if cutoff > 0.0 and panels >= min_panels:
                re_end = (-Uc * cexpm1(dW(dp, num, den, ha + s * L))).real
                if re_end < M - cutoff:
                    truncated = 1
                    break
    if panels < 0:
        raise ArithmeticError("panel width underflow in expneg_segment")
    cdef double complex tot = (sr + cr) + 1j * (si + ci)
    tot = tot * L
    return (M, tot.real, tot.imag, panels, truncated)


def taylor_polyline(const double complex[::1] zs, double complex f0,
                    const double complex[::1] pc, const double complex[::1] snum,
                    const double complex[::1] sden, int order, double tol,
                    double complex[::1] out, long max_steps=1000000):
    """Integrate f' = S e^P f + 1 along the polyline zs by Taylor stepping.

    Writes f at each node into ``out`` and returns the number of steps.
    ``pc``, ``snum``, ``sden`` are ascending coefficients.
    """
    cdef int K = order
    cdef int n = pc.shape[0] - 1
    cdef int ns = snum.shape[0], nd = sden.shape[0]
    cdef Py_ssize_t seg, npts = zs.shape[0]
    cdef double complex *ps = <double complex *> malloc((n + 1) * sizeof(double complex))
    cdef double complex *nsh = <double complex *> malloc(ns * sizeof(double complex))
    cdef double complex *dsh = <double complex *> malloc(nd * sizeof(double complex))
    cdef double complex *E = <double complex *> malloc((K + 1) * sizeof(double complex))
    cdef double complex *Sser = <double complex *> malloc((K + 1) * sizeof(double complex))
    cdef double complex *A = <double complex *> malloc((K + 1) * sizeof(double complex))
    cdef double complex *F = <double complex *> malloc((K + 2) * sizeof(double complex))
    cdef double complex a, b, d, c, acc, tau, f = f0
    cdef double s, len_, h, rho, fm, t
    cdef long steps = 0
    cdef int i, j, jj, failed = 0
    if not (ps and nsh and dsh and E and Sser and A and F):
        free(ps); free(nsh); free(dsh); free(E); free(Sser); free(A); free(F)
        raise MemoryError()
    out[0] = f
    with nogil:
        for seg in range(npts - 1):
            a = zs[seg]
            b = zs[seg + 1]
            len_ = cabs_(b - a)
            if len_ == 0.0:
                out[seg + 1] = f
                continue
            d = (b - a) / len_
            s = 0.0
            while s < len_:
                c = a + s * d
                _shift(&pc[0], n + 1, c, ps)
                _shift(&snum[0], ns, c, nsh)
                _shift(&sden[0], nd, c, dsh)
                # e^{P(c + tau)}
                E[0] = cexp_(ps[0])
                for j in range(1, K + 1):
                    acc = 0
                    for i in range(1, (j if j < n else n) + 1):
                        acc = acc + i * ps[i] * E[j - i]
                    E[j] = acc / j
                for j in range(K + 1):
                    acc = nsh[j] if j < ns else 0
                    for i in range(1, (j if j < nd - 1 else nd - 1) + 1):
                        acc = acc - dsh[i] * Sser[j - i]
                    Sser[j] = acc / dsh[0]
                for j in range(K + 1):
                    acc = 0
                    for i in range(j + 1):
                        acc = acc + Sser[i] * E[j - i]
                    A[j] = acc
                # coefficients of f / max(|f|, 1), so 1/fm carries the forcing
                fm = cabs_(f)
                if fm < 1.0:
                    fm = 1.0
                F[0] = f / fm
                for j in range(K):
                    acc = 1.0 / fm if j == 0 else 0.0
                    for i in range(j + 1):
                        acc = acc + A[i] * F[j - i]
                    F[j + 1] = acc / (j + 1)
                rho = 1e300
                for jj in range(K - 1, K + 1):
                    t = cabs_(F[jj])
                    if t > 0.0:
                        t = pow(tol / t, 1.0 / jj)
                        if t < rho:
                            rho = t
                h = rho
                if h > len_ - s:
                    h = len_ - s
                tau = h * d
                acc = F[K]
                for j in range(K - 1, -1, -1):
                    acc = acc * tau + F[j]
                f = acc * fm
                s += h
                steps += 1
                if steps > max_steps or not isfinite(f.real) or not isfinite(f.imag) or h <= 0.0:
                    failed = 1
                    break
                if len_ - s < 1e-14 * len_:
                    break
            if failed:
                break
            out[seg + 1] = f
    free(ps); free(nsh); free(dsh); free(E); free(Sser); free(A); free(F)
    if failed:
        raise ArithmeticError("Taylor stepping failed (step budget or overflow)")
    return steps


cdef inline double complex cexp_(double complex w) noexcept nogil:
    cdef double m = exp(w.real)
    cdef double complex r
    r.real = m * cos(w.imag)
    r.imag = m * sin(w.imag)
    return r


cdef void _shift(const double complex *src, int n, double complex c, double complex *dst) noexcept nogil:
    cdef int i, j
    for i in range(n):
        dst[i] = src[i]
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            dst[j] = dst[j] + c * dst[j + 1]


def chi_invert(const double complex[::1] dp, const double complex[::1] num,
               const double complex[::1] den, double complex Uc, double complex dirn,
               double sigma, const double[::1] qs, double delta0,
               double[::1] out_delta, double[::1] out_lnchi, int max_iter=60):
    """Solve sigma*Im(U(zc + delta*dirn) - U(zc)) = q for each target q.

    Also writes ln chi relative to e^{-Re U(zc)}: -Re dU - ln|dq/ddelta|.
    Returns the number of targets that failed to converge.
    """
    cdef Py_ssize_t j, m = qs.shape[0]
    cdef double delta = delta0, q, qt, der, step
    cdef double complex h, ew, dU, g
    cdef int it, fails = 0
    with nogil:
        for j in range(m):
            qt = qs[j]
            for it in range(max_iter):
                h = delta * dirn
                ew = dW(dp, num, den, h)
                dU = Uc * cexpm1(ew)
                q = sigma * dU.imag
                g = Uc * cexp_(ew) * Wp(dp, num, den, h) * dirn
                der = sigma * g.imag
                if der == 0.0:
                    break
                step = (qt - q) / der
                delta = delta + step
                if fabs(qt - q) <= 1e-13 * (1.0 + fabs(qt)):
                    break
            h = delta * dirn
            ew = dW(dp, num, den, h)
            dU = Uc * cexpm1(ew)
            g = Uc * cexp_(ew) * Wp(dp, num, den, h) * dirn
            if fabs(sigma * dU.imag - qt) > 1e-9 * (1.0 + fabs(qt)) or g.imag == 0.0:
                fails += 1
            out_delta[j] = delta
            out_lnchi[j] = -dU.real - log(fabs(g.imag))
            # linear predictor for the next target
            if j + 1 < m and g.imag != 0.0:
                delta = delta + (qs[j + 1] - qt) / (sigma * g.imag)
    return fails


def filon_cells(const double[::1] ln0, const double[::1] lnm, const double[::1] ln1,
                const double[::1] q0, const double[::1] h, double lam):
    """Sum over cells of int_0^h chi(q0+t) e^{i(lam+q0+t)} dt.

    chi is modelled as exp(ln0 - sbar t) * (1 + c2 t (h - t)) with sbar the
    secant decay rate and c2 fixed by the midpoint sample; the cell moments
    against e^{(i - sbar) t} are exact. Values are relative to e^{ln0[0]}.
    Returns (re, im, |last term|).
    """
    cdef Py_ssize_t j, m = ln0.shape[0]
    cdef double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0, sb, rho_m, c2, hh, ref = ln0[0], last = 0.0
    cdef double complex beta, ebh, M0, M1, M2, cell, ph
    with nogil:
        for j in range(m):
            hh = h[j]
            sb = (ln0[j] - ln1[j]) / hh
            rho_m = exp(lnm[j] - ln0[j] + 0.5 * sb * hh)
            c2 = (rho_m - 1.0) / (0.25 * hh * hh)
            beta = 1j - sb
            ebh = cexp_(beta * hh)
            M0 = (ebh - 1.0) / beta
            M1 = (hh * ebh - M0) / beta
            M2 = (hh * hh * ebh - 2.0 * M1) / beta
            ph = cexp_(1j * (lam + q0[j]) + (ln0[j] - ref))
            cell = ph * (M0 + c2 * (hh * M1 - M2))
            neumaier(&sr, &cr, cell.real)
            neumaier(&si, &ci, cell.imag)
            last = cabs_(cell)
    return (sr + cr, si + ci, last)
