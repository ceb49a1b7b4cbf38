"""Integrals of e^{-U} along the traced curves and the evaluation of f.

The vertical integral from L_0 to L_k, unreachable by quadrature far out,
is obtained from the loop relation J_k = G_k + F_k - F_0 (|U| = omega
piece, then along L_k, minus along L_0).  The leftover piece from the
nearest L_K to the query point is done by phase-resolved quadrature while
e^u is moderate and by the half-period chi series beyond.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence, TextIO

import numpy as np

from . import kernels
from .algebra import ProblemSpec
from .asymptotics import ExpansionResult
from .field import Field, FieldFrame, field_for
from .logscale import TWO_PI, ZERO, LogComplex, exp_of, fmt17, from_complex, lsum, mul
from .paths import (
    TracedPath,
    TraceError,
    WindowSet,
    _vertical_newton,
    find_crossings,
    omega_seed,
    trace_level_curve,
    trace_omega,
    trace_vertical,
    windows,
)
from .quadrature import adaptive_gk

REGIME_A_MAX = 1e6
EDGE_BAND = 1e-3
CHI_REL_TOL = 1e-12
# integrand below e^-46 (about 1e-20) of its peak ends the direct remainder
DIRECT_CUTOFF = 46.0
CURVATURE_TOL = 1e-7


class PreconditionError(ValueError):
    pass


class NearFieldError(PreconditionError):
    """The point sits below L_0 or left of its anchor curve; direct chords from z0 reach it."""


class UnresolvedError(ArithmeticError):
    """The query point lies in a band where the remainder is not decided."""


class NonMonotoneChi(ArithmeticError):
    pass


def _fld(spec, exp) -> Field:
    return spec if isinstance(spec, Field) else field_for(spec, exp)


# -- chord quadrature -------------------------------------------------------

def _U_complex(fr: FieldFrame) -> complex:
    return cmath.rect(math.exp(fr.u), fr.v)


def _chord_is_far(fld: Field, za: complex, zb: complex) -> bool:
    return fld.closed_form or (abs(za) >= fld.r_switch and abs(zb) >= fld.r_switch)


def expneg_chord(fld: Field, fa: FieldFrame, zb: complex, cutoff: float = 0.0) -> LogComplex:
    """Integral of e^{-U} along the straight chord from fa.z to zb."""
    zb = complex(zb)
    if zb == fa.z:
        return ZERO
    if not _chord_is_far(fld, fa.z, zb):
        return from_complex(_expneg_generic(fld, fa, zb))
    loc = fld.local(fa.z, fa.v)
    Uc = _U_complex(fa)
    M, re, im, _, _ = kernels.expneg_segment(loc.dp, loc.num, loc.den, Uc, 0j, zb - fa.z, cutoff=cutoff)
    val = complex(re, im)
    if val == 0:
        return ZERO
    return LogComplex(-Uc.real + M + math.log(abs(val)), -Uc.imag + cmath.phase(val))


def _expneg_generic(fld: Field, fa: FieldFrame, zb: complex) -> complex:
    """Near-field chord by adaptive Gauss-Kronrod on exp(-U); needs moderate |U|."""
    za = fa.z
    L = zb - za
    vstart = fa.v

    def g(s):
        t = za + s * L
        W = fld.W(t, vstart)
        return np.exp(-np.exp(W)) * L

    rate = math.exp(fa.u) * abs(fa.dW) * abs(L)
    npan = int(min(4096, max(4, rate / 0.39)))
    # G is piecewise (anchor cells), so ask for no more than its own ~1e-15 noise
    val, _, _ = adaptive_gk(g, 0.0, 1.0, reltol=1e-13, npanels=npan, max_panels=20000, peak_rel=1e-15)
    return val


def integrate_polyline(fld: Field, frames: Sequence[FieldFrame], cutoff: float = 0.0) -> list[LogComplex]:
    """Chord integrals between consecutive frames."""
    return [expneg_chord(fld, a, b.z, cutoff) for a, b in zip(frames[:-1], frames[1:])]


def _to_c(v: LogComplex) -> complex:
    return v.to_complex()


def _csum(vals: Sequence[complex]) -> complex:
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def integrate_path(spec, exp, path: TracedPath, omega: float = 1.0) -> complex:
    """Integral of e^{-U} along a traced path (chord by chord, exact by Cauchy)."""
    fld = _fld(spec, exp)
    bound = max(omega, abs(math.log(omega))) + 1.0
    for fr in path.frames:
        lm = -math.exp(fr.u) * math.cos(fr.v)
        if lm > bound:
            raise PreconditionError(
                f"integrand magnitude e^{lm:.3g} at {fr.z!r} exceeds the path bound; use eval_H for verticals"
            )
    return _csum([_to_c(v) for v in integrate_polyline(fld, path.frames)])


def tail_bound(fr: FieldFrame) -> float:
    """|e^{-U}| / |U'| at the end of a truncated level curve."""
    r = math.exp(fr.u)
    return math.exp(-r * math.cos(fr.v) - fr.u) / max(abs(fr.dW), 1e-300)


# -- ledger -------------------------------------------------------------------

@dataclass
class RerouteLedger:
    theta: float
    omega: float
    epsilon: float
    k_max: int
    omega_path: TracedPath
    crossings: dict[int, FieldFrame]
    level_paths: dict[int, TracedPath]
    level_cum: dict[int, list[complex]]
    F: dict[int, complex]
    G: dict[int, complex]
    J: dict[int, complex]
    d_limits: dict[int, complex]
    tails: dict[int, float]
    d_base: LogComplex
    windows: WindowSet
    fld: Field = dc_field(repr=False)
    _base_cache: dict = dc_field(default_factory=dict, repr=False)

    def level_frame_at(self, k: int, x: float) -> tuple[FieldFrame, int]:
        """Point of L_k on the vertical Re z = x and the index of the node before it."""
        path = self.level_paths[k]
        xs = np.array([f.x for f in path.frames])
        if x < xs[0] - 1e-12:
            raise NearFieldError(f"x={x:g} lies left of the start of L_{k}")
        i = int(np.searchsorted(xs, x, side="right")) - 1
        if i >= xs.size - 1:
            if abs(x - xs[-1]) <= 1e-12:
                return path.frames[-1], xs.size - 1
            return None, xs.size - 1
        a, b = path.frames[i], path.frames[i + 1]
        if x == a.x:
            return a, i
        s = (x - a.x) / (b.x - a.x)
        fr = _vertical_newton(self.fld, x, a.y + s * (b.y - a.y), TWO_PI * k)
        return fr, i

    def F_at(self, k: int, x: float) -> complex:
        """Integral along L_k from its omega crossing to the vertical at x."""
        fr, i = self.level_frame_at(k, x)
        if fr is None:
            # beyond the truncation point: e^{-U} has underflowed
            return self.d_limits[k]
        cum = self.level_cum[k]
        return cum[i] + _to_c(expneg_chord(self.fld, self.level_paths[k].frames[i], fr.z))

    def J_at(self, k: int, x: float) -> complex:
        if k == 0:
            return 0j
        return self.G[k] + self.F_at(k, x) - self.F_at(0, x)

    def base_frame(self, x: float) -> FieldFrame:
        """The point of L_0 on the vertical Re z = x."""
        if x in self._base_cache:
            return self._base_cache[x]
        fr, _ = self.level_frame_at(0, x)
        if fr is None:
            ext = trace_level_curve(
                self.fld, None, 0, x, u_stop=math.inf, du_rel=0.25, continue_from=self.level_paths[0]
            )
            fr = ext.frames[-1]
            if abs(fr.x - x) > 1e-9:
                raise TraceError(f"L_0 did not reach x={x:g}")
        self._base_cache[x] = fr
        return fr

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "F_re", "F_im", "G_re", "G_im", "J_re", "J_im"])
        for k in sorted(self.F):
            w.writerow([k] + [fmt17(p) for c in (self.F[k], self.G[k], self.J[k]) for p in (c.real, c.imag)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def build_ledger(
    spec,
    exp,
    theta: float | None = None,
    omega: float = 1.0,
    epsilon: float = 0.1,
    k_max: int = 20,
    x_query: float = math.inf,
) -> RerouteLedger:
    """Trace |U| = omega and the L_k, and cache F_k, G_k and J_k = G_k + F_k - F_0."""
    fld = _fld(spec, exp)
    if theta is None:
        theta = fld.spec.theta if fld.spec.theta is not None else math.pi / (4 * fld.spec.n)
    om = trace_omega(fld, None, omega, k_max)
    cross = dict(find_crossings(fld, None, om, range(k_max + 1)))

    # omega path with the crossings inserted, so G_k is a prefix sum
    seed = omega_seed(fld, None, omega)
    nodes: list[tuple[float, FieldFrame, int | None]] = [(f.v, f, None) for f in om.frames]
    nodes += [(c.v, c, k) for k, c in cross.items()]
    nodes.sort(key=lambda t: (t[0], t[2] is None))
    cum = [0j]
    frames = [nodes[0][1]]
    for (_, a, _), (_, b, _) in zip(nodes[:-1], nodes[1:]):
        cum.append(cum[-1] + (_to_c(expneg_chord(fld, a, b.z)) if b.z != a.z else 0j))
        frames.append(b)
    at = {}
    seed_at = None
    for i, (_, f, k) in enumerate(nodes):
        if k is not None and k not in at:
            at[k] = cum[i]
        if f is seed or (seed_at is None and f.z == seed.z):
            seed_at = cum[i]
    if seed_at is None:
        seed_at = 0j
    G = {k: at[k] - at[0] for k in cross}

    # base piece: z0 to the omega seed, then along the omega curve to z_0
    z0f = fld.frame_at(fld.spec.z0)
    to_seed = expneg_chord(fld, z0f, seed.z)
    d_base = lsum([to_seed, from_complex(at[0] - seed_at)])

    levels, level_cum, F, tails = {}, {}, {}, {}
    for k, c in cross.items():
        p = trace_level_curve(fld, None, k, x_query, seed=c)
        chords = integrate_polyline(fld, p.frames)
        cs = [0j]
        for v in chords:
            cs.append(cs[-1] + _to_c(v))
        levels[k] = p
        level_cum[k] = cs
        F[k] = cs[-1]
        tails[k] = tail_bound(p.frames[-1]) if p.truncated else 0.0
    J = {k: (G[k] + F[k] - F[0]) if k else 0j for k in cross}
    ws = windows(fld, None, theta, epsilon, k_max)
    return RerouteLedger(theta, omega, epsilon, k_max, om, cross, levels, level_cum, F, G, J, dict(F), tails,
                         d_base, ws, fld)


# -- chi series ---------------------------------------------------------------

@dataclass
class ChiWindow:
    x: float
    eta: float
    u: float
    lam: float
    k_m: int = 0
    k_n: int = 0
    sbar: list[float] = dc_field(default_factory=list)
    lattice: list[float] = dc_field(default_factory=list)

    @property
    def r(self) -> float:
        return math.exp(self.u)


def half_period_factor(sbar: float, lam: float) -> float:
    """Integral of e^{-sbar s} cos s over [lam, lam + pi] in closed form."""
    return -(math.exp(-sbar * (lam + math.pi)) + math.exp(-sbar * lam)) / (1 + sbar * sbar) * (
        -sbar * math.cos(lam) + math.sin(lam)
    )


def anti_window_eta(dv: float) -> float:
    """Offset of the phase dv in [-pi, pi] from the anti-window centre pi."""
    return dv - math.pi if dv > 0 else dv + math.pi


@dataclass
class _ChiSetup:
    loc: object
    Uc: complex
    dirn: complex
    sigma: float
    lam: float
    primary: str
    ReUc: float


def _chi_setup(fld: Field, fr: FieldFrame, dv: float) -> _ChiSetup:
    loc = fld.local(fr.z, fr.v)
    r = math.exp(fr.u)
    Uc = cmath.rect(r, dv)
    sigma = 1.0 if dv > 0 else -1.0
    # the local direction keeping |U| fixed; for W' = 1 this is the vertical
    wp = fr.dW
    dirn = -1j * sigma * wp.conjugate() / abs(wp)
    lam = math.fmod(r * abs(math.sin(dv)), TWO_PI)
    l = int(2 * lam / math.pi)
    primary = "I1" if l in (1, 3) else "I2"
    return _ChiSetup(loc, Uc, dirn, sigma, lam, primary, r * math.cos(dv))


def _invert(st: _ChiSetup, qs: np.ndarray, delta0: float) -> tuple[np.ndarray, np.ndarray]:
    qs = np.ascontiguousarray(qs, dtype=float)
    dl = np.empty_like(qs)
    ln = np.empty_like(qs)
    fails = kernels.chi_invert(st.loc.dp, st.loc.num, st.loc.den, st.Uc, st.dirn, st.sigma, qs, delta0, dl, ln)
    if fails:
        raise ArithmeticError(f"chi lattice inversion failed at {fails} point(s)")
    return dl, ln


def _cell(st: _ChiSetup, qa: float, qb: float, da: float, lna: float, depth: int = 0):
    """Sub-cells of [qa, qb] on which ln chi is close enough to linear."""
    qm = 0.5 * (qa + qb)
    dl, ln = _invert(st, np.array([qm, qb]), da)
    dev = abs(ln[0] - 0.5 * (lna + ln[1]))
    if dev <= CURVATURE_TOL or depth >= 30:
        return [(qa, qb - qa, lna, ln[0], ln[1])], dl[1], ln[1]
    left, dm, lnm = _cell(st, qa, qm, da, lna, depth + 1)
    right, db, lnb = _cell(st, qm, qb, dm, lnm, depth + 1)
    return left + right, db, lnb


def _chi_sum(fld: Field, fr: FieldFrame, dv: float, max_cells: int = 100000):
    """Cell-by-cell Filon sum of chi(q) e^{i(lam + q)}; relative to chi(0) = e^{ref}."""
    st = _chi_setup(fld, fr, dv)
    q_first = (math.pi / 2 - st.lam) % math.pi if st.primary == "I1" else (-st.lam) % math.pi
    if q_first < 1e-9:
        q_first += math.pi
    _, ln0 = _invert(st, np.array([0.0]), 0.0)
    ref = float(ln0[0])
    acc_r = [0.0, 0.0]
    acc_i = [0.0, 0.0]
    lattice = [ref]
    sbars: list[float] = []
    qa, da, lna = 0.0, 0.0, ref
    qb = q_first
    ncell = 0
    while True:
        try:
            subs, db, lnb = _cell(st, qa, qb, da, lna)
        except ArithmeticError:
            # w = Im U turns at the window edge; shorten the cell towards it
            if qb - qa < 1e-9 * (1.0 + qa):
                raise UnresolvedError("chi series reaches the window edge before converging") from None
            qb = 0.5 * (qa + qb)
            continue
        if not lnb < lattice[-1]:
            raise NonMonotoneChi(f"chi not decreasing at q={qb:.6g} (ln chi {lnb:.17g} >= {lattice[-1]:.17g})")
        cols = np.array(subs).T
        re, im, _ = kernels.filon_cells(*(np.ascontiguousarray(c) for c in (cols[2], cols[3], cols[4], cols[0], cols[1])), st.lam)
        cell = complex(re, im) * math.exp(cols[2][0] - ref)
        _neumaier_add(acc_r, cell.real)
        _neumaier_add(acc_i, cell.imag)
        sbars.append((lna - lnb) / (qb - qa))
        lattice.append(lnb)
        ncell += 1
        tot = complex(acc_r[0] + acc_r[1], acc_i[0] + acc_i[1])
        last_primary = abs(cell.real if st.primary == "I1" else cell.imag)
        if ncell >= 2 and abs(cell) <= CHI_REL_TOL * abs(tot):
            break
        if ncell >= max_cells:
            raise ArithmeticError("chi series did not converge within the cell budget")
        qa, da, lna = qb, db, lnb
        qb = qa + math.pi
    prim = abs(tot.real if st.primary == "I1" else tot.imag)
    bracket = last_primary / prim if prim > 0 else math.inf
    win = ChiWindow(fr.x, anti_window_eta(dv), fr.u, st.lam, 0, ncell, sbars, lattice)
    return tot, ref, bracket, win, st


def _neumaier_add(acc: list[float], x: float) -> None:
    s = acc[0]
    t = s + x
    acc[1] += (s - t) + x if abs(s) >= abs(x) else (x - t) + s
    acc[0] = t


def chi_series(spec, exp, fr: FieldFrame, dv: float, max_cells: int = 100000):
    """Half-period series for the remainder integral from fr.z towards the anchor valley.

    Returns (I1, I2, bracket, window) with I1 = int chi cos(lam + q) dq and
    I2 = int chi sin(lam + q) dq as LogComplex, chi(q) = e^{-Re U}/|dw/dt|
    in the outward variable q = |w| - |w_z|, w = Im U.
    """
    fld = _fld(spec, exp)
    tot, ref, bracket, win, st = _chi_sum(fld, fr, dv, max_cells)
    base = -st.ReUc + ref
    I1 = _shift(from_complex(tot.real), base)
    I2 = _shift(from_complex(tot.imag), base)
    return I1, I2, bracket, win


def _shift(v: LogComplex, dl: float) -> LogComplex:
    return v if v.is_zero else LogComplex(v.lmag + dl, v.arg)


def chi_remainder(I1: LogComplex, I2: LogComplex, sigma: float) -> LogComplex:
    """Remainder from the anchor valley to z: I2 + i sigma I1."""
    return lsum([I2, mul(I1, LogComplex(0.0, sigma * math.pi / 2))])


# -- H and f ------------------------------------------------------------------

@dataclass
class HResult:
    H: LogComplex
    iH: LogComplex
    R: LogComplex
    T: LogComplex  # e^{U(z)} R, formed without the huge factors
    K: int
    dv: float
    u: float
    regime: str
    frame: FieldFrame
    JK: complex
    bracket: float = math.nan
    chi: ChiWindow | None = None

    @property
    def zeta(self) -> float:
        return self.dv


def locate(ledger: RerouteLedger, z: complex) -> tuple[FieldFrame, int, FieldFrame]:
    """Frame at z with v continued up the vertical from L_0, its anchor K and the L_K point."""
    fld = ledger.fld
    z = complex(z)
    base = ledger.base_frame(z.real)
    if z.imag < base.y:
        raise NearFieldError("query point lies below L_0 on its vertical")
    vert = trace_vertical(fld, None, base, math.inf, y_top=z.imag)
    fz = vert.frames[-1]
    K = int(round(fz.v / TWO_PI))
    if K < 0 or K > ledger.k_max:
        raise PreconditionError(f"anchor valley {K} outside the ledger range 0..{ledger.k_max}; raise k_max")
    if K == 0:
        return fz, K, base
    if fz.v >= TWO_PI * K:
        anchor = dict(find_crossings(fld, None, vert, [K]))[K]
    else:
        top = trace_vertical(fld, None, fz, TWO_PI * K + 0.5)
        anchor = dict(find_crossings(fld, None, top, [K]))[K]
    return fz, K, anchor


def eval_H(spec_or_ledger, exp=None, ledger: RerouteLedger | None = None, z: complex | None = None,
           regime: str = "auto") -> HResult:
    """i H = J_K + (integral from the anchor valley L_K to z), along the vertical through z."""
    if isinstance(spec_or_ledger, RerouteLedger):
        ledger, z = spec_or_ledger, exp if z is None else z
    fld = ledger.fld
    fz, K, anchor = locate(ledger, z)
    dv = fz.v - TWO_PI * K
    r = math.exp(fz.u)
    JKc = ledger.J_at(K, fz.x)
    JK = from_complex(JKc)
    Uc = cmath.rect(r, dv)
    if regime == "auto":
        regime = "a" if r <= REGIME_A_MAX else "b"
    bracket = math.nan
    chi = None
    if abs(abs(dv) - math.pi / 2) < EDGE_BAND and regime == "b":
        raise UnresolvedError(f"|zeta -+ pi/2| < {EDGE_BAND:g}: remainder regime undecidable")
    if fz.z == anchor.z:
        T = R = ZERO
    elif regime == "a" and not _chord_is_far(fld, fz.z, anchor.z):
        val = from_complex(_expneg_generic(fld, fz, anchor.z))
        T = -mul(val, exp_of((Uc.real, Uc.imag)))
        R = -val
    elif regime == "a":
        loc = fld.local(fz.z, fz.v)
        M, re, im, _, _ = kernels.expneg_segment(loc.dp, loc.num, loc.den, Uc, 0j, anchor.z - fz.z,
                                                 cutoff=DIRECT_CUTOFF)
        T = -_shift(from_complex(complex(re, im)), M)
        R = mul(T, exp_of((-Uc.real, -Uc.imag)))
    elif abs(dv) < math.pi / 2:
        # inside a window: |R| <= |dy| e^{-r cos dv}, compared with |J_K|
        lm_bound = -r * math.cos(dv) + math.log(abs(fz.z - anchor.z))
        if JK.is_zero or lm_bound > JK.lmag - 700:
            raise UnresolvedError("window remainder not negligible in the chi regime")
        T = R = ZERO
        regime = "b-window"
    else:
        eta = anti_window_eta(dv)
        if abs(eta) < ledger.epsilon - 1e-9:
            raise UnresolvedError("unresolved: |eta| < epsilon in the chi-series regime")
        tot, ref, bracket, chi, st = _chi_sum(fld, fz, dv)
        sig = st.sigma
        rel = from_complex(complex(tot.imag, sig * tot.real))
        # e^{U(z)} carries the phase e^{i sigma lam} consistently with the lattice
        T = mul(_shift(rel, ref), LogComplex(0.0, sig * st.lam))
        R = _shift(rel, ref - st.ReUc)
    iH = lsum([JK, R])
    H = mul(iH, LogComplex(0.0, -math.pi / 2))
    return HResult(H, iH, R, T, K, dv, fz.u, regime, fz, JKc, bracket, chi)


def e_to_U(fr: FieldFrame, dv: float | None = None) -> LogComplex:
    """e^{U} in log form: lmag = Re U, arg = Im U."""
    r = math.exp(fr.u)
    ang = fr.v if dv is None else dv
    return exp_of((r * math.cos(ang), r * math.sin(ang)))


def eval_solution(spec_or_ledger, exp=None, ledger: RerouteLedger | None = None, z: complex | None = None,
                  method: str = "auto", c: complex | None = None) -> LogComplex:
    """f(z) = e^{U(z)} [c + integral of e^{-U} from z0 to z]."""
    if isinstance(spec_or_ledger, RerouteLedger):
        ledger, z = spec_or_ledger, exp if z is None else z
        fld = ledger.fld
    else:
        fld = _fld(spec_or_ledger, exp)
    z = complex(z)
    cc = fld.spec.c if c is None else c
    if method == "direct" or ledger is None:
        return direct_solution(fld, z, cc)
    try:
        h = eval_H(ledger, z=z)
    except PreconditionError:
        # outside the ledger (left of L_0 or below it): plain chords from z0
        if method == "auto":
            return direct_solution(fld, z, cc)
        raise
    return solution_from_H(ledger, h, cc)


def solution_from_H(ledger: RerouteLedger, h: HResult, c: complex) -> LogComplex:
    """e^U (c + d_base + F_0 + J_K) + e^U R, the last term taken in relative form."""
    F0 = ledger.F_at(0, h.frame.x)
    head = lsum([from_complex(c), ledger.d_base, from_complex(F0), from_complex(h.JK)])
    return lsum([mul(e_to_U(h.frame, h.dv), head), h.T])


def direct_solution(spec, z: complex, c: complex | None = None) -> LogComplex:
    """Straight-chord quadrature from z0 (near field, route around the pole disk)."""
    fld = _fld(spec, None)
    z = complex(z)
    cc = fld.spec.c if c is None else c
    pts = fld.route(z)
    frames = fld.continue_along(pts, fld.frame_at(fld.spec.z0).v)
    keep = [frames[0]]
    for p in pts[1:]:
        keep.append(next(f for f in frames if f.z == p))
    chords = integrate_polyline(fld, keep)
    val = lsum([from_complex(cc)] + chords)
    return mul(e_to_U(keep[-1]), val)


# -- identities ---------------------------------------------------------------

def identity_integrals(omega: float, high_accuracy: bool = True) -> tuple[float, float]:
    """(1/2pi) int_0^{2pi} e^{-omega cos t} (cos, sin)(omega sin t) dt.

    The integrand is periodic and entire, so the trapezoid rule converges
    geometrically; the node count is set well past the decay of the Fourier
    coefficients.
    """
    n = int(64 + 8 * math.ceil(abs(omega)) + 8 * math.ceil(math.e * abs(omega)))
    t = TWO_PI * np.arange(n) / n
    mag = np.exp(-omega * np.cos(t))
    ph = omega * np.sin(t)
    a = mag * np.cos(ph)
    b = mag * np.sin(ph)
    if high_accuracy:
        return math.fsum(a.tolist()) / n, math.fsum(b.tolist()) / n
    return float(a.sum()) / n, float(b.sum()) / n
