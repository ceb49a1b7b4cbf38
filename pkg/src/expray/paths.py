"""Curves in the z-plane used by the rerouting: rays, level curves of v,
the curve |U| = omega, vertical segments, their crossings and the windows."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .algebra import ProblemSpec
from .asymptotics import ExpansionResult
from .field import BranchError, Field, FieldFrame, field_for
from .logscale import TWO_PI, fmt17

NODE_TOL = 1e-10
MAX_NEWTON = 20
MIN_STEP = 1e-12
# e^{-e^u} < 1e-300 beyond this u
U_STOP = math.log(300.0 * math.log(10.0))


class TraceError(RuntimeError):
    pass


@dataclass
class TracedPath:
    kind: str  # "ray", "level", "omega", "vertical"
    label: float
    frames: list[FieldFrame]
    truncated: bool = False

    @property
    def points(self) -> np.ndarray:
        return np.array([f.z for f in self.frames], dtype=complex)

    @property
    def param(self) -> np.ndarray:
        p = self.points
        return np.concatenate([[0.0], np.cumsum(np.abs(np.diff(p)))])

    def __len__(self) -> int:
        return len(self.frames)

    def defect(self) -> float:
        """Largest violation of the defining condition over the nodes."""
        if not self.frames:
            return 0.0
        if self.kind == "level":
            return max(abs(f.v - TWO_PI * self.label) for f in self.frames)
        if self.kind == "omega":
            return max(abs(f.u - math.log(self.label)) for f in self.frames)
        if self.kind == "ray":
            return max(abs(math.atan2(f.y, f.x) - self.label) for f in self.frames if f.z != 0)
        if self.kind == "vertical":
            return max(abs(f.x - self.label) for f in self.frames)
        raise ValueError(self.kind)

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "u", "v", "uy", "vy"])
        for f in self.frames:
            w.writerow([fmt17(f.x), fmt17(f.y), fmt17(f.u), fmt17(f.v), fmt17(f.uy), fmt17(f.vy)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def read_path_csv(fh: TextIO) -> list[dict[str, float]]:
    return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


@dataclass(frozen=True)
class Window:
    k: int
    x_lo: float
    x_hi: float

    @property
    def x_mid(self) -> float:
        return 0.5 * (self.x_lo + self.x_hi)


@dataclass
class WindowSet:
    theta: float
    epsilon: float
    windows: list[Window]
    anti_windows: list[Window]
    ray: TracedPath = dc_field(repr=False, default=None)

    def window(self, k: int) -> Window:
        for w in self.windows:
            if w.k == k:
                return w
        raise KeyError(k)


def _fld(spec, exp) -> Field:
    if isinstance(spec, Field):
        return spec
    return field_for(spec, exp)


# -- correctors -----------------------------------------------------------

def _correct_level(fld: Field, z: complex, target: float) -> FieldFrame | None:
    """Move perpendicular to L until v = target."""
    fr = fld.frame_at(z, target)
    for _ in range(MAX_NEWTON):
        res = target - fr.v
        if abs(res) < NODE_TOL:
            return fr
        wp = fr.dW
        if wp == 0:
            return None
        fr = fld.frame_at(fr.z + 1j * res / wp, target)
    return fr if abs(target - fr.v) < NODE_TOL else None


def _correct_omega(fld: Field, z: complex, lnw: float, v_hint: float) -> FieldFrame | None:
    fr = fld.frame_at(z, v_hint)
    for _ in range(MAX_NEWTON):
        res = lnw - fr.u
        if abs(res) < NODE_TOL:
            return fr
        wp = fr.dW
        if wp == 0:
            return None
        fr = fld.frame_at(fr.z + res / wp, fr.v)
    return fr if abs(lnw - fr.u) < NODE_TOL else None


def _solve_W(fld: Field, z: complex, target: complex, v_hint: float) -> FieldFrame:
    """Complex Newton for W(z) = target."""
    fr = fld.frame_at(z, v_hint)
    for _ in range(40):
        res = target - complex(fr.u, fr.v)
        if abs(res) < NODE_TOL:
            return fr
        fr = fld.frame_at(fr.z + res / fr.dW, target.imag)
    raise TraceError(f"crossing Newton did not converge near {z!r}")


def _vertical_newton(fld: Field, x: float, y: float, target: float) -> FieldFrame:
    fr = fld.frame_at(complex(x, y), target)
    for _ in range(40):
        res = target - fr.v
        if abs(res) < NODE_TOL:
            return fr
        if fr.vy == 0:
            break
        fr = fld.frame_at(complex(x, fr.y + res / fr.vy), target)
    raise TraceError(f"vertical Newton failed at x={x:g}")


def _escape(fld: Field, fr: FieldFrame, cond: str, level: float, radius: float = 1e-3) -> FieldFrame:
    """Leave a critical point of W along the branch of the requested curve.

    Level curves leave towards increasing u, the omega curve towards
    increasing v; ties go to the branch closest to the sector direction.
    """
    angles = np.linspace(0.0, TWO_PI, 721)[:-1]
    zs = fr.z + radius * np.exp(1j * angles)
    W = fld.W(zs, fr.v)
    g = (W.imag if cond == "level" else W.real) - level
    prefer = 0.0 if cond == "level" else math.pi / (2 * fld.spec.n)
    best, best_key = None, None
    for i in range(angles.size):
        j = (i + 1) % angles.size
        if g[i] == 0 or g[i] * g[j] < 0:
            zc = zs[i] if g[i] == 0 else zs[i] + (zs[j] - zs[i]) * g[i] / (g[i] - g[j])
            cand = _correct_level(fld, zc, level) if cond == "level" else _correct_omega(fld, zc, level, fr.v)
            if cand is None:
                continue
            gain = cand.u - fr.u if cond == "level" else cand.v - fr.v
            off = abs(math.remainder(np.angle(cand.z - fr.z) - prefer, TWO_PI))
            key = (round(gain / (radius * radius), 6), -off)
            if best_key is None or key > best_key:
                best, best_key = cand, key
    if best is None:
        raise TraceError("no branch leaves the critical point")
    return best


# -- tracers ---------------------------------------------------------------

def trace_level_curve(
    spec: ProblemSpec | Field,
    exp: ExpansionResult | None,
    k: int,
    until_x: float,
    seed: complex | FieldFrame | None = None,
    u_stop: float = U_STOP,
    omega: float = 1.0,
    du_rel: float = 0.0,
    continue_from: TracedPath | None = None,
) -> TracedPath:
    """L_k from its crossing with |U| = omega towards increasing u.

    Stops at Re z = until_x (the last node lies exactly on that vertical) or
    once u exceeds ``u_stop`` where e^{-U} has underflowed; the latter sets
    ``truncated``. With ``du_rel`` > 0 the per-step growth of u may reach
    du_rel * u, which is how distant verticals are reached cheaply.
    """
    fld = _fld(spec, exp)
    target = TWO_PI * k
    if continue_from is not None:
        frames = list(continue_from.frames)
        fr = frames[-1]
        if fr.x >= until_x:
            return TracedPath("level", k, frames)
        return _march_level(fld, k, frames, until_x, u_stop, du_rel)
    if seed is None:
        om = trace_omega(fld, None, omega, max(k, 0))
        seed = dict(find_crossings(fld, None, om, [k]))[k]
    fr = seed if isinstance(seed, FieldFrame) else fld.frame_at(complex(seed), target)
    fr = _correct_level(fld, fr.z, target) or fr
    frames = [fr]
    if fr.x >= until_x:
        return TracedPath("level", k, frames)
    if abs(fr.dW) < 1e-8:
        fr = _escape(fld, fr, "level", target)
        frames.append(fr)
    return _march_level(fld, k, frames, until_x, u_stop, du_rel)


def _march_level(fld: Field, k: int, frames: list[FieldFrame], until_x: float, u_stop: float, du_rel: float) -> TracedPath:
    target = TWO_PI * k
    fr = frames[-1]
    h = 0.39 / max(abs(fr.dW), 1e-300)
    while True:
        wp = fr.dW
        du = max(0.39, du_rel * abs(fr.u))
        h = min(2 * h, du / abs(wp), 0.5 if du_rel == 0 else math.inf)
        while True:
            if h < MIN_STEP:
                raise TraceError(f"level curve k={k}: step underflow at {fr.z!r}")
            dz = h * wp.conjugate() / abs(wp)
            zn = fr.z + dz
            if zn.real >= until_x:
                slope = wp.conjugate().imag / wp.conjugate().real if wp.real != 0 else 0.0
                try:
                    nf = _vertical_newton(fld, until_x, fr.y + slope * (until_x - fr.x), target)
                except TraceError:
                    nf = None
                if nf is not None and abs(nf.z - fr.z) < 4 * h + 1e-12:
                    frames.append(nf)
                    return TracedPath("level", k, frames)
                h *= 0.5
                continue
            nf = _correct_level(fld, zn, target)
            if nf is None or nf.u - fr.u > 2 * du or nf.u <= fr.u:
                h *= 0.5
                continue
            break
        frames.append(nf)
        fr = nf
        if fr.u >= u_stop:
            return TracedPath("level", k, frames, truncated=True)


def omega_seed(spec, exp, omega: float) -> FieldFrame:
    """Project z0 onto |U| = omega by Newton along the real direction."""
    fld = _fld(spec, exp)
    lnw = math.log(omega)
    fr = fld.frame_at(fld.spec.z0)
    y = fr.y
    x = fr.x
    for _ in range(200):
        res = lnw - fr.u
        if abs(res) < NODE_TOL:
            return fr
        ux = fr.vy
        if abs(ux) < 1e-8:
            # critical point of W on the real line: step off it
            step = 0.1 if res > 0 else -0.1
        else:
            step = res / ux
        step = max(-1.0, min(1.0, step))
        x += step
        fr = fld.frame_at(complex(x, y), fr.v)
    raise TraceError("projection of z0 onto the omega curve did not converge")


def _march_omega(fld: Field, fr: FieldFrame, lnw: float, sign: float, stop) -> list[FieldFrame]:
    out = []
    h = 0.39 / max(abs(fr.dW), 1e-300)
    while not stop(fr):
        wp = fr.dW
        h = min(2 * h, 0.39 / abs(wp), 0.5)
        while True:
            if h < MIN_STEP:
                raise TraceError(f"omega curve: step underflow at {fr.z!r}")
            dz = sign * h * 1j * wp.conjugate() / abs(wp)
            hint = fr.v + (wp * dz).imag
            nf = _correct_omega(fld, fr.z + dz, lnw, hint)
            if nf is None or abs(nf.v - fr.v) > math.pi / 4 or sign * (nf.v - fr.v) <= 0:
                h *= 0.5
                continue
            break
        out.append(nf)
        fr = nf
    return out


def trace_omega(spec, exp, omega: float, k_max: int) -> TracedPath:
    """The curve |U| = omega from below L_0 up to v = 2 pi (k_max + 1)."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    fld = _fld(spec, exp)
    lnw = math.log(omega)
    seed = omega_seed(fld, None, omega)
    frames: list[FieldFrame] = []
    start = seed
    if abs(seed.dW) < 1e-8:
        start = _escape(fld, seed, "omega", lnw)
        frames.append(seed)
    if start is seed and start.v > 0:
        down = _march_omega(fld, start, lnw, -1.0, lambda f: f.v <= -math.pi / 8)
        frames = down[::-1] + frames
    frames.append(start)
    vmax = TWO_PI * (k_max + 1)
    frames += _march_omega(fld, start, lnw, 1.0, lambda f: f.v >= vmax)
    return TracedPath("omega", omega, frames)


def find_crossings(spec, exp, path: TracedPath, k_range: Iterable[int]) -> list[tuple[int, FieldFrame]]:
    """Points of ``path`` where v = 2 k pi, refined by Newton."""
    fld = _fld(spec, exp)
    v = np.array([f.v for f in path.frames])
    if np.any(np.diff(v) <= 0):
        raise TraceError("v is not monotone along the path")
    out = []
    for k in k_range:
        t = TWO_PI * k
        i = int(np.searchsorted(v, t))
        if i == 0:
            if abs(v[0] - t) < NODE_TOL:
                out.append((k, path.frames[0]))
                continue
            raise TraceError(f"k={k} lies below the traced path")
        if i >= v.size:
            raise TraceError(f"k={k} lies beyond the traced path")
        a, b = path.frames[i - 1], path.frames[i]
        s = (t - a.v) / (b.v - a.v)
        z = a.z + s * (b.z - a.z)
        if path.kind == "omega":
            fr = _solve_W(fld, z, complex(math.log(path.label), t), t)
        elif path.kind == "vertical":
            fr = _vertical_newton(fld, path.label, z.imag, t)
        else:
            fr = _correct_level(fld, z, t)
            if fr is None:
                raise TraceError(f"crossing k={k} did not converge")
        out.append((k, fr))
    return out


def trace_vertical(spec, exp, base: FieldFrame, v_top: float, y_top: float | None = None) -> TracedPath:
    """Vertical segment upward from ``base`` until v >= v_top (or y = y_top)."""
    fld = _fld(spec, exp)
    x = base.x
    frames = [base]
    fr = base
    while fr.v < v_top and (y_top is None or fr.y < y_top):
        if fr.vy <= 0:
            raise TraceError(f"v is not increasing along the vertical at {fr.z!r}")
        dy = min(0.39 / abs(fr.dW), 0.5)
        if y_top is not None:
            dy = min(dy, y_top - fr.y)
        nf = fld.frame_at(complex(x, fr.y + dy), fr.v + fr.vy * dy)
        if abs(nf.v - fr.v) > math.pi / 4:
            nf = fld.continue_along([fr.z, nf.z], fr.v)[-1]
        frames.append(nf)
        fr = nf
    return TracedPath("vertical", x, frames)


def vertical_crossings(spec, exp, base: FieldFrame, k_range: Sequence[int]) -> list[tuple[int, FieldFrame]]:
    """Points 2 k pi on the vertical through ``base`` (which sits on L_0)."""
    fld = _fld(spec, exp)
    ks = list(k_range)
    if not ks:
        return []
    vert = trace_vertical(fld, None, base, TWO_PI * max(ks) + 0.5)
    return find_crossings(fld, None, vert, ks)


def trace_ray(spec, exp, theta: float, v_max: float, s_start: float | None = None) -> TracedPath:
    """Nodes z = s e^{i theta} with v carried continuously from z0."""
    fld = _fld(spec, exp)
    d = complex(math.cos(theta), math.sin(theta))
    if s_start is None:
        r = fld.spec.pole_radius
        s_start = max(abs(fld.spec.z0), 1.2 * r) if r > 0 else abs(fld.spec.z0)
    z_start = s_start * d
    frames = fld.continue_along([fld.spec.z0, z_start], fld.frame_at(fld.spec.z0).v) if z_start != fld.spec.z0 else [fld.frame_at(z_start)]
    fr = frames[-1]
    out = [fr]
    s = s_start
    while fr.v < v_max:
        ds = min(0.39 / max(abs(fr.dW), 1e-12), 0.5)
        s += ds
        nf = fld.frame_at(s * d, fr.v + (fr.dW * d * ds).imag)
        if abs(nf.v - fr.v) > math.pi / 4:
            nf = fld.continue_along([fr.z, nf.z], fr.v)[-1]
        out.append(nf)
        fr = nf
    return TracedPath("ray", theta, out)


def ray_point(spec, exp, theta: float, v_target: float, ray: TracedPath) -> FieldFrame:
    """Solve v(s e^{i theta}) = v_target by bracketing on ``ray`` and Newton in s."""
    fld = _fld(spec, exp)
    d = complex(math.cos(theta), math.sin(theta))
    v = np.array([f.v for f in ray.frames])
    idx = np.flatnonzero((v[:-1] - v_target) * (v[1:] - v_target) <= 0)
    if idx.size == 0:
        raise TraceError(f"v = {v_target:g} not reached on the ray")
    i = int(idx[0])
    a, b = ray.frames[i], ray.frames[i + 1]
    sa, sb = abs(a.z), abs(b.z)
    s = sa + (sb - sa) * (v_target - a.v) / (b.v - a.v) if b.v != a.v else sa
    fr = fld.frame_at(s * d, v_target)
    for _ in range(50):
        res = v_target - fr.v
        if abs(res) < 1e-12 * max(1.0, abs(v_target)):
            return fr
        dv = (fr.dW * d).imag
        s = min(max(s + res / dv, sa), sb) if dv != 0 else s
        fr = fld.frame_at(s * d, v_target)
    if abs(v_target - fr.v) < 1e-8:
        return fr
    raise TraceError("ray Newton did not converge")


def windows(spec, exp, theta: float, epsilon: float, k_max: int) -> WindowSet:
    """Ray segments where v mod 2 pi lies within pi/2 - eps of 0, and their complements."""
    if not 0 < epsilon < math.pi / 4:
        raise ValueError("epsilon must lie in (0, pi/4)")
    fld = _fld(spec, exp)
    half = math.pi / 2 - epsilon
    ray = trace_ray(fld, None, theta, TWO_PI * (k_max + 1))
    v0 = ray.frames[0].v
    wins, antis = [], []
    for k in range(1, k_max + 1):
        lo_t, hi_t = TWO_PI * k - half, TWO_PI * k + half
        if lo_t <= v0:
            continue
        lo = ray_point(fld, None, theta, lo_t, ray)
        hi = ray_point(fld, None, theta, hi_t, ray)
        wins.append(Window(k, lo.x, hi.x))
        a_lo_t, a_hi_t = TWO_PI * k + math.pi / 2 + epsilon, TWO_PI * k + 3 * math.pi / 2 - epsilon
        a_lo = ray_point(fld, None, theta, a_lo_t, ray)
        a_hi = ray_point(fld, None, theta, a_hi_t, ray)
        antis.append(Window(k, a_lo.x, a_hi.x))
    return WindowSet(theta, epsilon, wins, antis, ray)
