"""Time the compiled kernels against the pure-Python fallback on identical inputs.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each row reports
the best wall time per call for both backends, the speedup, and the largest
relative disagreement between their outputs.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from expray import verify as V
from expray.field import field_for
from expray import _fallback
from expray.kernels import backends


def _cases():
    fld = field_for(V.family("ez2"))
    fr = fld.frame_at(3.0 + 1.2j)
    loc = fld.local(fr.z, fr.v)
    Uc = complex(math.exp(fr.u) * math.cos(fr.v), math.exp(fr.u) * math.sin(fr.v))
    dp, num, den = loc.dp, loc.num, loc.den

    # results carry a log scale M; compare both backends on the python one
    M0 = _fallback.expneg_segment(dp, num, den, Uc, 0j, 0.1j)[0]

    def expneg(mod):
        M, re, im, _, _ = mod.expneg_segment(dp, num, den, Uc, 0j, 0.1j)
        return complex(re, im) * math.exp(M - M0)

    spec = V.family("ez")
    zs = np.linspace(0, 4 + 4j, 9)

    def taylor(mod):
        out = np.zeros(len(zs), dtype=complex)
        one = np.ones(1, dtype=complex)
        mod.taylor_polyline(zs, 0j, np.array([0, 1], dtype=complex), one, one, 24, 1e-16, out)
        return out

    big = fld.frame_at(6.0 + 2.0j)
    bl = fld.local(big.z, big.v)
    bU = complex(math.exp(big.u) * math.cos(big.v), math.exp(big.u) * math.sin(big.v))
    qs = np.linspace(0.0, 50.0, 400)

    def chi(mod):
        d = np.zeros(qs.size)
        ln = np.zeros(qs.size)
        mod.chi_invert(bl.dp, bl.num, bl.den, bU, 1j, 1.0, qs, 0.0, d, ln)
        return np.concatenate([d, ln])

    rng = np.random.default_rng(7)
    m = 4000
    ln0 = np.cumsum(-rng.uniform(0.0, 0.01, m))
    ln1 = ln0 - rng.uniform(0.0, 0.01, m)
    lnm = 0.5 * (ln0 + ln1)
    q0 = np.arange(m) * math.pi
    h = np.full(m, math.pi)

    def filon(mod):
        return mod.filon_cells(ln0, lnm, ln1, q0, h, 0.3)

    return [("expneg_segment", expneg), ("taylor_polyline", taylor), ("chi_invert", chi), ("filon_cells", filon)]


def _best(fn, mod, repeat: int) -> tuple[float, object]:
    best = math.inf
    res = None
    for _ in range(repeat):
        t = time.perf_counter()
        res = fn(mod)
        best = min(best, time.perf_counter() - t)
    return best, res


def _reldiff(a, b) -> float:
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    mods = backends()
    if "cython" not in mods:
        print("compiled extension not built; run: python3 setup.py build_ext --inplace")
        return 1
    print(f"{'kernel':<16} {'python [s]':>12} {'cython [s]':>12} {'speedup':>9} {'max rel diff':>13}")
    for name, fn in _cases():
        tp, rp = _best(fn, mods["python"], args.repeat)
        tc, rc = _best(fn, mods["cython"], args.repeat)
        print(f"{name:<16} {tp:12.4g} {tc:12.4g} {tp / tc:9.1f} {_reldiff(rp, rc):13.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
