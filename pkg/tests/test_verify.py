import csv
import io
import math

import mpmath as mp
import pytest

from expray import verify as V
from expray.reroute import build_ledger


@pytest.fixture(scope="module")
def ledgers():
    return {name: build_ledger(V.family(name), None) for name in ("ez", "ez2", "ez3")}


def test_window_lower_bound_value():
    # n=1, theta=pi/4: 0.9 x exp(e^{0.9 x}) sin(0.1) at x = 2 pi
    x = 2 * math.pi
    expect = math.log(0.9 * x) + math.exp(0.9 * x) * math.sin(0.1)
    assert V.window_lower_bound(1, math.pi / 4, 0.1, x) == pytest.approx(expect, rel=1e-14)
    assert V.window_lower_bound(1, math.pi / 4, 0.1, x) == pytest.approx(30.2527694, abs=1e-6)


def test_window_lower_bound_increasing_in_x():
    vals = [V.window_lower_bound(2, math.pi / 8, 0.1, x) for x in (1.0, 2.0, 3.0, 5.0)]
    assert vals == sorted(vals)


@pytest.mark.parametrize("r", [10.0, 20.0, 50.0])
def test_expexp_relative_against_mpmath(r):
    mp.mp.dps = 30
    ref = r * mp.e ** (-r) * mp.quad(lambda s: mp.e ** (mp.e ** s), [0, mp.log(r) - 1, mp.log(r)])
    assert V.expexp_relative(r) == pytest.approx(float(ref), rel=1e-12)


@pytest.mark.parametrize("r,terms", [(20.0, 3), (50.0, 1)])
def test_expexp_series_within_bound(r, terms):
    rep = V.check_expexp_series(r, terms)
    assert rep.passed
    s = rep.samples[0]
    assert s.measured <= math.factorial(terms + 1) / r ** terms


def test_expexp_leading_trend():
    rep = V.check_expexp_leading()
    assert rep.passed
    assert [s.measured for s in rep.samples][0] > rep.samples[-1].measured > 1.0


def test_identities_report():
    rep = V.check_identities()
    assert rep.passed and len(rep.samples) == 8


def test_window_lower_bound_holds_n2(ledgers):
    rep = V.check_theorem1(None, None, ledgers["ez2"])
    assert rep.passed, rep.summary()
    assert all(s.margin > 0 for s in rep.samples)


def test_h_factor(ledgers):
    rep = V.check_h_factor(None, None, ledgers["ez"])
    assert rep.passed, rep.summary()


def test_antiwindow_report(ledgers):
    rep = V.check_theorem2(None, None, ledgers["ez"])
    assert rep.passed, rep.summary()
    names = {c.name for c in rep.checks}
    assert "I1 sign at lam=pi/2" in names
    sign = next(c for c in rep.checks if c.name == "I1 sign at lam=pi/2")
    assert sign.value == pytest.approx(-1.0, abs=1e-9)


def test_log_rho_range(ledgers):
    rep = V.check_theorem2(None, None, ledgers["ez"])
    rho = [c for c in rep.checks if "rho" in c.name]
    assert rho
    assert all(c.ok for c in rho)


@pytest.mark.parametrize("name,n,tol", [("ez", 1, 0.05), ("ez2", 2, 0.05), ("ez3", 3, 0.1)])
def test_hyperorder_estimates(ledgers, name, n, tol):
    est = V.estimate_hyperorder(None, None, ledgers[name])
    assert abs(est - n) <= tol


def test_upper_antiwindow(ledgers):
    for name in ("ez", "ez2"):
        rep = V.check_upper_antiwindow(None, None, ledgers[name])
        assert rep.passed, rep.summary()


def test_report_csv_shape(ledgers):
    reps = V.verify(["thm1", "expexp"], ledgers=dict(ledgers))
    text = V.reports_csv(reps)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == list(V.CSV_COLUMNS)
    assert all(len(r) == len(V.CSV_COLUMNS) for r in rows)
    assert {r[0] for r in rows[1:]} >= {"expexp_series", "expexp_leading"}
    assert sum(1 for r in rows if r == rows[0]) == 1


def test_verify_deterministic_across_workers(ledgers):
    a = V.reports_csv(V.verify(["thm1", "upper", "expexp"], ledgers=dict(ledgers), workers=1))
    b = V.reports_csv(V.verify(["thm1", "upper", "expexp"], ledgers=dict(ledgers), workers=3))
    assert a == b


def test_unknown_claim():
    with pytest.raises(ValueError, match="unknown claim"):
        V.verify(["thm3"])


def test_trend_helpers():
    assert V.nondecreasing([1.0, 2.0, 2.0, 3.0])
    assert not V.nondecreasing([1.0, 3.0, 2.0])
    assert V.nonincreasing([3.0, 2.0, 2.0])


@pytest.mark.parametrize("r,terms", [(20.0, 3), (50.0, 1)])
def test_expexp_error_against_ei(r, terms):
    # r e^{-r} (Ei(r) - Ei(1)) is the same quantity in closed form; the series is
    # positive-term, so the error exceeds the first omitted term j!/r^j
    mp.mp.dps = 30
    exact = float(r * mp.e ** (-r) * (mp.ei(r) - mp.ei(1)))
    err = abs(exact - V.expexp_series(r, terms)) / exact
    rep = V.check_expexp_series(r, terms)
    assert rep.samples[0].measured == pytest.approx(err, rel=1e-9)
    first_omitted = math.factorial(terms) / r ** terms
    assert first_omitted < err < math.factorial(terms + 1) / r ** terms
    if (r, terms) == (20.0, 3):
        assert err == pytest.approx(9.0524e-4, rel=1e-4)


@pytest.mark.parametrize("name,n", [("ez2", 2), ("ez3", 3)])
def test_h_factor_tends_to_degree(ledgers, name, n):
    # |H| ~ r (sin n theta)^(1/n), so the normalised factor approaches n, not 1
    rep = V.check_h_factor(None, None, ledgers[name])
    fac = [s.measured / n for s in rep.samples]
    assert 0.8 <= fac[-1] <= 1.2
    assert fac[-3:] == sorted(fac[-3:])
