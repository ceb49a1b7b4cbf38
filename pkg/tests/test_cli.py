import csv
import io
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from expray import cli
from expray.paths import read_path_csv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(*argv):
    buf = io.StringIO()
    code = cli.main(list(argv), out=buf)
    return code, buf.getvalue()


def test_expand_prints_terminated():
    code, text = run("expand", "--config", str(CONFIGS / "ez2.toml"))
    assert code == 0
    assert "terminated" in text


def test_theta_outside_interval(capsys):
    code, _ = run("expand", "--theta", "2")
    assert code == 2
    err = capsys.readouterr().err
    assert "outside the valid interval" in err and "(0, pi/(2n))" in err


@pytest.mark.parametrize("body,msg", [
    ("[problem]\nP = [0, 1]\nS_num = [1]\nbogus = 1\n", "unknown field problem.bogus"),
    ("[problem]\nS_num = [1]\n", "needs P and S_num"),
    ("[problem]\nP = [1, 2, 1]\nS_num = [1]\n", "must be monic"),
    ("[problem]\nP = [0, 1]\nS_num = [1]\n[geometry]\nk_max = 2.5\n", "expected an integer"),
    ("[problem]\nP = [0, 1]\nS_num = [1]\n[geometry]\nepsilon = 1.0\n", "epsilon must lie"),
    ("[problem\n", "<config>"),
    ("[extra]\n", "unknown table"),
])
def test_config_errors(body, msg):
    with pytest.raises(cli.ConfigError, match=msg.replace("(", r"\(").replace(")", r"\)")):
        cli.parse_config(body)


def test_config_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text("[problem]\nP = [0, 1]\n")
    code, _ = run("expand", "--config", str(p))
    assert code == 2
    assert "config error" in capsys.readouterr().err
    code, _ = run("expand", "--config", str(tmp_path / "missing.toml"))
    assert code == 2


def test_non_canonical_hint():
    with pytest.raises(cli.ConfigError, match=r"alpha = 1, beta = -1"):
        cli.parse_config("[problem]\nP = [1, 2, 1]\nS_num = [1]\n")


def test_default_theta_is_quarter_interval():
    cfg = cli.parse_config("[problem]\nP = [0, 0, 1]\nS_num = [0, 2]\n")
    assert cfg.theta == pytest.approx(math.pi / 8)


def test_verify_identities_output():
    code, text = run("verify", "identities")
    assert code == 0
    assert text.count("identity cos: 1.000000000 (target 1)") == 4
    assert text.count("identity sin: 0.000000000 (target 0)") == 4
    assert "-0.000000000" not in text


def test_eval_matches_library():
    from expray.reroute import build_ledger, eval_H, solution_from_H
    from expray.verify import family

    code, text = run("eval", "--x", "3", "--z", "4+4j")
    assert code == 0
    lines = text.strip().splitlines()
    assert len(lines) == 2
    L = build_ledger(family("ez"), None, x_query=4.0)
    f = solution_from_H(L, eval_H(L, z=4 + 4j), 0j)
    lm = float(lines[1].split("lmag = ")[1].split()[0])
    assert lm == pytest.approx(f.lmag, rel=1e-15)


def test_eval_needs_points():
    code, _ = run("eval")
    assert code == 2


def test_eval_bad_complex():
    code, _ = run("eval", "--z", "three")
    assert code == 2


def test_trace_round_trip(tmp_path):
    code, text = run("trace", "--kmax", "3", "--out", str(tmp_path))
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["level_0.csv", "level_1.csv", "level_2.csv", "level_3.csv", "omega.csv", "ray.csv"]
    rows = read_path_csv(open(tmp_path / "level_2.csv"))
    assert list(rows[0]) == ["x", "y", "u", "v", "uy", "vy"]
    # on L_2 the phase is 4 pi
    assert all(abs(r["v"] - 4 * math.pi) < 1e-8 for r in rows)
    om = read_path_csv(open(tmp_path / "omega.csv"))
    assert all(abs(r["u"]) < 1e-8 for r in om)


def test_ledger_csv(tmp_path):
    code, text = run("ledger", "--kmax", "4")
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0][0] == "k"
    assert [r[0] for r in rows[1:]] == ["0", "1", "2", "3", "4"]


def test_sweep_ordering_and_threads():
    args = ["sweep", "--config", str(CONFIGS / "ez.toml"), "--kmax", "4", "--per-window", "3"]
    outs = []
    for t in ("1", "4"):
        r = subprocess.run([sys.executable, "-m", "expray.cli", *args], capture_output=True, text=True,
                           env={**os.environ, "EXPRAY_THREADS": t}, check=True)
        outs.append(r.stdout)
    assert outs[0] == outs[1]
    rows = list(csv.reader(io.StringIO(outs[0])))
    assert rows[0] == cli.SWEEP_COLUMNS
    xs = [float(r[0]) for r in rows[1:]]
    assert xs == sorted(xs)


def test_bad_threads_env(monkeypatch):
    monkeypatch.setenv("EXPRAY_THREADS", "many")
    code, _ = run("sweep", "--kmax", "1")
    assert code == 2


def test_verify_writes_csv(tmp_path):
    code, text = run("verify", "expexp", "--out", str(tmp_path))
    assert code == 0
    assert "verification passed" in text
    assert (tmp_path / "verify.csv").read_text().startswith("claim,")


def test_eval_beyond_ledger_is_not_covered():
    # a far point past L_kmax must not be handed to the near-field chords
    code, text = run("eval", "--x", "700", "--x", "3", "--kmax", "3")
    assert code == 1
    first, second = text.strip().splitlines()
    assert "not covered" in first and "raise k_max" in first
    assert "regime a" in second


def test_eval_window_centre_scale():
    # at the first window centre f ~ e^U H with |U| = e^x and |H| close to x
    x = 6.2832
    code, text = run("eval", "--x", str(x), "--config", str(CONFIGS / "ez.toml"))
    assert code == 0
    lm = float(text.split("lmag = ")[1].split()[0])
    assert lm - math.exp(x) == pytest.approx(math.log(x), abs=0.01)
