import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from cqwiretap import cli
from cqwiretap import verify as vf
from cqwiretap.oracles import classical_np_beta
from cqwiretap.states import product_channel, save_channel

from conftest import diag


@pytest.fixture
def non_leaking(tmp_path):
    sigma = diag(0.7, 0.3)
    ch = product_channel([diag(1, 0), diag(0, 1)], [sigma, sigma])
    path = tmp_path / "toy.wtc.json"
    save_channel(ch, path)
    return str(path)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_bpsk_csv_schema(tmp_path):
    out = tmp_path / "c.csv"
    assert cli.main(["bpsk", "--eta", "0.9", "--nbar", "0.5", "--n-min", "1e3", "--n-max", "1e7", "--points", "40", "--out", str(out)]) == 0
    rows = _rows(out)
    assert rows[0] == ["n", "normal_approx", "asymptote", "capacity"]
    ns = [int(r[0]) for r in rows[1:]]
    rates = [float(r[1]) for r in rows[1:]]
    assert ns[0] == 1000 and ns[-1] == 10**7 and ns == sorted(set(ns))
    assert all(b > a for a, b in zip(rates, rates[1:]))
    assert all(r < float(rows[1][2]) for r in rates)
    # 17 significant digits round-trip the library values exactly
    from cqwiretap.bounds import BpskParams, bpsk_normal_approx
    assert rates[0] == bpsk_normal_approx(BpskParams(0.9, 0.5), 1000, 0.01, 0.01).rate_per_use_bits


def test_bpsk_symmetric_and_single_point(tmp_path):
    out = tmp_path / "h.csv"
    assert cli.main(["bpsk", "--eta", "0.5", "--nbar", "2", "--out", str(out)]) == 0
    assert all(float(r[2]) == 0.0 for r in _rows(out)[1:])
    assert cli.main(["bpsk", "--eta", "0.9", "--nbar", "0.5", "--points", "1", "--n-min", "100", "--n-max", "100", "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 2 and rows[1][0] == "100"


def test_bpsk_errors(tmp_path, capsys):
    assert cli.main(["bpsk", "--eta", "1.5", "--nbar", "0.5"]) == 2
    assert cli.main(["bpsk", "--eta", "0.9", "--nbar", "0.5", "--eps1", "0"]) == 2
    assert cli.main(["bpsk", "--eta", "0.9", "--nbar", "0.5", "--n-min", "10", "--n-max", "5"]) == 2
    assert cli.main(["bpsk", "--eta", "0.9", "--nbar", "0.5", "--out", str(tmp_path / "no" / "x.csv")]) == 3
    with pytest.raises(SystemExit) as exc:
        cli.main(["bpsk", "--eta", "0.9"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_bound_private_json(non_leaking, tmp_path):
    out = tmp_path / "r.json"
    args = ["bound", non_leaking, "--mode", "private", "--eps1", "0.1", "--eta1", "0.05", "--eps2", "0.01", "--eta2", "0.05", "--out", str(out)]
    assert cli.main(args) == 0
    doc = json.loads(out.read_text())
    terms = {t["name"]: t["value_bits"] for t in doc["terms"]}
    assert terms["eve_max_information"] == 0.0
    assert set(terms) == {"hypothesis_testing_mi", "eve_max_information", "decoding_penalty", "privacy_amplification_penalty"}
    assert doc["valid"] and doc["vacuous"]
    first = out.read_bytes()
    assert cli.main(args) == 0
    assert out.read_bytes() == first


def test_bound_public_and_second_order(non_leaking, capsys):
    assert cli.main(["bound", non_leaking, "--mode", "public", "--eps1", "0.1", "--eta1", "0.05", "--maximal-error"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["terms"][-1] == {"name": "maximal_error_expurgation", "value_bits": -1.0}
    assert cli.main(["bound", non_leaking, "--mode", "second-order", "--n", "1000", "--p-x", "0.5,0.5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["label"] == "normal approximation"
    assert doc["rate_per_use_bits"] == 1.0


def test_bound_usage_errors(non_leaking, tmp_path, capsys):
    assert cli.main(["bound", non_leaking, "--mode", "private", "--eta2", "0.05"]) == 2
    assert "--eta1" in capsys.readouterr().err
    assert cli.main(["bound", non_leaking, "--mode", "second-order"]) == 2
    assert cli.main(["bound", non_leaking, "--mode", "public", "--eta1", "0.05", "--p-x", "a,b"]) == 2
    assert cli.main(["bound", non_leaking, "--mode", "public", "--eta1", "0.05", "--p-x", "0.2,0.3"]) == 2
    # slack precondition failure still prints the report, flagged invalid
    assert cli.main(["bound", non_leaking, "--mode", "private", "--eps1", "0.1", "--eta1", "0.05", "--eta2", "0.5"]) == 2
    captured = capsys.readouterr()
    assert json.loads(captured.out)["valid"] is False and "eta2" in captured.err
    bad = tmp_path / "bad.wtc.json"
    bad.write_text('{"symbols": ["a"], "d_e": 1, "outputs": []}')
    assert cli.main(["bound", str(bad), "--eta1", "0.05", "--eta2", "0.05"]) == 2
    assert "d_b" in capsys.readouterr().err
    assert cli.main(["bound", str(tmp_path / "missing.wtc.json")]) == 3


def test_verify_hn_and_prop1(capsys, monkeypatch):
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    assert cli.main(["verify", "hn", "--trials", "1000", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert "seed=7" in out and "1000/1000" in out
    assert cli.main(["verify", "prop1", "--trials", "100"]) == 0
    assert "100/100" in capsys.readouterr().out


def test_verify_env_seed_override(capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "123")
    assert cli.main(["verify", "metrics", "--trials", "3", "--seed", "7"]) == 0
    assert "seed=123" in capsys.readouterr().out
    monkeypatch.setenv(cli.SEED_ENV, "x")
    assert cli.main(["verify", "metrics", "--trials", "3"]) == 2


def test_verify_failure_exit_code(monkeypatch, capsys):
    def failing(seed, trials):
        res = vf.SuiteResult("hn", seed, trials)
        chk = vf.Check("always fails", tolerance=0.0)
        chk.record(1.0)
        res.checks = [chk]
        return res

    monkeypatch.setitem(vf.SUITES, "hn", (failing, 1))
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    assert cli.main(["verify", "hn"]) == 1
    assert "FAIL always fails: 0/1" in capsys.readouterr().out


def test_verify_unknown_suite(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "bogus"])
    assert exc.value.code == 2
    with pytest.raises(KeyError):
        vf.run_suite("bogus")


@pytest.mark.parametrize("suite", sorted(vf.SUITES))
def test_every_suite_passes_small(suite):
    assert vf.run_suite(suite, seed=1, trials=3).ok


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "cqwiretap", "bpsk", "--eta", "0.7", "--nbar", "1", "--points", "2"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "n,normal_approx,asymptote,capacity"


def test_oracle_handles_zero_mass_outcomes():
    assert classical_np_beta([0.5, 0.5, 0.0], [0.2, 0.3, 0.5], 0.0) == pytest.approx(0.5, abs=1e-15)
    assert classical_np_beta(np.array([1.0, 0.0]), np.array([0.0, 1.0]), 0.2) == 0.0
