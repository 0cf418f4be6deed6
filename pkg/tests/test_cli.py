import csv
import subprocess
import sys

import pytest

from ssbandit.cli import main


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    assert "table6-scenario1" in out and "markov-doeblin" in out


def test_run_preset_writes_csv(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = main(["run", "table6-scenario1", "--N", "300", "--J", "4", "--policies", "SSMC", "Thompson",
                 "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "SSMC" in text and "N=300" in text
    rows = list(csv.DictReader(out.open()))
    assert [r["policy"] for r in rows] == ["SSMC", "Thompson"]
    assert all(r["N"] == "300" and r["J"] == "4" and r["seed"] == "0" for r in rows)


def test_run_is_reproducible(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    main(["run", "example7-uniform", "--N", "200", "--J", "6", "--seed", "5", "--out", str(paths[0])])
    main(["run", "example7-uniform", "--N", "200", "--J", "6", "--seed", "5", "--n-jobs", "3", "--out", str(paths[1])])
    assert paths[0].read_text() == paths[1].read_text()


def test_run_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('name = "c"\nhorizons = 100\nreplications = 3\n'
                   '[[arms]]\nfamily = "bernoulli"\np = 0.6\n[[arms]]\nfamily = "bernoulli"\np = 0.3\n'
                   '[policies.SSMC]\n')
    assert main(["run", str(cfg)]) == 0
    assert "c  (J=3, seed=0)" in capsys.readouterr().out


def test_run_errors(capsys):
    assert main(["run", "nowhere"]) == 2
    assert "error:" in capsys.readouterr().err
    assert main(["run", "table1", "--policies", "UCB9", "--J", "2", "--N", "50"]) == 2
    assert main(["run", "table1", "--J", "0"]) == 2


def test_verify_ctj(tmp_path, capsys):
    out = tmp_path / "ctj.csv"
    assert main(["verify", "ctj", "--t-max", "10", "--csv", str(out)]) == 0
    assert "ctj: PASS" in capsys.readouterr().out
    assert len(out.read_text().splitlines()) == 1 + 55


def test_verify_b2_and_chernoff(capsys):
    assert main(["verify", "b2", "--t", "1", "3", "--delta", "1"]) == 0
    out = capsys.readouterr().out
    assert out.count("b2: PASS") == 2 and "rhs=0.413864" in out
    assert main(["verify", "chernoff", "--t", "11", "--replications", "5000"]) == 0
    assert "chernoff: PASS" in capsys.readouterr().out


def test_verify_min1_fail_exit_code(capsys):
    # a tiny n sits well below the asymptotic band
    assert main(["verify", "min1", "--n", "100", "--replications", "50"]) == 1
    assert "min1: FAIL" in capsys.readouterr().out


def test_bounds(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert main(["bounds", "table6-scenario1", "--csv", str(out)]) == 0
    text = capsys.readouterr().out
    assert "22.30" in text
    assert main(["bounds", "table1"]) == 2
    assert main(["bounds", "table7-trunc-exp"]) == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "ssbandit.cli", "list-scenarios"], capture_output=True, text=True)
    assert r.returncode == 0 and "table1" in r.stdout
    r = subprocess.run([sys.executable, "-m", "ssbandit.cli"], capture_output=True, text=True)
    assert r.returncode == 2
