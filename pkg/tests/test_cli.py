import json

import pytest

from pfl import cli
from pfl.verify import Check


def test_run_oracle_deterministic(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["run", "--config", "predictor1.json", "--mode", "oracle", "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "predictor1.csv").read_bytes() == (tmp_path / "b" / "predictor1.csv").read_bytes()


def test_run_invalid_n_samples(tmp_path, capsys):
    rc = cli.main(["run", "--config", "predictor1.json", "--mode", "mc", "--n-samples", "0", "--out", str(tmp_path)])
    assert rc == 2
    assert "n_samples" in capsys.readouterr().err


def test_run_missing_config(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "nope.json")]) == 2


def test_run_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["run", "--mode", "oracle"])
    assert exc.value.code == 2


def test_run_and_plot(tmp_path):
    cfg = tmp_path / "small.json"
    cfg.write_text(json.dumps({
        "name": "small",
        "predictor": {"kind": "x2_threshold", "threshold": 0.5},
        "intervention": {"select_a": 1, "select_r": 1, "grid": {"num": 5}},
        "eval": {"mode": "both", "n_samples": 20000},
    }))
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path), "--seed", "4",
                     "--jobs", "2", "--plot", "fpr,fnr"]) == 0
    assert (tmp_path / "small.svg").exists()
    out = tmp_path / "again.svg"
    assert cli.main(["plot", "--in", str(tmp_path / "small.csv"), "--metrics", "fpr,fnr,accuracy",
                     "--out", str(out), "--source", "mc"]) == 0
    assert out.read_text().count('class="panel"') == 3
    assert cli.main(["plot", "--in", str(tmp_path / "small.csv"), "--metrics", "auc", "--out", str(out)]) == 2


def test_env_seed(tmp_path, monkeypatch):
    args = ["run", "--config", "predictor2_n10k.json"]
    monkeypatch.setenv("PFL_SEED", "1")
    cli.main(args + ["--out", str(tmp_path / "a")])
    monkeypatch.setenv("PFL_SEED", "2")
    cli.main(args + ["--out", str(tmp_path / "b")])
    cli.main(args + ["--out", str(tmp_path / "c"), "--seed", "1"])
    a, b, c = (tmp_path / d / "predictor2_n10k.csv" for d in "abc")
    assert a.read_bytes() != b.read_bytes()
    # an explicit --seed beats the environment
    assert a.read_bytes() == c.read_bytes()


def test_verify_exit_codes(monkeypatch, capsys):
    import pfl.verify

    monkeypatch.setattr(pfl.verify, "run_checks", lambda **kw: [Check("ok", True), Check("bad", False, "x")])
    assert cli.main(["verify"]) == 1
    out = capsys.readouterr().out
    assert "PASS  ok" in out and "FAIL  bad" in out
    monkeypatch.setattr(pfl.verify, "run_checks", lambda **kw: [Check("ok", True)])
    assert cli.main(["verify"]) == 0


def test_verify_runs_clean(capsys):
    assert cli.main(["verify", "--n-samples", "200000"]) == 0
    assert "FAIL" not in capsys.readouterr().out
