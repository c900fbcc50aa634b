import json

import pytest

from adaptivecs.cli import main


FAST = {
    "dataset": "synth:n=16,k=2,count=6",
    "agent": "acoselm",
    "actor_hidden": 15,
    "critic_hidden": 15,
    "qnet_hidden": 15,
    "steps": 2,
    "acquisitions_per_step": 3,
    "eval_interval": 1,
    "solver": "lp",
    "seeds": [0],
    "workers": 1,
}


def write_cfg(tmp_path, **extra):
    payload = dict(FAST)
    payload.update(extra)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(payload))
    return str(p)


def test_run_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    rc = main(["run", "--config", cfg, "--out-dir", str(tmp_path / "out")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "seed 0 acoselm: final" in out
    assert "mean_last10" in out
    assert (tmp_path / "out" / "metrics.csv").exists()
    assert (tmp_path / "out" / "summary.json").exists()


def test_run_flag_overrides(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    rc = main(["run", "--config", cfg, "--agent", "osqnet", "--steps", "1",
               "--seed", "7", "--out-dir", str(tmp_path / "o2")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "seed 7 osqnet" in out
    summary = json.loads((tmp_path / "o2" / "summary.json").read_text())
    assert summary["config"]["steps"] == 1
    assert summary["seeds"] == [7]


def test_missing_config_exits_one(tmp_path, capsys):
    rc = main(["run", "--config", str(tmp_path / "none.json")])
    assert rc == 1
    err = capsys.readouterr().err
    assert "error" in err and "config not found" in err


def test_invalid_config_exits_one(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"agent": "dqn"}))
    rc = main(["run", "--config", str(p)])
    assert rc == 1
    assert "invalid config" in capsys.readouterr().err


def test_unknown_key_reported(tmp_path, capsys):
    p = tmp_path / "extra.json"
    p.write_text(json.dumps({"stepz": 3}))
    rc = main(["run", "--config", str(p)])
    assert rc == 1
    assert "stepz" in capsys.readouterr().err


def test_unknown_flag_exits_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--frobnicate"])
    assert exc.value.code == 2


def test_missing_subcommand_exits_two():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_sweep_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    rc = main(["sweep", "--config", cfg, "--ratios", "0.25,0.5,1.0",
               "--out-dir", str(tmp_path / "sw")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "ratio" in out and "mean_score" in out
    assert "0.25" in out and "1.00" in out
    assert (tmp_path / "sw" / "sweep.csv").exists()


def test_sweep_rejects_bad_ratio(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    rc = main(["sweep", "--config", cfg, "--ratios", "0.5,1.5",
               "--out-dir", str(tmp_path / "sw2")])
    assert rc == 1
    assert "invalid config" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore::sklearn.exceptions.ConvergenceWarning")
def test_bench_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path, ista_budget=10)
    rc = main(["bench", "--config", cfg, "--reps", "2",
               "--out-dir", str(tmp_path / "b")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "inference ratio" in out
    assert "doubling |A| ratio" in out
    assert (tmp_path / "b" / "bench.csv").exists()


def test_recover_demo(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    rc = main(["recover-demo", "--config", cfg, "--index", "2",
               "--ratio", "0.5", "--out-dir", str(tmp_path / "d")])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("c=0.500 m=8 e=")
    assert "score=" in out


def test_recover_demo_index_out_of_range(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    rc = main(["recover-demo", "--config", cfg, "--index", "50",
               "--out-dir", str(tmp_path / "d2")])
    assert rc == 1
    assert "out of range" in capsys.readouterr().err
