import json

import pytest

from orientwalk.cli import EXIT_CONFIG, EXIT_CRITERION, EXIT_IO, EXIT_OK, main
from orientwalk.experiments import ConfigError, ExperimentConfig, run


def test_presets_annotations(capsys):
    assert main(["presets"]) == EXIT_OK
    out = capsys.readouterr().out
    lines = {line.split()[1]: line for line in out.splitlines()}
    assert "recurrent" in lines["rotation:alpha=0.5"]
    assert "transient" in lines["rotation:alpha=0"]
    assert "condition (C) fails; behavior open" in lines["f2"]
    for name in ("bernoulli", "markov:rho=0.5", "mp:alpha=0.25", "identity", "proj", "f3", "fmp"):
        assert name in lines


def test_embedding_check_report(tmp_path, capsys):
    out = tmp_path / "emb"
    code = main(["run", "--experiment", "embedding-check", "--n", "10000", "--replicas", "100",
                 "--seed", "3", "--out", str(out)])
    assert code == EXIT_OK
    assert "identity holds: 100/100" in capsys.readouterr().out
    report = json.loads((out / "report.json").read_text())
    assert report["metrics"]["identity holds"] == "100/100"
    csv = (out / "embedding.csv").read_text().splitlines()
    assert csv[0] == "replica,n,X_n,Y_n,T_n,Z_n" and len(csv) == 101
    assert (out / "run.log").exists()


def test_report_subcommand_re_renders(tmp_path, capsys):
    out = tmp_path / "adm"
    assert main(["run", "--experiment", "admissibility", "--system", "rotation:alpha=0.1",
                 "--f", "f1", "--out", str(out)]) == EXIT_OK
    capsys.readouterr()
    assert main(["report", str(out / "report.json")]) == EXIT_OK
    assert capsys.readouterr().out == (out / "report.txt").read_text()


def test_unknown_preset_is_config_error(capsys):
    code = main(["run", "--experiment", "orientations", "--system", "nosuch:alpha=1"])
    assert code == EXIT_CONFIG
    assert "system" in capsys.readouterr().err


def test_bad_function_names_f_key(capsys):
    assert main(["run", "--experiment", "orientations", "--f", "f9"]) == EXIT_CONFIG
    assert "f:" in capsys.readouterr().err


def test_missing_experiment_is_config_error(capsys):
    assert main(["run", "--n", "10"]) == EXIT_CONFIG


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("experiment = slln\nbogus = 1\n")
    assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG
    assert "bogus" in capsys.readouterr().err


def test_criterion_failure_exit_code(tmp_path, capsys):
    cfg = tmp_path / "slln.cfg"
    cfg.write_text("# tiny run with an impossible speed bound\n"
                   "experiment = slln\nn-grid = 100,1000,10000\nreplicas = 100\nspeed_max = 0.0\n")
    assert main(["run", "--config", str(cfg)]) == EXIT_CRITERION
    assert "[FAIL] RMS speed at n=10000 < 0.0" in capsys.readouterr().out


def test_command_line_overrides_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("experiment = embedding-check\nn = 50\nreplicas = 7\n")
    assert main(["run", "--config", str(cfg), "--replicas", "3"]) == EXIT_OK
    assert "identity holds: 3/3" in capsys.readouterr().out


def test_io_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = main(["run", "--experiment", "embedding-check", "--n", "10", "--replicas", "2",
                 "--out", str(blocker / "sub")])
    assert code == EXIT_IO
    assert main(["report", str(tmp_path / "missing.json")]) == EXIT_IO


def test_report_of_non_json(tmp_path):
    p = tmp_path / "r.json"
    p.write_text("not json")
    assert main(["report", str(p)]) == EXIT_CONFIG


def test_n_grid_range_syntax(tmp_path):
    out = tmp_path / "sc"
    main(["run", "--experiment", "scaling", "--n-grid", "2^8..2^12", "--replicas", "20",
          "--out", str(out)])
    rows = (out / "scaling.csv").read_text().splitlines()
    assert [int(r.split(",")[0]) for r in rows[1:]] == [256, 512, 1024, 2048, 4096]


@pytest.mark.parametrize("experiment,extra", [
    ("walk-returns", ["--n-grid", "1000,4000", "--replicas", "12"]),
    ("embedding-check", ["--n", "2000", "--replicas", "12"]),
    ("delta", ["--replicas", "60", "--t", "1"]),
])
def test_reports_identical_across_workers(tmp_path, experiment, extra):
    out1, out2, out3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    base = ["run", "--experiment", experiment, "--seed", "17"] + extra
    main(base + ["--out", str(out1), "--workers", "1"])
    main(base + ["--out", str(out2), "--workers", "2"])
    main(base + ["--out", str(out3), "--workers", "1"])
    for name in sorted(p.name for p in out1.iterdir() if p.name != "run.log"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        assert (out1 / name).read_bytes() == (out3 / name).read_bytes()


def test_replica_subset_independence():
    _, data = run(ExperimentConfig("walk-returns", n_grid=[500, 2000], replicas=9, seed=4))
    _, data_small = run(ExperimentConfig("walk-returns", n_grid=[500, 2000], replicas=5, seed=4))
    # the first five replicas' rows are unchanged by adding four more
    assert data["walk_returns.csv"][: 1 + 5 * 2] == data_small["walk_returns.csv"]


def test_config_validation():
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig("slln", replicas=0).validate()
    assert exc.value.key == "replicas"
    with pytest.raises(ConfigError):
        ExperimentConfig("slln", n_grid=[10, 5]).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig("unknown").validate()
