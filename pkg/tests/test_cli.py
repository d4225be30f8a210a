import subprocess
import sys

import yaml

from warsds.cli import main

SMALL = {"max_iterations": 2, "runs_per_subject": 1, "subjects": [0], "n_components": 5,
         "synth": {"n_domains": 4, "samples_per_domain": 40, "raw_dim": 8,
                   "target_fraction": 0.25}}


def write_config(tmp_path, **extra):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump({**SMALL, **extra}))
    return str(path)


def test_gen_data(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["gen-data", "--config", cfg, "--seed", "3", "--out", str(tmp_path / "d")]) == 0
    assert sorted(p.name for p in (tmp_path / "d").iterdir()) == [
        f"domain_{i}.csv" for i in range(4)]


def test_simulate_and_report(tmp_path, capsys):
    cfg = write_config(tmp_path, algorithms=["OwARSDS", "TargetOnly"])
    out = tmp_path / "r"
    assert main(["simulate", "--config", cfg, "--mode", "online", "--out", str(out)]) == 0
    for name in ("curves.csv", "summary.csv", "curves_mean.csv", "config.yaml"):
        assert (out / name).exists()
    assert yaml.safe_load((out / "config.yaml").read_text())["mode"] == "online"
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    text = capsys.readouterr().out
    assert "OwARSDS" in text and "TargetOnly" in text


def test_mode_switch_uses_that_modes_defaults(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "r"
    assert main(["simulate", "--config", cfg, "--mode", "online", "--out", str(out)]) == 0
    assert "OwARSDS" in (out / "summary.csv").read_text()


def test_simulate_from_data_dir(tmp_path):
    cfg = write_config(tmp_path)
    main(["gen-data", "--config", cfg, "--out", str(tmp_path / "d")])
    cfg2 = write_config(tmp_path, data_dir=str(tmp_path / "d"), algorithms=["wARSDS"])
    assert main(["simulate", "--config", cfg2, "--out", str(tmp_path / "r")]) == 0


def test_sweep(tmp_path):
    cfg = write_config(tmp_path, algorithms=["wARSDS"])
    out = tmp_path / "s"
    assert main(["sweep", "--config", cfg, "--sigmas", "0.01,0.1", "--lambdas", "10",
                 "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "parameter,value,algorithm,m_l,mean_bca"
    assert len(lines) == 1 + 3 * 2


def test_config_errors_exit_nonzero(tmp_path, capsys):
    cfg = write_config(tmp_path, algorithms=["wAR"])
    assert main(["simulate", "--config", cfg, "--mode", "online", "--out", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_console_script_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "warsds.cli", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0
    for cmd in ("gen-data", "simulate", "sweep", "report"):
        assert cmd in proc.stdout
