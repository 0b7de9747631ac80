import json
import subprocess
import sys

import pytest

from itersplit import cli
from itersplit.cli import CommandResult, ExperimentConfig, format_csv, format_gnuplot, main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_quadcheck_csv(capsys):
    code, out, err = run(["quadcheck", "--seed", "3"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "rule,test,value,status"
    assert len(lines) == 9
    assert all(line.endswith(",ok") for line in lines[1:])
    assert "[PASS] boole exact to degree 5" in err


def test_orders_subset(capsys):
    code, out, _ = run(["orders", "--scheme", "lie", "--dt", "0.1,0.05,0.025"], capsys)
    assert code == 0
    assert "lie,standard,observed_order," in out
    assert "lie,commuting,max_error," in out and out.count("exact") == 1


def test_example1_small_run_and_gnuplot(capsys):
    code, out, _ = run(["example1", "--dt", "0.5,0.25", "--iters", "3", "--mode", "one-sided-b",
                        "--scheme", "iterative,lie", "--gnuplot"], capsys)
    assert code == 0
    blocks = out.strip().split("\n\n\n")
    assert [b.splitlines()[0] for b in blocks] == ["# iterative one_sided_B", "# lie -"]
    assert len(blocks[0].splitlines()) == 1 + 2 * 3
    assert len(blocks[1].splitlines()[1].split()) == 3


def test_csv_number_format(capsys):
    _, out, _ = run(["example1", "--dt", "0.5", "--scheme", "lie"], capsys)
    row = out.splitlines()[1].split(",")
    assert row[:4] == ["lie", "-", "5.00000e-01", "0"]
    assert len(row[4].split("e")[0].replace(".", "").lstrip("-")) == 6


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dts": [0.5, 0.25], "schemes": ["lie", "strang"], "iters": 2}))
    out = tmp_path / "o.csv"
    code, _, _ = run(["example1", "--config", str(cfg), "--scheme", "swss", "--out", str(out)], capsys)
    assert code == 0
    rows = out.read_text().splitlines()[1:]
    assert {r.split(",")[0] for r in rows} == {"swss"} and len(rows) == 2


def test_transport_reports_hash(capsys):
    code, _, err = run(["transport", "--dt", "0.1", "--iters", "4", "--n-points", "20",
                        "--mode", "one-sided-a,one-sided-b"], capsys)
    assert code == 0
    assert "config hash" in err


@pytest.mark.parametrize("argv", [
    ["nope"],
    ["example1", "--mode", "sideways"],
    ["example1", "--dt", "a,b"],
    ["example1", "--scheme", "yoshida"],
    ["example1", "--iters", "0"],
    ["example1", "--dt", "-0.5"],
    ["example1", "--config", "/nonexistent/cfg.json"],
])
def test_bad_arguments_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dtz": [0.1]}))
    with pytest.raises(SystemExit):
        main(["quadcheck", "--config", str(cfg)])


def test_unwritable_output(tmp_path, capsys):
    code, _, err = run(["quadcheck", "--out", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == 2 and "cannot write" in err


def test_failed_check_gives_nonzero_exit(monkeypatch, capsys):
    failing = lambda cfg: CommandResult(("a",), [(1.0,)], [("always fails", False, "x")])
    monkeypatch.setitem(cli.COMMANDS, "quadcheck", failing)
    code, out, err = run(["quadcheck"], capsys)
    assert code == 1
    assert "[FAIL] always fails" in err and "1 of 1 checks failed" in err


def test_rows_sorted_deterministically():
    res = CommandResult(("s", "dt", "e"), [("b", 0.1, 1.0), ("a", 0.05, 2.0), ("a", 0.1, 3.0)])
    assert format_csv(res).splitlines()[1:] == ["a,1.00000e-01,3.00000e+00", "a,5.00000e-02,2.00000e+00",
                                                "b,1.00000e-01,1.00000e+00"]
    assert format_gnuplot(res).count("# ") == 2


def test_experiment_config_defaults():
    cfg = ExperimentConfig(experiment="transport")
    assert cfg.dts == [0.1, 0.05, 0.025] and cfg.iters == 6
    assert ExperimentConfig(experiment="orders").schemes == ["lie", "swss", "strang"]
    assert cfg.digest() == ExperimentConfig(experiment="transport", out="x").digest()


def test_module_entry_point(tmp_path):
    out = tmp_path / "q.csv"
    proc = subprocess.run([sys.executable, "-m", "itersplit", "quadcheck", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert out.read_text().startswith("rule,test,value,status")


@pytest.mark.parametrize("argv", [["transport", "--dt", "0.3"], ["transport", "--n-points", "2"]])
def test_invalid_experiment_parameters_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and err.startswith("error:")
