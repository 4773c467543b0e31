import json

import pytest

from src.data.results_store import ResultsStore
from src.main import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main, parse_args


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    monkeypatch.delenv("QSWITCH_WORKERS", raising=False)
    monkeypatch.delenv("QSWITCH_LOG_LEVEL", raising=False)


def read_rows(path):
    return ResultsStore().read(str(path))


class TestArguments:
    def test_repeatable_flags(self):
        args = parse_args(["simulate", "--scheme", "parallel", "--scheme", "switch_joint", "--n", "3", "--n", "5"])
        assert args.command == "simulate"
        assert args.schemes == ["parallel", "switch_joint"]
        assert args.ns == [3, 5]
        assert args.progress is None

    def test_range_flag_accepts_negative_minimum(self):
        assert parse_args(["bounds", "--x-range", "-0.5", "0.5"]).x_range == [-0.5, 0.5]

    def test_crossover_alias(self):
        assert parse_args(["crossover"]).command == "figure3"
        assert parse_args(["figure3"]).command == "figure3"

    def test_unknown_command_is_usage_error(self):
        assert main(["teleport"]) == EXIT_USAGE

    def test_bad_range_is_usage_error(self):
        assert main(["bounds", "--x-range", "0.5"]) == EXIT_USAGE


class TestSimulate:
    def test_missing_seed(self, tmp_path, capsys):
        assert main(["simulate", "--out", str(tmp_path / "r.csv")]) == EXIT_USAGE
        assert "seed" in capsys.readouterr().err

    def test_writes_table(self, tmp_path):
        out = tmp_path / "sim.csv"
        code = main([
            "simulate", "--scheme", "switch_control", "--scheme", "sequential",
            "--n", "3", "--nu", "200", "--trials", "20", "--seed", "9", "--out", str(out),
        ])
        assert code == EXIT_OK
        header, rows = read_rows(out)
        assert header["seed"] == "9"
        assert list(rows["scheme"]) == ["switch_control", "sequential"]
        assert set(rows["instance"]) == {0}

    def test_reruns_are_byte_identical(self, tmp_path):
        argv = ["simulate", "--scheme", "switch_joint", "--n", "4", "--nu", "500", "--trials", "10", "--seed", "42"]
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(argv + ["--out", str(first)]) == EXIT_OK
        assert main(argv + ["--out", str(second), "--workers", "2"]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_random_instances(self, tmp_path):
        out = tmp_path / "ranged.csv"
        code = main([
            "simulate", "--n", "3", "--x-range", "0.1", "0.5", "--p-range", "0.1", "0.5", "--instances", "2",
            "--nu", "100", "--trials", "5", "--seed", "1", "--out", str(out),
        ])
        assert code == EXIT_OK
        _, rows = read_rows(out)
        assert list(rows["instance"]) == [0, 1]
        assert rows["x_bar"][0] != rows["x_bar"][1]

    def test_config_file(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"seed": 3, "nu": 100, "trials": 5, "ns": [2]}))
        out = tmp_path / "r.json"
        assert main(["simulate", "--config", str(config), "--format", "json", "--out", str(out)]) == EXIT_OK
        document = json.loads(out.read_text())
        assert document["provenance"]["seed"] == 3
        assert document["rows"][0]["nu"] == 100


class TestAnalyticCommands:
    def test_figure3_table(self, tmp_path):
        out = tmp_path / "fig.csv"
        assert main(["figure3", "--out", str(out)]) == EXIT_OK
        header, rows = read_rows(out)
        assert header["command"] == "figure3"
        assert "switch_joint_rmse=solid-red" in header["curves"]
        assert "switch_control_rmse=dashed-red" in header["curves"]
        assert "fixed_order_floor=solid-blue" in header["curves"]
        row = rows[(rows["energy"] == 0.5) & (rows["n"] == 5) & (rows["z_bar"].round(10) == 0.4)].iloc[0]
        assert row["crossover_z_bar"] == pytest.approx(0.4)
        assert not row["fixed_exceeds_switch"]
        above = rows[(rows["energy"] == 0.5) & (rows["n"] == 5) & (rows["z_bar"] > 0.41)]
        assert above["fixed_exceeds_switch"].all()
        assert (rows["switch_joint_rmse"] <= rows["switch_control_rmse"]).all()

    def test_bounds(self, tmp_path):
        out = tmp_path / "bounds.csv"
        assert main(["bounds", "--n", "5", "--nu", "10", "--xbar", "0.4", "--pbar", "0.4", "--out", str(out)]) == EXIT_OK
        _, rows = read_rows(out)
        assert rows["switch_rmse_control"][0] == pytest.approx(0.012649, abs=1e-6)
        assert rows["fixed_order_bound"][0] == pytest.approx(0.012649, abs=1e-6)
        assert rows["ion_trap_rmse"][0] == pytest.approx(0.0063246, abs=1e-7)

    def test_crossover_alias_writes_same_table(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["figure3", "--out", str(first)]) == EXIT_OK
        assert main(["crossover", "--out", str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_bounds_with_negative_range(self, tmp_path):
        out = tmp_path / "ranged.csv"
        code = main(["bounds", "--n", "5", "--x-range", "-0.6", "0.4", "--p-range", "0.1", "0.5", "--out", str(out)])
        assert code == EXIT_OK
        _, rows = read_rows(out)
        assert rows["x_bar"][0] == pytest.approx(-0.1)
        assert rows["p_bar"][0] == pytest.approx(0.3)
        assert rows["z_max"][0] == pytest.approx(0.6)

    def test_fisher(self, tmp_path):
        out = tmp_path / "fisher.csv"
        assert main(["fisher", "--out", str(out)]) == EXIT_OK
        _, rows = read_rows(out)
        assert rows["f11"][0] == pytest.approx(20.0)
        assert rows["max_relative_deviation"][0] <= 1e-6

    def test_stdout_when_no_out(self, capsys):
        assert main(["bounds", "--n", "2"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("# command: bounds")


class TestOracleCheck:
    def test_passes(self, tmp_path):
        out = tmp_path / "oracle.csv"
        assert main(["oracle-check", "--cases", "20", "--seed", "1", "--out", str(out)]) == EXIT_OK
        _, rows = read_rows(out)
        assert bool(rows["passed"][0])

    def test_rejects_large_n(self):
        assert main(["oracle-check", "--n", "4"]) == EXIT_USAGE

    def test_small_dimension(self, capsys):
        assert main(["oracle-check", "--dim", "8", "--magnitude", "10", "--cases", "5"]) == EXIT_NUMERICAL
        assert "suggested dim" in capsys.readouterr().err


@pytest.mark.slow
def test_simulated_rows_respect_bound(tmp_path):
    out = tmp_path / "acceptance.csv"
    code = main([
        "simulate", "--scheme", "switch_control", "--scheme", "switch_joint", "--n", "5",
        "--nu", "10000", "--trials", "2000", "--seed", "2024", "--out", str(out),
    ])
    assert code == EXIT_OK
    _, rows = read_rows(out)
    assert rows["within_bound"].all()
    assert (rows["bias"].abs() <= 2 * rows["bias_std_error"]).all()
