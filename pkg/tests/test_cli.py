"""Tests for the command-line front end."""

import json

import pytest

from gridtrace.cli import main

FIVE_VERTEX_EDGES = [[1, 4], [1, 5], [2, 3], [2, 4], [2, 5], [3, 4], [4, 5]]


def write_scenario(tmp_path, **overrides):
    raw = {
        "graph": {"n": 5, "edges": [list(e) for e in FIVE_VERTEX_EDGES]},
        "eta": 0.1,
        "grid": {"T": 100.0, "dt": 0.1, "T0": 10.0},
        "observed": [1, 4, 5],
        "disturbances": [{"vertex": 2, "kind": "sine_halfperiod", "onset": 10.0}],
        "detection": {"epsilon": 1e-4},
        "outputs": {"dir": str(tmp_path / "out")},
    }
    raw.update(overrides)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(raw))
    return path


class TestAnalyzeGraph:
    def test_happy_path(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        assert main(["analyze-graph", "--config", str(path)]) == 0
        out = capsys.readouterr().out
        assert "dominantly absorbent: yes" in out
        assert "strategic: yes" in out
        assert (tmp_path / "out" / "analyze_graph.json").exists()

    def test_quiet_flag_silences_stdout(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        assert main(["analyze-graph", "--config", str(path), "--quiet"]) == 0
        assert capsys.readouterr().out == ""

    def test_missing_config_exits_two(self, tmp_path, capsys):
        code = main(["analyze-graph", "--config", str(tmp_path / "nope.json")])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_invalid_config_exits_two(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"graph": {"n": 2, "edges": [[1, 2]]}}))
        assert main(["analyze-graph", "--config", str(path)]) == 2
        assert "error:" in capsys.readouterr().err


class TestFindAbsorbent:
    def test_happy_path(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        assert main(["find-absorbent", "--config", str(path)]) == 0
        assert "suggested observation set" in capsys.readouterr().out


class TestSimulate:
    def test_writes_tables(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        assert main(["simulate", "--config", str(path)]) == 0
        out_dir = tmp_path / "out"
        for name in ("trajectory.csv", "observations.csv", "disturbance.csv"):
            assert (out_dir / name).exists()
        content = (out_dir / "observations.csv").read_text()
        assert content.startswith("time,v1,v4,v5\n")
        assert "\r" not in content

    def test_out_flag_overrides_directory(self, tmp_path):
        path = write_scenario(tmp_path)
        target = tmp_path / "elsewhere"
        assert main(["simulate", "--config", str(path), "--out", str(target)]) == 0
        assert (target / "trajectory.csv").exists()

    def test_seeded_runs_are_identical(self, tmp_path):
        path = write_scenario(tmp_path, noise={"std": 1e-3, "seed": 3})
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", str(path), "--out", str(a)]) == 0
        assert main(["simulate", "--config", str(path), "--out", str(b)]) == 0
        assert (a / "observations.csv").read_bytes() == (b / "observations.csv").read_bytes()


class TestDetect:
    def test_detects_and_reports(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        assert main(["detect", "--config", str(path)]) == 0
        assert "disturbance detected at t = 10.2" in capsys.readouterr().out
        assert (tmp_path / "out" / "detection.json").exists()

    def test_epsilon_flag_overrides(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        assert main(["detect", "--config", str(path), "--epsilon", "1e6"]) == 0
        assert "no disturbance detected" in capsys.readouterr().out

    def test_bad_epsilon_is_a_usage_error(self, tmp_path):
        path = write_scenario(tmp_path)
        with pytest.raises(SystemExit):
            main(["detect", "--config", str(path), "--epsilon", "lots"])

    def test_observations_file_is_reused(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        assert main(["simulate", "--config", str(path), "--quiet"]) == 0
        obs = tmp_path / "out" / "observations.csv"
        assert main(["detect", "--config", str(path), "--observations", str(obs)]) == 0
        assert "disturbance detected" in capsys.readouterr().out


class TestIdentify:
    def test_dominant_scenario(self, tmp_path, capsys):
        path = write_scenario(tmp_path)
        assert main(["identify", "--config", str(path)]) == 0
        out = capsys.readouterr().out
        assert "identification mode: dominant" in out
        assert "localized source vertices: 2" in out
        assert (tmp_path / "out" / "disturbances.csv").exists()

    def test_forced_da_without_rank_exits_three(self, tmp_path, capsys):
        path = write_scenario(tmp_path, observed=[1, 4])
        code = main(["identify", "--config", str(path), "--mode", "da"])
        assert code == 3
        assert "find-absorbent" in capsys.readouterr().err

    def test_non_absorbent_set_exits_three(self, tmp_path, capsys):
        path = write_scenario(
            tmp_path,
            observed=[3],
            disturbances=[{"vertex": 5, "onset": 10.0}],
            detection={"epsilon": 1e-3},
        )
        assert main(["identify", "--config", str(path)]) == 3
        assert "absorbent" in capsys.readouterr().err

    def test_quiet_data_exits_three(self, tmp_path, capsys):
        path = write_scenario(tmp_path, disturbances=[], detection={"epsilon": "auto"})
        assert main(["identify", "--config", str(path)]) == 3
        assert "nothing to identify" in capsys.readouterr().err


class TestReproduce:
    def test_summary_table(self, tmp_path, capsys):
        target = tmp_path / "rep"
        assert main(["reproduce-paper", "--out", str(target)]) == 0
        out = capsys.readouterr().out
        assert out.count("mode") == 4
        assert (target / "summary.csv").exists()
        assert (target / "dominant" / "identification.json").exists()
        summary = json.loads((target / "summary.json").read_text())
        names = [row["scenario"] for row in summary["scenarios"]]
        assert names == ["dominant", "absorbent-2", "absorbent-3", "absorbent-5"]


class TestParser:
    def test_subcommand_is_required(self):
        with pytest.raises(SystemExit):
            main([])

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit):
            main(["transmogrify"])
