import json
import subprocess
import sys

import pytest

from issengine.bundled import (
    fixture_corpus_path,
    fixture_panel_path,
    golden_report_path,
)
from issengine.cli import main
from issengine.corpus import HEADER
from issengine.risk_model import CATEGORIES


def zero_incident_file(tmp_path, inc_id="cli-1"):
    obj = {
        "id": inc_id,
        "timestamp": "2021-06-01T00:00:00Z",
        "category_inputs": {
            cat: {"values": [0, 0, 0], "weights": [1 / 3, 1 / 3, 1 / 3]} for cat in CATEGORIES
        },
    }
    path = tmp_path / "incident.json"
    path.write_text(json.dumps(obj))
    return path


class TestThresholdsCommand:
    def test_high_level_at_phase_zero(self, capsys):
        assert main(["thresholds", "--t", "0", "--level", "H"]) == 0
        out = capsys.readouterr().out
        assert "s=0.8" in out and "a=0.01" in out

    def test_all_levels_json(self, capsys):
        assert main(["thresholds", "--t", "1", "--json"]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["levels"]["H"] == {"s": 0.75, "a": 0.05}
        assert body["levels"]["L"] == {"s": 0.3, "a": 0.15}


class TestScoreCommand:
    def test_zero_incident_polynomial_half(self, tmp_path, capsys):
        path = zero_incident_file(tmp_path)
        assert main(["score", str(path), "--json"]) == 0
        body = json.loads(capsys.readouterr().out)
        assert body["scores"]["polynomial"] == 0.5
        assert body["tier"]["name"] == "none"

    def test_score_whole_corpus(self, capsys):
        assert main(["score", str(fixture_corpus_path()), "--json"]) == 0
        body = json.loads(capsys.readouterr().out)
        assert isinstance(body, list) and len(body) == 3

    def test_human_readable(self, tmp_path, capsys):
        path = zero_incident_file(tmp_path)
        assert main(["score", str(path)]) == 0
        out = capsys.readouterr().out
        assert "polynomial=0.50000" in out

    def test_invalid_incident_exits_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"id": "x", "timestamp": "2021-06-01T00:00:00Z", "category_inputs": {}}))
        assert main(["score", str(bad)]) == 1
        assert "error" in capsys.readouterr().err

    def test_missing_file_exits_2(self, capsys):
        assert main(["score", "/nonexistent/path.json"]) == 2


class TestFixturesCommand:
    def test_deterministic_output(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert main(["fixtures", "--seed", "1", "--n", "3", "--out", str(a)]) == 0
        assert main(["fixtures", "--seed", "1", "--n", "3", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().splitlines()[0] == HEADER

    def test_panel_and_schedule_out(self, tmp_path):
        out = tmp_path / "c.jsonl"
        panel = tmp_path / "panel.json"
        sched = tmp_path / "sched.json"
        code = main(
            [
                "fixtures", "--seed", "2", "--n", "1", "--out", str(out),
                "--panel-out", str(panel), "--schedule-out", str(sched),
            ]
        )
        assert code == 0
        assert len(json.loads(panel.read_text())["profiles"]) == 7
        assert "H" in json.loads(sched.read_text())

    def test_n_zero_exits_1(self, tmp_path, capsys):
        assert main(["fixtures", "--seed", "1", "--n", "0", "--out", str(tmp_path / "x")]) == 1


class TestWeightsCommand:
    def test_bundled_panel_json(self, capsys):
        assert main(["weights", "--panel", str(fixture_panel_path()), "--json"]) == 0
        body = json.loads(capsys.readouterr().out)
        assert len(body["omega"]) == 7
        assert sum(body["omega"]) == pytest.approx(1.0, abs=1e-12)
        assert len(body["consensus_weights"]) == 7

    def test_human_readable(self, capsys):
        assert main(["weights", "--panel", str(fixture_panel_path())]) == 0
        out = capsys.readouterr().out
        assert "affected-communities" in out and "consensus" in out


class TestSensitivityCommand:
    def test_json_output(self, tmp_path, capsys):
        path = zero_incident_file(tmp_path)
        code = main(
            ["sensitivity", "--incident", str(path), "--panel", str(fixture_panel_path()), "--json"]
        )
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert len(body["per_stakeholder"]) == 7
        assert body["stable"] is True  # zero vector scores 0.5 under every proposal


class TestTrainCommand:
    def test_train_on_fixture_corpus(self, tmp_path, capsys):
        params = tmp_path / "params.json"
        trace = tmp_path / "trace.csv"
        fig = tmp_path / "loss.png"
        code = main(
            [
                "train", "--corpus", str(fixture_corpus_path()),
                "--out-params", str(params), "--trace-csv", str(trace),
                "--fig", str(fig), "--max-iters", "40", "--lr", "0.5", "--json",
            ]
        )
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert body["iterations"] >= 1
        assert json.loads(params.read_text())["d"] == 7
        assert trace.read_text().startswith("iteration,loss")
        assert fig.stat().st_size > 0


class TestRetrospectiveCommand:
    def test_out_dir_artifacts_match_golden(self, tmp_path, capsys):
        out = tmp_path / "retro"
        code = main(
            [
                "retrospective", "--corpus", str(fixture_corpus_path()),
                "--panel", str(fixture_panel_path()), "--weighting-name", "fixture",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert (out / "report.json").read_bytes() == golden_report_path().read_bytes()
        assert (out / "report.csv").read_text().startswith("incident_id,")
        assert (out / "report.txt").read_text().startswith("retrospective run")
        assert (out / "figures" / "scores.png").stat().st_size > 0
        assert (out / "figures" / "thresholds.png").stat().st_size > 0

    def test_stdout_json(self, capsys):
        code = main(
            [
                "retrospective", "--corpus", str(fixture_corpus_path()),
                "--panel", str(fixture_panel_path()), "--weighting-name", "fixture",
                "--json",
            ]
        )
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert len(body["incidents"]) == 3


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "issengine.cli", "thresholds", "--t", "0", "--level", "H"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "s=0.8" in proc.stdout

    def test_version_flag(self):
        proc = subprocess.run(
            [sys.executable, "-m", "issengine.cli", "--version"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "iss-engine" in proc.stdout
