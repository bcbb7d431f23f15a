"""CLI subcommands and exit codes, run in-process."""

from __future__ import annotations

import json
import re
from pathlib import Path

import pytest

from mockcfg import base_config
from kgfact.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_OUTAGE, main
from kgfact.runlog import read_run_log


def write(tmp_path: Path, config: dict, name: str = "config.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(config), encoding="utf-8")
    return path


@pytest.fixture()
def small_config(tmp_path):
    return write(tmp_path, base_config(tmp_path / "out", questions_per_run=3))


class TestRun:
    def test_run_prints_log_paths(self, small_config, tmp_path, capsys):
        assert main(["run", "--config", str(small_config)]) == EXIT_OK
        out = capsys.readouterr().out.strip().splitlines()
        assert out == [str(tmp_path / "out" / "run-000.jsonl")]
        assert len(read_run_log(out[0])) == 3

    def test_validate_config(self, small_config, capsys):
        assert main(["validate-config", str(small_config)]) == EXIT_OK
        assert capsys.readouterr().out.strip() == f"{small_config}: ok"

    def test_bad_resume_token_is_a_data_error(self, small_config, tmp_path, capsys):
        code = main(["run", "--config", str(small_config),
                     "--resume", str(tmp_path / "oops.jsonl")])
        assert code == EXIT_DATA
        assert capsys.readouterr().err.startswith("data error:")


class TestConfigErrors:
    def test_unknown_key_exits_2(self, tmp_path, capsys):
        config = base_config(tmp_path / "out")
        config["surprise"] = 1
        code = main(["validate-config", str(write(tmp_path, config))])
        assert code == EXIT_CONFIG
        err = capsys.readouterr().err
        assert err.startswith("configuration error:")
        assert "surprise" in err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        code = main(["run", "--config", str(tmp_path / "absent.json")])
        assert code == EXIT_CONFIG
        assert capsys.readouterr().err.startswith("configuration error:")

    def test_argparse_rejects_bad_choice(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["report", "--logs", "x", "--out-dir", str(tmp_path),
                  "--dok-variant", "strict"])


class TestOutage:
    def outage_config(self, tmp_path) -> Path:
        config = base_config(tmp_path / "out", questions_per_run=3)
        config["roles"] = {
            **config["roles"],
            "evaluated-model": {
                "base_url": "https://llm.test",
                "model_id": "subject-1",
            },
        }
        config["transport"] = {
            "mode": "replay",
            "fixture_dir": str(tmp_path / "fixtures"),
        }
        return write(tmp_path, config, name="outage.json")

    def test_outage_exits_3_with_resume_hint_then_resumes(self, tmp_path, capsys):
        log_path = tmp_path / "out" / "run-000.jsonl"
        assert main(["run", "--config", str(self.outage_config(tmp_path))]) == EXIT_OUTAGE
        err = capsys.readouterr().err
        assert "backend outage:" in err
        match = re.search(r"resume with: kgfact run --config \.\.\. --resume (\S+)", err)
        assert match is not None
        assert match.group(1) == str(log_path)

        # Point the same output directory at the mock subject and resume.
        mock_cfg = write(tmp_path, base_config(tmp_path / "out", questions_per_run=3),
                         name="mock.json")
        assert main(["run", "--config", str(mock_cfg), "--resume", match.group(1)]) == EXIT_OK

        clean_dir = tmp_path / "clean"
        clean_dir.mkdir()
        clean_cfg = write(clean_dir, base_config(clean_dir / "out", questions_per_run=3),
                          name="clean.json")
        assert main(["run", "--config", str(clean_cfg)]) == EXIT_OK
        assert log_path.read_bytes() == (clean_dir / "out" / "run-000.jsonl").read_bytes()


class TestCalibrateAndReport:
    @pytest.fixture()
    def finished_run(self, small_config, tmp_path, capsys):
        assert main(["run", "--config", str(small_config)]) == EXIT_OK
        capsys.readouterr()
        return tmp_path / "out" / "run-000.jsonl"

    def test_calibrate_round_trip(self, finished_run, tmp_path, capsys):
        out = tmp_path / "weights.json"
        code = main(["calibrate", "--logs", str(finished_run), "--out", str(out),
                     "--timestamp", "2026-08-15T00:00:00Z"])
        assert code == EXIT_OK
        captured = capsys.readouterr()
        assert captured.out.strip() == str(out)
        assert "flag:" in captured.err
        payload = json.loads(out.read_text())
        assert payload["calibrated_at"] == "2026-08-15T00:00:00Z"

    def test_report_with_glob_and_weights(self, finished_run, tmp_path, capsys):
        weights = tmp_path / "weights.json"
        main(["calibrate", "--logs", str(finished_run), "--out", str(weights)])
        capsys.readouterr()
        out_dir = tmp_path / "reports"
        pattern = str(finished_run.parent / "run-*.jsonl")
        code = main(["report", "--logs", pattern, "--out-dir", str(out_dir),
                     "--weights", str(weights), "--dok-variant", "all"])
        assert code == EXIT_OK
        assert capsys.readouterr().out.strip() == str(out_dir / "summary.json")
        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["runs"] == 1
        report = json.loads((out_dir / "run-000-report.json").read_text())
        assert report["halu_dok_variant"] == "all"
        assert (out_dir / "summary.csv").exists()

    def test_unmatched_glob_is_a_data_error(self, tmp_path, capsys):
        code = main(["report", "--logs", str(tmp_path / "nowhere-*.jsonl"),
                     "--out-dir", str(tmp_path / "r")])
        assert code == EXIT_DATA
        assert capsys.readouterr().err.startswith("data error: no run logs match")

    def test_empty_log_is_a_data_error(self, tmp_path, capsys):
        empty = tmp_path / "run-000.jsonl"
        empty.write_text("", encoding="utf-8")
        code = main(["calibrate", "--logs", str(empty), "--out", str(tmp_path / "w.json")])
        assert code == EXIT_DATA
        assert capsys.readouterr().err.startswith("data error:")
