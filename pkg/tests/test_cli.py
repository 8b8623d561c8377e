"""Command line behavior: output trees, determinism, exit codes."""

import json
from pathlib import Path

import pytest

from gazescale.cli import (EXIT_EVALUATION, EXIT_INFEASIBLE, EXIT_OK,
                           EXIT_PARSE, EXIT_USAGE, derive_seed, main)
from gazescale.config import EngineConfig, save_config
from gazescale.metrics import TrialResult, evaluate_trial
from gazescale.trace import Trace, dumps_trace, load_trace


def run_simulate(out: Path, *extra: str) -> int:
    return main(["simulate", "--technique", "PTZSpan", "--scale", "1.5",
                 "--direction", "up", "--out", str(out), "--seed", "7",
                 *extra])


def tree_bytes(root: Path) -> dict[str, bytes]:
    return {str(path.relative_to(root)): path.read_bytes()
            for path in sorted(root.rglob("*")) if path.is_file()}


class TestSeedDerivation:
    def test_deterministic_and_spread(self):
        seeds = [derive_seed(7, index) for index in range(100)]
        assert seeds == [derive_seed(7, index) for index in range(100)]
        assert len(set(seeds)) == 100

    def test_base_seed_changes_every_trial_seed(self):
        a = [derive_seed(1, index) for index in range(20)]
        b = [derive_seed(2, index) for index in range(20)]
        assert not set(a) & set(b)


class TestSimulate:
    def test_writes_expected_tree(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert run_simulate(out) == EXIT_OK
        assert (out / "results.jsonl").is_file()
        assert (out / "report.jsonl").is_file()
        assert (out / "report.txt").is_file()
        traces = list((out / "traces").iterdir())
        assert len(traces) == 1
        row = json.loads((out / "results.jsonl").read_text())
        assert row["technique"] == "PTZSpan"
        assert row["infeasible"] is False
        assert (out / row["trace"]).is_file()
        assert row["result"]["completed"] is True
        report = (out / "report.txt").read_text()
        assert "PTZSpan" in report
        assert "PTZSpan" in capsys.readouterr().out

    def test_saved_trace_reevaluates_to_reported_result(self, tmp_path):
        out = tmp_path / "run"
        run_simulate(out)
        row = json.loads((out / "results.jsonl").read_text())
        trace = load_trace(out / row["trace"])
        result = evaluate_trial(trace)
        assert result.to_record() == row["result"]

    def test_rerun_is_byte_identical(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert run_simulate(first, "--noise-sd", "0.003") == EXIT_OK
        assert run_simulate(second, "--noise-sd", "0.003") == EXIT_OK
        assert tree_bytes(first) == tree_bytes(second)

    def test_jobs_do_not_change_output(self, tmp_path):
        serial, parallel = tmp_path / "s", tmp_path / "p"
        args = ("--direction", "left")
        assert run_simulate(serial, *args) == EXIT_OK
        assert run_simulate(parallel, *args, "--jobs", "3") == EXIT_OK
        assert tree_bytes(serial) == tree_bytes(parallel)

    def test_seed_flag_steers_noise(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        main(["simulate", "--technique", "PTZSpan", "--scale", "1.5",
              "--direction", "up", "--out", str(first), "--seed", "1",
              "--noise-sd", "0.002"])
        main(["simulate", "--technique", "PTZSpan", "--scale", "1.5",
              "--direction", "up", "--out", str(second), "--seed", "2",
              "--noise-sd", "0.002"])
        a = tree_bytes(first)
        b = tree_bytes(second)
        assert set(a) == set(b)
        assert a != b

    def test_reps_produce_distinct_seeds(self, tmp_path):
        out = tmp_path / "run"
        assert run_simulate(out, "--reps", "3") == EXIT_OK
        rows = [json.loads(line) for line
                in (out / "results.jsonl").read_text().splitlines()]
        assert [row["rep"] for row in rows] == [0, 1, 2]
        assert len({row["seed"] for row in rows}) == 3

    def test_all_infeasible_exits_5_and_is_flagged(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["simulate", "--technique", "PTZSpan", "--scale", "2.5",
                     "--direction", "up", "--out", str(out)])
        assert code == EXIT_INFEASIBLE
        row = json.loads((out / "results.jsonl").read_text())
        assert row["infeasible"] is True
        assert "outside clamp" in row["reason"]
        report = (out / "report.txt").read_text()
        assert "infeasible targets:" in report
        assert "PTZSpan x2.5" in report
        assert (out / "report.jsonl").read_text() == ""

    def test_mixed_feasibility_exits_0_and_flags_rows(self, tmp_path):
        out = tmp_path / "run"
        code = main(["simulate", "--technique", "PTZSpan",
                     "--scale", "1.5", "--scale", "2.5",
                     "--direction", "up", "--out", str(out)])
        assert code == EXIT_OK
        rows = [json.loads(line) for line
                in (out / "results.jsonl").read_text().splitlines()]
        assert [row["infeasible"] for row in rows] == [False, True]
        assert "infeasible targets:" in (out / "report.txt").read_text()

    def test_config_file_changes_behavior(self, tmp_path):
        config = EngineConfig().patched({"clamps": {"Span": [0.01, 0.25]}})
        path = tmp_path / "wide_span.json"
        save_config(config, path)
        out = tmp_path / "run"
        code = main(["simulate", "--technique", "PTZSpan", "--scale", "2.5",
                     "--direction", "up", "--out", str(out),
                     "--config", str(path)])
        # The widened clamp makes x2.5 reachable for the span technique.
        assert code == EXIT_OK
        row = json.loads((out / "results.jsonl").read_text())
        assert row["infeasible"] is False
        assert row["result"]["completed"] is True

    def test_malformed_config_exits_3(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"nope": 1}\n')
        code = main(["simulate", "--technique", "PTZSpan", "--scale", "1.5",
                     "--direction", "up", "--out", str(tmp_path / "run"),
                     "--config", str(path)])
        assert code == EXIT_PARSE

    def test_missing_config_exits_2(self, tmp_path):
        code = main(["simulate", "--technique", "PTZSpan", "--scale", "1.5",
                     "--direction", "up", "--out", str(tmp_path / "run"),
                     "--config", str(tmp_path / "missing.json")])
        assert code == EXIT_USAGE


class TestReplay:
    @pytest.fixture()
    def trace_path(self, tmp_path) -> Path:
        out = tmp_path / "run"
        run_simulate(out)
        row = json.loads((out / "results.jsonl").read_text())
        return out / row["trace"]

    def test_timeline_and_result(self, trace_path, capsys):
        assert main(["replay", str(trace_path)]) == EXIT_OK
        output = capsys.readouterr().out
        assert "ModeInTranslation" in output
        assert "ModeInScaling" in output
        assert "ModeOut from Scaling" in output
        assert "outline Yellow" in output
        assert "snapped to target" in output
        assert "scale 1.0000" in output
        assert "completed: true" in output

    def test_jsonl_stream_matches_evaluation(self, trace_path, capsys):
        assert main(["replay", str(trace_path), "--jsonl"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        trace = load_trace(trace_path)
        assert len(lines) == len(trace) + 1
        states = [json.loads(line) for line in lines[:-1]]
        assert [record["t"] for record in states] == \
            [frame.t for frame in trace]
        assert all(set(record) == {"t", "state", "events"}
                   for record in states)
        final = json.loads(lines[-1])
        assert final["key"]["technique"] == "PTZSpan"
        expected = evaluate_trial(trace)
        assert TrialResult(**final["result"]) == expected

    def test_missing_file_exits_2(self, tmp_path, capsys):
        code = main(["replay", str(tmp_path / "absent.jsonl")])
        assert code == EXIT_USAGE
        assert "no such trace file" in capsys.readouterr().err

    def test_malformed_trace_exits_3(self, tmp_path, capsys):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"what": 1}\n')
        assert main(["replay", str(path)]) == EXIT_PARSE
        assert "line 1" in capsys.readouterr().err

    def test_headerless_technique_exits_4(self, tmp_path, trace_path):
        trace = load_trace(trace_path)
        bare = Trace(frame_rate_hz=trace.frame_rate_hz, seed=trace.seed,
                     technique=None, trial_spec=trace.trial_spec,
                     actor=trace.actor, plan=trace.plan,
                     frames=trace.frames)
        path = tmp_path / "bare.jsonl"
        path.write_text(dumps_trace(bare))
        assert main(["replay", str(path)]) == EXIT_EVALUATION

    def test_technique_override_rescores(self, tmp_path, trace_path,
                                         capsys):
        trace = load_trace(trace_path)
        bare = Trace(frame_rate_hz=trace.frame_rate_hz, seed=trace.seed,
                     technique=None, trial_spec=trace.trial_spec,
                     actor=trace.actor, plan=trace.plan,
                     frames=trace.frames)
        path = tmp_path / "bare.jsonl"
        path.write_text(dumps_trace(bare))
        code = main(["replay", str(path), "--technique", "PTZSpan",
                     "--jsonl"])
        assert code == EXIT_OK
        final = json.loads(capsys.readouterr().out.splitlines()[-1])
        assert final["result"]["completed"] is True


class TestUsage:
    def test_unknown_flag_value_exits_2(self, capsys):
        assert main(["simulate", "--technique", "Wrong",
                     "--out", "ignored"]) == EXIT_USAGE
        capsys.readouterr()

    def test_zero_reps_exits_2(self, tmp_path):
        assert run_simulate(tmp_path / "run", "--reps", "0") == EXIT_USAGE

    def test_negative_noise_exits_2(self, tmp_path):
        assert run_simulate(tmp_path / "run",
                            "--noise-sd", "-0.1") == EXIT_USAGE

    def test_nonpositive_scale_exits_2(self, tmp_path):
        assert main(["simulate", "--technique", "PTZSpan", "--scale", "-1",
                     "--direction", "up",
                     "--out", str(tmp_path / "run")]) == EXIT_USAGE

    def test_missing_subcommand_exits_2(self, capsys):
        assert main([]) == EXIT_USAGE
        capsys.readouterr()

    def test_help_exits_0(self, capsys):
        assert main(["--help"]) == EXIT_OK
        assert "simulate" in capsys.readouterr().out
