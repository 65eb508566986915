import csv
import json
import logging
from pathlib import Path

import pytest

from lfsearch.cli import main
from lfsearch.env import initial_state, read_instances
from lfsearch.harness import (
    BenchmarkConfig,
    ConfigError,
    TaskSpec,
    cmd_analyze,
    cmd_generate,
    cmd_run,
    derive_seed,
    sweep_config,
)
from lfsearch.sudoku import sudoku_solve_count


def make_config(tmp_path, **kw):
    obj = {
        "tasks": [{"name": "countdown3", "kind": "countdown", "length": 3, "token_budget": 200_000}],
        "methods": ["lfs", "tot_bfs", "bestfs", "mcts"],
        "games_per_task": 4,
        "runs_per_game": 2,
        "output_dir": str(tmp_path / "out"),
        "seed": 7,
        **kw,
    }
    return BenchmarkConfig.from_dict(obj)


def summary_lines(run_dir):
    return (run_dir / "summary.jsonl").read_text().splitlines()


def test_generate_is_stable(tmp_path):
    cfg = make_config(tmp_path, games_per_task=20)
    path = cmd_generate(cfg)["countdown3"]
    first = path.read_text()
    cmd_generate(cfg)
    assert path.read_text() == first and len(first.splitlines()) == 20


def test_generate_sudoku_six_unique(tmp_path):
    cfg = make_config(tmp_path, tasks=["sudoku6x6"], games_per_task=3)
    for inst in read_instances(cmd_generate(cfg)["sudoku6x6"]):
        board = initial_state(inst).board
        assert (board.box_width, board.box_height) == (2, 3)
        assert sudoku_solve_count(board) == 1


def test_generate_zero_games_warns(tmp_path, caplog):
    cfg = make_config(tmp_path, games_per_task=0)
    with caplog.at_level(logging.WARNING):
        path = cmd_generate(cfg)["countdown3"]
    assert path.read_text() == "" and "empty" in caplog.text


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        make_config(tmp_path, runs_per_game=0)
    with pytest.raises(ConfigError):
        make_config(tmp_path, methods=["dfs"])
    with pytest.raises(ConfigError):
        make_config(tmp_path, bogus=1)
    with pytest.raises(ConfigError):
        TaskSpec.from_name("chess8")
    with pytest.raises(ConfigError):
        cmd_run(make_config(tmp_path, tasks=["countdown3"]))  # no token budget


def test_config_hash_tracks_run_affecting_fields(tmp_path):
    base = make_config(tmp_path)
    assert base.config_hash() == make_config(tmp_path, runs_per_game=9, parallelism=1).config_hash()
    assert base.config_hash() != make_config(tmp_path, seed=8).config_hash()
    assert base.config_hash() != make_config(tmp_path, methods=[{"label": "mcts", "method": "mcts", "c_puct": 1.0}]).config_hash()
    assert base.config_hash() != make_config(tmp_path, backend={"max_parse_retries": 0}).config_hash()


def test_derive_seed_is_stable():
    assert derive_seed(7, "g", 1) == derive_seed(7, "g", 1) != derive_seed(7, "g", 2)


def test_run_counts_and_resume(tmp_path):
    cfg = make_config(tmp_path)
    report = cmd_run(cfg, progress=None)
    assert report.completed == 4 * 4 * 2 and not report.failures
    lines = summary_lines(report.run_dir)
    assert len(lines) == 32

    # simulate an interruption: lose three summary records, keep their traces
    (report.run_dir / "summary.jsonl").write_text("\n".join(lines[:-3]) + "\n")
    again = cmd_run(cfg, progress=None)
    assert (again.completed, again.skipped) == (3, 29)
    assert sorted(summary_lines(report.run_dir)) == sorted(lines)
    for trace in report.run_dir.glob("*/*.jsonl"):
        runs = [json.loads(line)["run"] for line in trace.read_text().splitlines()]
        starts = [json.loads(line) for line in trace.read_text().splitlines()]
        assert sum(e["event"] == "run_start" for e in starts) == 2
        assert set(runs) == {0, 1}


def test_identical_config_gives_identical_records(tmp_path):
    a = cmd_run(make_config(tmp_path / "a"), progress=None).run_dir
    b = cmd_run(make_config(tmp_path / "b"), progress=None).run_dir
    assert a.name == b.name
    assert sorted(summary_lines(a)) == sorted(summary_lines(b))


def test_increasing_runs_resumes(tmp_path):
    cmd_run(make_config(tmp_path), progress=None)
    more = cmd_run(make_config(tmp_path, runs_per_game=3), progress=None)
    assert (more.completed, more.skipped) == (16, 32)


def test_replay_reproduces_recorded_batch(tmp_path):
    rec = make_config(tmp_path / "rec", methods=["lfs", "mcts"], backend={"record_dir": str(tmp_path / "logs")})
    first = cmd_run(rec, progress=None).run_dir
    play = make_config(
        tmp_path / "play",
        methods=["lfs", "mcts"],
        data_dir=str(rec.data_path),
        backend={"backend": "replay", "replay_dir": str(tmp_path / "logs")},
    )
    second = cmd_run(play, progress=None).run_dir

    def strip(lines):
        return sorted(json.dumps({k: v for k, v in json.loads(x).items() if k != "config_hash"}) for x in lines)

    assert strip(summary_lines(first)) == strip(summary_lines(second))
    for trace in first.glob("*/*.jsonl"):
        assert trace.read_text() == (second / trace.parent.name / trace.name).read_text()


def test_missing_replay_log_is_a_failure(tmp_path):
    cfg = make_config(tmp_path, methods=["lfs"], games_per_task=1, runs_per_game=1,
                      backend={"backend": "replay", "replay_dir": str(tmp_path / "none")})
    report = cmd_run(cfg, progress=None)
    assert report.completed == 0 and len(report.failures) == 1
    assert "missing replay log" in report.failures[0]["error"]


def test_sweep_variants(tmp_path):
    cfg = sweep_config(make_config(tmp_path, games_per_task=2, runs_per_game=1))
    assert [m.label for m in cfg.methods] == ["mcts_c0.5", "mcts_c1", "mcts_c2.5"]
    run_dir = cmd_run(cfg, progress=None).run_dir
    labels = {json.loads(x)["label"] for x in summary_lines(run_dir)}
    assert labels == {"mcts_c0.5", "mcts_c1", "mcts_c2.5"}


def test_analyze_oracle_batch(tmp_path):
    run_dir = cmd_run(make_config(tmp_path), progress=None).run_dir
    report = cmd_analyze(run_dir)
    assert report.n_records == 32 and not report.partial
    with open(report.out_dir / "aggregates.csv") as fh:
        rows = [r for r in csv.DictReader(fh) if r["task"] == "ALL"]
    assert {r["method"] for r in rows} == {"lfs", "tot_bfs", "bestfs", "mcts"}
    assert all(float(r["win_rate_star"]) == 1.0 for r in rows)
    for name in ("aup.csv", "cumulative_wins.csv", "tree_sizes.csv", "profile_efficiency.csv"):
        assert (report.out_dir / name).exists()


def test_analyze_flags_partial_data(tmp_path, caplog):
    run_dir = cmd_run(make_config(tmp_path), progress=None).run_dir
    lines = summary_lines(run_dir)
    (run_dir / "summary.jsonl").write_text("\n".join(lines[:-1]) + "\n")
    with caplog.at_level(logging.WARNING):
        report = cmd_analyze(run_dir)
    assert len(report.partial) == 1 and "partial data" in caplog.text


def test_analyze_empty_dir(tmp_path):
    with pytest.raises(FileNotFoundError):
        cmd_analyze(tmp_path)
    assert not (tmp_path / "analysis").exists()


# ---------------------------------------------------------------- CLI


def test_cli_end_to_end(tmp_path, capsys):
    out = str(tmp_path / "o")
    args = ["--task", "countdown3", "--games-per-task", "2", "--output-dir", out]
    assert main(["generate", *args]) == 0
    assert main(["run", *args, "--method", "lfs", "--method", "bestfs", "--token-budget", "50000",
                 "--runs-per-game", "1"]) == 0
    run_dir = capsys.readouterr().out.strip().splitlines()[-1]
    assert main(["analyze", run_dir]) == 0
    trace = next((tmp_path / "o").glob("runs/*/lfs/*.jsonl"))
    assert main(["export-tree", str(trace), "-o", str(tmp_path / "t.dot")]) == 0
    assert (tmp_path / "t.dot").read_text().startswith("digraph")


def test_cli_scores(tmp_path, capsys):
    csv_path = Path(__file__).parent / "fixtures" / "gpt4o_winrates.csv"
    assert main(["analyze", "--scores", str(csv_path), "--out", str(tmp_path)]) == 0
    order = [line.split("\t")[1] for line in capsys.readouterr().out.splitlines()]
    assert order == ["lfs", "mcts", "bestfs", "tot_bfs"]


def test_cli_exit_codes(tmp_path):
    assert main(["frobnicate"]) == 1
    assert main(["run", "--task", "countdown3"]) == 1          # no methods
    assert main(["analyze", str(tmp_path)]) == 3               # nothing to analyze
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 3
    failing = ["run", "--task", "countdown3", "--games-per-task", "1", "--runs-per-game", "1",
               "--method", "lfs", "--token-budget", "100", "--output-dir", str(tmp_path),
               "--backend", "replay", "--replay-dir", str(tmp_path / "none")]
    assert main(failing) == 2
