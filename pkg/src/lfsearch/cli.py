"""``lfsearch`` command line: generate, run, sweep, analyze, export-tree."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import LFSearchError
from .harness import (
    DEFAULT_SWEEP,
    BenchmarkConfig,
    ConfigError,
    MethodSpec,
    TaskSpec,
    analyze_scores,
    cmd_analyze,
    cmd_generate,
    cmd_run,
    load_run_end,
    sweep_config,
)
from .metrics import read_scores_csv
from .search import export_tree

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _config_args(p: argparse.ArgumentParser, run: bool) -> None:
    p.add_argument("--config", help="benchmark config JSON")
    p.add_argument("--task", action="append", default=[], help="task name such as countdown3 or sudoku4x4 (repeatable)")
    p.add_argument("--games-per-task", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir")
    p.add_argument("--data-dir")
    if run:
        p.add_argument("--method", action="append", default=[], help="lfs, tot_bfs, bestfs or mcts (repeatable)")
        p.add_argument("--token-budget", type=int, help="per-run token budget for tasks given with --task")
        p.add_argument("--runs-per-game", type=int)
        p.add_argument("--parallelism", type=int)
        p.add_argument("--backend", choices=["oracle", "live", "replay"])
        p.add_argument("--model")
        p.add_argument("--endpoint")
        p.add_argument("--replay-dir")
        p.add_argument("--record-dir")


def build_config(args) -> BenchmarkConfig:
    obj = json.loads(Path(args.config).read_text()) if args.config else {}
    if args.task:
        budget = getattr(args, "token_budget", None)
        obj["tasks"] = [{**vars(TaskSpec.from_name(t, budget))} for t in args.task]
    if getattr(args, "method", None):
        obj["methods"] = args.method
    for key in ("games_per_task", "seed", "output_dir", "data_dir", "runs_per_game", "parallelism"):
        value = getattr(args, key, None)
        if value is not None:
            obj[key] = value
    backend = dict(obj.get("backend", {}))
    for key in ("backend", "model", "endpoint", "replay_dir", "record_dir"):
        value = getattr(args, key, None)
        if value is not None:
            backend[key] = value
    obj["backend"] = backend
    if not obj.get("tasks"):
        raise UsageError("no tasks: pass --config or --task")
    obj.setdefault("methods", [])
    return BenchmarkConfig.from_dict(obj)


def _generate(args) -> int:
    for name, path in cmd_generate(build_config(args)).items():
        print(f"{name}\t{path}")
    return EXIT_OK


def _run(args, config: BenchmarkConfig | None = None) -> int:
    config = config or build_config(args)
    if not config.methods:
        raise UsageError("no methods: pass --method or list them in the config")
    report = cmd_run(config)
    print(report.run_dir)
    print(f"completed {report.completed}, skipped {report.skipped}, failed {len(report.failures)}", file=sys.stderr)
    return EXIT_PARTIAL if report.failures else EXIT_OK


def _sweep(args) -> int:
    config = sweep_config(build_config(args), args.c_values)
    code = _run(args, config)
    report = cmd_analyze(config.run_dir())
    _print_aup(report.aup)
    return code


def _profile_kw(args) -> dict:
    kw = {"epsilon": args.epsilon, "scale": args.scale}
    if args.ratio_cap is not None:
        kw["ratio_cap"] = args.ratio_cap
    return kw


def _print_aup(aups: dict[str, dict[str, float]]) -> None:
    for metric, table in aups.items():
        for method, value in sorted(table.items(), key=lambda kv: -kv[1]):
            print(f"{metric}\t{method}\t{value:.4f}")


def _analyze(args) -> int:
    if args.scores:
        scores = read_scores_csv(args.scores)
        out = Path(args.out or ".")
        out.mkdir(parents=True, exist_ok=True)
        _print_aup({"score": analyze_scores(scores, out, "score", **_profile_kw(args))})
        return EXIT_OK
    if not args.source:
        raise UsageError("analyze needs a run directory or --scores CSV")
    report = cmd_analyze(args.source, args.out, **_profile_kw(args))
    print(report.out_dir)
    _print_aup(report.aup)
    return EXIT_OK


def _export(args) -> int:
    text = export_tree(load_run_end(args.trace, args.run), args.format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lfsearch", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write seeded instance datasets")
    _config_args(p, run=False)
    p.set_defaults(func=_generate)

    p = sub.add_parser("run", help="run methods over datasets (resumable)")
    _config_args(p, run=True)
    p.set_defaults(func=_run)

    p = sub.add_parser("sweep", help="run MCTS at several exploration constants, then analyze")
    _config_args(p, run=True)
    p.add_argument("--c-values", type=float, nargs="+", default=list(DEFAULT_SWEEP))
    p.set_defaults(func=_sweep)

    p = sub.add_parser("analyze", help="aggregate tables, profiles, AUP, cumulative wins")
    p.add_argument("source", nargs="?", help="run directory or summary.jsonl")
    p.add_argument("--scores", help="CSV of published scores (method, task, score)")
    p.add_argument("--out", help="output directory for reports")
    p.add_argument("--epsilon", type=float, default=0.01, help="stand-in for zero scores")
    p.add_argument("--scale", choices=["log10", "ratio"], default="log10")
    p.add_argument("--ratio-cap", type=float)
    p.set_defaults(func=_analyze)

    p = sub.add_parser("export-tree", help="render a recorded search tree")
    p.add_argument("trace", help="per-game trace JSONL")
    p.add_argument("--run", type=int, default=0)
    p.add_argument("--format", choices=["dot", "json"], default="dot")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_export)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"lfsearch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lfsearch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, LFSearchError, LookupError, OSError, ValueError) as exc:
        print(f"lfsearch: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
