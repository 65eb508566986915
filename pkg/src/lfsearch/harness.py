"""Benchmark orchestration: datasets, resumable batch runs, sweeps, analysis."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import re
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import TextIO

from .countdown import countdown_generate
from .env import TaskInstance, read_instances, write_instances
from .errors import LFSearchError
from .evaluator import (
    Backend,
    BackendConfig,
    Evaluator,
    LiveAPIBackend,
    OracleBackend,
    RecordingBackend,
    ReplayBackend,
)
from .metrics import (
    GameRecord,
    aggregate,
    aup_table,
    cumulative_wins,
    performance_profile,
    tree_size_summary,
    write_cumulative_csv,
    write_profiles_csv,
)
from .search import Method, Outcome, SearchConfig, run_search
from .sudoku import sudoku_generate

logger = logging.getLogger(__name__)

DEFAULT_SWEEP = (0.5, 1.0, 2.5)


class ConfigError(LFSearchError):
    """Malformed or incomplete benchmark configuration."""


def derive_seed(*parts) -> int:
    """Stable 31-bit seed from the config seed and a position (task, game, run)."""
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).hexdigest()
    return int(digest[:8], 16) & 0x7FFFFFFF


# ---------------------------------------------------------------- config


@dataclass
class TaskSpec:
    name: str
    kind: str
    length: int | None = None
    box_width: int | None = None
    box_height: int | None = None
    clue_fraction: float | None = None
    token_budget: int | None = None

    def __post_init__(self):
        if self.kind == "countdown":
            if self.length is None:
                raise ConfigError(f"task {self.name!r}: countdown needs 'length'")
        elif self.kind == "sudoku":
            if self.box_width is None or self.box_height is None:
                raise ConfigError(f"task {self.name!r}: sudoku needs 'box_width' and 'box_height'")
        else:
            raise ConfigError(f"task {self.name!r}: unknown kind {self.kind!r}")

    @classmethod
    def from_name(cls, name: str, token_budget: int | None = None) -> "TaskSpec":
        """Shorthand names: ``countdown3``, ``countdown5``, ``sudoku4x4``, ``sudoku6x6`` ..."""
        m = re.fullmatch(r"countdown(\d+)", name)
        if m:
            return cls(name, "countdown", length=int(m.group(1)), token_budget=token_budget)
        m = re.fullmatch(r"sudoku(\d+)x(\d+)", name)
        if m and m.group(1) == m.group(2):
            side = int(m.group(1))
            boxes = {4: (2, 2), 6: (2, 3), 9: (3, 3)}
            if side in boxes:
                bw, bh = boxes[side]
                return cls(name, "sudoku", box_width=bw, box_height=bh, token_budget=token_budget)
        raise ConfigError(f"cannot interpret task name {name!r}")

    def generate(self, seed: int, index: int) -> TaskInstance:
        game_seed = derive_seed(seed, self.name, index)
        game_id = f"{self.name}-{index:03d}"
        if self.kind == "countdown":
            return countdown_generate(self.length, game_seed, instance_id=game_id)
        return sudoku_generate(
            self.box_width, self.box_height, self.clue_fraction, seed=game_seed, instance_id=game_id
        )


@dataclass
class MethodSpec:
    label: str
    method: str
    c_puct: float = 0.5
    beam_width: int = 5
    max_depth: int | None = None
    max_simulations: int | None = None

    def __post_init__(self):
        try:
            Method(self.method)
        except ValueError:
            raise ConfigError(f"method {self.label!r}: unknown search {self.method!r}") from None

    def search_config(self, token_budget: int) -> SearchConfig:
        return SearchConfig(
            method=Method(self.method),
            token_budget=token_budget,
            beam_width=self.beam_width,
            c_puct=self.c_puct,
            max_depth=self.max_depth,
            max_simulations=self.max_simulations,
        )


def _build(cls, obj: dict, what: str):
    known = {f.name for f in fields(cls)}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"{what}: unknown keys {sorted(unknown)}")
    try:
        return cls(**obj)
    except TypeError as exc:
        raise ConfigError(f"{what}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from None


@dataclass
class BenchmarkConfig:
    tasks: list[TaskSpec]
    methods: list[MethodSpec]
    backend: BackendConfig = field(default_factory=BackendConfig)
    runs_per_game: int = 5
    games_per_task: int = 20
    output_dir: str = "out"
    data_dir: str | None = None
    parallelism: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.runs_per_game < 1:
            raise ConfigError("runs_per_game must be >= 1")
        if self.games_per_task < 0:
            raise ConfigError("games_per_task must be >= 0")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        for kind, items in (("task", self.tasks), ("method", self.methods)):
            names = [t.name if kind == "task" else t.label for t in items]
            if len(set(names)) != len(names):
                raise ConfigError(f"duplicate {kind} names in {names}")

    @classmethod
    def from_dict(cls, obj: dict) -> "BenchmarkConfig":
        obj = dict(obj)
        tasks = []
        for t in obj.pop("tasks", []):
            if isinstance(t, str):
                tasks.append(TaskSpec.from_name(t))
            else:
                tasks.append(_build(TaskSpec, t, f"task {t.get('name')!r}"))
        methods = []
        for m in obj.pop("methods", []):
            if isinstance(m, str):
                m = {"label": m, "method": m}
            methods.append(_build(MethodSpec, {"label": m.get("method"), **m}, f"method {m.get('label')!r}"))
        backend = _build(BackendConfig, obj.pop("backend", {}), "backend")
        return _build(cls, {**obj, "tasks": tasks, "methods": methods, "backend": backend}, "config")

    @classmethod
    def load(cls, path: str | Path) -> "BenchmarkConfig":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def data_path(self) -> Path:
        return Path(self.data_dir) if self.data_dir else Path(self.output_dir) / "data"

    def config_hash(self) -> str:
        """Hash of every field that can change a run's outcome.

        ``runs_per_game`` is left out so that raising n resumes the same batch.
        """
        key = {
            "seed": self.seed,
            "games_per_task": self.games_per_task,
            "tasks": [asdict(t) for t in self.tasks],
            "methods": [asdict(m) for m in self.methods],
            "backend": self.backend.run_affecting(),
        }
        return hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()

    def run_dir(self) -> Path:
        return Path(self.output_dir) / "runs" / self.config_hash()[:12]

    def require_budgets(self) -> None:
        missing = [t.name for t in self.tasks if t.token_budget is None]
        if missing:
            raise ConfigError(f"tasks without token_budget: {missing}")


# ---------------------------------------------------------------- generate


def cmd_generate(config: BenchmarkConfig) -> dict[str, Path]:
    """Write one JSONL dataset per task; reruns reproduce identical files."""
    out = {}
    for task in config.tasks:
        path = config.data_path / f"{task.name}.jsonl"
        if config.games_per_task == 0:
            logger.warning("games_per_task is 0; writing an empty dataset for %s", task.name)
        try:
            instances = [task.generate(config.seed, i) for i in range(config.games_per_task)]
        except LFSearchError as exc:
            raise type(exc)(f"task {task.name}: {exc}") from exc
        write_instances(path, instances)
        out[task.name] = path
    return out


def load_datasets(config: BenchmarkConfig) -> dict[str, list[TaskInstance]]:
    missing = [t for t in config.tasks if not (config.data_path / f"{t.name}.jsonl").exists()]
    if missing:
        logger.info("generating missing datasets: %s", [t.name for t in missing])
        cmd_generate(replace(config, tasks=missing))
    return {t.name: read_instances(config.data_path / f"{t.name}.jsonl") for t in config.tasks}


# ---------------------------------------------------------------- run


def replay_log_path(root: str | Path, label: str, game_id: str, run_index: int) -> Path:
    return Path(root) / label / f"{game_id}.r{run_index}.replay.jsonl"


@dataclass
class RunReport:
    run_dir: Path
    completed: int = 0
    skipped: int = 0
    failures: list[dict] = field(default_factory=list)


class _Writer:
    """Serialises appends to the batch's shared files."""

    def __init__(self, run_dir: Path):
        self.run_dir = run_dir
        self.lock = threading.Lock()

    def append(self, name: str, record: dict) -> None:
        line = json.dumps(record, sort_keys=True) + "\n"
        with self.lock, open(self.run_dir / name, "a") as fh:
            fh.write(line)


def _read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


def _prune_trace(path: Path, keep_runs: set[int]) -> None:
    """Drop events of runs that never reached the summary (interrupted)."""
    if not path.exists():
        return
    lines = path.read_text().splitlines(keepends=True)
    kept = [line for line in lines if line.strip() and json.loads(line).get("run") in keep_runs]
    if len(kept) != len(lines):
        path.write_text("".join(kept))


class _BackendFactory:
    def __init__(self, config: BenchmarkConfig):
        self.config = config
        self.shared = LiveAPIBackend(config.backend) if config.backend.backend == "live" else None

    def make(self, label: str, game_id: str, run_index: int, run_seed: int) -> Backend:
        cfg = self.config.backend
        if cfg.backend == "oracle":
            backend: Backend = OracleBackend()
        elif cfg.backend == "live":
            backend = self.shared.with_seed(run_seed)
        else:
            if not cfg.replay_dir:
                raise ConfigError("replay backend needs backend.replay_dir")
            path = replay_log_path(cfg.replay_dir, label, game_id, run_index)
            if not path.exists():
                raise FileNotFoundError(f"missing replay log {path}")
            backend = ReplayBackend.from_file(path)
        if cfg.record_dir:
            backend = RecordingBackend(backend, replay_log_path(cfg.record_dir, label, game_id, run_index))
        return backend


def cmd_run(config: BenchmarkConfig, progress: TextIO | None = sys.stderr) -> RunReport:
    """Run every (method, game, run) triple not already in the summary."""
    config.require_budgets()
    datasets = load_datasets(config)
    run_dir = config.run_dir()
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")

    done = {(r["label"], r["instance_id"], r["run_index"]) for r in _read_jsonl(run_dir / "summary.jsonl")}
    report = RunReport(run_dir)
    jobs = []
    for m in config.methods:
        for task in config.tasks:
            for inst in datasets[task.name]:
                finished = {r for r in range(config.runs_per_game) if (m.label, inst.instance_id, r) in done}
                _prune_trace(run_dir / m.label / f"{inst.instance_id}.jsonl", finished)
                pending = [r for r in range(config.runs_per_game) if r not in finished]
                report.skipped += len(finished)
                if pending:
                    jobs.append((m, task, inst, pending))

    total = sum(len(j[3]) for j in jobs)
    writer = _Writer(run_dir)
    factory = _BackendFactory(config)
    chash = config.config_hash()
    counter = {"n": 0}
    count_lock = threading.Lock()

    def tick(msg: str) -> None:
        with count_lock:
            counter["n"] += 1
            if progress is not None:
                print(f"[{counter['n']}/{total}] {msg}", file=progress, flush=True)

    def job(m: MethodSpec, task: TaskSpec, inst: TaskInstance, pending: list[int]) -> None:
        trace_path = run_dir / m.label / f"{inst.instance_id}.jsonl"
        for r in pending:
            run_seed = derive_seed(config.seed, inst.instance_id, r)
            key = {"label": m.label, "instance_id": inst.instance_id, "run_index": r}
            started = time.time()
            try:
                backend = factory.make(m.label, inst.instance_id, r, run_seed)
                evaluator = Evaluator(backend, config.backend)
                result = run_search(inst, evaluator, m.search_config(task.token_budget), run_index=r)
            except Exception as exc:  # noqa: BLE001 - one bad run must not sink the batch
                logger.exception("run %s could not be attempted", key)
                failure = {**key, "error": f"{type(exc).__name__}: {exc}"}
                writer.append("failures.jsonl", failure)
                report.failures.append(failure)
                tick(f"{m.label} {inst.instance_id} r{r} ERROR")
                continue
            result.trace.append_to(trace_path)
            if result.outcome is Outcome.INFRASTRUCTURE_FAILURE:
                end = result.trace.of("infrastructure_failure")
                failure = {**key, "error": end[-1]["detail"] if end else "infrastructure failure"}
                writer.append("failures.jsonl", failure)
                report.failures.append(failure)
            else:
                record = {
                    **key,
                    **result.summary(),
                    "method": m.method,
                    "task": task.name,
                    "run_seed": run_seed,
                    "config_hash": chash,
                }
                writer.append("summary.jsonl", record)
                writer.append("timings.jsonl", {**key, "started": started, "seconds": time.time() - started})
                report.completed += 1
            tick(f"{m.label} {inst.instance_id} r{r} {result.outcome.value} tokens={result.tokens_used}")

    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        futures = [pool.submit(job, *j) for j in jobs]
        for f in as_completed(futures):
            f.result()
    return report


def sweep_config(config: BenchmarkConfig, c_values=DEFAULT_SWEEP) -> BenchmarkConfig:
    """The same benchmark with its methods replaced by MCTS at each constant."""
    methods = [MethodSpec(label=f"mcts_c{c:g}", method="mcts", c_puct=float(c)) for c in c_values]
    return replace(config, methods=methods)


# ---------------------------------------------------------------- analyze


@dataclass
class AnalysisReport:
    out_dir: Path
    n_records: int
    aup: dict[str, dict[str, float]]
    partial: list[tuple[str, str, int]]


def _records(rows: list[dict]) -> list[GameRecord]:
    return [
        GameRecord(
            game_id=r["instance_id"],
            method_id=r["label"],
            run_index=int(r["run_index"]),
            win=int(r["win"]),
            tokens=int(r["tokens_used"]),
            tree_size=r.get("tree_size"),
        )
        for r in rows
    ]


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def profile_scores(rows: list[dict], metric: str) -> dict[str, dict[str, float]]:
    """Per-task scores for profiling: WinRate* in percent, or WinRate*/Tokens*."""
    scores: dict[str, dict[str, float]] = {}
    tasks = sorted({r["task"] for r in rows})
    labels = sorted({r["label"] for r in rows})
    for label in labels:
        scores[label] = {}
        for task in tasks:
            recs = _records([r for r in rows if r["label"] == label and r["task"] == task])
            if not recs:
                continue
            rep = aggregate(recs, label)
            if metric == "winrate":
                scores[label][task] = 100 * rep.win_rate_star
            else:
                scores[label][task] = rep.efficiency_score or 0.0
    return scores


def analyze_scores(scores: dict[str, dict[str, float]], out_dir: Path, metric: str, **profile_kw) -> dict[str, float]:
    usable = {
        t
        for t in {t for s in scores.values() for t in s}
        if all(t in s for s in scores.values()) and max(s[t] for s in scores.values()) > 0
    }
    dropped = {t for s in scores.values() for t in s} - usable
    if dropped:
        logger.warning("profile (%s): skipping tasks where every method scores 0 or data is missing: %s",
                       metric, sorted(dropped))
    trimmed = {m: {t: v for t, v in s.items() if t in usable} for m, s in scores.items()}
    if len(trimmed) < 2 or not usable:
        logger.warning("profile (%s): need two methods and one scored task; skipped", metric)
        return {}
    curves = performance_profile(trimmed, **profile_kw)
    write_profiles_csv(out_dir / f"profile_{metric}.csv", curves)
    return aup_table(curves)


def cmd_analyze(source: str | Path, out_dir: str | Path | None = None, **profile_kw) -> AnalysisReport:
    """Aggregate a run directory (or a summary.jsonl) into CSV reports."""
    source = Path(source)
    summary = source / "summary.jsonl" if source.is_dir() else source
    rows = _read_jsonl(summary)
    if not rows:
        raise FileNotFoundError(f"no summary records under {source}")
    out = Path(out_dir) if out_dir else summary.parent / "analysis"
    out.mkdir(parents=True, exist_ok=True)

    counts: dict[tuple[str, str], int] = {}
    for r in rows:
        counts[(r["label"], r["instance_id"])] = counts.get((r["label"], r["instance_id"]), 0) + 1
    n = max(counts.values())
    partial = [(label, game, c) for (label, game), c in sorted(counts.items()) if c < n]
    if partial:
        logger.warning("partial data: %d (method, game) pairs have fewer than %d runs", len(partial), n)

    agg_rows = []
    tasks = sorted({r["task"] for r in rows})
    for label in sorted({r["label"] for r in rows}):
        for task in [*tasks, "ALL"]:
            recs = _records([r for r in rows if r["label"] == label and (task == "ALL" or r["task"] == task)])
            if not recs:
                continue
            rep = aggregate(recs, label)
            agg_rows.append([
                label, task, rep.n_games, rep.n_runs, rep.games_solved, rep.win_rate_star,
                rep.tokens_star, "" if rep.efficiency_score is None else rep.efficiency_score,
                rep.wilson_low, rep.wilson_high,
            ])
    _write_csv(out / "aggregates.csv", [
        "method", "task", "games", "runs", "games_solved", "win_rate_star", "tokens_star",
        "efficiency_score", "wilson_low", "wilson_high",
    ], agg_rows)

    aups = {}
    for metric in ("winrate", "efficiency"):
        aups[metric] = analyze_scores(profile_scores(rows, metric), out, metric, **profile_kw)
    _write_csv(out / "aup.csv", ["metric", "method", "aup"],
               [[metric, m, v] for metric, t in aups.items() for m, v in sorted(t.items())])

    records = _records(rows)
    top = max(r.tokens for r in records)
    grid = sorted({round(top * i / 20) for i in range(1, 21)}) if top else [0]
    write_cumulative_csv(out / "cumulative_wins.csv", cumulative_wins(records, grid))
    sizes = tree_size_summary(records)
    _write_csv(out / "tree_sizes.csv", ["method", "runs", "mean", "median", "min", "max"],
               [[m, s["runs"], s["mean"], s["median"], s["min"], s["max"]] for m, s in sizes.items()])
    return AnalysisReport(out, len(rows), aups, partial)


def load_run_end(trace_path: str | Path, run_index: int = 0) -> dict:
    for event in _read_jsonl(Path(trace_path)):
        if event["event"] == "run_end" and event.get("run") == run_index:
            return event
    raise LookupError(f"no finished run {run_index} in {trace_path}")
