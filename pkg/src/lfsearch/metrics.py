"""Win rates, efficiency, Wilson intervals, performance profiles and AUP."""

from __future__ import annotations

import bisect
import csv
import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DegenerateInput, DomainError

DEFAULT_EPSILON = 0.01


@dataclass(frozen=True)
class GameRecord:
    game_id: str
    method_id: str
    run_index: int
    win: int
    tokens: int
    tree_size: int | None = None

    def __post_init__(self):
        if self.win not in (0, 1):
            raise DomainError(f"win flag must be 0 or 1, got {self.win!r}")
        if self.tokens < 0:
            raise DomainError("tokens must be >= 0")


def win_rate(records: Sequence[GameRecord]) -> tuple[float, bool]:
    """Fraction of runs won, and whether that fraction strictly exceeds 0.5."""
    if not records:
        raise DomainError("win_rate needs at least one record")
    rate = sum(r.win for r in records) / len(records)
    return rate, rate > 0.5


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials < 1 or not 0 <= successes <= trials:
        raise DomainError(f"invalid counts: {successes}/{trials}")
    n = trials
    p = successes / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == n else min(1.0, center + half)
    return low, high


@dataclass(frozen=True)
class AggregateReport:
    method_id: str
    n_games: int
    n_runs: int
    win_rate_star: float
    tokens_star: float
    efficiency_score: float | None
    wilson_low: float
    wilson_high: float
    games_solved: int


def _by(records: Iterable[GameRecord], key) -> dict:
    out = defaultdict(list)
    for r in records:
        out[key(r)].append(r)
    return out


def aggregate(records: Iterable[GameRecord], method: str, z: float = 1.96) -> AggregateReport:
    mine = [r for r in records if r.method_id == method]
    if not mine:
        raise DomainError(f"no records for method {method!r}")
    games = _by(mine, lambda r: r.game_id)
    rates = {g: win_rate(rs) for g, rs in games.items()}
    wr = sum(rate for rate, _ in rates.values()) / len(games)
    tokens = sum(sum(r.tokens for r in rs) / len(rs) for rs in games.values()) / len(games)
    low, high = wilson_interval(sum(r.win for r in mine), len(mine), z)
    return AggregateReport(
        method_id=method,
        n_games=len(games),
        n_runs=len(mine),
        win_rate_star=wr,
        tokens_star=tokens,
        efficiency_score=wr / tokens if tokens > 0 else None,
        wilson_low=low,
        wilson_high=high,
        games_solved=sum(solved for _, solved in rates.values()),
    )


def aggregate_all(records: Sequence[GameRecord], z: float = 1.96) -> list[AggregateReport]:
    methods = sorted({r.method_id for r in records})
    return [aggregate(records, m, z) for m in methods]


# ---------------------------------------------------------------- profiles


@dataclass
class ProfileCurve:
    """Right-continuous step function rho(tau) given by its breakpoints."""

    method_id: str
    breakpoints: list[tuple[float, float]]
    tau_max: float
    origin: float = 0.0
    settings: dict = field(default_factory=dict)

    def rho(self, tau: float) -> float:
        taus = [t for t, _ in self.breakpoints]
        i = bisect.bisect_right(taus, tau)
        return self.breakpoints[i - 1][1] if i else 0.0


def performance_profile(
    scores: Mapping[str, Mapping[str, float]],
    epsilon: float = DEFAULT_EPSILON,
    scale: str = "log10",
    ratio_cap: float | None = None,
) -> dict[str, ProfileCurve]:
    """Dolan-More profiles for higher-is-better scores.

    ``scores`` maps method -> task -> score. Zero scores are replaced by
    ``epsilon`` before taking ratios; ``ratio_cap`` optionally bounds each
    ratio. On the ``log10`` scale tau is log10 of the ratio and curves start
    at 0; on the ``ratio`` scale tau is the ratio itself and curves start at 1.
    """
    if scale not in ("log10", "ratio"):
        raise ValueError(f"unknown scale {scale!r}")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    methods = sorted(scores)
    if len(methods) < 2:
        raise DegenerateInput("need at least two methods")
    tasks = sorted({t for m in methods for t in scores[m]})
    if not tasks:
        raise DegenerateInput("need at least one task")
    for m in methods:
        missing = set(tasks) - set(scores[m])
        if missing:
            raise DegenerateInput(f"method {m!r} lacks scores for {sorted(missing)}")

    taus: dict[str, list[float]] = {m: [] for m in methods}
    for t in tasks:
        vals = {m: float(scores[m][t]) for m in methods}
        if any(v < 0 for v in vals.values()):
            raise DegenerateInput(f"negative score on task {t!r}")
        best = max(vals.values())
        if best <= 0:
            raise DegenerateInput(f"every method scores 0 on task {t!r}")
        for m, v in vals.items():
            r = best / (v if v > 0 else epsilon)
            if ratio_cap is not None:
                r = min(r, ratio_cap)
            taus[m].append(math.log10(r) if scale == "log10" else r)

    origin = 0.0 if scale == "log10" else 1.0
    tau_max = max(max(v) for v in taus.values())
    settings = {"epsilon": epsilon, "scale": scale, "ratio_cap": ratio_cap}
    curves = {}
    for m in methods:
        ordered = sorted(taus[m])
        points = []
        for i, tau in enumerate(ordered):
            rho = (i + 1) / len(tasks)
            if points and points[-1][0] == tau:
                points[-1] = (tau, rho)
            else:
                points.append((tau, rho))
        curves[m] = ProfileCurve(m, points, tau_max, origin, dict(settings))
    return curves


def aup(curve: ProfileCurve, lower: float | None = None) -> float:
    """Exact integral of rho over [lower, tau_max].

    ``lower`` defaults to the curve's natural origin (ratio 1).
    """
    lo = curve.origin if lower is None else lower
    hi = curve.tau_max
    if hi <= lo:
        return 0.0
    edges = sorted({lo, hi, *(t for t, _ in curve.breakpoints if lo < t < hi)})
    return sum(curve.rho(a) * (b - a) for a, b in zip(edges, edges[1:]))


def aup_table(curves: Mapping[str, ProfileCurve], lower: float | None = None) -> dict[str, float]:
    return {m: aup(c, lower) for m, c in curves.items()}


# ---------------------------------------------------------------- curves over runs


def cumulative_wins(records: Iterable[GameRecord], token_grid: Sequence[int]) -> dict[str, list[tuple[int, int]]]:
    """Per method, how many runs won using at most each grid budget."""
    grid = sorted(token_grid)
    out = {}
    for method, rs in sorted(_by(records, lambda r: r.method_id).items()):
        won = sorted(r.tokens for r in rs if r.win)
        out[method] = [(b, bisect.bisect_right(won, b)) for b in grid]
    return out


def tree_size_summary(records: Iterable[GameRecord]) -> dict[str, dict[str, float]]:
    out = {}
    for method, rs in sorted(_by(records, lambda r: r.method_id).items()):
        sizes = sorted(r.tree_size for r in rs if r.tree_size is not None)
        if not sizes:
            continue
        mid = len(sizes) // 2
        median = sizes[mid] if len(sizes) % 2 else (sizes[mid - 1] + sizes[mid]) / 2
        out[method] = {
            "runs": len(sizes),
            "mean": sum(sizes) / len(sizes),
            "median": median,
            "min": sizes[0],
            "max": sizes[-1],
        }
    return out


# ---------------------------------------------------------------- I/O


def read_summary(path: str | Path) -> list[GameRecord]:
    """GameRecords from a harness ``summary.jsonl``."""
    records = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        records.append(
            GameRecord(
                game_id=row["instance_id"],
                method_id=row.get("label") or row["method"],
                run_index=int(row["run_index"]),
                win=int(row["win"]),
                tokens=int(row["tokens_used"]),
                tree_size=row.get("tree_size"),
            )
        )
    return records


def read_scores_csv(path: str | Path) -> dict[str, dict[str, float]]:
    """Published per-task scores: a CSV with columns method, task, score."""
    scores: dict[str, dict[str, float]] = defaultdict(dict)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or not {"method", "task", "score"} <= set(reader.fieldnames):
            raise DomainError("score CSV needs columns method, task, score")
        for row in reader:
            scores[row["method"]][row["task"]] = float(row["score"])
    return dict(scores)


def scores_from_records(records: Sequence[GameRecord], task_of: Mapping[str, str]) -> dict[str, dict[str, float]]:
    """Per-method, per-task WinRate* (percent) from run records."""
    groups = _by(records, lambda r: (r.method_id, task_of[r.game_id]))
    out: dict[str, dict[str, float]] = defaultdict(dict)
    for (method, task), rs in groups.items():
        games = _by(rs, lambda r: r.game_id)
        out[method][task] = 100 * sum(win_rate(g)[0] for g in games.values()) / len(games)
    return dict(out)


def write_aggregates_csv(path: str | Path, reports: Sequence[AggregateReport]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(asdict(reports[0]).keys()) if reports else ["method_id"])
        writer.writeheader()
        for rep in reports:
            writer.writerow(asdict(rep))


def write_profiles_csv(path: str | Path, curves: Mapping[str, ProfileCurve], lower: float | None = None) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "tau", "rho", "tau_max", "aup", "scale", "epsilon", "ratio_cap"])
        for m, c in sorted(curves.items()):
            area = aup(c, lower)
            s = c.settings
            for tau, rho in c.breakpoints:
                writer.writerow([m, tau, rho, c.tau_max, area, s.get("scale"), s.get("epsilon"), s.get("ratio_cap")])


def write_cumulative_csv(path: str | Path, series: Mapping[str, list[tuple[int, int]]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "token_budget", "wins"])
        for m, points in sorted(series.items()):
            for b, w in points:
                writer.writerow([m, b, w])
