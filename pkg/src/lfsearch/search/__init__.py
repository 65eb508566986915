"""The four tree-search strategies over any environment and evaluator."""

from ..env import TaskInstance
from ..evaluator import Evaluator
from .bestfs import bestfs_search
from .export import export_tree, tree_to_dot, tree_to_json
from .lfs import lfs_search
from .mcts import backpropagate, mcts_search, puct_score, puct_select
from .tot import top_k, tot_bfs_search
from .tree import (
    EdgeStats,
    Frontier,
    FrontierEntry,
    Method,
    Outcome,
    RunResult,
    SearchConfig,
    SearchNode,
    SearchTree,
    argmax_index,
    replay_path,
)

SEARCHES = {
    Method.LFS: lfs_search,
    Method.TOT_BFS: tot_bfs_search,
    Method.BESTFS: bestfs_search,
    Method.MCTS: mcts_search,
}


def run_search(instance: TaskInstance, evaluator: Evaluator, config: SearchConfig, run_index: int = 0) -> RunResult:
    result = SEARCHES[config.method](instance, evaluator, config, run_index=run_index)
    if result.solved and replay_path(instance, result.winning_path) != 1:
        raise AssertionError(f"{config.method.value} reported a win that does not replay")
    return result


__all__ = [
    "EdgeStats",
    "Frontier",
    "FrontierEntry",
    "Method",
    "Outcome",
    "RunResult",
    "SEARCHES",
    "SearchConfig",
    "SearchNode",
    "SearchTree",
    "argmax_index",
    "backpropagate",
    "bestfs_search",
    "export_tree",
    "lfs_search",
    "mcts_search",
    "puct_score",
    "puct_select",
    "replay_path",
    "run_search",
    "top_k",
    "tot_bfs_search",
    "tree_to_dot",
    "tree_to_json",
]
