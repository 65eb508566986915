from __future__ import annotations

from ..env import TaskInstance
from ..evaluator import Evaluator, PromptKind
from .tree import Method, Outcome, RunContext, RunResult, SearchConfig, SearchNode, execute


def top_k(nodes: list[SearchNode], k: int) -> list[SearchNode]:
    """Highest-valued ``k`` nodes; equal values keep insertion order."""
    return sorted(nodes, key=lambda n: -n.value)[:k]


def tot_bfs_search(
    instance: TaskInstance, evaluator: Evaluator, config: SearchConfig, run_index: int = 0
) -> RunResult:
    def body(ctx: RunContext) -> Outcome:
        frontier = [ctx.tree.root]
        level = 0
        while True:
            for node in frontier:
                if node.value is None:
                    node.value = ctx.evaluate(PromptKind.STATE_VALUE, node).payload
            kept = top_k(frontier, config.beam_width)
            ctx.trace.emit(
                "beam",
                level=level,
                kept=[n.node_id for n in kept],
                dropped=len(frontier) - len(kept),
            )
            best = kept[0]
            if best.state.is_terminal:
                return ctx.solved(best) if best.state.is_win else Outcome.DEAD_END
            if config.max_depth is not None and level >= config.max_depth:
                return Outcome.DEAD_END
            frontier = []
            for node in kept:
                node.expanded = True
                for action in node.state.actions:
                    frontier.append(ctx.materialize(node, action))
            if not frontier:
                return Outcome.DEAD_END
            level += 1

    return execute(Method.TOT_BFS, instance, evaluator, config, body, run_index)
