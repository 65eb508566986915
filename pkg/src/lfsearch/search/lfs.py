from __future__ import annotations

from ..env import TaskInstance
from ..evaluator import Evaluator, PromptKind
from .tree import (
    Frontier,
    Method,
    Outcome,
    RunContext,
    RunResult,
    SearchConfig,
    SearchNode,
    argmax_index,
    execute,
)


def _exploit(ctx: RunContext, node: SearchNode, queue: Frontier) -> SearchNode:
    """Score every action, step the best one, queue the rest."""
    values = ctx.evaluate(PromptKind.ACTION_VALUES, node).payload
    actions = node.state.actions
    best = argmax_index(values)
    node.expanded = True
    for action in actions:
        if action.index != best:
            queue.push(values[action.index], node.node_id, action, node.depth + 1)
    child = ctx.materialize(node, actions[best])
    child.value = values[best]
    ctx.trace.emit("step", node=node.node_id, action_index=best, child=child.node_id, value=values[best])
    return child


def _pop(ctx: RunContext, queue: Frontier, forced: bool) -> SearchNode:
    entry = queue.pop()
    parent = ctx.tree.nodes[entry.parent_node]
    child = ctx.materialize(parent, entry.payload)
    child.value = entry.priority
    ctx.trace.emit(
        "node_popped",
        node=child.node_id,
        parent=parent.node_id,
        action_index=entry.payload.index,
        priority=entry.priority,
        forced=forced,
    )
    return child


def lfs_search(
    instance: TaskInstance, evaluator: Evaluator, config: SearchConfig, run_index: int = 0
) -> RunResult:
    def body(ctx: RunContext) -> Outcome:
        current = ctx.tree.root
        if current.state.is_win:
            return ctx.solved(current)
        if not current.state.actions:
            return Outcome.DEAD_END
        queue = Frontier()
        current = _exploit(ctx, current, queue)
        while True:
            if current.state.is_win:
                return ctx.solved(current)
            if current.state.is_terminal or not current.state.actions:
                if not queue:
                    return Outcome.DEAD_END
                current = _pop(ctx, queue, forced=True)
                continue
            explore = bool(ctx.evaluate(PromptKind.EXPLORE, current).payload)
            ctx.trace.emit("explore_decision", node=current.node_id, explore=explore, queue_size=len(queue))
            if explore and queue:
                current = _pop(ctx, queue, forced=False)
            else:
                current = _exploit(ctx, current, queue)

    return execute(Method.LFS, instance, evaluator, config, body, run_index)
