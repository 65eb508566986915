from __future__ import annotations

from ..env import TaskInstance
from ..evaluator import Evaluator, PromptKind
from .tree import Frontier, Method, Outcome, RunContext, RunResult, SearchConfig, execute


def bestfs_search(
    instance: TaskInstance, evaluator: Evaluator, config: SearchConfig, run_index: int = 0
) -> RunResult:
    def body(ctx: RunContext) -> Outcome:
        root = ctx.tree.root
        root.value = ctx.evaluate(PromptKind.STATE_VALUE, root).payload
        queue = Frontier()
        queue.push(root.value, None, root, root.depth)
        while queue:
            entry = queue.pop()
            node = entry.payload
            ctx.trace.emit("node_popped", node=node.node_id, priority=entry.priority)
            if node.state.is_win:
                return ctx.solved(node)
            if node.state.is_terminal:
                continue
            node.expanded = True
            for action in node.state.actions:
                child = ctx.materialize(node, action)
                child.value = ctx.evaluate(PromptKind.STATE_VALUE, child).payload
                queue.push(child.value, node.node_id, child, child.depth)
        return Outcome.DEAD_END

    return execute(Method.BESTFS, instance, evaluator, config, body, run_index)
