from __future__ import annotations

import math
from typing import Callable

from ..env import ActionDescriptor, TaskInstance
from ..errors import NoActions
from ..evaluator import Evaluator, PromptKind
from .tree import EdgeStats, Method, Outcome, RunContext, RunResult, SearchConfig, SearchNode, execute

SimulationHook = Callable[[int, RunContext], None]


def puct_score(q: float, p: float, parent_visits: int, edge_visits: int, c_puct: float) -> float:
    return q + c_puct * p * math.sqrt(parent_visits) / (1 + edge_visits)


def puct_select(node: SearchNode, c_puct: float) -> ActionDescriptor:
    """Action maximising the PUCT score; the lowest index wins ties."""
    if not node.edges:
        raise NoActions(f"node {node.node_id} has no initialised edges")
    best, best_score = None, -math.inf
    for idx in sorted(node.edges):
        e = node.edges[idx]
        score = puct_score(e.q, e.prior, node.visit_count, e.visits, c_puct)
        if score > best_score:
            best, best_score = idx, score
    return node.state.actions[best]


def _expand(ctx: RunContext, node: SearchNode) -> float:
    prior = ctx.evaluate(PromptKind.ACTION_PRIOR, node).payload
    value = ctx.evaluate(PromptKind.STATE_VALUE, node).payload
    node.edges = {a.index: EdgeStats(prior=prior[a.index]) for a in node.state.actions}
    node.value = value
    node.expanded = True
    return value


def backpropagate(path: list[SearchNode], value: float) -> None:
    for parent, child in zip(path, path[1:]):
        edge = parent.edges[child.action.index]
        edge.visits += 1
        edge.total_value += value
    for node in path:
        node.visit_count += 1
        node.total_value += value


def mcts_search(
    instance: TaskInstance,
    evaluator: Evaluator,
    config: SearchConfig,
    run_index: int = 0,
    on_simulation: SimulationHook | None = None,
) -> RunResult:
    """PUCT tree search with model priors and value estimates at new leaves.

    Terminal leaves back up their true reward without a model call. Runs
    until the budget runs out, ``config.max_simulations`` is reached, or
    ``config.max_idle_simulations`` consecutive simulations make no call
    (the reachable tree is exhausted).
    """

    def body(ctx: RunContext) -> Outcome:
        root = ctx.tree.root
        if root.state.is_win:
            return ctx.solved(root)
        if not root.state.actions:
            return Outcome.DEAD_END
        sims = idle = 0
        while True:
            if config.max_simulations is not None and sims >= config.max_simulations:
                return Outcome.BUDGET_EXHAUSTED
            calls_before = ctx.budget.calls
            node, path = root, [root]
            while node.expanded and not node.state.is_terminal:
                action = puct_select(node, config.c_puct)
                child_id = node.children.get(action.index)
                node = ctx.tree.nodes[child_id] if child_id is not None else ctx.materialize(node, action)
                path.append(node)
            if node.state.is_win:
                return ctx.solved(node)
            value = 0.0 if node.state.is_terminal else _expand(ctx, node)
            backpropagate(path, value)
            sims += 1
            ctx.trace.emit("simulation", index=sims, path=[n.node_id for n in path], value=value)
            if on_simulation is not None:
                on_simulation(sims, ctx)
            idle = idle + 1 if ctx.budget.calls == calls_before else 0
            if idle >= config.max_idle_simulations:
                return Outcome.DEAD_END

    return execute(Method.MCTS, instance, evaluator, config, body, run_index)
