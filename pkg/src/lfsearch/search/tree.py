"""Search tree, frontier and per-run bookkeeping shared by all methods."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from ..env import ActionDescriptor, TaskInstance, env_step, initial_state
from ..errors import BudgetExhausted, TransportError
from ..evaluator import Evaluator, PromptKind, TokenBudget
from ..trace import Trace


class Method(str, Enum):
    LFS = "lfs"
    TOT_BFS = "tot_bfs"
    BESTFS = "bestfs"
    MCTS = "mcts"


class Outcome(str, Enum):
    SOLVED = "solved"
    BUDGET_EXHAUSTED = "budget_exhausted"
    DEAD_END = "dead_end"
    INFRASTRUCTURE_FAILURE = "infrastructure_failure"


@dataclass
class SearchConfig:
    method: Method
    token_budget: int
    beam_width: int = 5
    c_puct: float = 0.5
    max_depth: int | None = None
    max_simulations: int | None = None
    max_idle_simulations: int = 1000

    def __post_init__(self):
        self.method = Method(self.method)
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.c_puct <= 0:
            raise ValueError("c_puct must be > 0")
        if self.token_budget < 0:
            raise ValueError("token_budget must be >= 0")


@dataclass
class EdgeStats:
    prior: float = 0.0
    visits: int = 0
    total_value: float = 0.0

    @property
    def q(self) -> float:
        return self.total_value / self.visits if self.visits else 0.0


@dataclass(eq=False)
class SearchNode:
    node_id: int
    state: Any
    parent: int | None = None
    action: ActionDescriptor | None = None
    depth: int = 0
    children: dict[int, int] = field(default_factory=dict)
    value: float | None = None
    visit_count: int = 0
    total_value: float = 0.0
    edges: dict[int, EdgeStats] = field(default_factory=dict)
    expanded: bool = False


class SearchTree:
    def __init__(self, root_state):
        self.nodes: list[SearchNode] = [SearchNode(0, root_state)]

    @property
    def root(self) -> SearchNode:
        return self.nodes[0]

    def __len__(self) -> int:
        return len(self.nodes)

    def child(self, parent: SearchNode, action: ActionDescriptor) -> SearchNode:
        out = env_step(parent.state, action)
        node = SearchNode(
            node_id=len(self.nodes),
            state=out.next_state,
            parent=parent.node_id,
            action=action,
            depth=parent.depth + 1,
        )
        self.nodes.append(node)
        parent.children[action.index] = node.node_id
        return node

    def path(self, node: SearchNode) -> list[ActionDescriptor]:
        actions = []
        while node.parent is not None:
            actions.append(node.action)
            node = self.nodes[node.parent]
        return actions[::-1]

    def snapshot(self) -> list[dict]:
        return [
            {
                "id": n.node_id,
                "parent": n.parent,
                "action_index": n.action.index if n.action else None,
                "label": n.action.label if n.action else None,
                "depth": n.depth,
                "value": n.value,
                "visits": n.visit_count,
                "expanded": n.expanded,
                "terminal": n.state.is_terminal,
                "win": n.state.is_win,
            }
            for n in self.nodes
        ]


@dataclass(order=True)
class FrontierEntry:
    sort_key: tuple = field(init=True, repr=False)
    priority: float = field(compare=False)
    tie_counter: int = field(compare=False)
    parent_node: int | None = field(compare=False)
    payload: Any = field(compare=False)
    depth: int = field(compare=False, default=0)


class Frontier:
    """Max-priority queue.

    Ties go to the deeper entry, then to the one pushed first.
    """

    def __init__(self):
        self._heap: list[FrontierEntry] = []
        self._counter = itertools.count()

    def push(self, priority: float, parent_node: int | None, payload: Any, depth: int) -> FrontierEntry:
        n = next(self._counter)
        entry = FrontierEntry((-priority, -depth, n), priority, n, parent_node, payload, depth)
        heapq.heappush(self._heap, entry)
        return entry

    def pop(self) -> FrontierEntry:
        return heapq.heappop(self._heap)

    def peek_priorities(self) -> list[float]:
        return [e.priority for e in self._heap]

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)


def argmax_index(values: dict[int, float]) -> int:
    """Key of the largest value; the lowest key wins ties."""
    best = None
    for idx in sorted(values):
        if best is None or values[idx] > values[best]:
            best = idx
    if best is None:
        raise ValueError("argmax of empty mapping")
    return best


@dataclass
class RunResult:
    method: Method
    instance_id: str
    outcome: Outcome
    tokens_used: int
    n_calls: int
    nodes_expanded: int
    tree_size: int
    winning_path: list[ActionDescriptor] | None
    trace: Trace
    tree: SearchTree
    max_call_tokens: int = 0

    @property
    def solved(self) -> bool:
        return self.outcome is Outcome.SOLVED

    def summary(self) -> dict:
        return {
            "method": self.method.value,
            "instance_id": self.instance_id,
            "outcome": self.outcome.value,
            "win": int(self.solved),
            "tokens_used": self.tokens_used,
            "n_calls": self.n_calls,
            "nodes_expanded": self.nodes_expanded,
            "tree_size": self.tree_size,
            "winning_path": [a.label for a in self.winning_path] if self.winning_path is not None else None,
        }


class RunContext:
    """Everything one run owns: tree, budget, trace, evaluator handle."""

    def __init__(self, instance: TaskInstance, evaluator: Evaluator, config: SearchConfig, trace: Trace):
        self.instance = instance
        self.evaluator = evaluator
        self.config = config
        self.trace = trace
        self.budget = TokenBudget(config.token_budget)
        self.tree = SearchTree(initial_state(instance))
        self.win_node: SearchNode | None = None

    def evaluate(self, kind: PromptKind, node: SearchNode, actions=None):
        return self.evaluator.evaluate(
            kind, node.state, self.budget, actions=actions, trace=self.trace, node=node.node_id
        )

    def materialize(self, parent: SearchNode, action: ActionDescriptor) -> SearchNode:
        node = self.tree.child(parent, action)
        self.trace.emit(
            "node_created",
            node=node.node_id,
            parent=parent.node_id,
            action_index=action.index,
            label=action.label,
            depth=node.depth,
        )
        return node

    def solved(self, node: SearchNode) -> Outcome:
        self.win_node = node
        return Outcome.SOLVED


def execute(
    method: Method,
    instance: TaskInstance,
    evaluator: Evaluator,
    config: SearchConfig,
    body: Callable[[RunContext], Outcome],
    run_index: int = 0,
) -> RunResult:
    trace = Trace(run_index)
    ctx = RunContext(instance, evaluator, config, trace)
    trace.emit(
        "run_start",
        method=method.value,
        instance_id=instance.instance_id,
        run_index=run_index,
        token_budget=config.token_budget,
    )
    try:
        outcome = body(ctx)
    except BudgetExhausted as exc:
        trace.emit("budget_exhausted", used=ctx.budget.used, limit=ctx.budget.limit, detail=str(exc))
        outcome = Outcome.BUDGET_EXHAUSTED
    except TransportError as exc:
        trace.emit("infrastructure_failure", detail=str(exc))
        outcome = Outcome.INFRASTRUCTURE_FAILURE
    path = ctx.tree.path(ctx.win_node) if outcome is Outcome.SOLVED and ctx.win_node else None
    result = RunResult(
        method=method,
        instance_id=instance.instance_id,
        outcome=outcome,
        tokens_used=ctx.budget.used,
        n_calls=ctx.budget.calls,
        nodes_expanded=sum(1 for n in ctx.tree.nodes if n.expanded),
        tree_size=len(ctx.tree),
        winning_path=path,
        trace=trace,
        tree=ctx.tree,
        max_call_tokens=ctx.budget.max_call,
    )
    trace.emit(
        "run_end",
        outcome=outcome.value,
        tokens_used=result.tokens_used,
        n_calls=result.n_calls,
        nodes_expanded=result.nodes_expanded,
        tree_size=result.tree_size,
        winning_path=[a.label for a in path] if path is not None else None,
        win_node=ctx.win_node.node_id if ctx.win_node else None,
        tree=ctx.tree.snapshot(),
    )
    return result


def replay_path(instance: TaskInstance, path: list[ActionDescriptor]) -> int:
    """Re-apply ``path`` from the initial state; returns the final reward."""
    state = initial_state(instance)
    if not path:
        return int(state.is_win)
    reward = 0
    for action in path:
        out = env_step(state, action)
        state, reward = out.next_state, out.reward
    return reward
