import math

import numpy as np
import pytest

from lfsearch.countdown import CountdownState, countdown_generate
from lfsearch.errors import NoActions
from lfsearch.evaluator import PromptKind
from lfsearch.evaluator.backends import oracle_payload
from lfsearch.search import EdgeStats, Method, Outcome, SearchConfig, backpropagate, mcts_search, puct_select
from lfsearch.search.tree import SearchNode, SearchTree
from conftest import countdown, sudoku


def node_with(priors, q, n_edges, n_parent, state=None):
    state = state or CountdownState(50, (52, 2, 3))
    node = SearchNode(0, state, visit_count=n_parent, expanded=True)
    for i, (p, qq, n) in enumerate(zip(priors, q, n_edges)):
        node.edges[i] = EdgeStats(prior=p, visits=n, total_value=qq * n)
    return node


def test_worked_example():
    node = node_with([0.5, 0.5], [0.8, 0.2], [2, 1], 4)
    assert puct_select(node, 0.5).index == 0
    scores = np.array([0.8, 0.2]) + 0.5 * 0.5 * 2 / (1 + np.array([2, 1]))
    assert scores == pytest.approx([0.9667, 0.45], abs=1e-4)


def test_equal_stats_pick_highest_prior():
    node = node_with([0.2, 0.5, 0.3], [0.4] * 3, [1] * 3, 4)
    assert puct_select(node, 0.5).index == 1


def test_ties_go_to_lowest_index():
    node = node_with([0.25] * 4, [0.0] * 4, [0] * 4, 1)
    assert puct_select(node, 0.5).index == 0


def test_zero_constant_is_argmax_q():
    node = node_with([0.9, 0.05, 0.05], [0.1, 0.7, 0.3], [3, 2, 1], 7)
    assert puct_select(node, 0.0).index == 1


def test_no_edges():
    with pytest.raises(NoActions):
        puct_select(SearchNode(0, CountdownState(50, (52, 2))), 0.5)


def test_backprop_along_three_edges():
    state = CountdownState(50, (39, 66, 33, 13))
    tree = SearchTree(state)
    path = [tree.root]
    for _ in range(3):
        parent = path[-1]
        parent.edges = {a.index: EdgeStats(prior=1 / len(parent.state.actions)) for a in parent.state.actions}
        path.append(tree.child(parent, parent.state.actions[0]))
    before = [(n.visit_count, n.total_value) for n in path]
    backpropagate(path, 1.0)
    for parent, child in zip(path, path[1:]):
        e = parent.edges[child.action.index]
        assert (e.visits, e.total_value) == (1, 1.0)
    assert [(n.visit_count, n.total_value) for n in path] == [(v + 1, w + 1.0) for v, w in before]


def test_only_action_wins_within_two_simulations(oracle):
    inst = sudoku([[1, 2, 3, 4], [3, 4, 1, 2], [2, 1, 4, 3], [4, 3, 2, 0]])
    sims = []
    r = mcts_search(inst, oracle, SearchConfig(Method.MCTS, 10_000), on_simulation=lambda i, ctx: sims.append(i))
    assert r.solved and len(sims) <= 2 and r.n_calls == 2


def test_root_without_actions_is_dead_end(oracle):
    r = mcts_search(countdown(50, [49]), oracle, SearchConfig(Method.MCTS, 1000))
    assert r.outcome is Outcome.DEAD_END and r.n_calls == 0


def test_idle_guard_ends_exhausted_search(oracle):
    cfg = SearchConfig(Method.MCTS, 10**9, max_idle_simulations=25)
    r = mcts_search(countdown(11, [2, 4]), oracle, cfg)
    assert r.outcome is Outcome.DEAD_END
    assert r.tree.root.visit_count >= 25


def check_accounting(tree):
    for node in tree.nodes:
        if node.edges and node.expanded:
            assert node.visit_count == 1 + sum(e.visits for e in node.edges.values())
            for idx, e in node.edges.items():
                assert math.isclose(e.q * e.visits, e.total_value, abs_tol=1e-9)
                child = node.children.get(idx)
                if e.visits:
                    assert tree.nodes[child].visit_count == e.visits


def test_accounting_with_noisy_values(scripted):
    def answer(kind, state, actions):
        if kind is PromptKind.STATE_VALUE:
            return (len(state.text) % 7) / 7
        return oracle_payload(kind, state, actions)

    ev, _ = scripted(answer, cost=1)
    steps = []
    r = mcts_search(
        countdown_generate(5, 2), ev, SearchConfig(Method.MCTS, 10**9, max_simulations=200),
        on_simulation=lambda i, ctx: (check_accounting(ctx.tree), steps.append(i)),
    )
    assert steps and r.outcome in (Outcome.SOLVED, Outcome.BUDGET_EXHAUSTED)


def test_oracle_solves_small_countdown(oracle):
    for seed in range(20):
        r = mcts_search(countdown_generate(3, seed), oracle, SearchConfig(Method.MCTS, 200_000))
        assert r.solved
