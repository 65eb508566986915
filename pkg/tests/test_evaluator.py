import pytest

from lfsearch.countdown import CountdownState
from lfsearch.errors import BudgetExhausted
from lfsearch.evaluator import PromptKind, TokenBudget
from lfsearch.trace import Trace

STATE = CountdownState(50, (52, 2))


def test_budget_checked_before_each_call(scripted):
    ev, backend = scripted(lambda k, s, a: 0.5, cost=30)
    budget = TokenBudget(50)
    ev.evaluate(PromptKind.STATE_VALUE, STATE, budget)
    ev.evaluate(PromptKind.STATE_VALUE, STATE, budget)  # 30 < 50, allowed
    assert budget.used == 60
    with pytest.raises(BudgetExhausted):
        ev.evaluate(PromptKind.STATE_VALUE, STATE, budget)
    assert len(backend.calls) == 2


def test_retry_then_success(scripted):
    answers = iter(["garbage", '\\boxed{{"state_value_estimation": 0.7}}'])
    ev, backend = scripted(lambda k, s, a: next(answers))
    trace = Trace()
    out = ev.evaluate(PromptKind.STATE_VALUE, STATE, TokenBudget(1000), trace=trace, node=3)
    assert out.payload == 0.7 and not out.fallback
    assert [e["event"] for e in trace.events] == ["eval_call", "parse_error", "eval_call"]
    assert all(e["node"] == 3 for e in trace.of("eval_call"))


def test_fallback_after_retries(scripted):
    ev, backend = scripted(lambda k, s, a: "nothing boxed", max_parse_retries=2)
    trace = Trace()
    budget = TokenBudget(1000)
    out = ev.evaluate(PromptKind.ACTION_PRIOR, STATE, budget, trace=trace)
    assert out.fallback and out.payload == {i: 0.25 for i in range(4)}
    assert len(backend.calls) == 3 and budget.calls == 3
    assert trace.of("fallback")


def test_budget_equals_sum_of_traced_tokens(scripted):
    ev, _ = scripted(lambda k, s, a: 0.5, cost=7)
    trace, budget = Trace(), TokenBudget(10_000)
    for _ in range(5):
        ev.evaluate(PromptKind.STATE_VALUE, STATE, budget, trace=trace)
    assert budget.used == sum(e["tokens"] for e in trace.of("eval_call")) == 35
