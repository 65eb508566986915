from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Sequence

from ..env import ActionDescriptor
from ..errors import BudgetExhausted, ParseError
from ..trace import Trace
from .backends import Backend, BackendConfig
from .parsing import fallback_payload, parse_response
from .prompts import PromptKind, render_prompt

logger = logging.getLogger(__name__)


@dataclass
class TokenBudget:
    limit: int
    used: int = 0
    calls: int = 0
    max_call: int = 0

    @property
    def exhausted(self) -> bool:
        return self.used >= self.limit

    def check(self) -> None:
        if self.exhausted:
            raise BudgetExhausted(f"{self.used}/{self.limit} tokens used")

    def charge(self, tokens: int) -> None:
        self.used += tokens
        self.calls += 1
        self.max_call = max(self.max_call, tokens)


@dataclass(frozen=True)
class EvaluatorResponse:
    kind: PromptKind
    payload: Any
    prompt_tokens: int
    completion_tokens: int
    raw_text: str
    fallback: bool = False

    @property
    def tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


class Evaluator:
    """Render, call, parse: the one interface every search method consumes."""

    def __init__(self, backend: Backend, config: BackendConfig | None = None):
        self.backend = backend
        self.config = config or BackendConfig()

    def evaluate(
        self,
        kind: PromptKind,
        state,
        budget: TokenBudget,
        actions: Sequence[ActionDescriptor] | None = None,
        trace: Trace | None = None,
        node: int | None = None,
    ) -> EvaluatorResponse:
        kind = PromptKind(kind)
        if actions is None:
            actions = state.actions
        system, user = render_prompt(kind, state, actions)
        offered = [a.index for a in actions]
        prompt_tokens = completion_tokens = 0
        raw = ""
        for attempt in range(self.config.max_parse_retries + 1):
            budget.check()
            out = self.backend.complete(kind, system, user, state, actions)
            budget.charge(out.prompt_tokens + out.completion_tokens)
            prompt_tokens, completion_tokens, raw = out.prompt_tokens, out.completion_tokens, out.text
            if trace is not None:
                trace.emit(
                    "eval_call",
                    kind=kind.value,
                    node=node,
                    tokens=out.prompt_tokens + out.completion_tokens,
                    prompt_tokens=out.prompt_tokens,
                    completion_tokens=out.completion_tokens,
                    attempt=attempt,
                )
            try:
                payload = parse_response(kind, out.text, offered, state.task_kind)
            except ParseError as exc:
                logger.debug("parse failure on %s (attempt %d): %s", kind.value, attempt, exc)
                if trace is not None:
                    trace.emit("parse_error", kind=kind.value, node=node, error=str(exc))
                continue
            return EvaluatorResponse(kind, payload, prompt_tokens, completion_tokens, raw)
        payload = fallback_payload(kind, offered)
        logger.info("falling back to neutral %s answer after parse failures", kind.value)
        if trace is not None:
            trace.emit("fallback", kind=kind.value, node=node)
        return EvaluatorResponse(kind, payload, prompt_tokens, completion_tokens, raw, fallback=True)
