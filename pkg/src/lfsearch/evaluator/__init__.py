"""Prompt rendering, backend calls and response parsing."""

from .backends import (
    Backend,
    BackendConfig,
    Completion,
    LiveAPIBackend,
    OracleBackend,
    RecordingBackend,
    ReplayBackend,
    approx_tokens,
    make_backend,
    oracle_state_value,
    prompt_sha256,
)
from .core import Evaluator, EvaluatorResponse, TokenBudget
from .parsing import fallback_payload, last_boxed, parse_response
from .prompts import PromptKind, format_action_map, render_prompt

__all__ = [
    "Backend",
    "BackendConfig",
    "Completion",
    "Evaluator",
    "EvaluatorResponse",
    "LiveAPIBackend",
    "OracleBackend",
    "PromptKind",
    "RecordingBackend",
    "ReplayBackend",
    "TokenBudget",
    "approx_tokens",
    "fallback_payload",
    "format_action_map",
    "last_boxed",
    "make_backend",
    "oracle_state_value",
    "parse_response",
    "prompt_sha256",
    "render_prompt",
]
