"""Evaluator backends: a live chat-completions API, an exact-solver oracle,
and record/replay of either."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import httpx

from ..env import ActionDescriptor, TaskKind
from ..errors import TransportError
from .prompts import FIELDS, PromptKind

logger = logging.getLogger(__name__)

REASONING_MODEL_PREFIXES = ("o1", "o3", "o4")


@dataclass
class BackendConfig:
    backend: str = "oracle"  # "live" | "oracle" | "replay"
    endpoint: str = "https://api.openai.com/v1"
    model: str = "gpt-4o"
    temperature: float | None = 0.0
    max_completion_tokens: int = 16384
    timeout: float = 300.0
    reasoning_effort: str | None = None
    max_parse_retries: int = 2
    api_key_env: str = "OPENAI_API_KEY"
    max_concurrent: int = 8
    max_transport_retries: int = 5
    backoff_base: float = 1.0
    backoff_max_total: float = 120.0
    replay_dir: str | None = None
    record_dir: str | None = None

    def __post_init__(self):
        if self.backend not in ("live", "oracle", "replay"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.reasoning_effort is None and self.model.startswith(REASONING_MODEL_PREFIXES):
            self.reasoning_effort = "low"

    def run_affecting(self) -> dict:
        """Fields that can change search outcomes (used for config hashing)."""
        return {
            "backend": self.backend,
            "endpoint": self.endpoint if self.backend == "live" else None,
            "model": self.model if self.backend == "live" else None,
            "temperature": self.temperature,
            "max_completion_tokens": self.max_completion_tokens,
            "reasoning_effort": self.reasoning_effort,
            "max_parse_retries": self.max_parse_retries,
        }


@dataclass(frozen=True)
class Completion:
    text: str
    prompt_tokens: int
    completion_tokens: int


def approx_tokens(text: str) -> int:
    return math.ceil(len(text) / 4)


def prompt_sha256(system: str, user: str) -> str:
    return hashlib.sha256((system + "\x00" + user).encode("utf-8")).hexdigest()


class Backend:
    def complete(
        self,
        kind: PromptKind,
        system: str,
        user: str,
        state,
        actions: Sequence[ActionDescriptor],
    ) -> Completion:
        raise NotImplementedError


# ---------------------------------------------------------------- oracle


def oracle_state_value(state) -> float:
    """1.0 iff an exhaustive solver can still win from ``state``."""
    if state.is_terminal:
        return 1.0 if state.is_win else 0.0
    if state.task_kind is TaskKind.COUNTDOWN:
        from ..countdown import countdown_winnable

        return 1.0 if countdown_winnable(state.target, state.numbers) else 0.0
    from ..sudoku import sudoku_winnable

    return 1.0 if sudoku_winnable(state.board) else 0.0


def oracle_payload(kind: PromptKind, state, actions: Sequence[ActionDescriptor]):
    if kind is PromptKind.STATE_VALUE:
        return oracle_state_value(state)
    if kind is PromptKind.EXPLORE:
        return oracle_state_value(state) == 0.0
    values = {a.index: oracle_state_value(state.apply(a.body)) for a in actions}
    if kind is PromptKind.ACTION_VALUES:
        return values
    total = sum(values.values())
    if total == 0:
        return {i: 1.0 / len(values) for i in values}
    return {i: v / total for i, v in values.items()}


class OracleBackend(Backend):
    """Answers every prompt exactly from solver reachability.

    Token costs are synthetic: a quarter of the character count of the
    rendered prompt and of the answer, rounded up.
    """

    def complete(self, kind, system, user, state, actions) -> Completion:
        kind = PromptKind(kind)
        payload = oracle_payload(kind, state, actions)
        if isinstance(payload, dict):
            payload = {str(k): v for k, v in payload.items()}
        name = FIELDS[(kind, state.task_kind)]
        text = "\\boxed{" + json.dumps({name: payload}) + "}"
        return Completion(text, approx_tokens(system) + approx_tokens(user), approx_tokens(text))


# ---------------------------------------------------------------- record / replay


class RecordingBackend(Backend):
    """Pass-through that appends one replay record per call."""

    def __init__(self, inner: Backend, path: str | Path | None = None):
        self.inner = inner
        self.path = Path(path) if path else None
        self.records: list[dict] = []
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("")

    def complete(self, kind, system, user, state, actions) -> Completion:
        out = self.inner.complete(kind, system, user, state, actions)
        rec = {
            "kind": PromptKind(kind).value,
            "prompt_sha256": prompt_sha256(system, user),
            "response_text": out.text,
            "prompt_tokens": out.prompt_tokens,
            "completion_tokens": out.completion_tokens,
        }
        self.records.append(rec)
        if self.path:
            with self.path.open("a") as fh:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        return out


class ReplayBackend(Backend):
    """Serves recorded responses in call order, checking each prompt hash."""

    def __init__(self, records: Sequence[dict]):
        self.records = list(records)
        self.cursor = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplayBackend":
        lines = Path(path).read_text().splitlines()
        return cls([json.loads(line) for line in lines if line.strip()])

    def complete(self, kind, system, user, state, actions) -> Completion:
        if self.cursor >= len(self.records):
            raise TransportError(f"replay log exhausted after {self.cursor} calls")
        rec = self.records[self.cursor]
        kind = PromptKind(kind)
        if rec["kind"] != kind.value:
            raise TransportError(
                f"replay divergence at call {self.cursor}: expected {rec['kind']}, got {kind.value}"
            )
        if rec["prompt_sha256"] != prompt_sha256(system, user):
            raise TransportError(f"replay divergence at call {self.cursor}: prompt hash mismatch")
        self.cursor += 1
        return Completion(rec["response_text"], int(rec["prompt_tokens"]), int(rec["completion_tokens"]))


# ---------------------------------------------------------------- live API


class LiveAPIBackend(Backend):
    """OpenAI-compatible ``/chat/completions`` client.

    Retries timeouts, connection errors, 429 and 5xx responses with
    exponential backoff (bounded both in attempts and in total sleep).
    A shared semaphore caps concurrent requests across worker threads.
    """

    def __init__(
        self,
        config: BackendConfig,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
        slots: threading.BoundedSemaphore | None = None,
        seed: int | None = None,
    ):
        self.config = config
        self.client = client or httpx.Client(timeout=config.timeout)
        self.sleep = sleep
        self.seed = seed
        self._slots = slots or threading.BoundedSemaphore(max(1, config.max_concurrent))

    def with_seed(self, seed: int) -> "LiveAPIBackend":
        """A sibling sharing this client and concurrency cap, sending ``seed``."""
        return LiveAPIBackend(self.config, self.client, self.sleep, self._slots, seed)

    def _headers(self) -> dict:
        key = os.environ.get(self.config.api_key_env)
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def request_body(self, system: str, user: str) -> dict:
        cfg = self.config
        body = {
            "model": cfg.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        if cfg.reasoning_effort:
            body["max_completion_tokens"] = cfg.max_completion_tokens
            body["reasoning_effort"] = cfg.reasoning_effort
        else:
            body["max_tokens"] = cfg.max_completion_tokens
            if cfg.temperature is not None:
                body["temperature"] = cfg.temperature
        if self.seed is not None:
            body["seed"] = self.seed
        return body

    def complete(self, kind, system, user, state, actions) -> Completion:
        cfg = self.config
        url = cfg.endpoint.rstrip("/") + "/chat/completions"
        body = self.request_body(system, user)
        slept = 0.0
        last_err = "no attempt made"
        for attempt in range(cfg.max_transport_retries + 1):
            try:
                with self._slots:
                    resp = self.client.post(url, json=body, headers=self._headers(), timeout=cfg.timeout)
            except httpx.TimeoutException as exc:
                last_err = f"timeout: {exc}"
            except httpx.TransportError as exc:
                last_err = f"transport: {exc}"
            else:
                if resp.status_code == 200:
                    return self._parse(resp)
                last_err = f"HTTP {resp.status_code}: {resp.text[:200]}"
                if resp.status_code != 429 and resp.status_code < 500:
                    raise TransportError(last_err)
            delay = cfg.backoff_base * (2**attempt) * (1 + 0.1 * random.random())
            if attempt == cfg.max_transport_retries or slept + delay > cfg.backoff_max_total:
                break
            logger.warning("chat completion failed (%s); retrying in %.1fs", last_err, delay)
            self.sleep(delay)
            slept += delay
        raise TransportError(f"chat completion failed after retries: {last_err}")

    @staticmethod
    def _parse(resp: httpx.Response) -> Completion:
        try:
            data = resp.json()
            text = data["choices"][0]["message"]["content"] or ""
            usage = data.get("usage") or {}
            return Completion(
                text,
                int(usage.get("prompt_tokens", 0)),
                int(usage.get("completion_tokens", 0)),
            )
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion payload: {exc}") from None


def make_backend(config: BackendConfig, replay_path: str | Path | None = None) -> Backend:
    if config.backend == "oracle":
        return OracleBackend()
    if config.backend == "replay":
        if replay_path is None:
            raise ValueError("replay backend needs a log path")
        return ReplayBackend.from_file(replay_path)
    return LiveAPIBackend(config)
