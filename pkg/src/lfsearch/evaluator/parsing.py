"""Extraction of boxed JSON answers from model output."""

from __future__ import annotations

import json
import re
from typing import Iterable

from ..env import TaskKind
from ..errors import ParseError
from .prompts import FIELDS, PromptKind

SUM_TOLERANCE = 0.1

_ALT_FIELDS = {PromptKind.ACTION_VALUES: ("operation_values", "move_values")}


def last_boxed(text: str) -> str:
    """Contents of the last brace-balanced ``\\boxed{...}`` region."""
    start = text.rfind("\\boxed")
    while start != -1:
        i = start + len("\\boxed")
        while i < len(text) and text[i].isspace():
            i += 1
        if i < len(text) and text[i] == "{":
            depth = 0
            for j in range(i, len(text)):
                ch = text[j]
                if ch == "{":
                    depth += 1
                elif ch == "}":
                    depth -= 1
                    if depth == 0:
                        return text[i + 1 : j]
            # unbalanced: fall through to an earlier occurrence
        start = text.rfind("\\boxed", 0, start)
    raise ParseError("no complete \\boxed{...} region in response")


_TEXT_CMD = re.compile(r"\\(?:text|texttt|mathrm|textbf)\s*\{([^{}]*)\}")
_ELLIPSIS = re.compile(r",\s*(?:\\dots|\\ldots|\\cdots|\.\.\.|…)\s*")
_TRAILING_COMMA = re.compile(r",\s*([}\]])")


def _delatex(s: str) -> str:
    s = _TEXT_CMD.sub(r"\1", s)
    s = s.replace("\\{", "{").replace("\\}", "}").replace("\\_", "_")
    s = s.replace("$", "").replace("\\,", " ").replace("\\ ", " ")
    s = _ELLIPSIS.sub("", s)
    s = re.sub(r"(?:\\dots|\\ldots|\\cdots|\.\.\.|…)", "", s)
    return _TRAILING_COMMA.sub(r"\1", s).strip()


def boxed_json(text: str) -> dict:
    body = _delatex(last_boxed(text))
    if not body.startswith("{"):
        body = "{" + body + "}"
    try:
        obj = json.loads(body)
    except json.JSONDecodeError as exc:
        raise ParseError(f"boxed content is not JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ParseError("boxed JSON is not an object")
    return obj


def _number(v) -> float:
    if isinstance(v, bool):
        raise ParseError("boolean where a number was expected")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(v.strip())
        except ValueError:
            pass
    raise ParseError(f"not a number: {v!r}")


def _index_map(raw, offered: set[int]) -> dict[int, float]:
    if not isinstance(raw, dict):
        raise ParseError("expected a dictionary keyed by action index")
    out: dict[int, float] = {}
    for k, v in raw.items():
        try:
            idx = int(str(k).strip())
        except ValueError:
            raise ParseError(f"non-integer action key {k!r}") from None
        if idx not in offered:
            raise ParseError(f"unknown action index {idx}")
        out[idx] = _number(v)
    return out


def _field(obj: dict, kind: PromptKind, task: TaskKind | None):
    names = _ALT_FIELDS.get(kind)
    if names is None:
        names = (FIELDS[(kind, task or TaskKind.COUNTDOWN)],)
    for name in names:
        if name in obj:
            return obj[name]
    raise ParseError(f"boxed JSON lacks field {' / '.join(names)!r}")


def parse_response(
    kind: PromptKind,
    raw_text: str,
    offered_indices: Iterable[int] = (),
    task_kind: TaskKind | None = None,
):
    """Parse and normalise one response payload.

    Returns a ``dict[int, float]`` distribution for action priors, a float
    in [0, 1] for state values, a ``dict[int, float]`` of clamped values for
    per-action values, and a bool for explore decisions.
    """
    kind = PromptKind(kind)
    offered = set(offered_indices)
    value = _field(boxed_json(raw_text), kind, task_kind)

    if kind is PromptKind.STATE_VALUE:
        return min(1.0, max(0.0, _number(value)))

    if kind is PromptKind.EXPLORE:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.strip().lower() in ("true", "false"):
            return value.strip().lower() == "true"
        raise ParseError(f"explore must be a boolean, got {value!r}")

    weights = _index_map(value, offered)
    if kind is PromptKind.ACTION_VALUES:
        return {i: min(1.0, max(0.0, weights.get(i, 0.0))) for i in sorted(offered)}

    if any(w < 0 for w in weights.values()):
        raise ParseError("negative probability")
    total = sum(weights.values())
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise ParseError(f"scores sum to {total:.4f}, too far from 1.0")
    return {i: weights.get(i, 0.0) / total for i in sorted(offered)}


def fallback_payload(kind: PromptKind, offered_indices: Iterable[int] = ()):
    """Neutral answer used once parse retries are spent."""
    kind = PromptKind(kind)
    offered = sorted(set(offered_indices))
    if kind is PromptKind.ACTION_PRIOR:
        return {i: 1.0 / len(offered) for i in offered} if offered else {}
    if kind is PromptKind.STATE_VALUE:
        return 0.5
    if kind is PromptKind.ACTION_VALUES:
        return {i: 0.5 for i in offered}
    return False
