"""Environment contract shared by the puzzle tasks.

Every task state is an immutable value exposing:

* ``task_kind`` -- one of :class:`TaskKind`
* ``actions`` -- the canonical, ordered tuple of :class:`ActionDescriptor`
* ``text`` -- the exact rendering inserted into prompts
* ``is_win`` / ``is_terminal``
* ``apply(body)`` -- the successor state for an action body (unchecked)

:func:`env_step` is the checked transition used by every search.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Protocol

from .errors import InvalidAction


class TaskKind(str, Enum):
    COUNTDOWN = "countdown"
    SUDOKU = "sudoku"


@dataclass(frozen=True)
class ActionDescriptor:
    index: int
    label: str
    body: Any = field(compare=True)

    def to_json(self) -> dict:
        return {"index": self.index, "label": self.label}


class SearchState(Protocol):
    task_kind: TaskKind

    @property
    def actions(self) -> tuple[ActionDescriptor, ...]: ...

    @property
    def text(self) -> str: ...

    @property
    def is_win(self) -> bool: ...

    @property
    def is_terminal(self) -> bool: ...

    def apply(self, body: Any) -> "SearchState": ...


@dataclass(frozen=True)
class StepOutcome:
    next_state: Any
    next_actions: tuple[ActionDescriptor, ...]
    terminal: bool
    reward: int


def env_step(state: SearchState, action: ActionDescriptor) -> StepOutcome:
    """Apply ``action`` to ``state`` and return the fresh successor."""
    actions = state.actions
    if not (0 <= action.index < len(actions)) or actions[action.index] != action:
        raise InvalidAction(f"action {action.label!r} (index {action.index}) is not valid here")
    nxt = state.apply(action.body)
    terminal = nxt.is_terminal
    return StepOutcome(
        next_state=nxt,
        next_actions=nxt.actions,
        terminal=terminal,
        reward=1 if (terminal and nxt.is_win) else 0,
    )


@dataclass(frozen=True)
class TaskInstance:
    task_kind: TaskKind
    instance_id: str
    seed: int
    payload: dict

    def to_json(self) -> dict:
        return {
            "task_kind": self.task_kind.value,
            "instance_id": self.instance_id,
            "seed": self.seed,
            "payload": self.payload,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TaskInstance":
        inst = cls(
            task_kind=TaskKind(obj["task_kind"]),
            instance_id=str(obj["instance_id"]),
            seed=int(obj["seed"]),
            payload=dict(obj["payload"]),
        )
        validate_instance(inst)
        return inst


def validate_instance(inst: TaskInstance) -> None:
    if inst.task_kind is TaskKind.COUNTDOWN:
        from .countdown import validate_payload
    else:
        from .sudoku import validate_payload
    validate_payload(inst.payload)


def initial_state(inst: TaskInstance):
    if inst.task_kind is TaskKind.COUNTDOWN:
        from .countdown import CountdownState

        return CountdownState.from_payload(inst.payload)
    from .sudoku import SudokuState

    return SudokuState.from_payload(inst.payload)


def write_instances(path: str | Path, instances: Iterable[TaskInstance]) -> int:
    """Write a JSON-lines dataset; instance ids must be unique."""
    seen: set[str] = set()
    lines = []
    for inst in instances:
        if inst.instance_id in seen:
            raise ValueError(f"duplicate instance_id {inst.instance_id!r}")
        seen.add(inst.instance_id)
        lines.append(json.dumps(inst.to_json(), sort_keys=True))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(line + "\n" for line in lines))
    return len(lines)


def read_instances(path: str | Path) -> list[TaskInstance]:
    out = []
    seen: set[str] = set()
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        inst = TaskInstance.from_json(json.loads(line))
        if inst.instance_id in seen:
            raise ValueError(f"{path}:{lineno}: duplicate instance_id {inst.instance_id!r}")
        seen.add(inst.instance_id)
        out.append(inst)
    return out
