from __future__ import annotations

import re
from enum import Enum
from functools import lru_cache
from typing import Sequence

from ..env import ActionDescriptor, TaskKind
from ..errors import TemplateError
from . import templates as T


class PromptKind(str, Enum):
    ACTION_PRIOR = "action_prior"
    STATE_VALUE = "state_value"
    ACTION_VALUES = "action_values"
    EXPLORE = "explore"


# Boxed JSON field each kind must answer with, per task.
FIELDS = {
    (PromptKind.ACTION_PRIOR, TaskKind.COUNTDOWN): "operation_scores",
    (PromptKind.ACTION_PRIOR, TaskKind.SUDOKU): "operation_scores",
    (PromptKind.STATE_VALUE, TaskKind.COUNTDOWN): "state_value_estimation",
    (PromptKind.STATE_VALUE, TaskKind.SUDOKU): "state_value_estimation",
    (PromptKind.ACTION_VALUES, TaskKind.COUNTDOWN): "operation_values",
    (PromptKind.ACTION_VALUES, TaskKind.SUDOKU): "move_values",
    (PromptKind.EXPLORE, TaskKind.COUNTDOWN): "explore",
    (PromptKind.EXPLORE, TaskKind.SUDOKU): "explore",
}

_TEMPLATES = {
    (PromptKind.ACTION_PRIOR, TaskKind.COUNTDOWN): (T.COUNTDOWN_PRIOR_SYSTEM, T.COUNTDOWN_PRIOR_USER),
    (PromptKind.STATE_VALUE, TaskKind.COUNTDOWN): (T.COUNTDOWN_VALUE_SYSTEM, T.COUNTDOWN_VALUE_USER),
    (PromptKind.ACTION_VALUES, TaskKind.COUNTDOWN): (T.COUNTDOWN_VALUES_SYSTEM, T.COUNTDOWN_VALUES_USER),
    (PromptKind.EXPLORE, TaskKind.COUNTDOWN): (T.COUNTDOWN_EXPLORE_SYSTEM, T.COUNTDOWN_EXPLORE_USER),
    (PromptKind.ACTION_PRIOR, TaskKind.SUDOKU): (T.SUDOKU_PRIOR_SYSTEM, T.SUDOKU_PRIOR_USER),
    (PromptKind.STATE_VALUE, TaskKind.SUDOKU): (T.SUDOKU_VALUE_SYSTEM, T.SUDOKU_VALUE_USER),
    (PromptKind.ACTION_VALUES, TaskKind.SUDOKU): (T.SUDOKU_VALUES_SYSTEM, T.SUDOKU_VALUES_USER),
    (PromptKind.EXPLORE, TaskKind.SUDOKU): (T.SUDOKU_EXPLORE_SYSTEM, T.SUDOKU_EXPLORE_USER),
}

NEEDS_ACTIONS = {PromptKind.ACTION_PRIOR, PromptKind.ACTION_VALUES}

_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")


def fill(template: str, context: dict) -> str:
    """Substitute ``{name}`` placeholders in one pass; missing names raise."""

    def sub(m: re.Match) -> str:
        name = m.group(1)
        if name not in context:
            raise TemplateError(f"no value for placeholder {{{name}}}")
        return str(context[name])

    return _PLACEHOLDER.sub(sub, template)


def format_action_map(labels: Sequence[str]) -> str:
    """``{0: 'a', 1: 'b'}`` -- the indexed form used in every user request."""
    return "{" + ", ".join(f"{i}: '{label}'" for i, label in enumerate(labels)) + "}"


@lru_cache(maxsize=None)
def _sudoku_context(box_width: int, box_height: int) -> dict:
    from ..sudoku import SudokuBoard, example_solution, render_board, sudoku_valid_actions

    side = box_width * box_height
    solved = example_solution(box_width, box_height)
    # Blank a fixed diagonal band so the example has a handful of moves.
    cells = tuple(
        tuple(0 if (r + c) % side in (0, 1) and r % 2 == 0 else v for c, v in enumerate(row))
        for r, row in enumerate(solved)
    )
    board = SudokuBoard(box_width, box_height, cells)
    moves = [a.label for a in sudoku_valid_actions(board)][:3]
    weights = [0.5, 0.3, 0.2][: len(moves)]
    total = sum(weights)
    scores = "{ " + ", ".join(f'"{i}": {w / total:.2f}' for i, w in enumerate(weights)) + " }"
    base = {
        "grid_size": side,
        "grid_size_minus_one": side - 1,
        "box_width": box_width,
        "box_height": box_height,
    }
    example_actions = format_action_map(moves)
    return {
        **base,
        "rules": fill(T.SUDOKU_RULES, base),
        "example_board": render_board(board),
        "example_prior_actions": example_actions,
        "example_value_actions": example_actions,
        "example_explore_actions": example_actions,
        "example_moves": example_actions,
        "example_operation_scores": scores,
    }


def render_prompt(
    kind: PromptKind,
    state,
    actions: Sequence[ActionDescriptor] | None = None,
) -> tuple[str, str]:
    """Return ``(system_text, user_text)`` for one evaluator call.

    Byte-deterministic for a given state and action list.
    """
    kind = PromptKind(kind)
    task = state.task_kind
    if actions is None:
        actions = state.actions
    if kind in NEEDS_ACTIONS and not actions:
        raise TemplateError(f"{kind.value} prompt needs at least one action")
    try:
        system_t, user_t = _TEMPLATES[(kind, task)]
    except KeyError:
        raise TemplateError(f"no template for {kind} on {task}") from None
    action_map = format_action_map([a.label for a in actions])
    if task is TaskKind.COUNTDOWN:
        ctx = {
            "rules": T.COUNTDOWN_RULES,
            "current_sequence": state.text,
            "action_list": action_map,
        }
    else:
        board = state.board
        ctx = dict(_sudoku_context(board.box_width, board.box_height))
        ctx.update(
            current_board=state.text,
            action_list=action_map,
            moves_list=action_map,
            empty_cells=action_map,
        )
    return fill(system_t, ctx), fill(user_t, ctx)
