import pytest

from lfsearch.countdown import CountdownState
from lfsearch.errors import TemplateError
from lfsearch.evaluator import PromptKind, format_action_map, render_prompt
from lfsearch.evaluator.prompts import fill
from lfsearch.sudoku import SudokuBoard, SudokuState


@pytest.fixture
def cd_state():
    return CountdownState(50, (39, 66, 33, 13))


@pytest.fixture
def sd_state():
    return SudokuState(SudokuBoard(2, 3, ((1, 0, 0, 0, 0, 0),) + ((0,) * 6,) * 5))


def test_action_map_format():
    assert format_action_map(["52 + 2 = 54", "52 - 2 = 50"]) == "{0: '52 + 2 = 54', 1: '52 - 2 = 50'}"


def test_fill_requires_every_placeholder():
    assert fill("a {x} b", {"x": 1}) == "a 1 b"
    with pytest.raises(TemplateError):
        fill("a {y}", {})


@pytest.mark.parametrize("kind", list(PromptKind))
def test_countdown_prompts(kind, cd_state):
    system, user = render_prompt(kind, cd_state)
    assert "Countdown" in system
    assert "{" + "rules}" not in system + user
    assert "Target: 50" in user and "Available Numbers: [39, 66, 33, 13]" in user
    if kind in (PromptKind.ACTION_PRIOR, PromptKind.ACTION_VALUES, PromptKind.EXPLORE):
        assert "0: '39 + 66 = 105'" in user


@pytest.mark.parametrize("kind", list(PromptKind))
def test_sudoku_prompts(kind, sd_state):
    system, user = render_prompt(kind, sd_state)
    assert "6x6" in system and "2x3" in system
    assert "[[1, ., ., ., ., .]," in user
    assert "(0, 1, 2)" in user
    assert "{current_board}" not in user


def test_action_kinds_need_actions(cd_state):
    with pytest.raises(TemplateError):
        render_prompt(PromptKind.ACTION_PRIOR, cd_state, actions=[])
    system, user = render_prompt(PromptKind.STATE_VALUE, cd_state, actions=[])
    assert user
