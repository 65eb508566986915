import json

import pytest

from lfsearch.env import TaskInstance, TaskKind
from lfsearch.evaluator import Backend, Completion, Evaluator, OracleBackend, PromptKind
from lfsearch.evaluator.prompts import FIELDS

# PASS/FAIL lines from the acceptance checks, echoed in the terminal summary.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)


class ScriptedBackend(Backend):
    """Answers from a Python callable ``answer(kind, state, actions)``.

    Every call costs ``cost`` tokens (split evenly between prompt and completion).
    """

    def __init__(self, answer, cost=10):
        self.answer = answer
        self.cost = cost
        self.calls = []

    def complete(self, kind, system, user, state, actions):
        kind = PromptKind(kind)
        self.calls.append((kind, state))
        payload = self.answer(kind, state, actions)
        if isinstance(payload, str):
            text = payload
        else:
            if isinstance(payload, dict):
                payload = {str(k): v for k, v in payload.items()}
            text = "\\boxed{" + json.dumps({FIELDS[(kind, state.task_kind)]: payload}) + "}"
        return Completion(text, self.cost // 2, self.cost - self.cost // 2)


def countdown(target, numbers, instance_id="cd"):
    return TaskInstance(TaskKind.COUNTDOWN, instance_id, 0, {"target": target, "numbers": list(numbers)})


def sudoku(cells, bw=2, bh=2, instance_id="sd"):
    return TaskInstance(
        TaskKind.SUDOKU, instance_id, 0, {"box_width": bw, "box_height": bh, "cells": [list(r) for r in cells]}
    )


@pytest.fixture
def oracle():
    return Evaluator(OracleBackend())


@pytest.fixture
def scripted():
    def make(answer, cost=10, **config):
        from lfsearch.evaluator import BackendConfig

        backend = ScriptedBackend(answer, cost)
        return Evaluator(backend, BackendConfig(**config)), backend

    return make
