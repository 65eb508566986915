import json

import pytest

from lfsearch.env import TaskInstance, TaskKind, read_instances, write_instances
from conftest import countdown, sudoku


def test_round_trip(tmp_path):
    items = [countdown(50, [39, 66, 33, 13], "a"), sudoku([[1, 0, 0, 0], [0] * 4, [0] * 4, [0] * 4], instance_id="b")]
    path = tmp_path / "d.jsonl"
    assert write_instances(path, items) == 2
    assert read_instances(path) == items


def test_duplicate_ids_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_instances(tmp_path / "d.jsonl", [countdown(50, [1, 2], "x"), countdown(60, [1, 2], "x")])


def test_invalid_payload_rejected(tmp_path):
    bad = {"task_kind": "sudoku", "instance_id": "z", "seed": 0,
           "payload": {"box_width": 2, "box_height": 2, "cells": [[1, 1, 0, 0], [0] * 4, [0] * 4, [0] * 4]}}
    path = tmp_path / "d.jsonl"
    path.write_text(json.dumps(bad) + "\n")
    with pytest.raises(ValueError):
        read_instances(path)
    with pytest.raises(ValueError):
        TaskInstance.from_json({**bad, "task_kind": "chess"})


def test_kind_values():
    assert TaskKind("countdown") is TaskKind.COUNTDOWN
