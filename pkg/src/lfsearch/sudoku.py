"""Generalised Sudoku on a side x side grid with box_width x box_height boxes.

Cells hold 0 for empty.  Boxes are ``box_width`` columns wide and
``box_height`` rows tall, so a 6x6 board with 2x3 boxes has three box
columns and two box rows.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property, lru_cache

from .env import ActionDescriptor, TaskInstance, TaskKind
from .errors import DomainError, GenerationFailure

Board = tuple[tuple[int, ...], ...]

DEFAULT_CLUE_FRACTION = {(2, 2): 0.5, (2, 3): 0.4}


@dataclass(frozen=True)
class SudokuAction:
    row: int
    col: int
    value: int

    @property
    def label(self) -> str:
        return f"({self.row}, {self.col}, {self.value})"


def _box_of(r: int, c: int, bw: int, bh: int) -> tuple[int, int]:
    return r // bh, c // bw


def candidates(cells: Board, r: int, c: int, bw: int, bh: int) -> list[int]:
    side = bw * bh
    used = set(cells[r])
    used.update(cells[i][c] for i in range(side))
    r0, c0 = (r // bh) * bh, (c // bw) * bw
    for i in range(r0, r0 + bh):
        used.update(cells[i][c0 : c0 + bw])
    return [v for v in range(1, side + 1) if v not in used]


def is_consistent(cells: Board, bw: int, bh: int) -> bool:
    """No row, column or box repeats a non-empty value."""
    side = bw * bh
    groups: dict[tuple, set[int]] = {}
    for r in range(side):
        for c in range(side):
            v = cells[r][c]
            if v == 0:
                continue
            if not 1 <= v <= side:
                return False
            for key in (("r", r), ("c", c), ("b",) + _box_of(r, c, bw, bh)):
                seen = groups.setdefault(key, set())
                if v in seen:
                    return False
                seen.add(v)
    return True


@dataclass(frozen=True)
class SudokuBoard:
    box_width: int
    box_height: int
    cells: Board

    @property
    def side(self) -> int:
        return self.box_width * self.box_height

    def __post_init__(self):
        side = self.side
        if len(self.cells) != side or any(len(row) != side for row in self.cells):
            raise ValueError(f"board must be {side}x{side}")

    @property
    def empty_cells(self) -> list[tuple[int, int]]:
        return [(r, c) for r in range(self.side) for c in range(self.side) if self.cells[r][c] == 0]

    def place(self, act: SudokuAction) -> "SudokuBoard":
        rows = [list(row) for row in self.cells]
        rows[act.row][act.col] = act.value
        return SudokuBoard(self.box_width, self.box_height, tuple(tuple(r) for r in rows))


def sudoku_valid_actions(board: SudokuBoard) -> list[SudokuAction]:
    """Legal placements in row-major cell order, then ascending value."""
    bw, bh = board.box_width, board.box_height
    return [
        SudokuAction(r, c, v)
        for r, c in board.empty_cells
        for v in candidates(board.cells, r, c, bw, bh)
    ]


def sudoku_is_win(board: SudokuBoard) -> bool:
    return not board.empty_cells and is_consistent(board.cells, board.box_width, board.box_height)


def render_board(board: SudokuBoard) -> str:
    rows = ["[" + ", ".join(str(v) if v else "." for v in row) + "]" for row in board.cells]
    return "[" + ",\n ".join(rows) + "]"


@dataclass(frozen=True)
class SudokuState:
    board: SudokuBoard

    task_kind = TaskKind.SUDOKU

    @classmethod
    def from_payload(cls, payload: dict) -> "SudokuState":
        cells = tuple(tuple(int(v) for v in row) for row in payload["cells"])
        return cls(SudokuBoard(int(payload["box_width"]), int(payload["box_height"]), cells))

    @cached_property
    def actions(self) -> tuple[ActionDescriptor, ...]:
        return tuple(
            ActionDescriptor(i, act.label, act) for i, act in enumerate(sudoku_valid_actions(self.board))
        )

    @property
    def is_win(self) -> bool:
        return sudoku_is_win(self.board)

    @property
    def is_terminal(self) -> bool:
        return not self.actions

    def apply(self, body: SudokuAction) -> "SudokuState":
        return SudokuState(self.board.place(body))

    @cached_property
    def text(self) -> str:
        return render_board(self.board)


@lru_cache(maxsize=1 << 18)
def _count(cells: Board, bw: int, bh: int, limit: int) -> int:
    side = bw * bh
    best = None
    best_cands: list[int] = []
    for r in range(side):
        for c in range(side):
            if cells[r][c] == 0:
                cands = candidates(cells, r, c, bw, bh)
                if best is None or len(cands) < len(best_cands):
                    best, best_cands = (r, c), cands
                    if not cands:
                        return 0
    if best is None:
        return 1
    r, c = best
    total = 0
    for v in best_cands:
        row = cells[r][:c] + (v,) + cells[r][c + 1 :]
        total += _count(cells[:r] + (row,) + cells[r + 1 :], bw, bh, limit - total)
        if total >= limit:
            return limit
    return total


def sudoku_solve_count(board: SudokuBoard, limit: int = 2) -> int:
    """Number of completions of a consistent board, capped at ``limit``."""
    if limit <= 0:
        return 0
    if not is_consistent(board.cells, board.box_width, board.box_height):
        return 0
    return _count(board.cells, board.box_width, board.box_height, limit)


def sudoku_winnable(board: SudokuBoard) -> bool:
    return sudoku_solve_count(board, 1) >= 1


def sudoku_branching(n_empty: int, d: int, side: int) -> int:
    """Upper bound (n_empty - d) * side on legal placements at depth ``d``."""
    if d < 0 or d > n_empty:
        raise DomainError(f"depth {d} outside [0, {n_empty}]")
    return (n_empty - d) * side


def sudoku_states_at_depth(n_empty: int, d: int, side: int) -> int:
    if d < 0 or d > n_empty:
        raise DomainError(f"depth {d} outside [0, {n_empty}]")
    total = 1
    for i in range(d):
        total *= sudoku_branching(n_empty, i, side)
    return total


def _random_solution(bw: int, bh: int, rng: random.Random) -> Board:
    side = bw * bh
    grid = [[0] * side for _ in range(side)]
    order = [(r, c) for r in range(side) for c in range(side)]

    def fill(k: int) -> bool:
        if k == len(order):
            return True
        r, c = order[k]
        frozen = tuple(tuple(row) for row in grid)
        vals = candidates(frozen, r, c, bw, bh)
        rng.shuffle(vals)
        for v in vals:
            grid[r][c] = v
            if fill(k + 1):
                return True
        grid[r][c] = 0
        return False

    if not fill(0):
        raise GenerationFailure("backtracking found no complete grid")
    return tuple(tuple(row) for row in grid)


def sudoku_generate(
    box_width: int,
    box_height: int,
    clue_fraction: float | None = None,
    seed: int = 0,
    instance_id: str | None = None,
    max_attempts: int = 50,
) -> TaskInstance:
    """Generate a puzzle with exactly one solution, deterministic per seed.

    A full grid is built by randomised backtracking, then cells are blanked
    in a seeded random order, keeping each removal only if the puzzle stays
    uniquely solvable, until the clue count reaches ``clue_fraction`` of
    the cells.
    """
    if clue_fraction is None:
        clue_fraction = DEFAULT_CLUE_FRACTION.get((box_width, box_height), 0.5)
    if not 0.0 < clue_fraction <= 1.0:
        raise DomainError("clue_fraction must lie in (0, 1]")
    side = box_width * box_height
    target_clues = max(1, round(clue_fraction * side * side))
    rng = random.Random(seed)
    for _ in range(max_attempts):
        grid = [list(row) for row in _random_solution(box_width, box_height, rng)]
        clues = side * side
        cells = [(r, c) for r in range(side) for c in range(side)]
        rng.shuffle(cells)
        for r, c in cells:
            if clues <= target_clues:
                break
            keep = grid[r][c]
            grid[r][c] = 0
            board = SudokuBoard(box_width, box_height, tuple(tuple(row) for row in grid))
            if sudoku_solve_count(board, 2) == 1:
                clues -= 1
            else:
                grid[r][c] = keep
        if clues == target_clues:
            return TaskInstance(
                task_kind=TaskKind.SUDOKU,
                instance_id=instance_id or f"sudoku{side}x{side}-s{seed}",
                seed=seed,
                payload={"box_width": box_width, "box_height": box_height, "cells": grid},
            )
    raise GenerationFailure(
        f"could not reach {target_clues} clues with a unique solution in {max_attempts} attempts"
    )


def validate_payload(payload: dict) -> None:
    bw, bh, cells = payload.get("box_width"), payload.get("box_height"), payload.get("cells")
    if not isinstance(bw, int) or not isinstance(bh, int) or bw < 1 or bh < 1:
        raise ValueError("sudoku payload needs positive int box_width/box_height")
    board = SudokuBoard(bw, bh, tuple(tuple(row) for row in cells))
    if not is_consistent(board.cells, bw, bh):
        raise ValueError("sudoku board violates a row/column/box constraint")


def example_solution(box_width: int, box_height: int) -> Board:
    """A fixed valid grid (shifted-row pattern), used for prompt examples."""
    side = box_width * box_height
    return tuple(
        tuple((box_width * (r % box_height) + r // box_height + c) % side + 1 for c in range(side))
        for r in range(side)
    )
