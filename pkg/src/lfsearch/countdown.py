"""The Countdown numbers game.

A state is the fixed target, the current multiset of numbers and the
history of applied operations.  Each action combines two numbers with one
of ``+ - * /`` and replaces them with the result.  Subtraction is always
larger minus smaller and division is only offered when it is exact, so no
intermediate value is ever negative or fractional.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from itertools import combinations
from math import comb

from .env import ActionDescriptor, TaskInstance, TaskKind
from .errors import DomainError, GenerationFailure

LENGTHS = (3, 5, 7)
TARGET_RANGE = (10, 100)
NUMBER_RANGE = (1, 99)


class Op(str, Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"


@dataclass(frozen=True)
class CountdownAction:
    left: int
    right: int
    op: Op
    result: int

    @property
    def label(self) -> str:
        return f"{self.left} {self.op.value} {self.right} = {self.result}"

    @classmethod
    def parse(cls, label: str) -> "CountdownAction":
        parts = label.split()
        if len(parts) != 5 or parts[3] != "=":
            raise ValueError(f"malformed operation {label!r}")
        left, op, right, _, result = parts
        return cls(int(left), int(right), Op(op), int(result))


def _pair_ops(a: int, b: int):
    big, small = (a, b) if a >= b else (b, a)
    yield CountdownAction(a, b, Op.ADD, a + b)
    yield CountdownAction(big, small, Op.SUB, big - small)
    yield CountdownAction(a, b, Op.MUL, a * b)
    if small != 0 and big % small == 0:
        yield CountdownAction(big, small, Op.DIV, big // small)


def countdown_valid_actions(target: int, numbers) -> list[CountdownAction]:
    """All legal pairwise operations in canonical order.

    Pairs are visited by (position of first, position of second) and each
    pair emits ``+, -, *, /`` in that order.  Identical operations arising
    from equal numbers at different positions are emitted once.
    """
    out: list[CountdownAction] = []
    seen: set[str] = set()
    for i, j in combinations(range(len(numbers)), 2):
        for act in _pair_ops(numbers[i], numbers[j]):
            if act.label not in seen:
                seen.add(act.label)
                out.append(act)
    return out


def _remove(numbers: tuple[int, ...], act: CountdownAction) -> tuple[int, ...]:
    rest = list(numbers)
    rest.remove(act.left)
    rest.remove(act.right)
    rest.append(act.result)
    return tuple(rest)


@dataclass(frozen=True)
class CountdownState:
    target: int
    numbers: tuple[int, ...]
    history: tuple[str, ...] = ()
    initial: tuple[int, ...] | None = None

    task_kind = TaskKind.COUNTDOWN

    def __post_init__(self):
        if self.initial is None:
            object.__setattr__(self, "initial", self.numbers)

    @classmethod
    def from_payload(cls, payload: dict) -> "CountdownState":
        return cls(target=int(payload["target"]), numbers=tuple(int(n) for n in payload["numbers"]))

    @cached_property
    def actions(self) -> tuple[ActionDescriptor, ...]:
        return tuple(
            ActionDescriptor(i, act.label, act)
            for i, act in enumerate(countdown_valid_actions(self.target, self.numbers))
        )

    @property
    def is_win(self) -> bool:
        return countdown_is_win(self)

    @property
    def is_terminal(self) -> bool:
        return len(self.numbers) <= 1

    def apply(self, body: CountdownAction) -> "CountdownState":
        return CountdownState(
            target=self.target,
            numbers=_remove(self.numbers, body),
            history=self.history + (body.label,),
            initial=self.initial,
        )

    @cached_property
    def text(self) -> str:
        return render_sequence(self.target, self.initial, self.history)


def _numbers_str(nums) -> str:
    return "[" + ", ".join(str(n) for n in nums) + "]"


def _ops_str(ops) -> str:
    return "[" + ", ".join(f"'{o}'" for o in ops) + "]"


def render_sequence(target: int, initial, history) -> str:
    """Render the full state/action sequence the way the prompts show it."""
    nums = tuple(initial)
    blocks = [f"State 0\nTarget: {target}\nOperations: []\nAvailable Numbers: {_numbers_str(nums)}"]
    for k, label in enumerate(history):
        nums = _remove(nums, CountdownAction.parse(label))
        blocks.append(
            f"Action {k}\nOperation: '{label}'\n"
            f"State {k + 1} (After performing {label})\n"
            f"Target: {target}\nOperations: {_ops_str(history[: k + 1])}\n"
            f"Available Numbers: {_numbers_str(nums)}"
        )
    return "\n\n".join(blocks)


def countdown_is_win(state: CountdownState) -> bool:
    return len(state.numbers) == 1 and state.numbers[0] == state.target


@lru_cache(maxsize=1 << 20)
def _solvable(target: int, key: tuple[int, ...]) -> bool:
    if len(key) == 1:
        return key[0] == target
    for i, j in combinations(range(len(key)), 2):
        rest = key[:i] + key[i + 1 : j] + key[j + 1 :]
        for act in _pair_ops(key[i], key[j]):
            if _solvable(target, tuple(sorted(rest + (act.result,)))):
                return True
    return False


def countdown_winnable(target: int, numbers) -> bool:
    """Exact reachability of a one-number win from ``numbers``."""
    if not numbers:
        return False
    return _solvable(int(target), tuple(sorted(numbers)))


def countdown_solve(target: int, numbers) -> list[CountdownAction] | None:
    """Return a winning operation sequence, or ``None`` when none exists.

    Exhaustive over the operation DAG, memoised on sorted number multisets.
    An already-won position yields an empty witness.
    """
    numbers = tuple(numbers)
    if len(numbers) > 7:
        raise DomainError("countdown_solve supports at most 7 numbers")
    if not countdown_winnable(target, numbers):
        return None
    witness = []
    while len(numbers) > 1:
        for act in countdown_valid_actions(target, numbers):
            nxt = _remove(numbers, act)
            if countdown_winnable(target, nxt):
                witness.append(act)
                numbers = nxt
                break
    return witness


def countdown_branching(n: int, d: int) -> int:
    """Upper bound 2(n-d)(n-d-1) on the actions available at depth ``d``.

    The real count is lower whenever divisions are inexact or equal numbers
    produce duplicate operations.
    """
    if d < 0 or d >= n:
        raise DomainError(f"depth {d} outside [0, {n - 1}]")
    return 4 * comb(n - d, 2)


def countdown_states_at_depth(n: int, d: int) -> int:
    """Number of operation sequences of length ``d`` (bounds distinct states)."""
    if d < 0 or d >= n:
        raise DomainError(f"depth {d} outside [0, {n - 1}]")
    total = 1
    for i in range(d):
        total *= countdown_branching(n, i)
    return total


def validate_payload(payload: dict) -> None:
    target = payload.get("target")
    numbers = payload.get("numbers")
    if not isinstance(target, int) or not isinstance(numbers, list) or not numbers:
        raise ValueError("countdown payload needs int 'target' and non-empty 'numbers'")
    if not TARGET_RANGE[0] <= target <= TARGET_RANGE[1]:
        raise ValueError(f"target {target} outside {TARGET_RANGE}")
    if any(not isinstance(n, int) or n < 1 for n in numbers):
        raise ValueError("numbers must be positive integers")


def countdown_generate(
    length: int,
    seed: int,
    instance_id: str | None = None,
    max_rounds: int = 1000,
) -> TaskInstance:
    """Sample a solvable instance with ``length`` numbers, deterministic per seed."""
    if length not in LENGTHS:
        raise DomainError(f"length must be one of {LENGTHS}")
    rng = random.Random(seed)
    for _ in range(max_rounds):
        target = rng.randint(*TARGET_RANGE)
        numbers = [rng.randint(*NUMBER_RANGE) for _ in range(length)]
        if countdown_winnable(target, numbers):
            return TaskInstance(
                task_kind=TaskKind.COUNTDOWN,
                instance_id=instance_id or f"countdown{length}-s{seed}",
                seed=seed,
                payload={"target": target, "numbers": numbers},
            )
    raise GenerationFailure(f"no solvable countdown instance after {max_rounds} rounds (seed {seed})")
