"""Tree search with model-guided evaluation over Countdown and Sudoku."""

from .env import ActionDescriptor, TaskInstance, TaskKind, env_step, initial_state, read_instances, write_instances
from .evaluator import BackendConfig, Evaluator, OracleBackend, PromptKind, make_backend
from .search import Method, Outcome, RunResult, SearchConfig, export_tree, run_search

__all__ = [
    "ActionDescriptor",
    "BackendConfig",
    "Evaluator",
    "Method",
    "OracleBackend",
    "Outcome",
    "PromptKind",
    "RunResult",
    "SearchConfig",
    "TaskInstance",
    "TaskKind",
    "env_step",
    "export_tree",
    "initial_state",
    "make_backend",
    "read_instances",
    "run_search",
    "write_instances",
]
