from __future__ import annotations

import json
from pathlib import Path


class Trace:
    """Ordered, JSON-serialisable event log for one search run."""

    def __init__(self, run_index: int = 0):
        self.run_index = run_index
        self.events: list[dict] = []

    def emit(self, event: str, **fields) -> None:
        self.events.append({"event": event, "run": self.run_index, "seq": len(self.events), **fields})

    def of(self, event: str) -> list[dict]:
        return [e for e in self.events if e["event"] == event]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    def append_to(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a") as fh:
            fh.write(self.to_jsonl())
